"""Pauli algebra, tensor indexing, reflection symmetry, and gate-layer application.

Basis convention: computational z-basis, site 1 is the most significant bit
of the basis-state index. Site s therefore lives on bit p = N - s, and the
z-eigenvalue of site s in basis state i is +1 when that bit is 0.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

_FLAG_TOL = 1e-10


class PauliAxis(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


_PAULI = {
    PauliAxis.X: np.array([[0, 1], [1, 0]], dtype=np.complex128),
    PauliAxis.Y: np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    PauliAxis.Z: np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def pauli_matrix(axis: PauliAxis) -> np.ndarray:
    """2x2 Pauli matrix for the given axis (a fresh copy)."""
    return _PAULI[axis].copy()


@dataclass
class DenseOperator:
    """Dense complex operator, usually on the 2^N-dimensional chain space.

    Symmetry-sector blocks (dimension (2^N + 2^{N/2})/2) are also carried by
    this type; chain-structure helpers like ``n_sites`` refuse them.
    Hermitian/unitary flags are optional assertions: when set to True they are
    verified to 1e-10 in max-norm at construction time.
    """

    entries: np.ndarray
    hermitian: bool | None = None
    unitary: bool | None = None

    def __post_init__(self) -> None:
        self.entries = np.ascontiguousarray(self.entries, dtype=np.complex128)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise ValueError("DenseOperator entries must be a square matrix")
        d = self.entries.shape[0]
        if d < 1:
            raise ValueError("DenseOperator must have positive dimension")
        if self.hermitian:
            dev = np.max(np.abs(self.entries - self.entries.conj().T))
            if dev > _FLAG_TOL:
                raise ValueError(f"hermitian flag violated: max deviation {dev:.3e}")
        if self.unitary:
            g = self.entries @ self.entries.conj().T
            dev = np.max(np.abs(g - np.eye(d)))
            if dev > _FLAG_TOL:
                raise ValueError(f"unitary flag violated: max deviation {dev:.3e}")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_sites(self) -> int:
        d = self.dim
        if d & (d - 1):
            raise ValueError(f"dimension {d} is not a power of two")
        return d.bit_length() - 1


class GateKind(enum.Enum):
    DIAGONAL_Z = "diagonal_z"
    X_BOND = "x_bond"
    X_FIELD = "x_field"


@dataclass(frozen=True)
class GateLayer:
    """One elementary factor of a kick: exp(-i*angle*G).

    G is sigma^z_site for DIAGONAL_Z, sigma^x_site for X_FIELD, and
    sigma^x_bond sigma^x_{bond+1} for X_BOND. Site/bond indices are 1-based;
    bond l couples sites (l, l+1), so bond <= N-1 on the open chain.
    """

    kind: GateKind
    index: int
    angle: float


def site_bit(site: int, N: int) -> int:
    """Bit position of a 1-based site under the site-1-is-MSB convention."""
    if not 1 <= site <= N:
        raise ValueError(f"site {site} out of range 1..{N}")
    return N - site


def layer_mask(layer: GateLayer, N: int) -> int:
    """Bit mask of the sites a layer acts on."""
    if layer.kind is GateKind.X_BOND:
        if not 1 <= layer.index <= N - 1:
            raise ValueError(f"bond {layer.index} out of range 1..{N - 1}")
        p = site_bit(layer.index, N)
        return (1 << p) | (1 << (p - 1))
    return 1 << site_bit(layer.index, N)


def pauli_on_site(axis: PauliAxis, site: int, N: int) -> DenseOperator:
    """I x ... x sigma^axis x ... x I with sigma at 1-based `site`.

    Built without Kronecker products: the X/Y parts are bit-flip
    permutations and the Z part is diagonal in the computational basis.
    The result is a signed permutation, hence unitary by construction; the
    unitary flag is left unset so construction stays quadratic, not cubic.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    p = site_bit(site, N)
    dim = 1 << N
    idx = np.arange(dim)
    bit = (idx >> p) & 1
    m = np.zeros((dim, dim), dtype=np.complex128)
    if axis is PauliAxis.Z:
        m[idx, idx] = 1.0 - 2.0 * bit
    elif axis is PauliAxis.X:
        m[idx, idx ^ (1 << p)] = 1.0
    else:
        m[idx, idx ^ (1 << p)] = 1j * (2.0 * bit - 1.0)
    return DenseOperator(m, hermitian=True)


def reverse_bits(i: np.ndarray | int, N: int):
    """Reverse the N-bit string of index i (site order reversal)."""
    out = np.zeros_like(np.asarray(i))
    v = np.asarray(i).copy()
    for _ in range(N):
        out = (out << 1) | (v & 1)
        v >>= 1
    return out if isinstance(i, np.ndarray) else int(out)


def reflection_permutation(N: int) -> np.ndarray:
    """Permutation p with p[i] = bit-reversal of i, as an index array."""
    return reverse_bits(np.arange(1 << N), N)


def reflection_operator(N: int) -> DenseOperator:
    """Site-reversal permutation operator R, with R^2 = I."""
    if N % 2 != 0:
        raise ValueError("N must be even")
    dim = 1 << N
    perm = reflection_permutation(N)
    m = np.zeros((dim, dim), dtype=np.complex128)
    m[perm, np.arange(dim)] = 1.0
    return DenseOperator(m, hermitian=True, unitary=True)


def _pair_selectors(mask: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs (i, i^mask) with each unordered pair listed once."""
    high = 1 << (mask.bit_length() - 1)
    idx = np.arange(dim)
    sel0 = idx[(idx & high) == 0]
    return sel0, sel0 ^ mask


def apply_gate_layer(op: DenseOperator, layer: GateLayer, side: str) -> DenseOperator:
    """Multiply one gate layer into a dense operator.

    side="left" computes G @ op; side="right-conjugate" computes op @ G^dag.
    X-type layers are applied as paired-index rotations
    v' = cos(a) v - i sin(a) v_partner (the gate is 2-sparse per row);
    DIAGONAL_Z layers are phase scalings. No dense matrix product is formed.
    """
    if side not in ("left", "right-conjugate"):
        raise ValueError(f"unknown side {side!r}")
    N = op.n_sites
    dim = op.dim
    m = op.entries.copy()
    a = layer.angle if side == "left" else -layer.angle
    if layer.kind is GateKind.DIAGONAL_Z:
        p = site_bit(layer.index, N)
        z = 1.0 - 2.0 * ((np.arange(dim) >> p) & 1)
        phase = np.exp(-1j * a * z)
        if side == "left":
            m *= phase[:, None]
        else:
            m *= phase[None, :]
        return DenseOperator(m)
    mask = layer_mask(layer, N)
    sel0, sel1 = _pair_selectors(mask, dim)
    c = np.cos(a)
    s = -1j * np.sin(a)
    if side == "left":
        w0, w1 = m[sel0, :].copy(), m[sel1, :]
        m[sel0, :] = c * w0 + s * w1
        m[sel1, :] = c * w1 + s * w0
    else:
        w0, w1 = m[:, sel0].copy(), m[:, sel1]
        m[:, sel0] = c * w0 + s * w1
        m[:, sel1] = c * w1 + s * w0
    return DenseOperator(m)


def popcount_table(N: int) -> np.ndarray:
    """popcount of every index below 2^N (int64)."""
    dim = 1 << N
    pc = np.zeros(dim, dtype=np.int64)
    for p in range(N):
        pc += (np.arange(dim) >> p) & 1
    return pc
