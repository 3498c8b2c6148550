"""Observable families and out-of-time-order correlator series.

C2(n) = Tr(W_n^2 V0^2)/D and C4(n) = Re Tr(W_n V0 W_n V0)/D with D = 2^N,
C(n) = C2(n) - C4(n) = -(1/2D) Tr([W_n, V0]^2) for Hermitian W, V. The fast
path never forms dense products: with B = W_n V0, C2 = |B|_F^2 / D and
C4 = Re sum_{r,c} B[r,c] B[c,r] / D, where right-multiplication by V0 is a
column xor-gather (x-type) or a diagonal scale (z-type).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .algebra import DenseOperator, PauliAxis, pauli_on_site, site_bit
from .evolution import ChainParams, EvolutionState, HeisenbergConvention
from .schedules import QuenchProtocol

_IMAG_TOL = 1e-8


class ObservableFamily(enum.Enum):
    BLOCK_X = "block-x"
    BLOCK_Z = "block-z"
    LOCAL_PAULI_X = "local-x"
    LOCAL_PAULI_Z = "local-z"

    @property
    def axis(self) -> PauliAxis:
        if self in (ObservableFamily.BLOCK_X, ObservableFamily.LOCAL_PAULI_X):
            return PauliAxis.X
        return PauliAxis.Z

    @property
    def is_block(self) -> bool:
        return self in (ObservableFamily.BLOCK_X, ObservableFamily.BLOCK_Z)


@dataclass(frozen=True)
class ObservableSpec:
    """Which W/V pair to correlate.

    Block families: W = (2/N) sum_{l<=N/2} sigma_l, V = (2/N) sum_{l>N/2}
    sigma_l. Local families: bare Pauli operators at ``sites``, defaulting
    to (1, N/2).
    """

    family: ObservableFamily
    sites: tuple[int, int] | None = None

    def resolved_sites(self, N: int) -> tuple[int, int]:
        if self.sites is not None:
            return self.sites
        return (1, N // 2)


def c_infinity(spec: ObservableSpec, N: int) -> float:
    """Saturation normalization: 4/N^2 for block families, 1 for local."""
    if spec.family.is_block:
        return 4.0 / (N * N)
    return 1.0


def make_observables(spec: ObservableSpec, N: int) -> tuple[DenseOperator, DenseOperator]:
    """Initial (W0, V0) pair; block families and default sites need even N."""
    if N < 2:
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if N % 2 != 0 and (spec.family.is_block or spec.sites is None):
        raise ValueError("N must be even for block families and default sites")
    axis = spec.family.axis
    if spec.family.is_block:
        if spec.sites is not None:
            raise ValueError("block families take no explicit sites")
        half = N // 2
        w = sum(pauli_on_site(axis, s, N).entries for s in range(1, half + 1))
        v = sum(pauli_on_site(axis, s, N).entries for s in range(half + 1, N + 1))
        pref = 2.0 / N
        return (
            DenseOperator(pref * w, hermitian=True),
            DenseOperator(pref * v, hermitian=True),
        )
    i, j = spec.resolved_sites(N)
    for s in (i, j):
        if not 1 <= s <= N:
            raise ValueError(f"site {s} out of range 1..{N}")
    return pauli_on_site(axis, i, N), pauli_on_site(axis, j, N)


def _v0_structure(spec: ObservableSpec, N: int):
    """Structural form of V0 for kernel-side right multiplication.

    Returns ("x", masks, coefs) for x-type V0 (real combination of bit-flip
    permutations) or ("z", d) for z-type V0 (real diagonal).
    """
    half = N // 2
    if spec.family.is_block:
        pref = 2.0 / N
        sites = list(range(half + 1, N + 1))
        coefs = [pref] * len(sites)
    else:
        sites = [spec.resolved_sites(N)[1]]
        coefs = [1.0]
    if spec.family.axis is PauliAxis.X:
        masks = np.asarray([1 << site_bit(s, N) for s in sites], dtype=np.int64)
        return "x", masks, np.asarray(coefs, dtype=np.float64)
    idx = np.arange(1 << N)
    d = np.zeros(1 << N, dtype=np.float64)
    for s, w in zip(sites, coefs):
        d += w * (1.0 - 2.0 * ((idx >> site_bit(s, N)) & 1))
    return "z", d


@dataclass
class OtocSeries:
    """C2, C4, C over kick indices 0..n_max with the family normalization."""

    n: np.ndarray
    C2: np.ndarray
    C4: np.ndarray
    C: np.ndarray
    C_inf: float
    N: int
    spec: ObservableSpec

    @property
    def C_norm(self) -> np.ndarray:
        return self.C / self.C_inf

    @property
    def d_A(self) -> int:
        return 1 << (self.N // 2)

    @property
    def d_B(self) -> int:
        return 1 << (self.N // 2)


def otoc_point(
    W_n: DenseOperator, V0: DenseOperator, spec: ObservableSpec
) -> tuple[float, float, float]:
    """Dense-product (C2, C4, C) at one kick; reference implementation.

    Raises when either trace carries imaginary residue above 1e-8, which
    signals broken Hermiticity upstream.
    """
    herm_dev = np.max(np.abs(W_n.entries - W_n.entries.conj().T))
    if herm_dev > _IMAG_TOL:
        raise ValueError(f"W_n not Hermitian: anti-Hermitian part {herm_dev:.3e}")
    D = W_n.dim
    B = W_n.entries @ V0.entries
    t2 = np.trace(B @ B.conj().T) / D
    t4 = np.einsum("rc,cr->", B, B) / D
    for t in (t2, t4):
        if abs(t.imag) > _IMAG_TOL:
            raise ValueError(f"imaginary trace residue {t.imag:.3e}")
    c2 = float(t2.real)
    c4 = float(t4.real)
    return c2, c4, c2 - c4


def run_otoc(
    params: ChainParams,
    protocol: QuenchProtocol,
    spec: ObservableSpec,
    n_max: int,
    *,
    convention: HeisenbergConvention = HeisenbergConvention.U_W_UDAG,
    backend: str | None = None,
    stop_at_norm: float | None = None,
) -> OtocSeries:
    """OTOC series over kicks 0..n_max.

    ``stop_at_norm`` truncates the sweep once C(n)/C_inf exceeds the given
    level (the post-scrambling region is not needed for growth fits).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    W0, _ = make_observables(spec, params.N)
    vkind, *vdata = _v0_structure(spec, params.N)
    state = EvolutionState(
        params, protocol, W0, convention=convention, backend=backend
    )
    kern = state.kern
    dim = params.dim
    br = np.empty((dim, dim), dtype=np.float64)
    bi = np.empty((dim, dim), dtype=np.float64)

    def point(strict: bool = False) -> tuple[float, float]:
        if vkind == "x":
            ss = kern.mul_xflip_sum(state.wr, state.wi, vdata[0], vdata[1], br, bi)
        else:
            ss = kern.mul_zdiag(state.wr, state.wi, vdata[0], br, bi)
        if strict:
            # matched-order sums make C2 - C4 exactly zero at kick zero
            ss, t4 = kern.otoc_sums_strict(br, bi)
        else:
            t4 = kern.trace_prod_sym(br, bi)
        return ss / dim, t4 / dim

    c_inf = c_infinity(spec, params.N)
    c2s, c4s = [], []
    c2, c4 = point(strict=True)
    c2s.append(c2)
    c4s.append(c4)
    for _ in range(n_max):
        state.advance()
        c2, c4 = point()
        c2s.append(c2)
        c4s.append(c4)
        if stop_at_norm is not None and (c2 - c4) / c_inf > stop_at_norm:
            break
    c2a = np.asarray(c2s)
    c4a = np.asarray(c4s)
    return OtocSeries(
        n=np.arange(len(c2s)),
        C2=c2a,
        C4=c4a,
        C=c2a - c4a,
        C_inf=c_inf,
        N=params.N,
        spec=spec,
    )
