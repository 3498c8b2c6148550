"""Per-kick Floquet unitaries, cumulative products, and Heisenberg evolution.

One kick is U = [prod_bonds exp(-i theta_J XX)] [prod_sites exp(-i theta_x X)]
 [prod_sites exp(-i theta_z Z)], with the z factor acting first on states.
Heisenberg updates run on split re/im float64 matrices through a kernel
backend: the two-sided z phase is a diagonal scale, every x-type factor is a
paired-index rotation, and left-side rotations are grouped into bit batches
so row groups stream through cache once per batch.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DenseOperator,
    GateKind,
    GateLayer,
    apply_gate_layer,
    layer_mask,
    popcount_table,
    site_bit,
)
from .backends import get_backend
from .schedules import KickFields, QuenchProtocol, fields_at_kick

MAX_BATCH_SPAN = 4


class NormDriftError(RuntimeError):
    """Frobenius-norm (or unitarity) invariant violated during evolution."""


class HeisenbergConvention(enum.Enum):
    """W update per kick: main-text U W U^dag or appendix U^dag W U."""

    U_W_UDAG = "U_W_Udag"
    UDAG_W_U = "Udag_W_U"


@dataclass(frozen=True)
class ChainParams:
    """Static chain data: site count N, Ising coupling J, kick period tau.

    Odd N is allowed at the engine level; block observables and the
    reflection sector require even N and enforce it themselves.
    """

    N: int
    J: float
    tau: float

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError(f"N must be an integer >= 2, got {self.N}")
        if not math.isfinite(self.J):
            raise ValueError("J must be finite")
        if not (math.isfinite(self.tau) and self.tau > 0):
            raise ValueError("tau must be > 0")

    @property
    def dim(self) -> int:
        return 1 << self.N


@dataclass
class FloquetStep:
    """Gate-layer decomposition of the kick at index n.

    Layers are listed in application order (first layer acts first on
    states): all DiagonalZ site layers, then the XBond and XField layers.
    """

    n: int
    N: int
    fields: KickFields
    layers: tuple[GateLayer, ...]
    _dense: DenseOperator | None = field(default=None, repr=False)

    def dense(self) -> DenseOperator:
        """Dense unitary built by applying the layers in order to identity."""
        if self._dense is None:
            op = DenseOperator(np.eye(1 << self.N, dtype=np.complex128))
            for layer in self.layers:
                op = apply_gate_layer(op, layer, side="left")
            self._dense = DenseOperator(op.entries, unitary=True)
        return self._dense


def build_kick(params: ChainParams, protocol: QuenchProtocol, n: int) -> FloquetStep:
    """Gate layers of the n-th kick (open boundary: bonds 1..N-1)."""
    f = fields_at_kick(protocol, params.J, params.tau, n)
    layers = []
    for s in range(1, params.N + 1):
        layers.append(GateLayer(GateKind.DIAGONAL_Z, s, f.theta_z))
    for b in range(1, params.N):
        layers.append(GateLayer(GateKind.X_BOND, b, f.theta_J))
    for s in range(1, params.N + 1):
        layers.append(GateLayer(GateKind.X_FIELD, s, f.theta_x))
    return FloquetStep(n=n, N=params.N, fields=f, layers=tuple(layers))


def plan_row_batches(
    N: int, masks: list[int], max_span: int = MAX_BATCH_SPAN
) -> list[tuple[int, int, np.ndarray]]:
    """Group rotation masks into bit windows of width <= max_span.

    Returns (lo_bit, span, mask_indices) triples such that every mask lies
    within one window; each window costs one pass over the matrix. Windows
    are chosen greedily from the top bit down, so bond masks bridging two
    windows land in the lower one.
    """
    unassigned = set(range(len(masks)))
    batches: list[tuple[int, int, np.ndarray]] = []
    while unassigned:
        hi = max(masks[i].bit_length() for i in unassigned)
        lo = max(0, hi - max_span)
        take = sorted(
            i
            for i in unassigned
            if (masks[i] & -masks[i]).bit_length() - 1 >= lo
        )
        unassigned.difference_update(take)
        batches.append((lo, hi - lo, np.asarray(take, dtype=np.int64)))
    return batches


class _KickPlan:
    """Precomputed index data shared by every kick of one run."""

    def __init__(self, params: ChainParams):
        N = params.N
        bond_masks = [
            layer_mask(GateLayer(GateKind.X_BOND, b, 0.0), N) for b in range(1, N)
        ]
        field_masks = [1 << site_bit(s, N) for s in range(1, N + 1)]
        masks = bond_masks + field_masks
        self.masks = np.asarray(masks, dtype=np.int64)
        self.is_bond = np.asarray(
            [True] * len(bond_masks) + [False] * len(field_masks)
        )
        self.batches = plan_row_batches(N, masks)
        # z phase exponent: sum_s z_s(i) = N - 2 popcount(i)
        self.dz = (N - 2 * popcount_table(N)).astype(np.float64)

    def trig(self, f: KickFields) -> tuple[np.ndarray, np.ndarray]:
        angles = np.where(self.is_bond, f.theta_J, f.theta_x)
        return np.cos(angles), np.sin(angles)

    def z_phase(self, f: KickFields) -> tuple[np.ndarray, np.ndarray]:
        arg = f.theta_z * self.dz
        return np.cos(arg), -np.sin(arg)


def _split(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return (
        np.ascontiguousarray(m.real, dtype=np.float64),
        np.ascontiguousarray(m.imag, dtype=np.float64),
    )


class EvolutionState:
    """Sequential kick evolution of an observable and/or cumulative unitary.

    Holds W_n (when ``W0`` is given) and U_n (when ``track_unitary``) as
    split re/im float64 matrices. ``advance()`` applies the next kick in
    place and returns the state. Frobenius-norm and column-norm invariants
    are checked every ``norm_check_every`` kicks at relative tolerance
    ``norm_tol``.
    """

    def __init__(
        self,
        params: ChainParams,
        protocol: QuenchProtocol,
        W0: DenseOperator | None = None,
        *,
        convention: HeisenbergConvention = HeisenbergConvention.U_W_UDAG,
        track_unitary: bool = False,
        backend: str | None = None,
        norm_check_every: int = 50,
        norm_tol: float = 1e-8,
    ):
        if W0 is None and not track_unitary:
            raise ValueError("nothing to evolve: give W0 and/or track_unitary")
        if W0 is not None and W0.dim != params.dim:
            raise ValueError(
                f"W0 dimension {W0.dim} does not match chain dimension {params.dim}"
            )
        self.params = params
        self.protocol = protocol
        self.convention = convention
        self.n = 0
        self.kern = get_backend(backend)
        self.plan = _KickPlan(params)
        self.norm_check_every = norm_check_every
        self.norm_tol = norm_tol
        self.wr = self.wi = None
        self.ur = self.ui = None
        self._norm0 = 0.0
        if W0 is not None:
            self.wr, self.wi = _split(W0.entries)
            self._norm0 = math.sqrt(self.kern.sum_sq(self.wr, self.wi))
        if track_unitary:
            eye = np.eye(params.dim, dtype=np.complex128)
            self.ur, self.ui = _split(eye)

    @property
    def W(self) -> DenseOperator:
        if self.wr is None:
            raise ValueError("no observable tracked")
        return DenseOperator(self.wr + 1j * self.wi)

    @property
    def U(self) -> DenseOperator:
        if self.ur is None:
            raise ValueError("cumulative unitary not tracked")
        return DenseOperator(self.ur + 1j * self.ui)

    def advance(self) -> "EvolutionState":
        """Apply kick n+1 to W (and U when tracked); returns self."""
        k = self.kern
        n_next = self.n + 1
        f = fields_at_kick(self.protocol, self.params.J, self.params.tau, n_next)
        coss, sins = self.plan.trig(f)
        pr, pi = self.plan.z_phase(f)
        if self.wr is not None:
            if self.convention is HeisenbergConvention.U_W_UDAG:
                # W <- X (Z W Z^dag) X^dag
                k.scale_two_sided(self.wr, self.wi, pr, pi, pr, -pi)
                for lo, span, idx in self.plan.batches:
                    k.rotate_rows_batch(
                        self.wr, self.wi, lo, span,
                        self.plan.masks[idx], coss[idx], sins[idx],
                    )
                k.rotate_cols(self.wr, self.wi, self.plan.masks, coss, -sins)
            else:
                # W <- Z^dag (X^dag W X) Z
                for lo, span, idx in self.plan.batches:
                    k.rotate_rows_batch(
                        self.wr, self.wi, lo, span,
                        self.plan.masks[idx], coss[idx], -sins[idx],
                    )
                k.rotate_cols(self.wr, self.wi, self.plan.masks, coss, sins)
                k.scale_two_sided(self.wr, self.wi, pr, -pi, pr, pi)
        if self.ur is not None:
            # U <- X Z U
            k.scale_rows(self.ur, self.ui, pr, pi)
            for lo, span, idx in self.plan.batches:
                k.rotate_rows_batch(
                    self.ur, self.ui, lo, span,
                    self.plan.masks[idx], coss[idx], sins[idx],
                )
        self.n = n_next
        if self.norm_check_every > 0 and n_next % self.norm_check_every == 0:
            self.check_invariants()
        return self

    def check_invariants(self) -> None:
        if self.wr is not None and self._norm0 > 0:
            norm = math.sqrt(self.kern.sum_sq(self.wr, self.wi))
            if abs(norm - self._norm0) > self.norm_tol * self._norm0:
                raise NormDriftError(
                    f"Frobenius norm drift at kick {self.n}: "
                    f"{norm:.15g} vs initial {self._norm0:.15g}"
                )
        if self.ur is not None:
            dev = self.kern.max_colnorm_dev(self.ur, self.ui)
            if dev > self.norm_tol:
                raise NormDriftError(
                    f"unitarity drift at kick {self.n}: column-norm deviation {dev:.3e}"
                )


def cumulative_unitary(
    params: ChainParams,
    protocol: QuenchProtocol,
    n: int,
    *,
    backend: str | None = None,
) -> DenseOperator:
    """Time-ordered product U(n) = U_x(n) ... U_x(1), kick 1 rightmost."""
    if n < 1:
        raise ValueError("n must be >= 1")
    state = EvolutionState(params, protocol, track_unitary=True, backend=backend)
    for _ in range(n):
        state.advance()
    return state.U
