"""Eigenphase statistics of cumulative unitaries in the reflection-even sector.

The open uniform chain commutes with the site-reversal permutation R, so each
cumulative unitary block-diagonalizes over the palindromic (even) and odd
sectors. The even sector has dimension (2^N + 2^{N/2})/2; nearest-neighbor
spacing distributions of its eigenphases are scored against the Wigner-Dyson
density P_W(s) = (pi s/2) exp(-pi s^2/4) and the Poisson density
P_P(s) = exp(-s) by total-variation distance over a fixed histogram.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .algebra import DenseOperator, reflection_permutation
from .evolution import ChainParams, EvolutionState
from .schedules import QuenchProtocol

_SYM_TOL = 1e-8
_UNITARY_TOL = 1e-8
MIN_SPACINGS = 50


class SymmetryError(ValueError):
    """Operator does not commute with the reflection permutation."""


class Verdict(enum.Enum):
    POISSON_LIKE = "PoissonLike"
    WIGNER_DYSON_LIKE = "WignerDysonLike"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class PalindromeProjector:
    """Isometry onto the reflection-even subspace, held as index pairs.

    Basis columns: |b> for palindromic b (b equals its bit reversal);
    (|b> + |reverse(b)>)/sqrt(2) for each unordered non-palindromic pair.
    """

    N: int
    pal: np.ndarray
    pair_lo: np.ndarray
    pair_hi: np.ndarray

    @property
    def d_even(self) -> int:
        return len(self.pal) + len(self.pair_lo)

    @property
    def d_odd(self) -> int:
        return len(self.pair_lo)

    def dense(self) -> np.ndarray:
        """Explicit (2^N, d_even) isometry, for tests and small N."""
        dim = 1 << self.N
        p = np.zeros((dim, self.d_even), dtype=np.complex128)
        for j, b in enumerate(self.pal):
            p[b, j] = 1.0
        w = 1.0 / math.sqrt(2.0)
        for j, (lo, hi) in enumerate(zip(self.pair_lo, self.pair_hi)):
            p[lo, len(self.pal) + j] = w
            p[hi, len(self.pal) + j] = w
        return p


def palindrome_projector(N: int) -> PalindromeProjector:
    """Reflection-even basis for an even-N chain."""
    if N < 2 or N % 2 != 0:
        raise ValueError(f"N must be an even integer >= 2, got {N}")
    idx = np.arange(1 << N)
    rev = reflection_permutation(N)
    pal = idx[rev == idx]
    lo = idx[rev > idx]
    return PalindromeProjector(N=N, pal=pal, pair_lo=lo, pair_hi=rev[lo])


def _gather_project(u: np.ndarray, p: PalindromeProjector, sign: float) -> np.ndarray:
    """P_s^dag U P_s with P_+ the even and P_- the odd isometry."""
    w = 1.0 / math.sqrt(2.0)
    if sign > 0:
        rep0 = np.concatenate([p.pal, p.pair_lo])
        rep1 = np.concatenate([p.pal, p.pair_hi])
        w0 = np.concatenate([np.full(len(p.pal), 0.5), np.full(len(p.pair_lo), w)])
        w1 = w0
    else:
        rep0, rep1 = p.pair_lo, p.pair_hi
        w0 = np.full(len(p.pair_lo), w)
        w1 = -w0
    t = u[rep0, :] * w0[:, None] + u[rep1, :] * w1[:, None]
    return t[:, rep0] * w0[None, :] + t[:, rep1] * w1[None, :]


def project_unitary(
    U: DenseOperator, P: PalindromeProjector, *, sector: str = "even"
) -> DenseOperator:
    """Sector block P^dag U P; checks [U, R] = 0 and block unitarity.

    Never forms the dense isometry: rows and columns are combined by index
    gathers over the palindrome pairs.
    """
    if sector not in ("even", "odd"):
        raise ValueError(f"unknown sector {sector!r}")
    u = U.entries
    perm = reflection_permutation(P.N)
    comm_dev = np.max(np.abs(u[:, perm] - u[perm, :]))
    if comm_dev > _SYM_TOL:
        raise SymmetryError(
            f"[U, R] deviation {comm_dev:.3e} exceeds {_SYM_TOL:g}"
        )
    ue = _gather_project(u, P, +1.0 if sector == "even" else -1.0)
    gram_dev = np.max(np.abs(ue @ ue.conj().T - np.eye(ue.shape[0])))
    if gram_dev > _UNITARY_TOL:
        raise ValueError(f"projected block not unitary: deviation {gram_dev:.3e}")
    return DenseOperator(ue)


@dataclass(frozen=True)
class SpacingEnsemble:
    """Sorted eigenphases on [0, 2pi) and their mean-normalized circular gaps."""

    kick: int | None
    phases: np.ndarray
    s: np.ndarray

    @property
    def count(self) -> int:
        return len(self.s)


def eigenphase_spacings(U_e: DenseOperator, *, kick: int | None = None) -> SpacingEnsemble:
    """Circular nearest-neighbor spacings of eigenphases, mean one.

    Includes the wrap-around gap, so the spacing count equals the dimension.
    """
    lam = np.linalg.eigvals(U_e.entries)
    mod_dev = np.max(np.abs(np.abs(lam) - 1.0))
    if mod_dev > _UNITARY_TOL:
        raise ValueError(f"eigenvalues off the unit circle by {mod_dev:.3e}")
    phases = np.sort(np.mod(np.angle(lam), 2.0 * math.pi))
    gaps = np.diff(phases)
    wrap = 2.0 * math.pi - phases[-1] + phases[0]
    raw = np.concatenate([gaps, [wrap]])
    return SpacingEnsemble(kick=kick, phases=phases, s=raw / raw.mean())


def wigner_dyson_pdf(s: np.ndarray) -> np.ndarray:
    """P_W(s) = (pi s / 2) exp(-pi s^2 / 4)."""
    s = np.asarray(s, dtype=np.float64)
    return (math.pi * s / 2.0) * np.exp(-math.pi * s * s / 4.0)


def poisson_pdf(s: np.ndarray) -> np.ndarray:
    """P_P(s) = exp(-s)."""
    return np.exp(-np.asarray(s, dtype=np.float64))


def _wigner_cdf(s: np.ndarray) -> np.ndarray:
    return 1.0 - np.exp(-math.pi * np.asarray(s, dtype=np.float64) ** 2 / 4.0)


def _poisson_cdf(s: np.ndarray) -> np.ndarray:
    return 1.0 - np.exp(-np.asarray(s, dtype=np.float64))


@dataclass(frozen=True)
class NnsdScore:
    """Histogram of spacings and its distances to the two model densities."""

    bin_edges: np.ndarray
    density: np.ndarray
    d_wigner: float
    d_poisson: float
    verdict: Verdict
    count: int

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def score_nnsd(
    ensemble: SpacingEnsemble,
    bins: int = 25,
    *,
    s_cut: float = 4.0,
    margin: float = 0.1,
) -> NnsdScore:
    """Histogram the spacings and pick the closer model density.

    Distances are total-variation over the bins: half the summed absolute
    difference between empirical and model bin masses. The verdict requires
    the winner to be closer by the relative ``margin``; ensembles smaller
    than 50 spacings are Inconclusive by fiat.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    s = ensemble.s
    density, edges = np.histogram(s, bins=bins, range=(0.0, s_cut), density=True)
    width = edges[1] - edges[0]
    emp_mass = density * width
    w_mass = np.diff(_wigner_cdf(edges))
    p_mass = np.diff(_poisson_cdf(edges))
    d_w = 0.5 * float(np.abs(emp_mass - w_mass).sum())
    d_p = 0.5 * float(np.abs(emp_mass - p_mass).sum())
    if ensemble.count < MIN_SPACINGS:
        verdict = Verdict.INCONCLUSIVE
    elif d_p < (1.0 - margin) * d_w:
        verdict = Verdict.POISSON_LIKE
    elif d_w < (1.0 - margin) * d_p:
        verdict = Verdict.WIGNER_DYSON_LIKE
    else:
        verdict = Verdict.INCONCLUSIVE
    return NnsdScore(
        bin_edges=edges,
        density=density,
        d_wigner=d_w,
        d_poisson=d_p,
        verdict=verdict,
        count=ensemble.count,
    )


def nnsd_at_kicks(
    params: ChainParams,
    protocol: QuenchProtocol,
    kicks: list[int],
    *,
    bins: int = 25,
    s_cut: float = 4.0,
    margin: float = 0.1,
    backend: str | None = None,
) -> list[tuple[int, SpacingEnsemble, NnsdScore]]:
    """NNSD of the cumulative unitary at each requested kick.

    One sequential product sweep serves all kicks; the list must be sorted
    ascending with every kick >= 1.
    """
    if not kicks:
        raise ValueError("kick list is empty")
    if any(k < 1 for k in kicks):
        raise ValueError("kicks start at 1")
    if sorted(kicks) != list(kicks):
        raise ValueError("kick list must be sorted ascending")
    proj = palindrome_projector(params.N)
    state = EvolutionState(params, protocol, track_unitary=True, backend=backend)
    out = []
    for k in kicks:
        while state.n < k:
            state.advance()
        ue = project_unitary(state.U, proj)
        ens = eigenphase_spacings(ue, kick=k)
        out.append((k, ens, score_nnsd(ens, bins, s_cut=s_cut, margin=margin)))
    return out
