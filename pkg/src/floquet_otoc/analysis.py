"""Time-series diagnostics: power-law growth fits, saturation statistics,
and Fourier-spectrum inverse participation ratios of OTOC series.

All diagnostics consume the normalized column C(n)/C_inf (for local
families C_inf = 1, so this is the bare correlator).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .otoc import OtocSeries


@dataclass(frozen=True)
class FitPolicy:
    """Window selection for the growth fit.

    Default: kicks from ``n_lo`` up to (exclusive) the first kick where
    C_norm exceeds ``norm_threshold`` - the pre-scrambling dynamic region.
    An explicit ``n_hi`` overrides the threshold rule (inclusive bound).
    """

    norm_threshold: float = 0.5
    n_lo: int = 1
    n_hi: int | None = None


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares line through (ln n, ln C_norm): C_norm ~ n^b."""

    b: float
    intercept: float
    n_lo: int
    n_hi: int
    residual: float


def fit_power_law(series: OtocSeries, policy: FitPolicy | None = None) -> PowerLawFit:
    """Fit C_norm(n) ~ n^b over the dynamic window.

    Raises ``ValueError("dynamic region too short")`` when fewer than five
    resolvable samples fall inside the window.
    """
    policy = policy or FitPolicy()
    ns = series.n
    cn = series.C_norm
    if len(ns) < 10:
        raise ValueError("series too short to fit (need >= 10 points)")
    if policy.n_hi is not None:
        mask = (ns >= policy.n_lo) & (ns <= policy.n_hi)
    else:
        above = np.nonzero(cn > policy.norm_threshold)[0]
        cut = ns[above[0]] if len(above) else ns[-1] + 1
        mask = (ns >= policy.n_lo) & (ns < cut)
    mask &= cn > 0
    if mask.any():
        # Kicks inside the light cone give C values that are zero up to
        # rounding (~D*eps); log of those would dominate the fit, so drop
        # anything nine decades below the window peak.
        mask &= cn > 1e-9 * cn[mask].max()
    if mask.sum() < 5:
        raise ValueError("dynamic region too short")
    x = np.log(ns[mask].astype(np.float64))
    y = np.log(cn[mask])
    coeffs, *_ = np.linalg.lstsq(np.stack([x, np.ones_like(x)], axis=1), y, rcond=None)
    b, intercept = float(coeffs[0]), float(coeffs[1])
    resid = float(np.sqrt(np.mean((b * x + intercept - y) ** 2)))
    return PowerLawFit(
        b=b,
        intercept=intercept,
        n_lo=int(ns[mask][0]),
        n_hi=int(ns[mask][-1]),
        residual=resid,
    )


@dataclass(frozen=True)
class SaturationStats:
    """Mean, standard deviation, and their ratio over a late window."""

    n_lo: int
    n_hi: int
    mean: float
    std: float
    osc_ratio: float


def saturation_stats(
    series: OtocSeries, window: tuple[int, int] | None = None
) -> SaturationStats:
    """C_norm statistics over ``window`` (default: last half of the series).

    osc_ratio = std/mean quantifies oscillatory versus exact saturation.
    """
    ns = series.n
    if window is None:
        window = (int(ns[len(ns) // 2]), int(ns[-1]))
    n_lo, n_hi = window
    mask = (ns >= n_lo) & (ns <= n_hi)
    if not mask.any():
        raise ValueError(f"empty saturation window [{n_lo}, {n_hi}]")
    vals = series.C_norm[mask]
    mean = float(vals.mean())
    std = float(vals.std())
    if std == 0.0:
        ratio = 0.0
    elif mean == 0.0:
        ratio = math.inf
    else:
        ratio = std / mean
    return SaturationStats(n_lo=n_lo, n_hi=n_hi, mean=mean, std=std, osc_ratio=ratio)


@dataclass(frozen=True)
class IprResult:
    """Inverse participation ratio xi = 1/sum |f_j|^4 of a unit spectrum."""

    xi: float
    D: int
    window: tuple[int, int] | None = None


def ipr_of_amplitudes(amplitudes: np.ndarray) -> IprResult:
    """xi of an already-normalized amplitude vector (sum |a|^2 = 1)."""
    a = np.asarray(amplitudes)
    p = np.abs(a) ** 2
    total = p.sum()
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"amplitudes not normalized: sum |a|^2 = {total:.12g}")
    return IprResult(xi=float(1.0 / np.sum(p * p)), D=len(a))


def ipr_of_otoc(
    series: OtocSeries,
    window: tuple[int, int] | None = None,
    *,
    remove_mean: bool = False,
) -> IprResult:
    """xi of the discrete Fourier spectrum of C_norm over ``window``.

    The spectrum is normalized to sum |f_j|^2 = 1 before counting
    participating modes; mean (DC) removal is off by default.
    """
    ns = series.n
    if window is None:
        window = (int(ns[0]), int(ns[-1]))
    n_lo, n_hi = window
    mask = (ns >= n_lo) & (ns <= n_hi)
    vals = series.C_norm[mask].astype(np.float64)
    if len(vals) < 64:
        raise ValueError(f"window has {len(vals)} samples; need >= 64")
    ref = float(np.sum(vals * vals))
    if remove_mean:
        vals = vals - vals.mean()
    f = np.fft.fft(vals, norm="ortho")
    power = np.abs(f) ** 2
    total = power.sum()
    # mean removal of a constant series leaves only rounding noise; anything
    # 24 decades below the window's raw power is treated as an empty spectrum
    if total <= 1e-24 * ref:
        raise ValueError("degenerate zero spectrum")
    p = power / total
    return IprResult(xi=float(1.0 / np.sum(p * p)), D=len(vals), window=(n_lo, n_hi))


def normalize_ipr_sweep(
    results: list[tuple[float, IprResult]]
) -> list[tuple[float, float]]:
    """Divide each xi by the sweep maximum; the max entry maps to 1."""
    if not results:
        raise ValueError("empty sweep")
    xi_max = max(r.xi for _, r in results)
    return [(param, r.xi / xi_max) for param, r in results]
