"""Parameter-grid execution: content-addressed run cache, deterministic
aggregation, and the per-figure experiment grids.

Every run is keyed by a canonical JSON serialization of its physics inputs;
cache entries are written atomically and reread byte-identically, so grid
outputs do not depend on worker count or completion order.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .analysis import (
    FitPolicy,
    IprResult,
    PowerLawFit,
    SaturationStats,
    fit_power_law,
    ipr_of_otoc,
    saturation_stats,
)
from .evolution import ChainParams, HeisenbergConvention
from .otoc import ObservableFamily, ObservableSpec, OtocSeries, run_otoc
from .schedules import ProtocolTag, QuenchProtocol
from .spectral import (
    NnsdScore,
    SpacingEnsemble,
    nnsd_at_kicks,
    score_nnsd,
)

TAUS = (math.pi / 16, math.pi / 6, math.pi / 4)

# quench-slope sweep grid, denser near the small-slope regime the linear
# protocol figures focus on
GAMMA_GRID = (0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0)


def format_angle(x: float) -> str:
    """Render x as a fraction of pi ("pi/16", "3pi/4", "16pi") when exact."""
    if x == 0:
        return "0"
    frac = Fraction(x / math.pi).limit_denominator(10000)
    if frac != 0 and abs(float(frac) * math.pi - x) < 1e-12 * max(1.0, abs(x)):
        num, den = frac.numerator, frac.denominator
        sign = "-" if num < 0 else ""
        num = abs(num)
        head = "pi" if num == 1 else f"{num}pi"
        return f"{sign}{head}" if den == 1 else f"{sign}{head}/{den}"
    return repr(float(x))


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def linear_n_max(tau: float) -> int:
    """Default kick budget: 1000 for tau=pi/16, 400 otherwise."""
    return 1000 if abs(tau - math.pi / 16) < 1e-12 else 400


def periodic_n_max(t_max: float, tau: float) -> int:
    """Kicks fitting in one drive envelope: floor(t_max / tau)."""
    return int(math.floor(t_max / tau + 1e-9))


@dataclass(frozen=True)
class AnalysisToggles:
    """Which diagnostics a run computes alongside (or instead of) the series."""

    otoc: bool = True
    fit: bool = False
    saturation: bool = False
    sat_window: tuple[int, int] | None = None
    ipr: bool = False
    ipr_window: str = "full"
    ipr_remove_mean: bool = False
    nnsd_kicks: tuple[int, ...] = ()
    nnsd_bins: int = 25

    def __post_init__(self) -> None:
        if self.ipr_window not in ("full", "saturation"):
            raise ValueError(f"unknown ipr window {self.ipr_window!r}")


@dataclass(frozen=True)
class RunConfig:
    """One cacheable evolution run plus its requested analyses.

    ``group`` and ``param`` are presentation metadata for aggregation (which
    figure bucket a run belongs to, and its swept-parameter value); they do
    not enter the cache key.
    """

    params: ChainParams
    protocol: QuenchProtocol
    observable: ObservableSpec
    n_max: int
    convention: HeisenbergConvention = HeisenbergConvention.U_W_UDAG
    stop_at_norm: float | None = None
    analyses: AnalysisToggles = field(default_factory=AnalysisToggles)
    group: str = ""
    param: float | None = None

    def __post_init__(self) -> None:
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        ks = self.analyses.nnsd_kicks
        if ks and (min(ks) < 1 or max(ks) > self.n_max):
            raise ValueError("nnsd kicks must lie within [1, n_max]")
        if ks and self.params.N % 2 != 0:
            raise ValueError("NNSD requires even N")

    def to_dict(self) -> dict:
        p, q, o, a = self.params, self.protocol, self.observable, self.analyses
        return {
            "chain": {"N": p.N, "J": p.J, "tau": p.tau},
            "protocol": {
                "tag": q.tag.value,
                "h_x0": q.h_x0,
                "h_z0": q.h_z0,
                "gamma": q.gamma,
                "alpha": q.alpha,
                "t_max": q.t_max,
            },
            "observable": {"family": o.family.value, "sites": o.sites},
            "n_max": self.n_max,
            "convention": self.convention.value,
            "stop_at_norm": self.stop_at_norm,
            "analyses": {
                "otoc": a.otoc,
                "fit": a.fit,
                "saturation": a.saturation,
                "sat_window": a.sat_window,
                "ipr": a.ipr,
                "ipr_window": a.ipr_window,
                "ipr_remove_mean": a.ipr_remove_mean,
                "nnsd_kicks": list(a.nnsd_kicks),
                "nnsd_bins": a.nnsd_bins,
            },
        }

    def cache_key(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def run_key(self) -> str:
        p, q, o = self.params, self.protocol, self.observable
        parts = [
            q.tag.value,
            o.family.value,
            f"N{p.N}",
            f"tau={format_angle(p.tau).replace('/', '-')}",
            f"J={_fmt(p.J)}",
            f"hz0={_fmt(q.h_z0)}",
            f"hx0={_fmt(q.h_x0)}",
        ]
        if q.tag is ProtocolTag.PERIODIC:
            parts.append(f"tmax={format_angle(q.t_max).replace('/', '-')}")
        else:
            parts.append(f"gamma={_fmt(q.gamma)}")
        if o.sites is not None:
            parts.append(f"sites={o.sites[0]}-{o.sites[1]}")
        parts.append(f"nmax={self.n_max}")
        return "_".join(parts)


@dataclass
class RunResult:
    """Everything a run produced; arrays round-trip exactly through the cache."""

    config: RunConfig
    key: str
    series: OtocSeries | None = None
    fit: PowerLawFit | None = None
    fit_error: str | None = None
    saturation: SaturationStats | None = None
    ipr: IprResult | None = None
    nnsd: list[tuple[int, SpacingEnsemble, NnsdScore]] | None = None


@dataclass(frozen=True)
class PointFailure:
    key: str
    error: str


@dataclass
class GridResult:
    results: list[RunResult]
    failures: list[PointFailure]

    @property
    def ok(self) -> bool:
        return not self.failures


def _result_to_cache(res: RunResult) -> dict:
    d: dict = {"key": res.key}
    if res.series is not None:
        s = res.series
        d["series"] = {
            "n": s.n.tolist(),
            "C2": s.C2.tolist(),
            "C4": s.C4.tolist(),
            "C": s.C.tolist(),
            "C_inf": s.C_inf,
        }
    if res.fit is not None:
        f = res.fit
        d["fit"] = {
            "b": f.b,
            "intercept": f.intercept,
            "n_lo": f.n_lo,
            "n_hi": f.n_hi,
            "residual": f.residual,
        }
    if res.fit_error is not None:
        d["fit_error"] = res.fit_error
    if res.saturation is not None:
        t = res.saturation
        d["saturation"] = {
            "n_lo": t.n_lo,
            "n_hi": t.n_hi,
            "mean": t.mean,
            "std": t.std,
            "osc_ratio": t.osc_ratio,
        }
    if res.ipr is not None:
        d["ipr"] = {"xi": res.ipr.xi, "D": res.ipr.D, "window": res.ipr.window}
    if res.nnsd is not None:
        d["nnsd"] = [{"kick": k, "s": e.s.tolist()} for k, e, _ in res.nnsd]
    return d


def _result_from_cache(cfg: RunConfig, d: dict) -> RunResult:
    res = RunResult(config=cfg, key=d["key"])
    if "series" in d:
        s = d["series"]
        res.series = OtocSeries(
            n=np.asarray(s["n"], dtype=np.int64),
            C2=np.asarray(s["C2"]),
            C4=np.asarray(s["C4"]),
            C=np.asarray(s["C"]),
            C_inf=s["C_inf"],
            N=cfg.params.N,
            spec=cfg.observable,
        )
    if "fit" in d:
        res.fit = PowerLawFit(**d["fit"])
    res.fit_error = d.get("fit_error")
    if "saturation" in d:
        res.saturation = SaturationStats(**d["saturation"])
    if "ipr" in d:
        i = d["ipr"]
        win = tuple(i["window"]) if i["window"] is not None else None
        res.ipr = IprResult(xi=i["xi"], D=i["D"], window=win)
    if "nnsd" in d:
        res.nnsd = []
        for row in d["nnsd"]:
            ens = SpacingEnsemble(
                kick=row["kick"], phases=np.empty(0), s=np.asarray(row["s"])
            )
            score = score_nnsd(ens, cfg.analyses.nnsd_bins)
            res.nnsd.append((row["kick"], ens, score))
    return res


def _sat_window(cfg: RunConfig, series: OtocSeries) -> tuple[int, int]:
    if cfg.analyses.sat_window is not None:
        return cfg.analyses.sat_window
    ns = series.n
    return (int(ns[len(ns) // 2]), int(ns[-1]))


def compute_point(cfg: RunConfig, backend: str | None = None) -> RunResult:
    """Run one config (no cache involvement)."""
    res = RunResult(config=cfg, key=cfg.run_key())
    a = cfg.analyses
    needs_series = a.otoc or a.fit or a.saturation or a.ipr
    if needs_series:
        res.series = run_otoc(
            cfg.params,
            cfg.protocol,
            cfg.observable,
            cfg.n_max,
            convention=cfg.convention,
            backend=backend,
            stop_at_norm=cfg.stop_at_norm,
        )
        if a.fit:
            try:
                res.fit = fit_power_law(res.series, FitPolicy())
            except ValueError as exc:
                res.fit_error = str(exc)
        if a.saturation:
            res.saturation = saturation_stats(res.series, _sat_window(cfg, res.series))
        if a.ipr:
            win = None
            if a.ipr_window == "saturation":
                win = _sat_window(cfg, res.series)
            res.ipr = ipr_of_otoc(res.series, win, remove_mean=a.ipr_remove_mean)
    if a.nnsd_kicks:
        res.nnsd = nnsd_at_kicks(
            cfg.params,
            cfg.protocol,
            list(a.nnsd_kicks),
            bins=a.nnsd_bins,
            backend=backend,
        )
    return res


def run_point(
    cfg: RunConfig, cache_dir: str | Path | None = None, backend: str | None = None
) -> RunResult:
    """Run one config through the on-disk cache (write-once per key)."""
    if cache_dir is None:
        return compute_point(cfg, backend)
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    path = cache_dir / f"{cfg.cache_key()}.json"
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            return _result_from_cache(cfg, json.load(fh))
    res = compute_point(cfg, backend)
    fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(_result_to_cache(res), fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return res


def _pool_worker(args) -> tuple[str, RunResult | PointFailure]:
    cfg, cache_dir, backend = args
    try:
        return "ok", run_point(cfg, cache_dir, backend)
    except Exception as exc:
        return "fail", PointFailure(key=cfg.run_key(), error=f"{type(exc).__name__}: {exc}")


def run_grid(
    configs: list[RunConfig],
    *,
    cache_dir: str | Path | None = None,
    workers: int = 1,
    backend: str | None = None,
) -> GridResult:
    """Run every config; collect per-point failures without aborting.

    Results are sorted by run key, so output is deterministic regardless of
    worker count or completion order.
    """
    jobs = [(cfg, cache_dir, backend) for cfg in configs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(_pool_worker, jobs))
    else:
        raw = [_pool_worker(j) for j in jobs]
    results = sorted(
        (r for tag, r in raw if tag == "ok"), key=lambda r: (r.key, r.config.group)
    )
    failures = sorted((r for tag, r in raw if tag == "fail"), key=lambda f: f.key)
    return GridResult(results=results, failures=failures)


@dataclass(frozen=True)
class FigureRecipe:
    """Experiment grid behind one data figure plus its aggregation kinds."""

    figure_id: str
    description: str
    configs: tuple[RunConfig, ...]
    aggregates: tuple[str, ...]


def _grid(step: float, count: int) -> list[float]:
    return [round(i * step, 12) for i in range(count)]


def _linear(h_x0: float, gamma: float = 0.1, h_z0: float = 1.0) -> QuenchProtocol:
    return QuenchProtocol.linear(h_x0=h_x0, h_z0=h_z0, gamma=gamma)


def _periodic(h_x0: float, t_max: float, h_z0: float = 4.0) -> QuenchProtocol:
    return QuenchProtocol.periodic(h_x0=h_x0, h_z0=h_z0, t_max=t_max)


def figure_recipe(figure_id: str) -> FigureRecipe:
    """Caption-faithful grid for one of the data figures F2..F10."""
    fid = figure_id.upper()
    block_x = ObservableSpec(ObservableFamily.BLOCK_X)
    if fid == "F2":
        configs = [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=tau),
                protocol=_linear(hx0),
                observable=block_x,
                n_max=linear_n_max(tau),
                # fits only use the region below the 0.5 crossing; stopping at
                # 0.75 keeps the whole fit window while skipping saturation
                stop_at_norm=0.75,
                analyses=AnalysisToggles(fit=True),
                group=f"growth_hx0={_fmt(hx0)}",
                param=tau,
            )
            for hx0 in (0.0, 1.0)
            for tau in TAUS
        ]
        return FigureRecipe(
            fid,
            "normalized OTOC growth, linear protocol, three periods",
            tuple(configs),
            ("otoc", "fits"),
        )
    # F3/F4/F5 sweep overlapping runs from different angles, so their configs
    # carry identical analysis toggles and the overlaps share cache entries
    # (F4 is the tau=pi/4 slice of F5's slope sweep). The IPR reading is the
    # default one: full series, DC component kept.
    sweep_toggles = AnalysisToggles(saturation=True, ipr=True)
    if fid == "F3":
        configs = [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=tau),
                protocol=_linear(hx0),
                observable=block_x,
                n_max=linear_n_max(tau),
                analyses=sweep_toggles,
                group=f"saturation_tau={format_angle(tau)}",
                param=hx0,
            )
            for tau in TAUS
            for hx0 in _grid(0.1, 11)
        ]
        return FigureRecipe(
            fid,
            "saturation vs h_x0 sweep, linear protocol",
            tuple(configs),
            ("otoc", "saturation"),
        )
    if fid == "F4":
        tau = math.pi / 4
        configs = [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=tau),
                protocol=_linear(hx0, gamma=g),
                observable=block_x,
                n_max=linear_n_max(tau),
                analyses=sweep_toggles,
                group=f"gamma_sweep_hx0={_fmt(hx0)}",
                param=g,
            )
            for hx0 in (0.0, 1.0)
            for g in GAMMA_GRID
        ]
        return FigureRecipe(
            fid,
            "saturation vs quench slope at tau=pi/4",
            tuple(configs),
            ("otoc", "saturation"),
        )
    if fid == "F5":
        # the h_x0 panel sits at gamma=0, the unquenched reference the slope
        # panel singles out as the IPR maximum; its endpoints reuse the
        # slope-panel runs
        configs = [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=tau),
                protocol=_linear(hx0, gamma=0.0),
                observable=block_x,
                n_max=linear_n_max(tau),
                analyses=sweep_toggles,
                group=f"ipr_vs_hx0_tau={format_angle(tau)}",
                param=hx0,
            )
            for tau in TAUS
            for hx0 in _grid(0.1, 11)
        ]
        configs += [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=tau),
                protocol=_linear(hx0, gamma=g),
                observable=block_x,
                n_max=linear_n_max(tau),
                analyses=sweep_toggles,
                group=f"ipr_vs_gamma_hx0={_fmt(hx0)}_tau={format_angle(tau)}",
                param=g,
            )
            for tau in TAUS
            for hx0 in (0.0, 1.0)
            for g in GAMMA_GRID
        ]
        return FigureRecipe(
            fid,
            "Fourier-spectrum IPR vs h_x0 and vs quench slope",
            tuple(configs),
            ("ipr",),
        )
    if fid == "F6":
        kicks = (2, 5, 10, 20, 30)
        configs = [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=math.pi / 4),
                protocol=_linear(hx0),
                observable=block_x,
                n_max=max(kicks),
                analyses=AnalysisToggles(otoc=False, nnsd_kicks=kicks),
                group=f"nnsd_hx0={_fmt(hx0)}",
                param=hx0,
            )
            for hx0 in (0.0, 1.0)
        ]
        return FigureRecipe(
            fid,
            "even-sector NNSD at tau=pi/4, linear protocol",
            tuple(configs),
            ("nnsd",),
        )
    if fid == "F7":
        tau = math.pi / 4
        t_max = 8 * math.pi
        n_max = periodic_n_max(t_max, tau)
        points = [(12, 0.0), (12, 1.0), (8, 0.0), (10, 0.0)]
        configs = [
            RunConfig(
                params=ChainParams(N=n, J=1.0, tau=tau),
                protocol=_periodic(hx0, t_max),
                observable=block_x,
                n_max=n_max,
                analyses=AnalysisToggles(fit=True),
                group=f"periodic_growth_hx0={_fmt(hx0)}",
                param=float(n),
            )
            for n, hx0 in points
        ]
        return FigureRecipe(
            fid,
            "periodic-protocol OTOC growth, t_max=8pi, size stability",
            tuple(configs),
            ("otoc", "fits"),
        )
    if fid in ("F8", "F9", "F10"):
        t_max = 16 * math.pi
        family, step, count = {
            "F8": (ObservableFamily.BLOCK_X, 0.1, 11),
            "F9": (ObservableFamily.BLOCK_Z, 0.2, 6),
            "F10": (ObservableFamily.LOCAL_PAULI_Z, 0.1, 11),
        }[fid]
        configs = [
            RunConfig(
                params=ChainParams(N=12, J=1.0, tau=tau),
                protocol=_periodic(hx0, t_max),
                observable=ObservableSpec(family),
                n_max=periodic_n_max(t_max, tau),
                analyses=AnalysisToggles(saturation=True),
                group=f"saturation_tau={format_angle(tau)}",
                param=hx0,
            )
            for tau in TAUS
            for hx0 in _grid(step, count)
        ]
        desc = {
            "F8": "periodic-protocol block-x saturation sweep",
            "F9": "periodic-protocol block-z saturation sweep",
            "F10": "periodic-protocol local-z saturation sweep",
        }[fid]
        return FigureRecipe(fid, desc, tuple(configs), ("otoc", "saturation"))
    raise ValueError(f"unknown figure id {figure_id!r} (data figures are F2..F10)")
