"""Command-line front end: single OTOC runs, NNSD runs, and figure bundles.

Exit codes: 0 success, 2 invalid configuration (line-numbered when it comes
from a config file), 3 numerical failure during computation. All CSV output
uses 12-significant-digit decimals, UTF-8, and LF line endings.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import re
import sys
from pathlib import Path

import numpy as np

from .analysis import FitPolicy, normalize_ipr_sweep
from .evolution import ChainParams, HeisenbergConvention, NormDriftError
from .otoc import ObservableFamily, ObservableSpec, OtocSeries
from .schedules import ProtocolTag, QuenchProtocol
from .spectral import poisson_pdf, wigner_dyson_pdf
from .sweeps import (
    AnalysisToggles,
    RunConfig,
    RunResult,
    figure_recipe,
    run_grid,
    run_point,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

def _parse_bool(text: str) -> bool:
    return text.strip().lower() in ("1", "true", "yes", "on")


_ANGLE_RE = re.compile(
    r"^\s*(?P<sign>[+-]?)\s*(?P<coef>\d+(?:\.\d+)?)?\s*pi"
    r"\s*(?:/\s*(?P<den>\d+(?:\.\d+)?))?\s*$",
    re.IGNORECASE,
)


class ConfigError(ValueError):
    """Invalid configuration; message carries file:line context when known."""


def parse_angle(text: str) -> float:
    """Parse 'pi/16', '3pi/4', '16pi', or a plain decimal."""
    m = _ANGLE_RE.match(text)
    if m:
        coef = float(m.group("coef")) if m.group("coef") else 1.0
        den = float(m.group("den")) if m.group("den") else 1.0
        if den == 0:
            raise ConfigError(f"zero denominator in angle {text!r}")
        val = coef * math.pi / den
        return -val if m.group("sign") == "-" else val
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None


def fmt12(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt12(v) if not isinstance(v, str) else v for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def sha256_of(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# flag -> (config section, value parser); sections mirror module names
_SECTION_KEYS = {
    "evolution": {"N": int, "J": float, "tau": parse_angle, "convention": str},
    "schedules": {
        "protocol": str,
        "hx0": float,
        "hz0": float,
        "gamma": float,
        "tmax": parse_angle,
        "alpha": float,
    },
    "otoc": {
        "observable": str,
        "sites": str,
        "nmax": int,
        "stop-at-norm": float,
    },
    "analysis": {
        "fit-threshold": float,
        "sat-window": str,
        "ipr-window": str,
        "ipr-remove-mean": _parse_bool,
    },
    "spectral": {"kicks": str, "bins": int, "s-cut": float, "margin": float},
    "cli": {"out": str, "outdir": str, "cache-dir": str, "workers": int, "backend": str},
}


def parse_config_file(path: str) -> dict[str, dict[str, str]]:
    """Flat sectioned key-value file; raises ConfigError with file:line."""
    data: dict[str, dict[str, str]] = {}
    section = None
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(("#", ";")):
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTION_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown section [{section}]")
            data.setdefault(section, {})
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        if section is None:
            raise ConfigError(f"{path}:{lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SECTION_KEYS[section]:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in [{section}]")
        try:
            _SECTION_KEYS[section][key](value)
        except Exception as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
        data[section][key] = value
    return data


_DEFAULTS = {
    "protocol": "linear",
    "N": 12,
    "J": 1.0,
    "tau": "pi/4",
    "hx0": 0.0,
    "hz0": 1.0,
    "gamma": 0.0,
    "tmax": "16pi",
    "alpha": None,
    "observable": "block-x",
    "sites": None,
    "nmax": 400,
    "convention": "U_W_Udag",
    "stop_at_norm": None,
    "fit_threshold": 0.5,
    "sat_window": None,
    "ipr_window": "full",
    "ipr_remove_mean": False,
    "kicks": "2,5,10,20,30",
    "bins": 25,
    "s_cut": 4.0,
    "margin": 0.1,
    "out": "otoc.csv",
    "out_prefix": "nnsd",
    "outdir": "figures",
    "cache_dir": None,
    "workers": 1,
    "backend": None,
}

# (flag dest, config section, config key)
_CONFIG_MAP = [
    ("N", "evolution", "N"),
    ("J", "evolution", "J"),
    ("tau", "evolution", "tau"),
    ("convention", "evolution", "convention"),
    ("protocol", "schedules", "protocol"),
    ("hx0", "schedules", "hx0"),
    ("hz0", "schedules", "hz0"),
    ("gamma", "schedules", "gamma"),
    ("tmax", "schedules", "tmax"),
    ("alpha", "schedules", "alpha"),
    ("observable", "otoc", "observable"),
    ("sites", "otoc", "sites"),
    ("nmax", "otoc", "nmax"),
    ("stop_at_norm", "otoc", "stop-at-norm"),
    ("fit_threshold", "analysis", "fit-threshold"),
    ("sat_window", "analysis", "sat-window"),
    ("ipr_window", "analysis", "ipr-window"),
    ("ipr_remove_mean", "analysis", "ipr-remove-mean"),
    ("kicks", "spectral", "kicks"),
    ("bins", "spectral", "bins"),
    ("s_cut", "spectral", "s-cut"),
    ("margin", "spectral", "margin"),
    ("out", "cli", "out"),
    ("outdir", "cli", "outdir"),
    ("cache_dir", "cli", "cache-dir"),
    ("workers", "cli", "workers"),
    ("backend", "cli", "backend"),
]


def _resolve(args: argparse.Namespace) -> dict:
    """Merge precedence: CLI flag > config file > built-in default."""
    filedata = parse_config_file(args.config) if getattr(args, "config", None) else {}
    merged = dict(_DEFAULTS)
    for dest, section, key in _CONFIG_MAP:
        if section in filedata and key in filedata[section]:
            merged[dest] = _SECTION_KEYS[section][key](filedata[section][key])
    for dest in list(merged):
        val = getattr(args, dest, None)
        if val is not None:
            merged[dest] = val
    for key in ("tau", "tmax"):
        if isinstance(merged[key], str):
            merged[key] = parse_angle(merged[key])
    return merged


def _build_protocol(m: dict) -> QuenchProtocol:
    tag = m["protocol"].lower()
    if tag == "constant":
        return QuenchProtocol.constant(h_x0=m["hx0"], h_z0=m["hz0"])
    if tag == "linear":
        return QuenchProtocol.linear(h_x0=m["hx0"], h_z0=m["hz0"], gamma=m["gamma"])
    if tag == "periodic":
        return QuenchProtocol.periodic(
            h_x0=m["hx0"], h_z0=m["hz0"], t_max=m["tmax"], alpha=m["alpha"]
        )
    raise ConfigError(f"unknown protocol {m['protocol']!r}")


def _build_observable(m: dict) -> ObservableSpec:
    try:
        family = ObservableFamily(m["observable"])
    except ValueError:
        raise ConfigError(f"unknown observable {m['observable']!r}") from None
    sites = None
    if m["sites"] is not None:
        parts = str(m["sites"]).split(",")
        if len(parts) != 2:
            raise ConfigError(f"sites must be 'i,j', got {m['sites']!r}")
        sites = (int(parts[0]), int(parts[1]))
    return ObservableSpec(family, sites)


def _int_pair(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    parts = str(text).split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'lo,hi', got {text!r}")
    return (int(parts[0]), int(parts[1]))


def _validate_run(m: dict, spec: ObservableSpec) -> None:
    if m["N"] % 2 != 0 and (spec.family.is_block or spec.sites is None):
        raise ConfigError("N must be even for block families and default sites")
    if spec.sites is not None:
        for s in spec.sites:
            if not 1 <= s <= m["N"]:
                raise ConfigError(f"site {s} out of range 1..{m['N']}")


def _run_config_from(m: dict, analyses: AnalysisToggles) -> RunConfig:
    spec = _build_observable(m)
    _validate_run(m, spec)
    return RunConfig(
        params=ChainParams(N=m["N"], J=m["J"], tau=m["tau"]),
        protocol=_build_protocol(m),
        observable=spec,
        n_max=m["nmax"],
        convention=HeisenbergConvention(m["convention"]),
        stop_at_norm=m["stop_at_norm"],
        analyses=analyses,
    )


def _write_otoc_csv(path: Path, series: OtocSeries) -> None:
    rows = zip(series.n, series.C2, series.C4, series.C, series.C_norm)
    write_csv(path, ["n", "C2", "C4", "C", "C_norm"], rows)


def cmd_otoc(args: argparse.Namespace) -> int:
    m = _resolve(args)
    toggles = AnalysisToggles(
        fit=True,
        saturation=True,
        sat_window=_int_pair(m["sat_window"]),
        ipr=True,
        ipr_window=m["ipr_window"],
        ipr_remove_mean=bool(m["ipr_remove_mean"]),
    )
    cfg = _run_config_from(m, toggles)
    res = run_point(cfg, cache_dir=m["cache_dir"], backend=m["backend"])
    out = Path(m["out"])
    _write_otoc_csv(out, res.series)
    b = fmt12(res.fit.b) if res.fit else f"n/a ({res.fit_error})"
    print(f"b={b}, osc_ratio={fmt12(res.saturation.osc_ratio)}, xi={fmt12(res.ipr.xi)}")
    print(f"wrote {out}")
    return EXIT_OK


def _write_nnsd_csvs(prefix: Path, res: RunResult) -> list[Path]:
    long_rows = []
    hist_rows = []
    for kick, ens, score in res.nnsd:
        long_rows.extend((kick, v) for v in ens.s)
        centers = score.bin_centers
        pw = wigner_dyson_pdf(centers)
        pp = poisson_pdf(centers)
        hist_rows.extend(
            (kick, c, d, w, p)
            for c, d, w, p in zip(centers, score.density, pw, pp)
        )
    spac = prefix.with_name(prefix.name + "_spacings.csv")
    hist = prefix.with_name(prefix.name + "_hist.csv")
    write_csv(spac, ["kick", "s"], long_rows)
    write_csv(hist, ["kick", "bin_center", "density", "P_W", "P_P"], hist_rows)
    return [spac, hist]


def cmd_nnsd(args: argparse.Namespace) -> int:
    m = _resolve(args)
    try:
        kicks = tuple(int(k) for k in str(m["kicks"]).split(","))
    except ValueError:
        raise ConfigError(f"bad kick list {m['kicks']!r}") from None
    if not kicks or any(k < 1 for k in kicks):
        raise ConfigError("kicks start at 1")
    if list(kicks) != sorted(kicks):
        raise ConfigError("kick list must be sorted ascending")
    m["nmax"] = max(m["nmax"], max(kicks))
    toggles = AnalysisToggles(otoc=False, nnsd_kicks=kicks, nnsd_bins=m["bins"])
    cfg = _run_config_from(m, toggles)
    if cfg.params.N % 2 != 0:
        raise ConfigError("NNSD requires even N")
    res = run_point(cfg, cache_dir=m["cache_dir"], backend=m["backend"])
    prefix = Path(getattr(args, "out_prefix", None) or _DEFAULTS["out_prefix"])
    paths = _write_nnsd_csvs(prefix, res)
    for kick, _, score in res.nnsd:
        print(
            f"kick={kick}: {score.verdict.value} "
            f"(d_P={fmt12(score.d_poisson)}, d_W={fmt12(score.d_wigner)})"
        )
    for p in paths:
        print(f"wrote {p}")
    return EXIT_OK


def cmd_figure(args: argparse.Namespace) -> int:
    m = _resolve(args)
    recipe = figure_recipe(args.id)
    grid = run_grid(
        list(recipe.configs),
        cache_dir=m["cache_dir"],
        workers=m["workers"],
        backend=m["backend"],
    )
    outdir = Path(m["outdir"]) / recipe.figure_id
    outdir.mkdir(parents=True, exist_ok=True)
    entries: list[tuple[str, Path]] = []

    if "otoc" in recipe.aggregates:
        for res in grid.results:
            if res.series is None:
                continue
            path = outdir / f"otoc_{res.key}.csv"
            _write_otoc_csv(path, res.series)
            entries.append((res.key, path))
    if "fits" in recipe.aggregates:
        rows = [
            (res.key, res.fit.b, res.fit.n_lo, res.fit.n_hi, res.fit.residual)
            for res in grid.results
            if res.fit is not None
        ]
        for res in grid.results:
            if res.fit_error:
                print(f"fit skipped for {res.key}: {res.fit_error}", file=sys.stderr)
        path = outdir / "fits.csv"
        write_csv(path, ["run_key", "b", "n_lo", "n_hi", "residual"], rows)
        entries.append(("all", path))
    if "saturation" in recipe.aggregates:
        rows = [
            (res.key, res.saturation.mean, res.saturation.std, res.saturation.osc_ratio)
            for res in grid.results
            if res.saturation is not None
        ]
        path = outdir / "saturation.csv"
        write_csv(path, ["run_key", "mean", "std", "osc_ratio"], rows)
        entries.append(("all", path))
    if "ipr" in recipe.aggregates:
        groups: dict[str, list[RunResult]] = {}
        for res in grid.results:
            if res.ipr is not None:
                groups.setdefault(res.config.group, []).append(res)
        for group in sorted(groups):
            members = sorted(groups[group], key=lambda r: r.config.param)
            fracs = normalize_ipr_sweep([(r.config.param, r.ipr) for r in members])
            rows = [
                (r.config.param, r.ipr.xi, frac)
                for r, (_, frac) in zip(members, fracs)
            ]
            # group labels may carry angle fractions ("tau=pi/4"); keep the
            # label verbatim in the manifest but never in a path
            path = outdir / f"ipr_{group.replace('/', '-')}.csv"
            write_csv(path, ["param", "xi", "xi_frac"], rows)
            entries.append((group, path))
    if "nnsd" in recipe.aggregates:
        for res in grid.results:
            if res.nnsd is None:
                continue
            paths = _write_nnsd_csvs(outdir / f"nnsd_{res.key}", res)
            entries.extend((res.key, p) for p in paths)

    manifest = outdir / "manifest.csv"
    rows = [
        (recipe.figure_id, key, path.name, sha256_of(path))
        for key, path in entries
    ]
    write_csv(manifest, ["figure_id", "run_key", "csv_path", "sha256"], rows)
    print(f"wrote {len(entries)} CSVs to {outdir}")
    for failure in grid.failures:
        print(f"point failed: {failure.key}: {failure.error}", file=sys.stderr)
    return EXIT_OK if grid.ok else EXIT_NUMERICAL


def _add_common_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="sectioned key-value config file")
    p.add_argument("--protocol", choices=["constant", "linear", "periodic"],
                   help="field schedule (default: linear)")
    p.add_argument("--N", type=int, help="chain length (default: 12)")
    p.add_argument("--J", type=float, help="Ising coupling (default: 1)")
    p.add_argument("--tau", help="kick period, e.g. pi/16 (default: pi/4)")
    p.add_argument("--hx0", type=float, help="longitudinal amplitude (default: 0)")
    p.add_argument("--hz0", type=float, help="transverse amplitude (default: 1)")
    p.add_argument("--gamma", type=float, help="linear quench slope (default: 0)")
    p.add_argument("--tmax", help="periodic drive duration (default: 16pi)")
    p.add_argument("--alpha", type=float,
                   help="periodic angular frequency (default: pi/(2 tmax))")
    p.add_argument("--convention", choices=["U_W_Udag", "Udag_W_U"],
                   help="Heisenberg update convention (default: U_W_Udag)")
    p.add_argument("--cache-dir", dest="cache_dir", help="run cache directory")
    p.add_argument("--backend", choices=["auto", "numba", "numpy"],
                   help="kernel backend (default: auto)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="floquet-otoc",
        description="OTOC and eigenphase statistics of kicked quenched-field Ising chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_otoc = sub.add_parser("otoc", help="single OTOC run with fit/saturation/IPR")
    _add_common_run_flags(p_otoc)
    p_otoc.add_argument("--observable",
                        choices=[f.value for f in ObservableFamily],
                        help="W/V family (default: block-x)")
    p_otoc.add_argument("--sites", help="local-family sites 'i,j' (default: 1,N/2)")
    p_otoc.add_argument("--nmax", type=int, help="kick count (default: 400)")
    p_otoc.add_argument("--stop-at-norm", dest="stop_at_norm", type=float,
                        help="stop once C/C_inf exceeds this level (default: off)")
    p_otoc.add_argument("--fit-threshold", dest="fit_threshold", type=float,
                        help="fit window ends at first C_norm above this (default: 0.5)")
    p_otoc.add_argument("--sat-window", dest="sat_window",
                        help="saturation window 'lo,hi' (default: last half)")
    p_otoc.add_argument("--ipr-window", dest="ipr_window",
                        choices=["full", "saturation"],
                        help="IPR series window (default: full)")
    p_otoc.add_argument("--ipr-remove-mean", dest="ipr_remove_mean",
                        action="store_const", const=True,
                        help="subtract the series mean before the DFT (default: off)")
    p_otoc.add_argument("--out", help="output CSV path (default: otoc.csv)")
    p_otoc.set_defaults(func=cmd_otoc)

    p_nnsd = sub.add_parser("nnsd", help="even-sector NNSD at selected kicks")
    _add_common_run_flags(p_nnsd)
    p_nnsd.add_argument("--kicks", help="comma list of kicks (default: 2,5,10,20,30)")
    p_nnsd.add_argument("--bins", type=int, help="histogram bins (default: 25)")
    p_nnsd.add_argument("--s-cut", dest="s_cut", type=float,
                        help="histogram upper edge (default: 4)")
    p_nnsd.add_argument("--margin", type=float,
                        help="relative verdict margin (default: 0.1)")
    p_nnsd.add_argument("--nmax", type=int,
                        help="kick budget, raised to max kick (default: 400)")
    p_nnsd.add_argument("--out-prefix", dest="out_prefix",
                        help="output CSV prefix (default: nnsd)")
    p_nnsd.set_defaults(func=cmd_nnsd)

    p_fig = sub.add_parser("figure", help="run a figure recipe into a CSV bundle")
    p_fig.add_argument("id", help="figure id, F2..F10")
    p_fig.add_argument("--config", help="sectioned key-value config file")
    p_fig.add_argument("--outdir", help="bundle root (default: figures)")
    p_fig.add_argument("--cache-dir", dest="cache_dir", help="run cache directory")
    p_fig.add_argument("--workers", type=int, help="worker pool size (default: 1)")
    p_fig.add_argument("--backend", choices=["auto", "numba", "numpy"],
                       help="kernel backend (default: auto)")
    p_fig.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NormDriftError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
