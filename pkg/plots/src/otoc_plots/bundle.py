"""Load one figure's CSV bundle and verify it against its manifest.

A bundle directory holds ``manifest.csv`` (columns ``figure_id, run_key,
csv_path, sha256``) plus the CSV files it lists: per-run OTOC series,
``fits.csv`` / ``saturation.csv`` aggregates, per-group IPR sweeps, and
per-run NNSD spacing and histogram tables. Every file is opened through its
manifest row, and a checksum mismatch or missing file refuses the whole
bundle; rendering never sees partially valid data.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class BundleError(Exception):
    """The bundle is missing, incomplete, or fails its manifest contract."""


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def parse_run_key(run_key: str) -> dict[str, str]:
    """Split a run key into labeled fields.

    Keys look like ``linear_block-x_N12_tau=pi-4_J=1_hz0=1_hx0=0_gamma=0.1_
    nmax=400``: protocol, observable family, and chain length up front, then
    ``key=value`` tokens (``gamma=`` or ``tmax=`` depending on the protocol,
    ``sites=i-j`` for local observables).
    """
    tokens = run_key.split("_")
    if len(tokens) < 4 or not tokens[2].startswith("N"):
        raise BundleError(f"unparseable run key {run_key!r}")
    fields = {"protocol": tokens[0], "family": tokens[1], "N": tokens[2][1:]}
    for token in tokens[3:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise BundleError(f"unparseable field {token!r} in run key {run_key!r}")
        fields[key] = value
    return fields


@dataclass(frozen=True)
class Series:
    """One run's OTOC time series."""

    run_key: str
    fields: dict[str, str]
    n: np.ndarray
    C2: np.ndarray
    C4: np.ndarray
    C: np.ndarray
    C_norm: np.ndarray


@dataclass(frozen=True)
class Fit:
    b: float
    n_lo: int
    n_hi: int
    residual: float


@dataclass(frozen=True)
class Saturation:
    mean: float
    std: float
    osc_ratio: float


@dataclass(frozen=True)
class IprSweep:
    """One normalized IPR sweep (``param`` is h_x0 or the quench slope)."""

    group: str
    param: np.ndarray
    xi: np.ndarray
    xi_frac: np.ndarray


@dataclass(frozen=True)
class Histogram:
    bin_center: np.ndarray
    density: np.ndarray
    p_w: np.ndarray
    p_p: np.ndarray


@dataclass
class NnsdData:
    """Spacing samples and scored histograms for one run, keyed by kick."""

    run_key: str
    fields: dict[str, str]
    spacings: dict[int, np.ndarray] = field(default_factory=dict)
    hist: dict[int, Histogram] = field(default_factory=dict)


@dataclass
class Bundle:
    """Validated contents of one figure's CSV bundle."""

    figure_id: str
    root: Path
    series: dict[str, Series] = field(default_factory=dict)
    fits: dict[str, Fit] = field(default_factory=dict)
    saturation: dict[str, Saturation] = field(default_factory=dict)
    ipr: dict[str, IprSweep] = field(default_factory=dict)
    nnsd: dict[str, NnsdData] = field(default_factory=dict)


def _read_table(path: Path, want: list[str]) -> dict[str, list[str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != want:
        raise BundleError(f"{path.name}: expected columns {','.join(want)}")
    table: dict[str, list[str]] = {name: [] for name in want}
    for row in rows[1:]:
        if len(row) != len(want):
            raise BundleError(f"{path.name}: ragged row {row!r}")
        for name, value in zip(want, row):
            table[name].append(value)
    return table


def _floats(table: dict[str, list[str]], name: str) -> np.ndarray:
    return np.array([float(v) for v in table[name]], dtype=np.float64)


def _load_series(path: Path, run_key: str) -> Series:
    t = _read_table(path, ["n", "C2", "C4", "C", "C_norm"])
    return Series(
        run_key,
        parse_run_key(run_key),
        _floats(t, "n"),
        _floats(t, "C2"),
        _floats(t, "C4"),
        _floats(t, "C"),
        _floats(t, "C_norm"),
    )


def _load_fits(path: Path) -> dict[str, Fit]:
    t = _read_table(path, ["run_key", "b", "n_lo", "n_hi", "residual"])
    return {
        key: Fit(float(b), int(lo), int(hi), float(res))
        for key, b, lo, hi, res in zip(
            t["run_key"], t["b"], t["n_lo"], t["n_hi"], t["residual"]
        )
    }


def _load_saturation(path: Path) -> dict[str, Saturation]:
    t = _read_table(path, ["run_key", "mean", "std", "osc_ratio"])
    return {
        key: Saturation(float(m), float(s), float(r))
        for key, m, s, r in zip(t["run_key"], t["mean"], t["std"], t["osc_ratio"])
    }


def _load_ipr(path: Path, group: str) -> IprSweep:
    t = _read_table(path, ["param", "xi", "xi_frac"])
    return IprSweep(group, _floats(t, "param"), _floats(t, "xi"), _floats(t, "xi_frac"))


def _load_spacings(path: Path) -> dict[int, np.ndarray]:
    t = _read_table(path, ["kick", "s"])
    kicks = np.array([int(k) for k in t["kick"]])
    s = _floats(t, "s")
    return {int(k): s[kicks == k] for k in np.unique(kicks)}


def _load_hist(path: Path) -> dict[int, Histogram]:
    t = _read_table(path, ["kick", "bin_center", "density", "P_W", "P_P"])
    kicks = np.array([int(k) for k in t["kick"]])
    cols = [_floats(t, c) for c in ("bin_center", "density", "P_W", "P_P")]
    return {
        int(k): Histogram(*(col[kicks == k] for col in cols))
        for k in np.unique(kicks)
    }


def load_bundle(root: Path, figure_id: str | None = None) -> Bundle:
    """Read and checksum-verify the bundle under ``root``.

    Raises BundleError naming the offending file on any missing CSV, digest
    mismatch, schema violation, or an empty manifest.
    """
    root = Path(root)
    manifest = root / "manifest.csv"
    if not manifest.is_file():
        raise BundleError(f"missing manifest: {manifest}")
    t = _read_table(manifest, ["figure_id", "run_key", "csv_path", "sha256"])
    if not t["figure_id"]:
        raise BundleError(f"empty bundle: {root}")

    fids = set(t["figure_id"])
    if len(fids) > 1:
        raise BundleError(f"manifest mixes figure ids {sorted(fids)}")
    fid = fids.pop()
    if figure_id is not None and fid != figure_id:
        raise BundleError(f"bundle under {root} is for {fid}, not {figure_id}")

    bundle = Bundle(fid, root)
    for run_key, name, digest in zip(t["run_key"], t["csv_path"], t["sha256"]):
        rel = Path(name)
        if rel.is_absolute() or ".." in rel.parts:
            raise BundleError(f"csv_path escapes the bundle: {name}")
        path = root / rel
        if not path.is_file():
            raise BundleError(f"missing CSV: {path}")
        if sha256_of(path) != digest:
            raise BundleError(f"checksum mismatch: {path}")

        if name == "fits.csv":
            bundle.fits = _load_fits(path)
        elif name == "saturation.csv":
            bundle.saturation = _load_saturation(path)
        elif name.startswith("otoc_"):
            bundle.series[run_key] = _load_series(path, run_key)
        elif name.startswith("ipr_"):
            bundle.ipr[run_key] = _load_ipr(path, run_key)
        elif name.startswith("nnsd_") and name.endswith("_spacings.csv"):
            data = bundle.nnsd.setdefault(
                run_key, NnsdData(run_key, parse_run_key(run_key))
            )
            data.spacings = _load_spacings(path)
        elif name.startswith("nnsd_") and name.endswith("_hist.csv"):
            data = bundle.nnsd.setdefault(
                run_key, NnsdData(run_key, parse_run_key(run_key))
            )
            data.hist = _load_hist(path)
        else:
            raise BundleError(f"unrecognized CSV in manifest: {name}")
    return bundle
