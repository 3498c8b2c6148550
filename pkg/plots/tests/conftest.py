"""Synthetic, schema-conformant bundles for loader and renderer tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from otoc_plots.bundle import sha256_of
from otoc_plots.models import poisson_pdf, wigner_dyson_pdf

TAU_NAMES = ("pi-16", "pi-6", "pi-4")


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(
            ",".join(c if isinstance(c, str) else f"{c:.12g}" for c in row)
        )
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_manifest(root: Path, fid: str, entries: list[tuple[str, Path]]) -> None:
    rows = [(fid, key, path.name, sha256_of(path)) for key, path in entries]
    write_csv(root / "manifest.csv", ["figure_id", "run_key", "csv_path", "sha256"], rows)


def linear_key(hx0: str, tau: str, n_max: int = 60, gamma: str = "0.1") -> str:
    return (
        f"linear_block-x_N12_tau={tau}_J=1_hz0=1_hx0={hx0}"
        f"_gamma={gamma}_nmax={n_max}"
    )


def _write_series(root: Path, key: str, n_max: int, scale: float) -> Path:
    n = np.arange(n_max + 1)
    c_norm = np.minimum((n / (scale * n_max)) ** 2, 1.2)
    c = c_norm * (4.0 / 144.0)
    path = root / f"otoc_{key}.csv"
    write_csv(
        path,
        ["n", "C2", "C4", "C", "C_norm"],
        zip(n, np.ones_like(c), 1.0 - c, c, c_norm),
    )
    return path


def growth_bundle(root: Path) -> Path:
    """An F2-like bundle: six growth series plus fits.csv."""
    entries = []
    fit_rows = []
    for hx0 in ("0", "1"):
        for i, tau in enumerate(TAU_NAMES):
            key = linear_key(hx0, tau)
            entries.append((key, _write_series(root, key, 60, 0.4 + 0.1 * i)))
            fit_rows.append((key, 2.0 + 0.05 * i, 1, 24, 1.3e-3))
    fits = root / "fits.csv"
    write_csv(fits, ["run_key", "b", "n_lo", "n_hi", "residual"], fit_rows)
    entries.append(("all", fits))
    write_manifest(root, "F2", entries)
    return root


def periodic_growth_bundle(root: Path) -> Path:
    """An F7-like bundle: size-stability runs plus the N=12 pair."""
    entries = []
    fit_rows = []
    for n_sites, hx0 in (("8", "0"), ("10", "0"), ("12", "0"), ("12", "1")):
        key = (
            f"periodic_block-x_N{n_sites}_tau=pi-4_J=1_hz0=4_hx0={hx0}"
            f"_tmax=8pi_nmax=32"
        )
        entries.append((key, _write_series(root, key, 32, 0.5)))
        fit_rows.append((key, 11.0, 1, 8, 2e-2))
    fits = root / "fits.csv"
    write_csv(fits, ["run_key", "b", "n_lo", "n_hi", "residual"], fit_rows)
    entries.append(("all", fits))
    write_manifest(root, "F7", entries)
    return root


def sweep_bundle(root: Path, fid: str = "F3") -> Path:
    """A saturation-sweep bundle: tau panels, h_x0-colored curves."""
    entries = []
    sat_rows = []
    for tau in TAU_NAMES:
        for hx0 in ("0", "0.5", "1"):
            key = linear_key(hx0, tau, n_max=50)
            entries.append((key, _write_series(root, key, 50, 0.3)))
            sat_rows.append((key, 0.9, 0.2, 0.22))
    sat = root / "saturation.csv"
    write_csv(sat, ["run_key", "mean", "std", "osc_ratio"], sat_rows)
    entries.append(("all", sat))
    write_manifest(root, fid, entries)
    return root


def slope_sweep_bundle(root: Path) -> Path:
    """An F4-like bundle: h_x0 panels, quench-slope-colored curves."""
    entries = []
    sat_rows = []
    for hx0 in ("0", "1"):
        for gamma in ("0", "0.2", "1"):
            key = linear_key(hx0, "pi-4", n_max=50, gamma=gamma)
            entries.append((key, _write_series(root, key, 50, 0.3)))
            sat_rows.append((key, 0.9, 0.2, 0.22))
    sat = root / "saturation.csv"
    write_csv(sat, ["run_key", "mean", "std", "osc_ratio"], sat_rows)
    entries.append(("all", sat))
    write_manifest(root, "F4", entries)
    return root


def ipr_bundle(root: Path) -> Path:
    """An F5-like bundle: h_x0 sweeps and slope sweeps per period."""
    entries = []
    taus = ("pi/16", "pi/6", "pi/4")
    params = np.array([0.0, 0.5, 1.0])
    for tau in taus:
        group = f"ipr_vs_hx0_tau={tau}"
        xi = np.array([5.0, 1.3, 1.8])
        path = root / f"ipr_{group.replace('/', '-')}.csv"
        write_csv(path, ["param", "xi", "xi_frac"], zip(params, xi, xi / xi.max()))
        entries.append((group, path))
    for hx0 in ("0", "1"):
        for tau in taus:
            group = f"ipr_vs_gamma_hx0={hx0}_tau={tau}"
            xi = np.array([4.0, 1.2, 1.1])
            path = root / f"ipr_{group.replace('/', '-')}.csv"
            write_csv(path, ["param", "xi", "xi_frac"], zip(params, xi, xi / xi.max()))
            entries.append((group, path))
    write_manifest(root, "F5", entries)
    return root


def nnsd_bundle(root: Path, p_w_offset: float = 0.0) -> Path:
    """An F6-like bundle; ``p_w_offset`` perturbs the stored P_W column."""
    rng = np.random.default_rng(7)
    centers = np.arange(0.2, 4.0, 0.4)
    entries = []
    for hx0 in ("0", "1"):
        key = linear_key(hx0, "pi-4", n_max=30)
        long_rows = []
        hist_rows = []
        for kick in (2, 30):
            spacings = rng.exponential(size=60)
            long_rows.extend((kick, s) for s in np.sort(spacings))
            density, _ = np.histogram(spacings, bins=10, range=(0.0, 4.0), density=True)
            p_w = wigner_dyson_pdf(centers) + p_w_offset
            p_p = poisson_pdf(centers)
            hist_rows.extend(zip([kick] * 10, centers, density, p_w, p_p))
        spath = root / f"nnsd_{key}_spacings.csv"
        write_csv(spath, ["kick", "s"], long_rows)
        hpath = root / f"nnsd_{key}_hist.csv"
        write_csv(hpath, ["kick", "bin_center", "density", "P_W", "P_P"], hist_rows)
        entries.extend([(key, spath), (key, hpath)])
    write_manifest(root, "F6", entries)
    return root


@pytest.fixture
def bundle_root(tmp_path: Path) -> Path:
    root = tmp_path / "bundle"
    root.mkdir()
    return root
