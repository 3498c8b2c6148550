"""Render the data figures F2..F10 from validated CSV bundles."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.cm import ScalarMappable
from matplotlib.colors import Normalize
from matplotlib.figure import Figure

from .bundle import Bundle, BundleError, Series, load_bundle
from .models import poisson_pdf, wigner_dyson_pdf

FIGURE_IDS = tuple(f"F{i}" for i in range(2, 11))
FORMATS = ("png", "svg")

# overlay curves are recomputed from closed forms; the bundle's stored
# columns must agree to this tolerance or the bundle is refused
MODEL_TOL = 1e-9


def _angle_value(text: str) -> float:
    """Numeric value of an angle field like ``pi-16``, ``pi/16``, or ``16pi``.

    Run keys spell fractions with a dash, group labels with a slash; both
    reach this helper.
    """
    if "pi" not in text:
        return float(text)
    head, _, den = text.partition("pi")
    value = (float(head) if head else 1.0) * math.pi
    return value / float(den.lstrip("-/")) if den else value


def _pretty_angle(text: str) -> str:
    return text.replace("pi", "π").replace("-", "/") if "pi" in text else text


def _series_sorted(bundle: Bundle, field: str, **match: str) -> list[Series]:
    picked = [
        s
        for s in bundle.series.values()
        if all(s.fields.get(k) == v for k, v in match.items())
    ]
    if not picked:
        raise BundleError(
            f"{bundle.figure_id} bundle has no OTOC series for {match or 'any run'}"
        )
    return sorted(picked, key=lambda s: _angle_value(s.fields[field]))


def _fit_label(bundle: Bundle, s: Series) -> str:
    fit = bundle.fits.get(s.run_key)
    return f"b={fit.b:.2f}" if fit is not None else "b=n/a"


def _growth_axis(ax, bundle: Bundle, curves: list[Series], label_of) -> None:
    for s in curves:
        keep = (s.n >= 1) & (s.C_norm > 0)
        ax.plot(s.n[keep], s.C_norm[keep], label=f"{label_of(s)}, {_fit_label(bundle, s)}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("kick n")
    ax.legend(fontsize=8)


def _build_f2(bundle: Bundle) -> Figure:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8), sharey=True)
    for ax, hx0 in zip(axes, ("0", "1")):
        curves = _series_sorted(bundle, "tau", hx0=hx0)
        _growth_axis(
            ax, bundle, curves, lambda s: f"τ={_pretty_angle(s.fields['tau'])}"
        )
        ax.set_title(f"$h_{{x0}}={hx0}$")
    axes[0].set_ylabel(r"$C(n)/C(\infty)$")
    fig.suptitle("OTOC growth, linear quench")
    fig.tight_layout()
    return fig


def _build_f7(bundle: Bundle) -> Figure:
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.8), sharey=True)
    sizes = _series_sorted(bundle, "N", hx0="0")
    sizes.sort(key=lambda s: int(s.fields["N"]))
    _growth_axis(axes[0], bundle, sizes, lambda s: f"N={s.fields['N']}")
    axes[0].set_title("$h_{x0}=0$, size stability")
    pair = _series_sorted(bundle, "hx0", N="12")
    _growth_axis(axes[1], bundle, pair, lambda s: f"$h_{{x0}}={s.fields['hx0']}$")
    axes[1].set_title("N=12")
    axes[0].set_ylabel(r"$C(n)/C(\infty)$")
    fig.suptitle("OTOC growth, periodic quench")
    fig.tight_layout()
    return fig


def _build_sweep(bundle: Bundle, panel_field: str, curve_field: str) -> Figure:
    panels = sorted(
        {s.fields[panel_field] for s in bundle.series.values()}, key=_angle_value
    )
    fig, axes = plt.subplots(
        1, len(panels), figsize=(3.6 * len(panels), 3.6), sharey=True, squeeze=False
    )
    values = sorted(
        {float(s.fields[curve_field]) for s in bundle.series.values()}
    )
    norm = Normalize(vmin=values[0], vmax=values[-1])
    cmap = plt.get_cmap("viridis")
    for ax, panel in zip(axes[0], panels):
        curves = _series_sorted(bundle, curve_field, **{panel_field: panel})
        for s in curves:
            v = float(s.fields[curve_field])
            ax.plot(s.n, s.C_norm, color=cmap(norm(v)), linewidth=1.0)
        ax.set_title(f"{panel_field}={_pretty_angle(panel)}")
        ax.set_xlabel("kick n")
    axes[0][0].set_ylabel(r"$C(n)/C(\infty)$")
    family = next(iter(bundle.series.values())).fields["family"]
    fig.suptitle(f"{family} saturation sweep")
    fig.colorbar(
        ScalarMappable(norm=norm, cmap=cmap), ax=axes[0], label=curve_field
    )
    return fig


def _build_f5(bundle: Bundle) -> Figure:
    hx_groups = {g: v for g, v in bundle.ipr.items() if "_vs_hx0_" in g}
    slope_groups = {g: v for g, v in bundle.ipr.items() if "_vs_gamma_" in g}
    if not hx_groups or not slope_groups:
        raise BundleError("F5 bundle is missing an IPR sweep panel")
    fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(9, 3.8))
    for group in sorted(hx_groups, key=lambda g: _angle_value(g.rsplit("=", 1)[1])):
        sweep = hx_groups[group]
        tau = _pretty_angle(group.rsplit("tau=", 1)[1])
        ax_a.plot(sweep.param, sweep.xi_frac, marker="o", label=f"τ={tau}")
    ax_a.set_xlabel("$h_{x0}$")
    ax_a.set_ylabel(r"$\xi$ / max $\xi$")
    ax_a.legend(fontsize=8)

    taus = sorted(
        {g.rsplit("tau=", 1)[1] for g in slope_groups}, key=_angle_value
    )
    colors = {t: f"C{i}" for i, t in enumerate(taus)}
    for group in sorted(slope_groups):
        sweep = slope_groups[group]
        hx0 = group.split("hx0=", 1)[1].split("_", 1)[0]
        tau = group.rsplit("tau=", 1)[1]
        ax_b.plot(
            sweep.param,
            sweep.xi_frac,
            marker="o",
            color=colors[tau],
            linestyle="-" if hx0 == "0" else "--",
            label=f"τ={_pretty_angle(tau)}, $h_{{x0}}={hx0}$",
        )
    ax_b.set_xlabel(r"$\Gamma$")
    ax_b.legend(fontsize=7)
    fig.suptitle("Fourier-spectrum IPR, linear quench")
    fig.tight_layout()
    return fig


def _check_models(data) -> None:
    for kick, hist in sorted(data.hist.items()):
        for name, stored, model in (
            ("P_W", hist.p_w, wigner_dyson_pdf(hist.bin_center)),
            ("P_P", hist.p_p, poisson_pdf(hist.bin_center)),
        ):
            dev = float(np.max(np.abs(stored - model))) if stored.size else 0.0
            if dev > MODEL_TOL:
                raise BundleError(
                    f"{data.run_key} kick {kick}: stored {name} deviates from "
                    f"the closed form by {dev:.3g}"
                )


def _build_f6(bundle: Bundle) -> Figure:
    if not bundle.nnsd:
        raise BundleError("F6 bundle has no NNSD tables")
    runs = sorted(bundle.nnsd.values(), key=lambda d: float(d.fields["hx0"]))
    for data in runs:
        _check_models(data)
    panels = [
        (data, kick)
        for data in runs
        for kick in (min(data.hist), max(data.hist))
    ]
    fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.4),
                             sharey=True, squeeze=False)
    for ax, (data, kick) in zip(axes[0], panels):
        hist = data.hist[kick]
        width = hist.bin_center[1] - hist.bin_center[0]
        ax.bar(hist.bin_center, hist.density, width=width, color="0.8",
               edgecolor="0.4", label="spacings")
        s = np.linspace(0.0, hist.bin_center[-1] + width / 2, 400)
        ax.plot(s, wigner_dyson_pdf(s), "C3-", label="$P_W$")
        ax.plot(s, poisson_pdf(s), "C0--", label="$P_P$")
        ax.set_title(f"$h_{{x0}}={data.fields['hx0']}$, kick {kick}")
        ax.set_xlabel("s")
    axes[0][0].set_ylabel("P(s)")
    axes[0][0].legend(fontsize=8)
    fig.suptitle("Even-sector NNSD")
    fig.tight_layout()
    return fig


def build_figure(bundle: Bundle) -> Figure:
    builders = {
        "F2": _build_f2,
        "F3": lambda b: _build_sweep(b, "tau", "hx0"),
        "F4": lambda b: _build_sweep(b, "hx0", "gamma"),
        "F5": _build_f5,
        "F6": _build_f6,
        "F7": _build_f7,
        "F8": lambda b: _build_sweep(b, "tau", "hx0"),
        "F9": lambda b: _build_sweep(b, "tau", "hx0"),
        "F10": lambda b: _build_sweep(b, "tau", "hx0"),
    }
    builder = builders.get(bundle.figure_id)
    if builder is None:
        raise BundleError(
            f"no renderer for {bundle.figure_id!r} (data figures are F2..F10)"
        )
    return builder(bundle)


def render_figure(
    figure_id: str,
    bundle_root: Path,
    outdir: Path,
    formats: tuple[str, ...] = FORMATS,
) -> list[Path]:
    """Render one figure from its bundle; returns the written image paths.

    The bundle is fully validated and the figure fully built before any
    image file is created, so a failing bundle writes nothing.
    """
    for ext in formats:
        if ext not in FORMATS:
            raise ValueError(f"unsupported format {ext!r} (png, svg)")
    bundle = load_bundle(Path(bundle_root), figure_id)
    fig = build_figure(bundle)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = []
    for ext in formats:
        path = outdir / f"{figure_id}.{ext}"
        fig.savefig(path, dpi=150)
        paths.append(path)
    plt.close(fig)
    return paths
