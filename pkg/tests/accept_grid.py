"""Shared run definitions behind the acceptance suite.

The heavy N=12 runs (hundreds of kicks each) are computed once, through the
on-disk run cache, by ``scripts/prewarm_acceptance.py``; the acceptance tests
rebuild identical configs from this module so the cache keys line up and the
tests only read results. Small-N checks run fresh inside the tests.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

from floquet_otoc import (
    AnalysisToggles,
    ChainParams,
    ObservableFamily,
    ObservableSpec,
    QuenchProtocol,
    RunConfig,
)
from floquet_otoc.sweeps import TAUS, figure_recipe, periodic_n_max

REPO_ROOT = Path(__file__).resolve().parent.parent
CACHE_DIR = Path(
    os.environ.get("FLOQUET_OTOC_ACCEPT_CACHE", REPO_ROOT / ".cache" / "acceptance")
)
TIMING_FILE = CACHE_DIR / "growth_fit_timing.json"
UNITARITY_FILE = CACHE_DIR / "unitarity_invariants.json"

SAT_KICKS = 400
SAT_WINDOW = (int(0.6 * SAT_KICKS), SAT_KICKS)  # last 40 percent


def growth_fit_configs() -> list[RunConfig]:
    """Linear-protocol growth fits (exponent interval + tau ordering)."""
    return list(figure_recipe("F2").configs)


def periodic_growth_configs() -> list[RunConfig]:
    """Periodic-protocol growth fits at t_max=8pi with the size-stability runs."""
    return list(figure_recipe("F7").configs)


def _last_40_window(n_max: int) -> tuple[int, int]:
    return (int(0.6 * n_max), n_max)


def saturation_linear_configs() -> list[RunConfig]:
    """Linear tau=pi/4 oscillation-ratio pair (integrable vs chaotic)."""
    return [
        RunConfig(
            params=ChainParams(N=12, J=1.0, tau=math.pi / 4),
            protocol=QuenchProtocol.linear(h_x0=hx0, h_z0=1.0, gamma=0.1),
            observable=ObservableSpec(ObservableFamily.BLOCK_X),
            n_max=SAT_KICKS,
            analyses=AnalysisToggles(saturation=True, sat_window=SAT_WINDOW),
            group="sat_linear",
            param=hx0,
        )
        for hx0 in (0.0, 1.0)
    ]


def saturation_periodic_configs() -> list[RunConfig]:
    """Periodic-protocol oscillation ordering: all families, all periods."""
    t_max = 16 * math.pi
    configs = []
    for family in ObservableFamily:
        for tau in TAUS:
            n_max = periodic_n_max(t_max, tau)
            for hx0 in (0.0, 1.0):
                configs.append(
                    RunConfig(
                        params=ChainParams(N=12, J=1.0, tau=tau),
                        protocol=QuenchProtocol.periodic(
                            h_x0=hx0, h_z0=4.0, t_max=t_max
                        ),
                        observable=ObservableSpec(family),
                        n_max=n_max,
                        analyses=AnalysisToggles(
                            saturation=True, sat_window=_last_40_window(n_max)
                        ),
                        group=f"sat_periodic_{family.value}",
                        param=hx0,
                    )
                )
    return configs


def ipr_configs() -> list[RunConfig]:
    """IPR trend grids (h_x0 sweep and quench-slope sweep per period)."""
    return list(figure_recipe("F5").configs)


def nnsd_linear_configs() -> list[RunConfig]:
    """Linear-protocol even-sector NNSD runs at tau=pi/4."""
    return list(figure_recipe("F6").configs)


NNSD_PERIODIC_KICKS = (2, 5, 10, 20, 40, 64)


def nnsd_periodic_configs() -> list[RunConfig]:
    """Periodic-protocol NNSD runs (Poisson-to-WD transition)."""
    tau = math.pi / 4
    t_max = 16 * math.pi
    return [
        RunConfig(
            params=ChainParams(N=12, J=1.0, tau=tau),
            protocol=QuenchProtocol.periodic(h_x0=hx0, h_z0=4.0, t_max=t_max),
            observable=ObservableSpec(ObservableFamily.BLOCK_X),
            n_max=max(NNSD_PERIODIC_KICKS),
            analyses=AnalysisToggles(otoc=False, nnsd_kicks=NNSD_PERIODIC_KICKS),
            group=f"nnsd_periodic_hx0={hx0:g}",
            param=hx0,
        )
        for hx0 in (0.0, 4.0)
    ]


def all_cached_configs() -> list[RunConfig]:
    """Every config the acceptance tests read from the cache."""
    return (
        growth_fit_configs()
        + periodic_growth_configs()
        + saturation_linear_configs()
        + saturation_periodic_configs()
        + ipr_configs()
        + nnsd_linear_configs()
        + nnsd_periodic_configs()
    )
