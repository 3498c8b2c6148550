"""Warm the on-disk run cache behind the acceptance tests and figure bundles.

Stages:
  accept  - every cached acceptance run, the unitarity/reflection invariant
            sweep, and the growth-fit timing sidecar
  figures - the full figure grids F2..F10 (superset of some accept runs)
  all     - both

The acceptance tests only read this cache; run this script once beforehand.
"""

from __future__ import annotations

import json
import math
import sys
import time
from pathlib import Path

import numpy as np

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

import accept_grid
from floquet_otoc import ChainParams, EvolutionState, QuenchProtocol
from floquet_otoc.algebra import reflection_permutation
from floquet_otoc.sweeps import figure_recipe, run_point


def log(msg: str) -> None:
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", flush=True)


def warm(configs, label: str) -> None:
    for i, cfg in enumerate(configs, 1):
        t0 = time.time()
        run_point(cfg, cache_dir=accept_grid.CACHE_DIR)
        dt = time.time() - t0
        how = "computed" if dt > 1.0 else "cached"
        log(f"{label} {i}/{len(configs)} {cfg.run_key()} [{how} {dt:.1f}s]")


def warm_growth_fits() -> None:
    """Criterion-bearing growth fits, with a wall-time sidecar.

    The sidecar is only (re)written when every run was computed fresh in this
    invocation, so cache hits cannot fake the timing.
    """
    configs = accept_grid.growth_fit_configs()
    per: dict[str, float] = {}
    fresh = True
    for i, cfg in enumerate(configs, 1):
        t0 = time.time()
        run_point(cfg, cache_dir=accept_grid.CACHE_DIR)
        dt = time.time() - t0
        per[cfg.run_key()] = round(dt, 3)
        if dt < 1.0:
            fresh = False
        log(f"growth-fit {i}/{len(configs)} {cfg.run_key()} [{dt:.1f}s]")
    if fresh:
        payload = {"total_seconds": round(sum(per.values()), 3), "runs": per}
        accept_grid.TIMING_FILE.write_text(json.dumps(payload, indent=1))
        log(f"growth-fit timing: {payload['total_seconds']:.0f}s total")
    elif not accept_grid.TIMING_FILE.exists():
        log("warning: cache was partially warm and no timing sidecar exists")


GRAM_KICKS = (1, 100, 200, 300, 400)


def unitarity_invariants(n_max: int = 400) -> None:
    """Evolve cumulative unitaries at N=12 and record invariant deviations.

    Per kick: max |[U, R]| entry (R = site reflection) and the max column-norm
    deviation (the diagonal of U U^dag - I). The full dense Gram matrix is
    sampled at GRAM_KICKS; every kick at D=4096 would be an O(D^3) GEMM each.
    """
    runs = {
        "linear": (
            ChainParams(N=12, J=1.0, tau=math.pi / 4),
            QuenchProtocol.linear(h_x0=1.0, h_z0=1.0, gamma=0.1),
        ),
        "periodic": (
            ChainParams(N=12, J=1.0, tau=math.pi / 16),
            QuenchProtocol.periodic(h_x0=4.0, h_z0=4.0, t_max=16 * math.pi),
        ),
    }
    out: dict[str, dict] = {}
    for tag, (params, protocol) in runs.items():
        t0 = time.time()
        perm = reflection_permutation(params.N)
        state = EvolutionState(params, protocol, None, track_unitary=True)
        max_comm = 0.0
        max_col = 0.0
        max_gram = 0.0
        for n in range(1, n_max + 1):
            state.advance()
            ur, ui = state.ur, state.ui
            dr = ur[:, perm] - ur[perm, :]
            di = ui[:, perm] - ui[perm, :]
            max_comm = max(max_comm, math.sqrt(float((dr * dr + di * di).max())))
            max_col = max(max_col, float(state.kern.max_colnorm_dev(ur, ui)))
            if n in GRAM_KICKS:
                gr = ur @ ur.T + ui @ ui.T
                gi = ui @ ur.T - ur @ ui.T
                np.fill_diagonal(gr, gr.diagonal() - 1.0)
                max_gram = max(max_gram, math.sqrt(float((gr * gr + gi * gi).max())))
                log(f"unitarity {tag} kick {n}: gram dev {max_gram:.3e}")
        out[tag] = {
            "N": params.N,
            "tau": params.tau,
            "n_max": n_max,
            "gram_kicks": list(GRAM_KICKS),
            "max_commutator_R": max_comm,
            "max_colnorm_dev": max_col,
            "max_gram_dev": max_gram,
            "seconds": round(time.time() - t0, 1),
        }
        log(
            f"unitarity {tag}: comm {max_comm:.3e} col {max_col:.3e} "
            f"gram {max_gram:.3e} [{out[tag]['seconds']}s]"
        )
    accept_grid.UNITARITY_FILE.write_text(json.dumps(out, indent=1))


def stage_accept() -> None:
    accept_grid.CACHE_DIR.mkdir(parents=True, exist_ok=True)
    warm_growth_fits()
    warm(accept_grid.saturation_linear_configs(), "sat-linear")
    warm(accept_grid.periodic_growth_configs(), "periodic-growth")
    warm(accept_grid.nnsd_linear_configs(), "nnsd-linear")
    warm(accept_grid.nnsd_periodic_configs(), "nnsd-periodic")
    warm(accept_grid.saturation_periodic_configs(), "sat-periodic")
    unitarity_invariants()
    # by far the longest block: the full-series IPR grids (criterion 6)
    warm(accept_grid.ipr_configs(), "ipr")


def stage_figures() -> None:
    accept_grid.CACHE_DIR.mkdir(parents=True, exist_ok=True)
    for fid in ("F2", "F3", "F4", "F5", "F6", "F7", "F8", "F9", "F10"):
        warm(list(figure_recipe(fid).configs), fid)


def main() -> None:
    stage = sys.argv[1] if len(sys.argv) > 1 else "all"
    t0 = time.time()
    if stage in ("accept", "all"):
        stage_accept()
    if stage in ("figures", "all"):
        stage_figures()
    if stage not in ("accept", "figures", "all"):
        sys.exit(f"unknown stage {stage!r} (accept | figures | all)")
    log(f"done: {stage} in {(time.time() - t0) / 60:.1f} min")


if __name__ == "__main__":
    main()
