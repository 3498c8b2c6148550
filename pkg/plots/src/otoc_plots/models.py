"""Closed-form spacing densities drawn over NNSD histograms.

Deliberately duplicated from the simulation side: the overlays must render
from archived CSVs alone, with no simulation package installed. A render-time
cross-check compares these forms against the P_W / P_P columns stored in the
bundle, so the two copies cannot drift apart silently.
"""

from __future__ import annotations

import math

import numpy as np


def wigner_dyson_pdf(s: np.ndarray) -> np.ndarray:
    """P_W(s) = (pi s / 2) exp(-pi s^2 / 4)."""
    s = np.asarray(s, dtype=np.float64)
    return (math.pi * s / 2.0) * np.exp(-math.pi * s * s / 4.0)


def poisson_pdf(s: np.ndarray) -> np.ndarray:
    """P_P(s) = exp(-s)."""
    return np.exp(-np.asarray(s, dtype=np.float64))
