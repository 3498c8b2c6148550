"""Figure rendering for archived OTOC/NNSD/IPR CSV bundles."""

from .bundle import Bundle, BundleError, load_bundle, parse_run_key
from .figures import FIGURE_IDS, build_figure, render_figure
from .models import poisson_pdf, wigner_dyson_pdf

__version__ = "0.1.0"

__all__ = [
    "Bundle",
    "BundleError",
    "FIGURE_IDS",
    "build_figure",
    "load_bundle",
    "parse_run_key",
    "poisson_pdf",
    "render_figure",
    "wigner_dyson_pdf",
    "__version__",
]
