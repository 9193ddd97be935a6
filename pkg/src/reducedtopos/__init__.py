"""Finite context posets, selector-induced sheaf toposes and their quantum semantics."""
from .contexts import Context, ContextPoset, Selector, build_poset, selector_from_operators
from .errors import ToposError
from .operators import BorelSelection, DensityMatrix, spectral_projection
from .semantics import (
    ClopenSub,
    daseinize_j,
    daseinize_presheaf,
    truth_object_rho_r,
    valuate,
    valuate_j,
)
from .tolerance import configure, settings

__version__ = "0.1.0"

__all__ = [
    "BorelSelection",
    "ClopenSub",
    "Context",
    "ContextPoset",
    "DensityMatrix",
    "Selector",
    "ToposError",
    "build_poset",
    "configure",
    "daseinize_j",
    "daseinize_presheaf",
    "selector_from_operators",
    "settings",
    "spectral_projection",
    "truth_object_rho_r",
    "valuate",
    "valuate_j",
]
