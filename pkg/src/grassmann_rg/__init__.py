"""Exact workbench for fermionic effective actions on finite Grassmann algebras."""
from .algebra import (
    GeneratorSpace,
    GrassmannElement,
    ShapeError,
    SpaceMismatchError,
    component,
    degree_component,
    exp_even,
    log_near_one,
    multiply,
    rename,
    split_field,
)
from .gaussian import (
    Covariance,
    ValidationError,
    contract,
    convolve,
    integrate,
    integrate_product,
    pfaffian,
    unwick,
    wick_order,
)
from .seminorms import (
    ColourGeometry,
    ColourPreservingKernel,
    IntegrationConstants,
    N_alpha,
    combined_norm,
    improved_norm,
    seminorm_p,
    triple_bar_norm,
    verify_configuration,
)

__all__ = [
    "ColourGeometry",
    "ColourPreservingKernel",
    "IntegrationConstants",
    "N_alpha",
    "combined_norm",
    "improved_norm",
    "seminorm_p",
    "triple_bar_norm",
    "verify_configuration",
    "Covariance",
    "GeneratorSpace",
    "GrassmannElement",
    "ShapeError",
    "SpaceMismatchError",
    "ValidationError",
    "component",
    "contract",
    "convolve",
    "degree_component",
    "exp_even",
    "integrate",
    "integrate_product",
    "log_near_one",
    "multiply",
    "pfaffian",
    "rename",
    "split_field",
    "unwick",
    "wick_order",
]
