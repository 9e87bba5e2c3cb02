"""Polyhedral chains in the plane and the Cauchy theorems over them."""

from .chains import (
    Cell1,
    Cell2,
    Chain0,
    Chain1,
    Chain2,
    add,
    area_in_disk,
    boundary1,
    boundary2,
    coalesce,
    cone,
    is_closed,
    mass,
    pushforward,
    reverse,
    scale,
    split_cells,
    support,
)
from .closure import ClosureParams, ClosureReport, close_chain, closure_sequence
from .density import density_winding_check, signed_density, support_from_density
from .errors import (
    ChainError,
    ChainFormatError,
    NotClosedError,
    PreconditionError,
    QuadratureError,
    SingularityError,
)
from .forms import HoloFn, QuadratureSpec, integrate_area, integrate_form, parse_function
from .generators import (
    circle_chain,
    koch_chain,
    random_closed_chain,
    staircase_chain,
    vector_field_chain,
)
from .io import read_chain, write_chain
from .residue import numeric_residue, verify_cif, verify_cit, verify_residue
from .winding import component_map, winding_field, winding_number

__version__ = "0.1.0"
