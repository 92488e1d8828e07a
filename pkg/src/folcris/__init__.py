"""Exact computations for foliations on affine varieties over Z/p^n."""

__version__ = "0.1.0"

from .zmod import RingDescriptor, UsageError  # noqa: E402
from .poly import VarietyPresentation, LocalizedPoly  # noqa: E402
from .forms import Form, d, wedge  # noqa: E402
from .syntax import parse_form, parse_poly, format_form  # noqa: E402
from .derham import derham_complex, truncate, find_primitive, supported_complex  # noqa: E402
from .foliation import (  # noqa: E402
    Distribution,
    check_integrability,
    filtration_level,
    foliated_complex,
    graded_piece,
    bott_connection,
)
from .chernweil import (  # noqa: E402
    Connection,
    InvariantPolynomial,
    chern_form,
    phi_form,
    transgression,
    residue,
    verify_bott_vanishing,
    verify_theorem_t1,
)
from .crystalline import lift_presentation, lift_foliation, verify_c4, crystalline_cohomology  # noqa: E402
