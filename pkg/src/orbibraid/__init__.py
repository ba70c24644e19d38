"""Presentations, homomorphisms and exactness checks for surface orbifold pure braid groups."""
from __future__ import annotations

from .abelian import AbelianInvariants, abelianization, h1_right_exactness_check, smith_normal_form
from .freeprod import FreeProductGroup, build_fiber_group, is_trivial, normal_form
from .homs import (
    GroupHom,
    build_bar_hom,
    build_fiber_inclusion,
    build_projection_hom,
    check_relators_die,
    check_square_commutes,
    compose,
)
from .presentation import OrbifoldSpec, Presentation, build_orbifold_pbn, build_surface_pbn, load_presentation, save_presentation
from .verify import Budgets, SequenceReport, sweep, validate_schema, verify_four_term, verify_remark_k
from .words import GeneratorSymbol, Word, parse_word, sym

__version__ = "0.1.0"

__all__ = [
    "AbelianInvariants",
    "Budgets",
    "FreeProductGroup",
    "GeneratorSymbol",
    "GroupHom",
    "OrbifoldSpec",
    "Presentation",
    "SequenceReport",
    "Word",
    "abelianization",
    "build_bar_hom",
    "build_fiber_group",
    "build_fiber_inclusion",
    "build_orbifold_pbn",
    "build_projection_hom",
    "build_surface_pbn",
    "check_relators_die",
    "check_square_commutes",
    "compose",
    "h1_right_exactness_check",
    "is_trivial",
    "load_presentation",
    "normal_form",
    "parse_word",
    "save_presentation",
    "smith_normal_form",
    "sweep",
    "sym",
    "validate_schema",
    "verify_four_term",
    "verify_remark_k",
]
