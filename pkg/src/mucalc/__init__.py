"""mucalc: a desk-scale toolkit for the continuous modal mu-calculus."""

from .errors import (
    BudgetExceededError, InputError, MucalcError, UnknownVerdictError,
)
from .syntax import (
    And, Atom, Bottom, Box, Diamond, Formula, Mu, NegAtom, Nu, Or, Top,
    TOP, BOT, alpha_eq, canonicalize, classify_fragment, closure_identity_check,
    fl_closure, Fragment, free_names, is_clean, is_continuous_mucalc,
    is_fl_closed, is_tidy, negate, SubformulaIndex, substitute,
)
from .textio import parse_formula, print_formula, read_model, write_model
from .kripke import (
    FrameClass, KripkeModel, enumerate_models, frame_class_check, random_model,
)
from .semantics import (
    build_arena, eval_algebraic, model_check, model_check_equiv, solve_arena,
    trace_property_check,
)
from .filtration import (
    build_filtration, filtration_agreement_check, fmp_search, ml_translation,
    validate_filtration,
)
from .proofs import check_derivation, is_tautology_instance, soundness_sample
from .canonical import (
    build_canonical, completeness_pipeline, distinctness_check,
    enumerate_atoms, existence_check, name_expansion, sat_search,
    truth_lemma_check,
)

__version__ = "0.1.0"
