"""Basis-sensitive quantum control calculus: canonical distributions,
weak reduction, realizability typing, unitarity checking, and a small
surface language."""

from .basis import (
    BELL,
    HAD,
    KET_MINUS,
    KET_PLUS,
    NAMED_BASES,
    PHI_MINUS,
    PHI_PLUS,
    PSI_MINUS,
    PSI_PLUS,
    STD,
    BasisError,
    decompose,
    from_vector,
    in_span,
    lookup_basis,
    product_basis,
    qubit_arity,
    to_vector,
    validate_basis,
)
from .checker import (
    Binding,
    CheckError,
    Derivation,
    HarnessReport,
    HarnessStep,
    check,
    check_orthogonality,
    subject_reduction_harness,
    uses_sharp_binding,
)
from .core import (
    ABS,
    EPS,
    AbsBasis,
    App,
    Case,
    Ket,
    Lam,
    LetPair,
    Ortho,
    Pair,
    TermDist,
    Var,
    add,
    canonicalize,
    dist_eq,
    free_vars,
    inner_product,
    is_closed,
    mk_app,
    mk_case,
    mk_lam,
    mk_letpair,
    mk_pair,
    norm,
    phase_normalize,
    scale,
    set_eps,
    single,
    sub,
    term_eq,
    zero,
)
from .corpus import CorpusRow, format_rows, run_corpus
from .reduction import (
    NormalForm,
    Reduced,
    RuleTag,
    Stuck,
    Trace,
    evaluate,
    evaluate_value,
    step,
)
from .subst import SubstUndefined, apply_sigma, subst_basis, subst_dist
from .syntax import (
    Goal,
    ParseError,
    Program,
    load_program,
    parse_program,
    parse_term,
    parse_type,
    print_basis,
    print_term,
    print_type,
)
from .typesem import (
    Arrow,
    BasisType,
    Prod,
    Sharp,
    Undecidable,
    format_type,
    is_member,
    realizes,
    sharp_normalize,
    subtype,
    type_eq,
)
from .unitary import (
    UnitaryError,
    UnitaryReport,
    check_unitary,
    extract_matrix,
    matrix_apply,
    uncurry2,
)

__version__ = "0.1.0"
