"""Explicit terms for (symmetric) monoidal categories, with a
coherence-based normal form, rewriting tactics, matrix/relation
semantic oracles and string-diagram rendering."""

from .coherence import (
    Equal,
    NormalForm,
    NotDecided,
    Sheet,
    canonicalize,
    dump_normal_form,
    flatten_object,
    monoidal_eq,
    sheet_of_term,
)
from .parser import (
    ParseError,
    RewriteRule,
    RuleFile,
    SourceSpan,
    parse_expr,
    parse_rules,
    parse_signature,
    print_expr,
    print_obj,
)
from .render import LayoutNode, RenderConfig, emit_svg, emit_tikz, layout
from .semantics import (
    MatrixInstance,
    RelInstance,
    braid_matrix,
    check_coherence,
    eval_matrix,
    eval_rel,
    mat_equiv,
    matrix_instance,
    rel_instance,
)
from .tactics import (
    NotProved,
    Proved,
    assoc_rw,
    cancel_isos,
    cat_easy,
    cat_simpl,
    foliate,
    is_stack,
    partner,
    weak_foliate,
)
from .terms import (
    Assoc,
    AssocInv,
    Braid,
    BraidInv,
    CatError,
    Comp,
    CompositionMismatch,
    DuplicateName,
    Id,
    Inv,
    LUnit,
    LUnitInv,
    LevelViolation,
    MorDecl,
    MorExpr,
    MorGen,
    MorType,
    NotAnIso,
    NotInvertible,
    ObjExpr,
    ObjGen,
    ObjTensor,
    RUnit,
    RUnitInv,
    Signature,
    Tensor,
    TypeMismatch,
    UNIT,
    UndeclaredName,
    Unit,
    UnknownLevel,
    iso_inverse,
    structural_atoms,
    typecheck,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
