"""Text formats: signature files, morphism expressions, rewrite rules.

Expression grammar (ASCII core, Unicode synonyms in parentheses)::

    expr    := tensor { (";" | "∘" | compose-alias) tensor }      # left-assoc
    tensor  := atom { ("*" | "⊗" | tensor-alias) atom }           # left-assoc
    atom    := "id" "[" obj "]"
             | "alpha" "[" obj "," obj "," obj "]"   (also alpha_inv)
             | "lunit" "[" obj "]" | "runit" "[" obj "]" (and _inv forms)
             | "braid" "[" obj "," obj "]"           (also braid_inv)
             | "inv" "(" name ")"
             | "?" name          # metavariable, rule files only
             | name | "(" expr ")"
    obj     := objatom { ("*" | "⊗") objatom }                    # left-assoc
    objatom := "I" | "?" name | name | "(" obj ")"

Composition binds looser than tensor; both default to the left.
Comments run from ``#`` to end of line.  ``print_expr`` emits text whose
parse is exactly the input term: parentheses appear around any compound
subterm except a same-operator chain extending to the left, so mixed
operators are always bracketed explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    Assoc,
    AssocInv,
    BackendBlock,
    Braid,
    BraidInv,
    CatError,
    Comp,
    Id,
    Inv,
    LUnit,
    LUnitInv,
    LEVELS,
    MorDecl,
    MorExpr,
    MorGen,
    MorType,
    MorVar,
    ObjExpr,
    ObjGen,
    ObjTensor,
    ObjVar,
    RESERVED_NAMES,
    RUnit,
    RUnitInv,
    Signature,
    Tensor,
    UNIT,
    UndeclaredName,
    Unit,
    UnknownLevel,
    comp_chain,
    typecheck,
)


class ParseError(CatError):
    """Malformed source text (lexical or grammatical)."""


class IllTypedRule(CatError):
    """A rewrite rule whose sides do not typecheck to a shared boundary."""


class FreeMetavarInRhs(CatError):
    """A rule rhs mentions a metavariable absent from lhs and declarations."""


@dataclass(frozen=True)
class SourceSpan:
    """Location of a token or phrase in its source text."""

    line: int
    column: int
    start: int
    end: int

    def __str__(self):
        return f"line {self.line}, column {self.column}"


@dataclass(frozen=True)
class Token:
    kind: str  # NAME METAVAR COMPOSE TENSOR LBRACK RBRACK LPAREN RPAREN COMMA ARROW DARROW COLON EQUALS STRING EOF
    text: str
    span: SourceSpan


_SIMPLE = {
    ";": "COMPOSE",
    "∘": "COMPOSE",
    "*": "TENSOR",
    "⊗": "TENSOR",
    "[": "LBRACK",
    "]": "RBRACK",
    "(": "LPAREN",
    ")": "RPAREN",
    ",": "COMMA",
    ":": "COLON",
    "=": "EQUALS",
}

STRUCTURAL_KEYWORDS = {
    "alpha": (Assoc, 3),
    "alpha_inv": (AssocInv, 3),
    "lunit": (LUnit, 1),
    "lunit_inv": (LUnitInv, 1),
    "runit": (RUnit, 1),
    "runit_inv": (RUnitInv, 1),
    "braid": (Braid, 2),
    "braid_inv": (BraidInv, 2),
}


def _is_name_start(ch: str) -> bool:
    return ch.isalpha() and ch not in "∘⊗" or ch == "_"


def _is_name_char(ch: str) -> bool:
    return (ch.isalnum() and ch not in "∘⊗") or ch in "_'"


def tokenize(text: str, aliases: dict[str, str] | None = None) -> list[Token]:
    """Lex ``text``; alias tokens are rewritten to their builtins."""

    aliases = aliases or {}
    symbol_aliases = sorted(
        (tok for tok in aliases if not _is_name_start(tok[0])), key=len, reverse=True
    )
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        span_start = (line, col, i)

        def tok(kind: str, text_: str, width: int) -> None:
            nonlocal i, col
            tokens.append(Token(kind, text_, SourceSpan(span_start[0], span_start[1],
                                                        span_start[2], span_start[2] + width)))
            i += width
            col += width

        matched = False
        for alias in symbol_aliases:
            if text.startswith(alias, i):
                kind = {"compose": "COMPOSE", "tensor": "TENSOR", "id": "NAME"}[aliases[alias]]
                tok(kind, "id" if aliases[alias] == "id" else alias, len(alias))
                matched = True
                break
        if matched:
            continue
        if text.startswith("->", i):
            tok("ARROW", "->", 2)
            continue
        if text.startswith("=>", i):
            tok("DARROW", "=>", 2)
            continue
        if ch in _SIMPLE:
            tok(_SIMPLE[ch], ch, 1)
            continue
        if ch == "?":
            j = i + 1
            while j < n and _is_name_char(text[j]):
                j += 1
            if j == i + 1:
                raise ParseError("'?' must be followed by a metavariable name",
                                 span=SourceSpan(line, col, i, i + 1))
            tok("METAVAR", text[i + 1:j], j - i)
            continue
        if ch == '"':
            j = i + 1
            while j < n and text[j] != '"':
                j += 1
            if j >= n:
                raise ParseError("unterminated string", span=SourceSpan(line, col, i, n))
            tok("STRING", text[i + 1:j], j - i + 1)
            continue
        if _is_name_start(ch):
            j = i
            while j < n and _is_name_char(text[j]):
                j += 1
            word = text[i:j]
            target = aliases.get(word)
            if target == "compose":
                tok("COMPOSE", word, len(word))
            elif target == "tensor":
                tok("TENSOR", word, len(word))
            elif target == "id":
                tok("NAME", "id", len(word))
            else:
                tok("NAME", word, len(word))
            continue
        raise ParseError(f"unexpected character {ch!r}", span=SourceSpan(line, col, i, i + 1))
    tokens.append(Token("EOF", "", SourceSpan(line, col, n, n)))
    return tokens


class _TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind:
            raise ParseError(
                f"expected {what or kind}, found {t.text!r}" if t.kind != "EOF"
                else f"expected {what or kind}, found end of input",
                span=t.span,
            )
        return self.next()


class _ExprParser:
    """Recursive-descent parser for morphism and object expressions."""

    def __init__(self, tokens: list[Token], allow_metavars: bool = False):
        self.ts = _TokenStream(tokens)
        self.allow_metavars = allow_metavars
        self.spans: dict[int, SourceSpan] = {}

    def _note(self, term, start: SourceSpan, end: SourceSpan):
        self.spans[id(term)] = SourceSpan(start.line, start.column, start.start, end.end)
        return term

    def parse_expr(self) -> MorExpr:
        start = self.ts.peek().span
        term = self.parse_tensor()
        while self.ts.peek().kind == "COMPOSE":
            self.ts.next()
            rhs = self.parse_tensor()
            term = self._note(Comp(term, rhs), start, self.spans[id(rhs)])
        return term

    def parse_tensor(self) -> MorExpr:
        start = self.ts.peek().span
        term = self.parse_atom()
        while self.ts.peek().kind == "TENSOR":
            self.ts.next()
            rhs = self.parse_atom()
            term = self._note(Tensor(term, rhs), start, self.spans[id(rhs)])
        return term

    def parse_atom(self) -> MorExpr:
        t = self.ts.peek()
        if t.kind == "LPAREN":
            self.ts.next()
            term = self.parse_expr()
            end = self.ts.expect("RPAREN", "')'")
            self.spans[id(term)] = SourceSpan(t.span.line, t.span.column, t.span.start, end.span.end)
            return term
        if t.kind == "METAVAR":
            if not self.allow_metavars:
                raise ParseError("metavariables are only allowed in rule files", span=t.span)
            self.ts.next()
            return self._note(MorVar(t.text), t.span, t.span)
        if t.kind != "NAME":
            raise ParseError(f"expected a morphism, found {t.text!r}", span=t.span)
        self.ts.next()
        name = t.text
        if name == "id":
            self.ts.expect("LBRACK", "'['")
            obj = self.parse_obj()
            end = self.ts.expect("RBRACK", "']'")
            return self._note(Id(obj), t.span, end.span)
        if name in STRUCTURAL_KEYWORDS:
            cls, arity = STRUCTURAL_KEYWORDS[name]
            self.ts.expect("LBRACK", "'['")
            args = [self.parse_obj()]
            for _ in range(arity - 1):
                self.ts.expect("COMMA", "','")
                args.append(self.parse_obj())
            end = self.ts.expect("RBRACK", "']'")
            return self._note(cls(*args), t.span, end.span)
        if name == "inv":
            self.ts.expect("LPAREN", "'('")
            inner = self.ts.expect("NAME", "a generator name")
            end = self.ts.expect("RPAREN", "')'")
            return self._note(Inv(inner.text), t.span, end.span)
        if name == "I":
            raise ParseError("'I' is an object, not a morphism", span=t.span)
        return self._note(MorGen(name), t.span, t.span)

    def parse_obj(self) -> ObjExpr:
        start = self.ts.peek().span
        obj = self.parse_objatom()
        while self.ts.peek().kind == "TENSOR":
            self.ts.next()
            rhs = self.parse_objatom()
            obj = self._note(ObjTensor(obj, rhs), start, self.spans[id(rhs)])
        return obj

    def parse_objatom(self) -> ObjExpr:
        t = self.ts.peek()
        if t.kind == "LPAREN":
            self.ts.next()
            obj = self.parse_obj()
            end = self.ts.expect("RPAREN", "')'")
            self.spans[id(obj)] = SourceSpan(t.span.line, t.span.column, t.span.start, end.span.end)
            return obj
        if t.kind == "METAVAR":
            if not self.allow_metavars:
                raise ParseError("metavariables are only allowed in rule files", span=t.span)
            self.ts.next()
            return self._note(ObjVar(t.text), t.span, t.span)
        if t.kind != "NAME":
            raise ParseError(f"expected an object, found {t.text!r}", span=t.span)
        self.ts.next()
        if t.text == "I":
            return self._note(UNIT, t.span, t.span)
        if t.text in RESERVED_NAMES:
            raise ParseError(f"{t.text!r} cannot be used as an object", span=t.span)
        return self._note(ObjGen(t.text), t.span, t.span)


def _attach_span(err: CatError, spans: dict[int, SourceSpan]) -> CatError:
    if err.span is None and err.term is not None:
        err.span = spans.get(id(err.term))
    return err


def parse_expr(text: str, sig: Signature) -> MorExpr:
    """Parse a morphism expression and typecheck it against ``sig``."""

    parser = _ExprParser(tokenize(text, sig.aliases))
    term = parser.parse_expr()
    parser.ts.expect("EOF", "end of expression")
    try:
        typecheck(term, sig)
    except CatError as err:
        raise _attach_span(err, parser.spans)
    return term


def parse_obj(text: str, sig: Signature) -> ObjExpr:
    """Parse an object expression (generator names checked against ``sig``)."""

    parser = _ExprParser(tokenize(text, sig.aliases))
    obj = parser.parse_obj()
    parser.ts.expect("EOF", "end of expression")
    for name in _obj_names(obj):
        if not sig.is_object(name):
            raise UndeclaredName(f"undeclared object {name!r}")
    return obj


def _obj_names(obj: ObjExpr) -> list[str]:
    if isinstance(obj, ObjGen):
        return [obj.name]
    if isinstance(obj, ObjTensor):
        return _obj_names(obj.left) + _obj_names(obj.right)
    return []


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------


def print_obj(obj: ObjExpr) -> str:
    """Canonical object text; parses back to exactly ``obj``."""

    def go(o: ObjExpr, right_child: bool) -> str:
        if isinstance(o, Unit):
            return "I"
        if isinstance(o, ObjGen):
            return o.name
        if isinstance(o, ObjVar):
            return "?" + o.name
        body = f"{go(o.left, False)} * {go(o.right, True)}"
        return f"({body})" if right_child else body

    return go(obj, False)


def print_expr(term: MorExpr) -> str:
    """Canonical expression text; parses back to exactly ``term``.

    Every compound child is parenthesized unless it continues a chain of
    the same operator to the left, so association and the comp/tensor
    nesting are always visible in the output.
    """

    def atom_text(t: MorExpr) -> str:
        if isinstance(t, MorGen):
            return t.name
        if isinstance(t, MorVar):
            return "?" + t.name
        if isinstance(t, Id):
            return f"id[{print_obj(t.obj)}]"
        if isinstance(t, Inv):
            return f"inv({t.name})"
        for kw, (cls, _) in STRUCTURAL_KEYWORDS.items():
            if type(t) is cls:
                args = [getattr(t, f) for f in ("a", "b", "c") if hasattr(t, f)]
                return f"{kw}[{','.join(print_obj(a) for a in args)}]"
        raise TypeError(f"not an atom: {t!r}")

    def go(t: MorExpr, parent: str | None, side: str) -> str:
        if isinstance(t, Comp):
            body = f"{go(t.first, 'comp', 'left')} ; {go(t.second, 'comp', 'right')}"
            plain = parent is None or (parent == "comp" and side == "left")
            return body if plain else f"({body})"
        if isinstance(t, Tensor):
            body = f"{go(t.top, 'tensor', 'left')} * {go(t.bottom, 'tensor', 'right')}"
            plain = parent is None or (parent == "tensor" and side == "left")
            return body if plain else f"({body})"
        return atom_text(t)

    return go(term, None, "left")


# ---------------------------------------------------------------------------
# Signature files
# ---------------------------------------------------------------------------

_TOP_KEYWORDS = {"category", "object", "mor", "iso", "alias", "backend"}
_BLOCK_KEYWORDS = {"dim", "mat", "inv", "size", "rel", "tolerance"}


def _strip_comment(line: str) -> str:
    out = []
    in_string = False
    for ch in line:
        if ch == '"':
            in_string = not in_string
        if ch == "#" and not in_string:
            break
        out.append(ch)
    return "".join(out).rstrip()


def _logical_lines(text: str):
    """Yield (line_no, text) with bracket-continuation joining."""

    raw = text.split("\n")
    i = 0
    while i < len(raw):
        line = _strip_comment(raw[i])
        start = i + 1
        depth = sum(line.count(b) for b in "[({") - sum(line.count(b) for b in "])}")
        while depth > 0 and i + 1 < len(raw):
            i += 1
            nxt = _strip_comment(raw[i])
            line += " " + nxt.strip()
            depth += sum(nxt.count(b) for b in "[({") - sum(nxt.count(b) for b in "])}")
        i += 1
        if line.strip():
            yield start, line.strip()


def parse_signature(text: str) -> Signature:
    """Parse a line-oriented signature file.

    Recognized forms::

        category symmetric
        object A
        mor f : A -> B
        iso g : A * B -> B * A
        alias "x" = compose          # or tensor, id
        backend matrix               # opens an opaque backend block
        dim A = 2                    # block content, owned by semantics

    Backend block content is collected verbatim and interpreted by the
    semantics module.
    """

    level = "plain"
    level_seen = False
    objects: list[str] = []
    morphisms: list[MorDecl] = []
    aliases: dict[str, str] = {}
    blocks: list[tuple[str, list[tuple[int, str]]]] = []
    current_block: list[tuple[int, str]] | None = None

    for line_no, line in _logical_lines(text):
        word = line.split(None, 1)[0]
        span = SourceSpan(line_no, 1, 0, len(line))
        if word in _TOP_KEYWORDS:
            current_block = None
        if word == "category":
            level = line.split(None, 1)[1].strip() if " " in line else ""
            level_seen = True
            if level not in LEVELS:
                raise UnknownLevel(f"unknown category level {level!r}", span=span)
        elif word == "object":
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected: object NAME", span=span)
            objects.append(parts[1])
        elif word in ("mor", "iso"):
            rest = line[len(word):].strip()
            if ":" not in rest:
                raise ParseError(f"expected: {word} NAME : OBJ -> OBJ", span=span)
            name, typ = rest.split(":", 1)
            name = name.strip()
            if "->" not in typ:
                raise ParseError("morphism type needs '->'", span=span)
            dom_s, cod_s = typ.split("->", 1)
            dom = _parse_obj_raw(dom_s.strip(), span)
            cod = _parse_obj_raw(cod_s.strip(), span)
            morphisms.append(MorDecl(name, dom, cod, iso=(word == "iso")))
        elif word == "alias":
            toks = tokenize(line[len(word):].strip())
            if (len(toks) != 4 or toks[0].kind != "STRING" or toks[1].kind != "EQUALS"
                    or toks[2].kind != "NAME"):
                raise ParseError('expected: alias "TOKEN" = compose|tensor|id', span=span)
            target = toks[2].text
            if target not in ("compose", "tensor", "id"):
                raise ParseError(f"alias target must be compose, tensor or id, not {target!r}",
                                 span=span)
            aliases[toks[0].text] = target
        elif word == "backend":
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected: backend matrix|rel", span=span)
            blocks.append((parts[1], []))
            current_block = blocks[-1][1]
        elif current_block is not None and word in _BLOCK_KEYWORDS:
            current_block.append((line_no, line))
        else:
            raise ParseError(f"unrecognized declaration {word!r}", span=span)

    if not level_seen:
        raise ParseError("signature file must declare a category level")
    sig = Signature(
        level=level,
        objects=tuple(objects),
        morphisms=tuple(morphisms),
        aliases=aliases,
        backend_blocks=tuple(BackendBlock(kind, tuple(entries)) for kind, entries in blocks),
    )
    return sig


def _parse_obj_raw(text: str, span: SourceSpan) -> ObjExpr:
    parser = _ExprParser(tokenize(text))
    try:
        obj = parser.parse_obj()
        parser.ts.expect("EOF", "end of object")
    except ParseError as err:
        err.span = err.span or span
        raise
    return obj


# ---------------------------------------------------------------------------
# Rule files
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RewriteRule:
    """One rewrite rule: a composition-chain pattern and a replacement."""

    name: str
    metavars: tuple[tuple[str, MorType], ...]
    lhs: MorExpr
    rhs: MorExpr

    @property
    def lhs_chain(self) -> list[MorExpr]:
        return comp_chain(self.lhs)

    def metavar_types(self) -> dict[str, MorType]:
        return dict(self.metavars)


@dataclass(frozen=True)
class RuleFile:
    rules: tuple[RewriteRule, ...]

    def rule(self, name: str) -> RewriteRule:
        for r in self.rules:
            if r.name == name:
                return r
        raise CatError(f"no rule named {name!r} in rule file")


def _collect_metavars(term) -> set[str]:
    found: set[str] = set()

    def walk(t):
        if isinstance(t, (MorVar, ObjVar)):
            found.add(t.name)
        elif isinstance(t, (Comp, Tensor)):
            walk(t.first if isinstance(t, Comp) else t.top)
            walk(t.second if isinstance(t, Comp) else t.bottom)
        elif isinstance(t, Id):
            walk_obj(t.obj)
        elif isinstance(t, (Assoc, AssocInv)):
            walk_obj(t.a), walk_obj(t.b), walk_obj(t.c)
        elif isinstance(t, (LUnit, LUnitInv, RUnit, RUnitInv)):
            walk_obj(t.a)
        elif isinstance(t, (Braid, BraidInv)):
            walk_obj(t.a), walk_obj(t.b)

    def walk_obj(o):
        if isinstance(o, ObjVar):
            found.add(o.name)
        elif isinstance(o, ObjTensor):
            walk_obj(o.left)
            walk_obj(o.right)

    walk(term)
    return found


def parse_rules(text: str, sig: Signature) -> RuleFile:
    """Parse a rule file against ``sig``.

    Format::

        var ?x : A -> B
        rule r : ?x ; g => h

    ``var`` declarations accumulate and scope over all later rules.  Each
    rule's sides must typecheck under the declarations with the same
    boundary, its lhs must be a chain of composition-free elements, and
    every metavariable on the rhs must appear on the lhs or be declared.
    """

    declared: dict[str, MorType] = {}
    decl_order: list[tuple[str, MorType]] = []
    rules: list[RewriteRule] = []

    for line_no, line in _logical_lines(text):
        word = line.split(None, 1)[0]
        span = SourceSpan(line_no, 1, 0, len(line))
        if word == "var":
            toks = tokenize(line[len(word):].strip())
            ts = _TokenStream(toks)
            mv = ts.expect("METAVAR", "a metavariable")
            ts.expect("COLON", "':'")
            parser = _ExprParser(toks, allow_metavars=True)
            parser.ts = ts
            dom = parser.parse_obj()
            ts.expect("ARROW", "'->'")
            cod = parser.parse_obj()
            ts.expect("EOF", "end of declaration")
            if mv.text in declared:
                raise ParseError(f"metavariable ?{mv.text} declared twice", span=span)
            declared[mv.text] = MorType(dom, cod)
            decl_order.append((mv.text, declared[mv.text]))
        elif word == "rule":
            rest = line[len(word):].strip()
            if ":" not in rest:
                raise ParseError("expected: rule NAME : LHS => RHS", span=span)
            name, body = rest.split(":", 1)
            name = name.strip()
            toks = tokenize(body, sig.aliases)
            parser = _ExprParser(toks, allow_metavars=True)
            lhs = parser.parse_expr()
            parser.ts.expect("DARROW", "'=>'")
            rhs = parser.parse_expr()
            parser.ts.expect("EOF", "end of rule")
            for el in comp_chain(lhs):
                if isinstance(el, Comp):
                    raise ParseError("rule lhs chain elements must be composition-free",
                                     span=span)
                if any(isinstance(sub, Comp) for sub in _tensor_leaves(el)):
                    raise ParseError("rule lhs chain elements must be composition-free",
                                     span=span)
            free = _collect_metavars(rhs) - _collect_metavars(lhs) - set(declared)
            if free:
                raise FreeMetavarInRhs(
                    f"rule {name!r}: metavariable(s) {', '.join(sorted(free))} "
                    f"unbound on the rhs", span=span)
            try:
                lt = typecheck(lhs, sig, metavars=declared)
                rt = typecheck(rhs, sig, metavars=declared)
            except CatError as err:
                raise IllTypedRule(f"rule {name!r}: {err}", span=err.span or span) from err
            if lt != rt:
                raise IllTypedRule(
                    f"rule {name!r}: lhs has boundary "
                    f"{print_obj(lt.dom)} -> {print_obj(lt.cod)} but rhs has "
                    f"{print_obj(rt.dom)} -> {print_obj(rt.cod)}", span=span)
            rules.append(RewriteRule(name, tuple(decl_order), lhs, rhs))
        else:
            raise ParseError(f"unrecognized rule-file declaration {word!r}", span=span)

    return RuleFile(tuple(rules))


def _tensor_leaves(term: MorExpr) -> list[MorExpr]:
    if isinstance(term, Tensor):
        return _tensor_leaves(term.top) + _tensor_leaves(term.bottom)
    return [term]
