"""Canonical layered normal forms deciding equality up to monoidal structure.

A term is flattened into a :class:`Sheet`: a list of layers over a list
of wires, with associators and unitors erased (their flattened domain
and codomain coincide) and generators, inverses and braidings kept as
opaque boxes.  :func:`canonicalize` slides every box as far left as the
wires allow and drops wire-only layers; two terms with the same
boundary are equal up to monoidal structure whenever their normal forms
are structurally identical.

``Equal`` results are sound for every lawful backend.  ``NotDecided``
results carry no information: the procedure is complete only for
equalities following from monoidal structure plus identity sliding.

Braiding boxes are keyed by their two flattened halves, so braidings
over differently bracketed but identically flattened objects are
identified, while braidings that split the same wire list at different
points stay distinct (they denote different permutations).  A braiding
with a unit-like half permutes nothing and is erased like the unitors.

Boxes with no input wires ("scalar" states) have no wire dependencies;
to keep canonicalization deterministic and order-independent they slide
left only through layers consisting entirely of wires, preserving their
vertical position.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    Assoc,
    AssocInv,
    Braid,
    BraidInv,
    Comp,
    Id,
    Inv,
    LUnit,
    LUnitInv,
    MorExpr,
    MorGen,
    ObjExpr,
    ObjGen,
    ObjTensor,
    RUnit,
    RUnitInv,
    Signature,
    Tensor,
    TypeMismatch,
    Unit,
    typecheck,
)

WireList = tuple[str, ...]


@dataclass(frozen=True)
class WireSlot:
    """One wire passing through a layer unchanged."""

    obj: str


@dataclass(frozen=True)
class BoxSlot:
    """A box consuming ``ins`` and producing ``outs`` inside one layer."""

    label: str
    ins: WireList
    outs: WireList


Slot = WireSlot | BoxSlot
Layer = tuple[Slot, ...]


@dataclass(frozen=True)
class Sheet:
    """Flattened diagram: layers of slots over an input wire list."""

    input: WireList
    layers: tuple[Layer, ...]


@dataclass(frozen=True)
class NormalForm:
    """Canonical sheet: every box at its earliest layer, no wire-only layers."""

    input: WireList
    output: WireList
    layers: tuple[Layer, ...]


@dataclass(frozen=True)
class Equal:
    """Decided equal; carries the shared normal form."""

    normal_form: NormalForm


@dataclass(frozen=True)
class NotDecided:
    """Not decided (NOT a disproof); carries both normal forms."""

    left: NormalForm
    right: NormalForm


def flatten_object(obj: ObjExpr) -> WireList:
    """Erase bracketing and units: the ordered generator names of ``obj``."""

    if isinstance(obj, Unit):
        return ()
    if isinstance(obj, ObjGen):
        return (obj.name,)
    if isinstance(obj, ObjTensor):
        return flatten_object(obj.left) + flatten_object(obj.right)
    raise TypeError(f"cannot flatten {obj!r}")


def slot_in(slot: Slot) -> WireList:
    return (slot.obj,) if isinstance(slot, WireSlot) else slot.ins


def slot_out(slot: Slot) -> WireList:
    return (slot.obj,) if isinstance(slot, WireSlot) else slot.outs


def layer_output(layer: Layer) -> WireList:
    out: tuple[str, ...] = ()
    for slot in layer:
        out += slot_out(slot)
    return out


def sheet_output(sheet: Sheet) -> WireList:
    return layer_output(sheet.layers[-1]) if sheet.layers else sheet.input


def _wire_layer(wires: WireList) -> Layer:
    return tuple(WireSlot(w) for w in wires)


def _braid_label(kind: str, half_a: WireList, half_b: WireList) -> str:
    return f"{kind}([{','.join(half_a)}],[{','.join(half_b)}])"


def sheet_of_term(term: MorExpr, sig: Signature) -> Sheet:
    """Flatten a well-typed term into a sheet.

    Identities and structural isomorphisms contribute no layers;
    generators, declared-iso inverses and braidings become single-box
    layers; composition concatenates layers and tensoring pads the
    shorter sheet with wire layers at its end, then joins layers
    sidewise (top slots first).
    """

    ty = typecheck(term, sig)

    def build(t: MorExpr) -> Sheet:
        if isinstance(t, Id):
            return Sheet(flatten_object(t.obj), ())
        if isinstance(t, (Assoc, AssocInv, LUnit, LUnitInv, RUnit, RUnitInv)):
            return Sheet(flatten_object(typecheck(t, sig).dom), ())
        if isinstance(t, MorGen):
            decl = sig.morphism(t.name)
            ins, outs = flatten_object(decl.dom), flatten_object(decl.cod)
            return Sheet(ins, ((BoxSlot(t.name, ins, outs),),))
        if isinstance(t, Inv):
            decl = sig.morphism(t.name)
            ins, outs = flatten_object(decl.cod), flatten_object(decl.dom)
            return Sheet(ins, ((BoxSlot(f"inv:{t.name}", ins, outs),),))
        if isinstance(t, Braid):
            fa, fb = flatten_object(t.a), flatten_object(t.b)
            if not fa or not fb:
                # one half is unit-like: the permutation is the identity
                # in every lawful backend, so the box is erased
                return Sheet(fa + fb, ())
            box = BoxSlot(_braid_label("braid", fa, fb), fa + fb, fb + fa)
            return Sheet(fa + fb, ((box,),))
        if isinstance(t, BraidInv):
            fa, fb = flatten_object(t.a), flatten_object(t.b)
            if not fa or not fb:
                return Sheet(fb + fa, ())
            box = BoxSlot(_braid_label("braid_inv", fa, fb), fb + fa, fa + fb)
            return Sheet(fb + fa, ((box,),))
        if isinstance(t, Comp):
            first = build(t.first)
            second = build(t.second)
            return Sheet(first.input, first.layers + second.layers)
        if isinstance(t, Tensor):
            top = build(t.top)
            bottom = build(t.bottom)
            t_layers = list(top.layers)
            b_layers = list(bottom.layers)
            while len(t_layers) < len(b_layers):
                t_layers.append(_wire_layer(layer_output(t_layers[-1]) if t_layers else top.input))
            while len(b_layers) < len(t_layers):
                b_layers.append(_wire_layer(layer_output(b_layers[-1]) if b_layers else bottom.input))
            layers = tuple(ta + tb for ta, tb in zip(t_layers, b_layers))
            return Sheet(top.input + bottom.input, layers)
        raise TypeError(f"cannot build a sheet from {t!r}")

    sheet = build(term)
    assert sheet.input == flatten_object(ty.dom)
    return sheet


def _slot_positions(layer: list[Slot]) -> list[tuple[int, int]]:
    """Input-boundary interval [start, end) of each slot."""

    spans = []
    pos = 0
    for slot in layer:
        w = len(slot_in(slot))
        spans.append((pos, pos + w))
        pos += w
    return spans


def _try_move(layers: list[list[Slot]], k: int, i: int) -> bool:
    """Move the box at ``layers[k][i]`` into layer ``k-1`` if wires permit."""

    box = layers[k][i]
    prev = layers[k - 1]
    start = sum(len(slot_in(s)) for s in layers[k][:i])
    width = len(box.ins)

    if width == 0:
        # scalar state: only a pure wire layer can absorb it
        if any(isinstance(s, BoxSlot) for s in prev):
            return False
        prev.insert(start, box)
        layers[k][i:i + 1] = [WireSlot(w) for w in box.outs]
        return True

    covering: list[int] = []
    pos = 0
    for j, slot in enumerate(prev):
        w = len(slot_out(slot))
        if pos < start + width and pos + w > start:
            if not isinstance(slot, WireSlot):
                return False
            covering.append(j)
        pos += w
    if len(covering) != width:
        return False
    j0 = covering[0]
    prev[j0:j0 + width] = [box]
    layers[k][i:i + 1] = [WireSlot(w) for w in box.outs]
    return True


def canonicalize(sheet: Sheet) -> NormalForm:
    """Slide every box as far left as possible, then drop wire-only layers.

    The result is independent of the order in which admissible slides
    are performed: wire-consuming boxes land at the layer just after the
    latest producer of any of their inputs, and scalar boxes stop at the
    first layer containing another box.
    """

    layers: list[list[Slot]] = [list(layer) for layer in sheet.layers]
    moved = True
    while moved:
        moved = False
        for k in range(1, len(layers)):
            i = 0
            while i < len(layers[k]):
                slot = layers[k][i]
                if isinstance(slot, BoxSlot) and _try_move(layers, k, i):
                    moved = True
                    i += len(slot.outs)
                else:
                    i += 1
    kept = [tuple(layer) for layer in layers if any(isinstance(s, BoxSlot) for s in layer)]
    output = layer_output(sheet.layers[-1]) if sheet.layers else sheet.input
    return NormalForm(sheet.input, output, tuple(kept))


def monoidal_eq(t1: MorExpr, t2: MorExpr, sig: Signature) -> Equal | NotDecided:
    """Decide equality of two same-boundary terms up to monoidal structure."""

    ty1 = typecheck(t1, sig)
    ty2 = typecheck(t2, sig)
    if ty1 != ty2:
        raise TypeMismatch(
            "terms do not share a boundary type: "
            f"{_ty_text(ty1)} vs {_ty_text(ty2)}"
        )
    nf1 = canonicalize(sheet_of_term(t1, sig))
    nf2 = canonicalize(sheet_of_term(t2, sig))
    if nf1 == nf2:
        return Equal(nf1)
    return NotDecided(nf1, nf2)


def _ty_text(ty) -> str:
    from .terms import obj_label

    return f"{obj_label(ty.dom)} -> {obj_label(ty.cod)}"


def dump_normal_form(nf: NormalForm) -> str:
    """Stable one-line textual dump, used by the CLI and golden tests."""

    def slot_text(slot: Slot) -> str:
        if isinstance(slot, WireSlot):
            return f"wire({slot.obj})"
        return f"{slot.label}([{','.join(slot.ins)}]->[{','.join(slot.outs)}])"

    layers = ", ".join("[" + "|".join(slot_text(s) for s in layer) + "]" for layer in nf.layers)
    return (f"in=[{','.join(nf.input)}]; layers=[{layers}]; out=[{','.join(nf.output)}]")


def check_normal_form(nf: NormalForm) -> None:
    """Assert the structural invariants of a normal form (test support).

    Checks boundary consistency layer by layer, absence of wire-only
    layers, and that every wire-consuming box sits exactly one layer
    after the latest box producing one of its inputs (earliest-possible
    placement).  Scalar boxes must be at layer 0 or behind a layer
    containing some box.
    """

    boundary = nf.input
    # wire position in the current boundary -> layer index of its producer
    prod_layer = {p: -1 for p in range(len(boundary))}
    for layer_idx, layer in enumerate(nf.layers):
        if not any(isinstance(s, BoxSlot) for s in layer):
            raise AssertionError(f"layer {layer_idx} is wire-only")
        ins = ()
        new_prod: dict[int, int] = {}
        pos_in = 0
        pos_out = 0
        for slot in layer:
            w_in, w_out = slot_in(slot), slot_out(slot)
            ins += w_in
            if isinstance(slot, BoxSlot):
                if len(w_in) > 0:
                    latest = max(prod_layer[p] for p in range(pos_in, pos_in + len(w_in)))
                    if layer_idx != latest + 1:
                        raise AssertionError(
                            f"box {slot.label} at layer {layer_idx}, expected {latest + 1}")
                else:
                    if layer_idx > 0 and not any(
                            isinstance(s, BoxSlot) for s in nf.layers[layer_idx - 1]):
                        raise AssertionError(f"scalar box {slot.label} behind wire-only layer")
                for q in range(pos_out, pos_out + len(w_out)):
                    new_prod[q] = layer_idx
            else:
                new_prod[pos_out] = prod_layer[pos_in]
            pos_in += len(w_in)
            pos_out += len(w_out)
        if ins != boundary:
            raise AssertionError(
                f"layer {layer_idx} consumes {ins}, boundary is {boundary}")
        boundary = layer_output(layer)
        prod_layer = new_prod
    if boundary != nf.output:
        raise AssertionError(f"final boundary {boundary} != output {nf.output}")
