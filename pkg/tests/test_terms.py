"""Core term language: typechecking, atom enumeration, inverses."""

from random import Random

import pytest

from gen import random_term
from monocat.parser import parse_expr
from monocat.terms import (
    Assoc,
    AssocInv,
    Braid,
    BraidInv,
    Comp,
    CompositionMismatch,
    DuplicateName,
    Id,
    Inv,
    LevelViolation,
    LUnit,
    LUnitInv,
    MorDecl,
    MorGen,
    MorType,
    NotAnIso,
    NotInvertible,
    ObjGen,
    ObjTensor,
    RUnit,
    RUnitInv,
    Signature,
    Tensor,
    UNIT,
    UndeclaredName,
    UnknownLevel,
    comp_chain,
    iso_inverse,
    replace_chain_element,
    right_comp,
    structural_atoms,
    typecheck,
)

A, B, C = ObjGen("A"), ObjGen("B"), ObjGen("C")


def test_composition_typing(sig):
    f, g = MorGen("f"), MorGen("g")  # f: A -> B, g: B -> C
    assert typecheck(Comp(f, g), sig) == MorType(A, C)


def test_braid_typing(sig):
    assert typecheck(Braid(A, B), sig) == MorType(ObjTensor(A, B), ObjTensor(B, A))
    assert typecheck(BraidInv(A, B), sig) == MorType(ObjTensor(B, A), ObjTensor(A, B))


def test_composition_mismatch(sig):
    f = MorGen("f")
    with pytest.raises(CompositionMismatch) as exc:
        typecheck(Comp(f, f), sig)
    assert "B" in str(exc.value) and "A" in str(exc.value)


def test_structural_typing(sig):
    assert typecheck(Assoc(A, B, C), sig) == MorType(
        ObjTensor(ObjTensor(A, B), C), ObjTensor(A, ObjTensor(B, C)))
    assert typecheck(LUnit(A), sig) == MorType(ObjTensor(UNIT, A), A)
    assert typecheck(LUnitInv(A), sig) == MorType(A, ObjTensor(UNIT, A))
    assert typecheck(RUnit(A), sig) == MorType(ObjTensor(A, UNIT), A)
    assert typecheck(Id(A), sig) == MorType(A, A)


def test_inv_flips_declared_type(sig):
    assert typecheck(Inv("k"), sig) == MorType(B, A)


def test_inv_requires_iso(sig):
    with pytest.raises(NotAnIso):
        typecheck(Inv("f"), sig)


def test_undeclared_names(sig):
    with pytest.raises(UndeclaredName):
        typecheck(MorGen("nope"), sig)
    with pytest.raises(UndeclaredName):
        typecheck(Id(ObjGen("nope")), sig)


def test_level_violation():
    plain = Signature(level="plain", objects=("A",),
                      morphisms=(MorDecl("f", A, A),))
    with pytest.raises(LevelViolation):
        typecheck(LUnit(A), plain)
    mon = Signature(level="monoidal", objects=("A", "B"), morphisms=())
    typecheck(Assoc(A, B, A), mon)
    with pytest.raises(LevelViolation):
        typecheck(Braid(A, B), mon)


def test_signature_validation():
    with pytest.raises(UnknownLevel):
        Signature(level="cartesian")
    with pytest.raises(DuplicateName):
        Signature(objects=("A", "A"))
    with pytest.raises(DuplicateName):
        Signature(objects=("A",), morphisms=(MorDecl("A", A, A),))
    with pytest.raises(DuplicateName):
        Signature(objects=("id",))
    with pytest.raises(UndeclaredName):
        Signature(objects=("A",), morphisms=(MorDecl("f", A, B),))


def test_structural_atoms_order(sig):
    f, g, h = MorGen("f"), MorGen("g"), MorGen("h")
    assert structural_atoms(Tensor(Comp(f, g), h)) == [f, g, h]
    assert structural_atoms(Id(A)) == [Id(A)]
    assert structural_atoms(Comp(Assoc(A, B, C), f)) == [Assoc(A, B, C), f]


def test_iso_inverse_structural(sig):
    assert iso_inverse(Assoc(A, B, C), sig) == (AssocInv(A, B, C),)
    assert iso_inverse(LUnit(A), sig) == (LUnitInv(A),)
    assert iso_inverse(RUnitInv(A), sig) == (RUnit(A),)
    assert iso_inverse(Id(A), sig) == (Id(A),)


def test_iso_inverse_braid_symmetric(sig):
    inverses = iso_inverse(Braid(A, B), sig)
    assert set(inverses) == {BraidInv(A, B), Braid(B, A)}
    assert inverses[0] == BraidInv(A, B)


def test_iso_inverse_braid_braided_only():
    braided = Signature(level="braided", objects=("A", "B"))
    assert iso_inverse(Braid(A, B), braided) == (BraidInv(A, B),)


def test_iso_inverse_generators(sig):
    assert iso_inverse(MorGen("k"), sig) == (Inv("k"),)
    assert iso_inverse(Inv("k"), sig) == (MorGen("k"),)
    with pytest.raises(NotInvertible):
        iso_inverse(MorGen("f"), sig)


def test_iso_inverse_involution(sig):
    atoms = [Assoc(A, B, C), AssocInv(A, B, C), LUnit(A), LUnitInv(B), RUnit(C),
             RUnitInv(A), Braid(A, B), BraidInv(B, C), MorGen("k"), Inv("k"), Id(A)]
    for atom in atoms:
        canon = iso_inverse(atom, sig)[0]
        assert iso_inverse(canon, sig)[0] == atom
    # the extra symmetric pairing is itself symmetric
    assert Braid(B, A) in iso_inverse(Braid(A, B), sig)
    assert Braid(A, B) in iso_inverse(Braid(B, A), sig)


def test_typecheck_deterministic_on_random_terms(sig):
    rng = Random(7)
    for _ in range(100):
        term = random_term(rng, sig, max_leaves=8)
        assert typecheck(term, sig) == typecheck(term, sig)


def test_chain_helpers(sig):
    f, g, h = MorGen("f"), MorGen("g"), MorGen("h")
    chain = comp_chain(Comp(Comp(f, g), h))
    assert chain == [f, g, h]
    assert comp_chain(f) == [f]
    rebuilt = right_comp(chain, A)
    assert rebuilt == Comp(f, Comp(g, h))
    assert right_comp([], A) == Id(A)
    term = Comp(Comp(f, g), h)
    swapped = replace_chain_element(term, 1, Id(B))
    assert swapped == Comp(Comp(f, Id(B)), h)


def test_parse_expr_integration(sig):
    term = parse_expr("f ; g", sig)
    assert typecheck(term, sig) == MorType(A, C)
