"""Acceptance suite: one test per criterion, printing one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import time
from random import Random

import numpy as np

from gen import (
    random_comp_tree,
    random_matrix_instance,
    random_object,
    random_rel_instance,
    random_structural_term,
    random_term,
    std_sig,
    struct_sig,
    structural_connector,
)
from monocat.cli import run
from monocat.coherence import Equal, canonicalize, monoidal_eq, sheet_of_term
from monocat.parser import parse_expr, parse_rules, parse_signature, print_expr
from monocat.semantics import (
    braid_matrix,
    check_coherence,
    eval_matrix,
    eval_rel,
    mat_equiv,
    rel_instance,
)
from monocat.tactics import (
    NoMatch,
    assoc_rw,
    cancel_isos,
    cat_simpl,
    foliate,
    partner,
    right_associate,
    weak_foliate,
)
from monocat.terms import Id, comp_chain, right_comp, structural_atoms, typecheck


def _report(criterion: int, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    print(f"ACCEPTANCE {criterion}: {status} - {detail}")
    assert passed, detail


def test_criterion_1_coherence_suite():
    """100 random matrix instances pass all coherence conditions within 1e-9;
    relation instances pass exactly; runtime <= 30 s."""

    sig = std_sig()
    rng = Random(101)
    start = time.monotonic()
    worst = 0.0
    required = {"triangle", "pentagon", "hexagon_1", "hexagon_2", "symmetry",
                "lunit_naturality", "runit_naturality", "interchange"}
    for i in range(100):
        inst = random_matrix_instance(rng, sig, max_dim=4)
        results = check_coherence(inst, sig, rng=rng)
        assert required <= {r.name for r in results}
        for r in results:
            worst = max(worst, r.deviation)
            assert r.passed and r.deviation <= 1e-9, f"matrix {r.name}: {r.deviation}"
    for i in range(100):
        inst = random_rel_instance(rng, sig, max_size=5)
        for r in check_coherence(inst, sig, rng=rng):
            assert r.passed and r.deviation == 0.0, f"rel {r.name}: {r.deviation}"
    elapsed = time.monotonic() - start
    _report(1, elapsed <= 30.0,
            f"100 matrix + 100 rel instances, max deviation {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_structural_completeness():
    """500 structural-only pairs of equal boundary decide Equal, zero layers."""

    sig = struct_sig()
    rng = Random(102)
    for i in range(500):
        obj = random_object(rng, sig.objects, max_leaves=3)
        t1 = random_structural_term(rng, obj, sig, steps=rng.randint(0, 3), max_leaves=8)
        assert len(structural_atoms(t1)) <= 8
        ty = typecheck(t1, sig)
        t2 = structural_connector(ty.dom, ty.cod)
        nf1 = canonicalize(sheet_of_term(t1, sig))
        nf2 = canonicalize(sheet_of_term(t2, sig))
        assert nf1.layers == () and nf2.layers == (), print_expr(t1)
        assert isinstance(monoidal_eq(t1, t2, sig), Equal), print_expr(t1)
    _report(2, True, "500/500 structural pairs Equal, all normal forms empty")


def _semantic_variants(rng, sig, t):
    """Boundary- and semantics-preserving rewrites of ``t``."""

    yield foliate(t, sig)
    yield weak_foliate(t, sig)
    yield cancel_isos(t, sig)
    yield cat_simpl(t, sig)
    yield right_associate(t)
    chain = comp_chain(t)
    yield random_comp_tree(rng, chain)
    dom = typecheck(t, sig).dom
    yield right_comp([Id(dom)] + chain, dom)


def test_criterion_3_normalizer_soundness():
    """1000 term pairs: every Equal verdict agrees in both backends; <= 60 s."""

    sig = std_sig()
    rng = Random(103)
    start = time.monotonic()
    mi = random_matrix_instance(rng, sig, max_dim=2)
    ri = random_rel_instance(rng, sig, max_size=2)
    equal_count = 0
    checked = 0
    for i in range(1000):
        if i % 200 == 0:
            mi = random_matrix_instance(rng, sig, max_dim=2)
            ri = random_rel_instance(rng, sig, max_size=2)
        t1 = random_term(rng, sig, max_leaves=12)
        if i % 2 == 0:
            variants = list(_semantic_variants(rng, sig, t1))
            t2 = rng.choice(variants)
        else:
            t2 = random_term(rng, sig, max_leaves=12)
            if typecheck(t2, sig) != typecheck(t1, sig):
                t2 = cat_simpl(t1, sig)
        verdict = monoidal_eq(t1, t2, sig)
        checked += 1
        if isinstance(verdict, Equal):
            equal_count += 1
            m1, m2 = eval_matrix(t1, mi), eval_matrix(t2, mi)
            assert mat_equiv(m1, m2, 1e-9), f"matrix disagreement: {print_expr(t1)}"
            assert eval_rel(t1, ri) == eval_rel(t2, ri), f"rel disagreement: {print_expr(t1)}"
    elapsed = time.monotonic() - start
    assert equal_count >= 100, "sampler failed to exercise Equal verdicts"
    _report(3, elapsed <= 60.0,
            f"{checked} pairs, {equal_count} Equal, 0 counterexamples, {elapsed:.1f}s")


def test_criterion_4_worked_examples_byte_exact():
    sig = parse_signature(
        "category symmetric\nobject N\nobject A\nobject B\nobject C\nobject M\n"
        "mor f : N -> B\nmor g : B -> C\nmor h : A -> M\n")
    t = parse_expr("(f ; g) * h", sig)
    fol = print_expr(foliate(t, sig))
    weak = print_expr(weak_foliate(t, sig))
    ok_f = fol == "(f * id[A]) ; ((id[B] * h) ; (g * id[M]))"
    ok_w = weak == "(f * h) ; (g * id[M])"

    rw_sig = parse_signature(
        "category symmetric\nobject A\nobject B\nobject C\nobject D\nobject E\n"
        "mor e : A -> B\nmor f : B -> C\nmor g : C -> D\nmor h : B -> D\nmor i : E -> E\n")
    rule = parse_rules("rule fg : f ; g => h\n", rw_sig).rules[0]
    rewritten = assoc_rw(parse_expr("i * (e ; f ; g)", rw_sig), rule, rw_sig)
    ok_rw = rewritten == parse_expr("i * (e ; h)", rw_sig)

    c_sig = parse_signature(
        "category symmetric\nobject A\nobject B\nmor g : A -> A\niso f : A -> B\n")
    cancelled = cancel_isos(parse_expr("g ; f ; inv(f)", c_sig), c_sig)
    ok_c = print_expr(cancelled) == "g"

    _report(4, ok_f and ok_w and ok_rw and ok_c,
            f"foliate={fol!r}, weak={weak!r}, assoc_rw ok={ok_rw}, cancel ok={ok_c}")


def test_criterion_5_tactic_preservation():
    sig = std_sig()
    rng = Random(105)
    mi = random_matrix_instance(rng, sig, max_dim=2)
    ri = random_rel_instance(rng, sig, max_size=2)
    cancel_rule = parse_rules("rule c : k ; inv(k) => id[A]\n", sig).rules[0]
    for i in range(500):
        t = random_term(rng, sig, max_leaves=10)
        ty = typecheck(t, sig)
        m, r = eval_matrix(t, mi), eval_rel(t, ri)
        outputs = {
            "foliate": foliate(t, sig),
            "weak_foliate": weak_foliate(t, sig),
            "cancel_isos": cancel_isos(t, sig),
            "cat_simpl": cat_simpl(t, sig),
            "right_associate": right_associate(t),
        }
        chain = comp_chain(t)
        if len(chain) >= 2:
            outputs["partner"] = partner(t, chain[0], chain[1], sig)
        try:
            outputs["assoc_rw"] = assoc_rw(t, cancel_rule, sig)
        except NoMatch:
            pass
        for name, out in outputs.items():
            assert typecheck(out, sig) == ty, f"{name} changed the boundary"
            assert mat_equiv(eval_matrix(out, mi), m, 1e-9), f"{name} changed matrix value"
            assert eval_rel(out, ri) == r, f"{name} changed relation value"
        assert cancel_isos(outputs["cancel_isos"], sig) == outputs["cancel_isos"]
        assert cat_simpl(outputs["cat_simpl"], sig) == outputs["cat_simpl"]
    _report(5, True, "500 terms x 5-7 tactics: boundary and both semantics preserved; "
                     "cancel_isos and cat_simpl idempotent")


def test_criterion_6_commutation_matrix_law():
    rng = np.random.default_rng(106)
    worst = 0.0
    for _ in range(100):
        p, n, q, m = (int(x) for x in rng.integers(1, 5, size=4))
        A = rng.normal(size=(p, n)) + 1j * rng.normal(size=(p, n))
        B = rng.normal(size=(q, m)) + 1j * rng.normal(size=(q, m))
        dev = float(np.max(np.abs(
            braid_matrix(p, q) @ np.kron(A, B) - np.kron(B, A) @ braid_matrix(n, m))))
        worst = max(worst, dev)
        assert dev <= 1e-12
    for mm in range(1, 5):
        for nn in range(1, 5):
            assert np.array_equal(braid_matrix(nn, mm) @ braid_matrix(mm, nn),
                                  np.eye(mm * nn, dtype=complex))
    _report(6, True, f"100 commutation-law checks, max deviation {worst:.2e}; "
                     "K(m,n).K(n,m) = identity exactly")


def test_criterion_7_kronecker_mixed_product():
    sig = parse_signature(
        "category symmetric\nobject O1\nobject O2\nobject O3\nobject O4\nobject O5\n"
        "object O6\nmor a : O1 -> O2\nmor b : O2 -> O3\nmor c : O4 -> O5\n"
        "mor d : O5 -> O6\n")
    rng = Random(107)
    worst = 0.0
    lhs_t = parse_expr("(a * c) ; (b * d)", sig)
    rhs_t = parse_expr("(a ; b) * (c ; d)", sig)
    for _ in range(100):
        inst = random_matrix_instance(rng, sig, max_dim=4)
        dev = float(np.max(np.abs(eval_matrix(lhs_t, inst) - eval_matrix(rhs_t, inst))))
        worst = max(worst, dev)
        assert dev <= 1e-12
    _report(7, True, f"100 random quadruples, max deviation {worst:.2e}")


def test_criterion_8_renderer_goldens(golden_dir):
    from test_render import GOLDEN_TERMS, RENDER_SIG
    from monocat.render import RenderConfig, emit_svg, layout

    cfg = RenderConfig()

    def svg(text):
        return emit_svg(layout(parse_expr(text, RENDER_SIG), RENDER_SIG, cfg), cfg)

    assert len(GOLDEN_TERMS) >= 5
    for name, text in GOLDEN_TERMS.items():
        got = svg(text)
        assert got == svg(text), f"{name} not deterministic"
        assert got == (golden_dir / f"{name}.svg").read_text(encoding="utf-8"), name
    s1, s2 = svg("(f ; g) ; h"), svg("f ; (g ; h)")
    import re

    assert s1 != s2
    assert (sorted(re.findall(r">([^<]+)</text>", s1))
            == sorted(re.findall(r">([^<]+)</text>", s2)))
    assert s1.count('class="group"') == s2.count('class="group"')
    boxes = r'class="(genbox|isobox|structbox)"'
    assert sorted(re.findall(boxes, s1)) == sorted(re.findall(boxes, s2))
    _report(8, True, f"{len(GOLDEN_TERMS)} golden diagrams byte-stable; association "
                     "variants differ only in group nesting")


def test_criterion_9_relation_backend():
    uncle_sig = parse_signature(
        "category symmetric\nobject person\n"
        "mor parent : person -> person\nmor brother : person -> person\n"
        "backend rel\nsize person = 3\nrel parent = {(0,2)}\nrel brother = {(2,1)}\n")
    inst = rel_instance(uncle_sig)
    uncle = eval_rel(parse_expr("parent ; brother", uncle_sig), inst)
    ok_uncle = uncle == {(0, 1)}  # alice -> bob

    chain_sig = parse_signature(
        "category symmetric\nobject A\nobject B\nobject C\nobject D\n"
        "mor f : A -> B\nmor g : B -> C\nmor h : C -> D\n")
    rng = Random(109)
    lhs_t = parse_expr("(f ; g) ; h", chain_sig)
    rhs_t = parse_expr("f ; (g ; h)", chain_sig)
    for _ in range(200):
        inst = random_rel_instance(rng, chain_sig, max_size=5, density=0.35)
        assert eval_rel(lhs_t, inst) == eval_rel(rhs_t, inst)
    _report(9, ok_uncle, f"uncle = {sorted(uncle)}; 200 random relation triples "
                         "compose associatively (exact)")


def test_criterion_10_round_trip_and_cli(tmp_path, capsys):
    sig = std_sig()
    from test_parser import CORPUS

    assert len(CORPUS) >= 50
    for text in CORPUS:
        term = parse_expr(text, sig)
        printed = print_expr(term)
        assert parse_expr(printed, sig) == term
        assert print_expr(parse_expr(printed, sig)) == printed

    sig_path = tmp_path / "sig.txt"
    sig_path.write_text(
        "category symmetric\nobject A\nobject B\nmor u : A -> A\niso k : A -> B\n",
        encoding="utf-8")
    session = [
        (["check", "--sig", str(sig_path), "--method", "monoidal",
          "u ; id[A]", "id[A] ; u"], 0),
        (["check", "--sig", str(sig_path), "--method", "monoidal", "u ; u", "u"], 1),
        (["check", "--sig", str(sig_path), "--method", "cat_easy",
          "u ; k ; inv(k)", "u"], 0),
        (["check", "--sig", str(sig_path), "--method", "monoidal", "u ; nosuch", "u"], 2),
        (["foliate", "--sig", str(sig_path), "u * u"], 0),
        (["normalize", "--sig", str(sig_path), "u"], 0),
        (["render", "--sig", str(sig_path), "-o", str(tmp_path / "u.svg"), "u"], 0),
        (["nope"], 2),
    ]
    for argv, expected in session:
        code = run(argv)
        assert code == expected, f"{argv} -> {code}, expected {expected}"
    capsys.readouterr()
    _report(10, True, f"{len(CORPUS)}-expression corpus round-trips; "
                      f"{len(session)} CLI invocations returned contracted exit codes")
