"""Renderer: golden files, determinism, geometry invariants."""

import re

import pytest

from monocat.coherence import flatten_object
from monocat.parser import parse_expr, parse_signature
from monocat.render import RenderConfig, RenderConfigError, emit_svg, emit_tikz, layout
from monocat.terms import typecheck

RENDER_SIG = parse_signature("""
category symmetric
object A
object B
object C
object D
mor f : A -> B
mor g : B -> C
mor h : C -> D
iso k : A -> B
""")

GOLDEN_TERMS = {
    "compose_assoc_left": "(f ; g) ; h",
    "compose_assoc_right": "f ; (g ; h)",
    "braid": "braid[A,B]",
    "tensor_of_composite": "(f ; g) * h",
    "inverse_iso": "k ; inv(k)",
    "triangle_lhs": "alpha[A,I,B] ; (id[A] * lunit[B])",
}


def _render(text, fmt="svg", cfg=None):
    cfg = cfg or RenderConfig()
    node = layout(parse_expr(text, RENDER_SIG), RENDER_SIG, cfg)
    return emit_svg(node, cfg) if fmt == "svg" else emit_tikz(node, cfg)


@pytest.mark.parametrize("name", sorted(GOLDEN_TERMS))
@pytest.mark.parametrize("fmt", ["svg", "tikz"])
def test_golden(name, fmt, golden_dir):
    got = _render(GOLDEN_TERMS[name], fmt)
    expected = (golden_dir / f"{name}.{fmt}").read_text(encoding="utf-8")
    assert got == expected


@pytest.mark.parametrize("name", sorted(GOLDEN_TERMS))
def test_byte_identical_across_runs(name):
    assert _render(GOLDEN_TERMS[name]) == _render(GOLDEN_TERMS[name])


def test_assoc_variants_differ_only_in_group_nesting():
    s1 = _render(GOLDEN_TERMS["compose_assoc_left"])
    s2 = _render(GOLDEN_TERMS["compose_assoc_right"])
    assert s1 != s2

    def boxes(svg):
        return sorted(re.findall(r'class="(genbox|isobox|structbox)"', svg))

    def labels(svg):
        return sorted(re.findall(r">([^<]+)</text>", svg))

    def group_count(svg):
        return len(re.findall(r'class="group"', svg))

    assert boxes(s1) == boxes(s2)
    assert labels(s1) == labels(s2)
    assert group_count(s1) == group_count(s2)


def test_identity_is_a_labeled_wire():
    svg = _render("id[A]")
    assert 'class="genbox"' not in svg and "<rect" not in svg
    # object annotated at input and output positions
    assert svg.count(">A</text>") >= 2
    assert svg.count("<polyline") >= 1


def test_braid_is_a_cross():
    svg = _render("braid[A,B]")
    # two crossing diagonals, no box rects
    assert 'class="genbox"' not in svg
    wires = re.findall(r'points="([^"]+)"', svg)
    diagonals = [w for w in wires if len(w.split()) == 2
                 and w.split()[0].split(",")[1] != w.split()[1].split(",")[1]]
    assert len(diagonals) == 2


def test_inverse_marker_attached_left():
    svg = _render("inv(k)")
    assert ">-1</text>" in svg
    markers = re.findall(r'<rect class="marker" x="([\d.]+)"', svg)
    boxes = re.findall(r'<rect class="isobox" x="([\d.]+)"', svg)
    assert markers and boxes
    assert float(markers[0]) < float(boxes[0])


def test_iso_box_emphasized():
    svg = _render("k")
    assert 'class="isobox"' in svg
    plain = _render("f")
    assert 'class="genbox"' in plain and 'class="isobox"' not in plain


def test_structural_box_symbols():
    svg = _render("alpha[A,B,C]")
    assert "α[A,B,C]" in svg
    tikz = _render("alpha[A,B,C]", fmt="tikz")
    assert r"$\alpha$[A,B,C]" in tikz


def test_unit_boundary_labeled():
    sig = parse_signature("category symmetric\nobject A\nmor s : I -> A\n")
    cfg = RenderConfig()
    svg = emit_svg(layout(parse_expr("s", sig), sig, cfg), cfg)
    assert ">I</text>" in svg


def _sibling_rects(node):
    yield [(c.x, c.y, c.w, c.h) for c in node.children]
    for c in node.children:
        yield from _sibling_rects(c)


def _overlap(r1, r2):
    x1, y1, w1, h1 = r1
    x2, y2, w2, h2 = r2
    return x1 < x2 + w2 and x2 < x1 + w1 and y1 < y2 + h2 and y2 < y1 + h1


@pytest.mark.parametrize("text", sorted(GOLDEN_TERMS.values()))
def test_geometry_invariants(text):
    cfg = RenderConfig()
    term = parse_expr(text, RENDER_SIG)
    node = layout(term, RENDER_SIG, cfg)
    ty = typecheck(term, RENDER_SIG)
    assert len(node.in_ports) == len(flatten_object(ty.dom))
    assert len(node.out_ports) == len(flatten_object(ty.cod))
    assert [s for _, s in node.in_ports] == list(flatten_object(ty.dom))
    assert [s for _, s in node.out_ports] == list(flatten_object(ty.cod))
    for siblings in _sibling_rects(node):
        for i in range(len(siblings)):
            for j in range(i + 1, len(siblings)):
                assert not _overlap(siblings[i], siblings[j])

    def walk(n):
        if n.kind == "compgroup":
            a, b = n.children
            assert abs(n.w - (a.w + b.w + cfg.hgap + 2 * cfg.box_padding)) < 1e-9
            assert abs(n.h - (max(a.h, b.h) + 2 * cfg.box_padding)) < 1e-9
            # connected ports carry equal wire labels
            assert [s for _, s in a.out_ports] == [s for _, s in b.in_ports]
        if n.kind == "tensorgroup":
            a, b = n.children
            assert abs(n.h - (a.h + b.h + cfg.vgap + 2 * cfg.box_padding)) < 1e-9
            assert abs(n.w - (max(a.w, b.w) + 2 * cfg.box_padding)) < 1e-9
        for c in n.children:
            walk(c)

    walk(node)


def test_svg_tikz_coordinate_agreement():
    cfg = RenderConfig()
    node = layout(parse_expr("(f ; g) * h", RENDER_SIG), RENDER_SIG, cfg)
    svg = emit_svg(node, cfg)
    tikz = emit_tikz(node, cfg)
    rect = re.search(r'<rect class="genbox" x="([\d.]+)" y="([\d.]+)"', svg)
    x, y = float(rect.group(1)), float(rect.group(2))
    scaled = f"({x / cfg.unit:.3f},{-y / cfg.unit:.3f})"
    assert scaled in tikz


def test_config_file_and_validation(tmp_path):
    path = tmp_path / "render.cfg"
    path.write_text("unit = 40\ncolor = true\n# comment\nvgap = 20\n", encoding="utf-8")
    cfg = RenderConfig.from_file(str(path))
    assert cfg.unit == 40 and cfg.color and cfg.vgap == 20
    with pytest.raises(RenderConfigError):
        RenderConfig(unit=-1)
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 3\n", encoding="utf-8")
    with pytest.raises(RenderConfigError):
        RenderConfig.from_file(str(bad))


def test_color_flag_changes_group_strokes():
    cfg = RenderConfig(color=True)
    node = layout(parse_expr("(f ; g) ; h", RENDER_SIG), RENDER_SIG, cfg)
    svg = emit_svg(node, cfg)
    assert "#999999" not in svg
    plain = _render("(f ; g) ; h")
    assert "#999999" in plain
