from somkit.fills import HATCH_PATTERNS, build_fill, def_crosshatch, def_dots, def_stripes


def test_solid_fill_needs_no_pattern():
    defs, ref = build_fill("solid", 0, "#abcdef")
    assert defs == ""
    assert ref == "#abcdef"


def test_hatch_fill_references_its_pattern():
    defs, ref = build_fill("hatch", 3, "#336699")
    assert ref == "url(#sc3)"
    assert 'id="sc3"' in defs
    assert defs.startswith("<pattern")


def test_hatch_cycles_through_patterns():
    kinds = []
    for label in range(len(HATCH_PATTERNS) + 1):
        defs, _ = build_fill("hatch", label, "#808080")
        kinds.append("circle" in defs or "path" in defs or "rotate(-45)" in defs)
    assert kinds == [False, True, True, True, False]


def test_stripes_rotate_by_angle():
    assert "rotate(30)" in def_stripes("p", "#ffffff", "#000000", angle=30)


def test_crosshatch_draws_two_lines():
    assert 'd="M0,0 L6,0 M0,0 L0,6"' in def_crosshatch("p", "#ffffff", "#000000")


def test_dots_are_centred():
    assert 'cx="4.00" cy="4.00"' in def_dots("p", "#ffffff", gap=8)
