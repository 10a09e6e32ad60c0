import pytest
from hypothesis import given

from kpmatch.constructions import complete, edgeless
from kpmatch.core import Bipartition, Hypergraph
from kpmatch.errors import DuplicateEdge, OutOfRange, ParseError
from kpmatch.io import Check, RunReport, parse_instance, parse_matching, render_instance

from strategies import bipartitions, hypergraphs


def test_round_trip_complete():
    H = complete(3, 2)
    text = render_instance(H)
    assert text.splitlines()[:3] == ["kpg 1", "3", "2 2 2"]
    assert len(text.splitlines()) == 3 + 8
    G, bip = parse_instance(text)
    assert G == H and bip is None


def test_render_sorts_edges():
    H = Hypergraph((2, 2), [(1, 1), (0, 1), (1, 0)])
    assert render_instance(H) == "kpg 1\n2\n2 2\n0 1\n1 0\n1 1\n"


def test_edgeless_round_trip():
    H = edgeless(4, 3)
    assert parse_instance(render_instance(H))[0] == H


def test_bip_block_round_trip():
    H = complete(3, 3)
    bip = Bipartition((3, 3, 3), [[0, 2], [], [1]])
    text = render_instance(H, bip)
    assert text.endswith("bip\n0 2\n\n1\n")
    G, back = parse_instance(text)
    assert G == H and back.A == bip.A


@pytest.mark.parametrize(
    "text,line,kind",
    [
        ("kpg 1\n2\n2 2\n0 0\n0 2\n", 5, OutOfRange),
        ("kpg 1\n2\n2 2\n0 1\n0 1\n", 5, DuplicateEdge),
        ("kpg 1\n2\n2 2\n0 1\n1 1 1\n", 5, ParseError),
        ("kpg 2\n2\n2 2\n", 1, ParseError),
        ("kpg 1\n2\n2 2 2\n", 3, ParseError),
        ("kpg 1\n2\n2 2\n0  1\n", 4, ParseError),
        ("kpg 1\n2\n2 2\n0 x\n", 4, ParseError),
        ("kpg 1\n2\n2 2\n0 1\n", None, None),
        ("kpg 1\n2\n2 2\nbip\n0\n", 4, ParseError),
        ("kpg 1\n2\n2 2\nbip\n1 0\n\n", 5, ParseError),
        ("kpg 1\n2\n2 2\nbip\n0\n3\n", 6, OutOfRange),
    ],
)
def test_parse_errors_report_lines(text, line, kind):
    if kind is None:
        parse_instance(text)
        return
    with pytest.raises(kind) as info:
        parse_instance(text)
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_out_of_range_reports_line_four():
    with pytest.raises(OutOfRange) as info:
        parse_instance("kpg 1\n3\n2 2 2\n0 0 5\n")
    assert info.value.line == 4


def test_format_checks():
    good = render_instance(complete(2, 2))
    with pytest.raises(ParseError):
        parse_instance(good.replace("\n", "\r\n"))
    with pytest.raises(ParseError):
        parse_instance(good[:-1])
    with pytest.raises(ParseError):
        parse_instance(good + "é\n")
    with pytest.raises(ParseError):
        parse_instance(good + "\n")


def test_parse_matching():
    M = parse_matching("0 0 0\n\n1 1 1\n", 3)
    assert M.edges == ((0, 0, 0), (1, 1, 1)) and M.is_valid(complete(3, 2))
    with pytest.raises(ParseError) as info:
        parse_matching("0 0 0\n1 1\n", 3)
    assert info.value.line == 2


def _report(elapsed):
    rep = RunReport("solve", {"seed": 0}, 0, [Check("size", True, 3, 3)], {"size": 3, "edges": [[0, 0, 0]]})
    rep.timings["solve"] = elapsed
    return rep


def test_report_digest_ignores_timings():
    a, b = _report(0.1), _report(12.5)
    assert a.digest() == b.digest()
    assert a.to_json() != b.to_json()
    strip = lambda t: [x for x in t.splitlines() if not x.startswith("timing.")]
    assert strip(a.to_text()) == strip(b.to_text())


def test_report_digest_sees_data():
    a = _report(0.0)
    b = _report(0.0)
    b.data["size"] = 2
    assert a.digest() != b.digest()


def test_report_text_lines():
    text = _report(0.25).to_text()
    assert "check.size=pass count=3 total=3" in text
    assert "timing.solve=0.250" in text and text.endswith("result=pass\n")


@given(hypergraphs(k=3, equal=False))
def test_round_trip_property(H):
    assert parse_instance(render_instance(H))[0] == H


@given(hypergraphs(k=3, n=3), bipartitions((3, 3, 3)))
def test_round_trip_with_bip_property(H, bip):
    G, back = parse_instance(render_instance(H, bip))
    assert G == H and back.A == bip.A
