import json
import random
from fractions import Fraction

import pytest

from conftest import random_operator_text
from qdiffeq import NumericContext, is_regular_singular, newton_polygon, parse
from qdiffeq.classify import polygon_json, render_ascii, render_svg
from qdiffeq.fixtures import FIXTURES

QUINTIC = FIXTURES["quintic"].operator


def polygon_of(text, ctx):
    return newton_polygon(parse(text, ctx))


@pytest.mark.parametrize("text,slopes,lengths", [
    ("q*z*S^2 - S + 1", [-1, 0], [1, 1]),
    ("z*S^2 - 1", [Fraction(-1, 2)], [2]),
    ("z^2*S^2 + z*S + 1", [-1], [2]),
    ("z^2*S^2 - S + 1", [-2, 0], [1, 1]),
    ("(1-S)^2 - z*S^2", [0], [2]),
    (QUINTIC, [Fraction(-1, 20), 0], [20, 5]),
])
def test_polygon_examples(dctx, text, slopes, lengths):
    poly = polygon_of(text, dctx)
    assert poly.slopes == slopes
    assert poly.lengths == lengths
    assert all(isinstance(s, Fraction) for s in poly.slopes)


@pytest.mark.parametrize("l", [3, 4, 5])
def test_level_structure_polygon(dctx, l):
    poly = polygon_of(f"(1-S)^2 - z*S^{l}", dctx)
    assert poly.slopes == [Fraction(-1, l - 2), 0]
    assert poly.lengths == [l - 2, 2]


def test_supporting_indices(dctx):
    poly = polygon_of("q*z*S^2 - S + 1", dctx)
    steep, flat = poly.segments
    assert steep.supporting_indices == (2, 1)
    assert flat.supporting_indices == (1, 0)
    assert flat.height == 0


@pytest.mark.parametrize("text,regular", [
    ("(1-S)^2 - z*S^2", True),
    ("(1-S)^2 - z*S", True),
    ("(1-S)^2 - z", True),
    ("q*z*S^2 - S + 1", False),
    ("z*S^2 - 1", False),
    (QUINTIC, False),
])
def test_regularity_examples(dctx, text, regular):
    report = is_regular_singular(parse(text, dctx))
    assert bool(report) is regular
    assert ("irregular" in report.describe()) is (not regular)


def test_regular_iff_single_horizontal_segment():
    ctx = NumericContext(2, precision=16)
    rng = random.Random(20261016)
    seen = {True: 0, False: 0}
    for _ in range(500):
        op = parse(random_operator_text(rng), ctx)
        poly = newton_polygon(op)
        by_polygon = len(poly.segments) == 1 and poly.segments[0].is_horizontal
        by_valuation = bool(is_regular_singular(op))
        assert by_polygon == by_valuation, str(op)
        seen[by_valuation] += 1
    # the generator must exercise both outcomes
    assert min(seen.values()) > 50


def test_renderings(dctx):
    poly = polygon_of("q*z*S^2 - S + 1", dctx)
    data = polygon_json(poly)
    assert json.loads(json.dumps(data)) == data
    assert [s["slope"] for s in data["segments"]] == ["-1", "0"]
    text = render_ascii(poly)
    assert "slope -1, length 1" in text and "*" in text
    svg = render_svg(poly)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert svg.count("<circle") == 3


def test_ascii_fractional_heights(dctx):
    text = render_ascii(polygon_of(QUINTIC, dctx))
    assert "slope -1/20, length 20" in text
