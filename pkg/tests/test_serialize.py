import json
import math
from fractions import Fraction

import pytest

from qdiffeq import NumericContext, parse, solve
from qdiffeq.serialize import (basis_to_json, context_from_json, context_to_json, number_from_json, number_to_json,
                               residual_report, solution_from_json, solution_to_json)
from qdiffeq.verify import apply_operator


def test_number_roundtrip_is_exact(ctx):
    x = ctx.num("1/3+2/7i") * ctx.q_power(Fraction(1, 5))
    back = number_from_json(ctx, json.loads(json.dumps(number_to_json(ctx, x))))
    assert back == x


def test_context_roundtrip(ctx):
    back = context_from_json(json.loads(json.dumps(context_to_json(ctx))))
    assert back.q == ctx.q and back.precision == ctx.precision


@pytest.mark.parametrize("text", ["(1-S)^2 - z*S", "z*S^2 - 1", "q*z*S^2 - S + 1"])
def test_solution_roundtrip_preserves_residual(ctx, text):
    op = parse(text, ctx)
    for sol in solve(op, 12):
        data = json.loads(json.dumps(solution_to_json(ctx, sol)))
        back = solution_from_json(ctx, data)
        assert back.theta_exp == sol.theta_exp and back.log_power == sol.log_power
        assert back.series == sol.series
        assert [t.series for t in back.tail] == [t.series for t in sol.tail]
        a, b = apply_operator(op, sol), apply_operator(op, back)
        assert a.relative == b.relative and a.guaranteed_order == b.guaranteed_order


def test_schema_fields(dctx):
    sol = solve(parse("z*S^2 - 1", dctx))[0]
    data = solution_to_json(dctx, sol)
    assert data["theta_exp"] == "-1/2"
    assert data["ramification"] == 2
    assert set(data["character"]) == {"re", "im"}
    assert data["character_label"] == "q^(1/4)"


def test_character_given_as_power_of_q(dctx):
    data = {"theta_exp": "0", "character": "q^{1/2}", "log_power": 0, "ramification": 1,
            "offset": 0, "truncation": "inf", "coefficients": [[1, 0]]}
    sol = solution_from_json(dctx, data)
    assert sol.character == pytest.approx(2 ** 0.5)
    assert sol.series.is_exact


def test_basis_and_report_are_json(dctx):
    basis = solve(parse("(1-S)^2 - z", dctx))
    data = basis_to_json(basis)
    assert json.loads(json.dumps(data))["operator"] == "1 - z - 2*S + S^2"
    rep = residual_report(0, apply_operator(basis.op, basis[0]), {"class": "convergent"})
    assert rep["guaranteed_order"] == "30" and rep["growth"] == {"class": "convergent"}
    assert math.isfinite(rep["residual_relative"])
