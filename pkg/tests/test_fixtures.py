import pytest

from qdiffeq import NumericContext
from qdiffeq.fixtures import FIXTURES, fixture_names, get_fixture, run_fixture

FAST = [n for n in fixture_names() if n != "quintic"]


@pytest.mark.parametrize("q", [2, "3/2", "polar(2, pi/7)"])
@pytest.mark.parametrize("name", fixture_names())
def test_fixture_double(q, name):
    result = run_fixture(get_fixture(name), NumericContext(q, precision=16))
    assert result.passed, result.as_dict()


@pytest.mark.parametrize("name", FAST)
def test_fixture_high_precision(name):
    result = run_fixture(get_fixture(name), NumericContext("3/2", precision=50))
    assert result.passed, result.as_dict()
    assert result.max_deviation < 1e-25


def test_registry_has_provenance():
    for fx in FIXTURES.values():
        assert fx.provenance
        assert "{" not in fx.operator or fx.params
