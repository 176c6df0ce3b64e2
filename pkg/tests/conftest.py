import cmath
import os

import pytest
from hypothesis import HealthCheck, settings

from qdiffeq import NumericContext

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

Q_VALUES = {
    "2": 2,
    "3/2": "3/2",
    "2e^(i pi/7)": "polar(2, pi/7)",
}


@pytest.fixture(params=[16, 50], ids=["double", "mp50"])
def ctx(request):
    return NumericContext(2, precision=request.param)


@pytest.fixture
def dctx():
    return NumericContext(2, precision=16)


@pytest.fixture
def hctx():
    return NumericContext(2, precision=50)


def close(a, b, rel):
    a = complex(a)
    b = complex(b)
    return abs(a - b) <= rel * max(abs(b), 1e-300)


def root_of_unity(k, n):
    return cmath.exp(2j * cmath.pi * k / n)


def random_operator_text(rng, order_range=(2, 5), max_degree=4, zero_prob=0.25):
    """Random polynomial operator; low coefficients are zeroed at random so
    that both regular and irregular shapes turn up."""
    n = rng.randint(*order_range)
    terms = []
    for i in range(n + 1):
        for j in range(max_degree + 1):
            if rng.random() < zero_prob + 0.1 * j:
                continue
            c = rng.randint(-5, 5) or 1
            terms.append(f"({c})*z^{j}*S^{i}")
    # keep a_0 and a_n nonzero (7 cannot cancel against a coefficient in [-5, 5])
    terms.append(f"7*z^{rng.randint(0, max_degree)}")
    terms.append(f"7*z^{rng.randint(0, max_degree)}*S^{n}")
    return " + ".join(terms)
