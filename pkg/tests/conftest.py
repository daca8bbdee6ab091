import numpy as np
import pytest

from qoscillator import OscillatorModel, make_params


@pytest.fixture(params=["macfarlane", "dubna"])
def kind(request):
    return request.param


@pytest.fixture
def model_factory():
    cache = {}

    def build(kind, s=0.5, coeffs=None, periodic=False):
        key = (kind, s, None if coeffs is None else tuple(sorted(coeffs.items())), periodic)
        if key not in cache:
            p = make_params(s, kind)
            cache[key] = OscillatorModel.periodic(p) if periodic else OscillatorModel.aperiodic(p, coeffs)
        return cache[key]

    return build


@pytest.fixture
def probes():
    return np.linspace(-1.9, 1.9, 11) + 0.013
