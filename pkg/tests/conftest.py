from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import settings

from ifs_oalg.ifs import attractor
from ifs_oalg.systems import builtin

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def systems():
    return {name: builtin(name) for name in ("CANTOR3", "HALVES", "TENTINV", "SIERP")}


@pytest.fixture(scope="session")
def clouds(systems):
    """Attractor samples at the resolutions the checks are specified at."""
    eps = {"CANTOR3": 1e-4, "HALVES": 1e-4, "TENTINV": 1e-4, "SIERP": 1e-2}
    return {name: attractor(sys, eps[name]) for name, sys in systems.items()}


def frac(p, q=1):
    return Fraction(p, q)
