import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from vibronic.grid import GridConfig
from vibronic.model import MultiIndex, VibronicModel

settings.register_profile(
    "repo", max_examples=30, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("repo")


def mi(*pairs):
    return MultiIndex.from_powers(pairs)


def random_model(rng, n_states, n_modes, degree, density=0.6, scale=0.2):
    """Random symmetric polynomial model with every monomial up to ``degree``."""
    alphas = [MultiIndex()]
    for d in range(1, degree + 1):
        for combo in _combos(n_modes, d):
            alphas.append(MultiIndex.from_factors(combo))
    terms = {}
    for j in range(n_states):
        for i in range(j, n_states):
            for a in alphas:
                if rng.random() < density:
                    terms[(j, i, a)] = float(rng.normal(0, scale))
    freqs = rng.uniform(0.5, 1.5, n_modes)
    return VibronicModel.from_terms(n_states, freqs, terms, max_degree=degree)


def _combos(n_modes, d):
    from itertools import combinations_with_replacement

    return list(combinations_with_replacement(range(n_modes), d))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def toy_model():
    """Two states, one mode, constant and linear couplings in both blocks."""
    return VibronicModel.from_terms(
        2,
        [1.0],
        {
            (0, 0, mi((0, 1))): 0.5,
            (1, 1, mi()): 0.4,
            (0, 1, mi()): 0.3,
            (0, 1, mi((0, 1))): 0.1,
        },
    )


@pytest.fixture
def rabi_model():
    """Constant coupling only, no mode dependence beyond the harmonic part."""
    return VibronicModel.from_terms(2, [1.0], {(0, 1, mi()): 0.1}, dipole=np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.fixture
def k3():
    return GridConfig(3)


@pytest.fixture
def k4():
    return GridConfig(4)


def pytest_terminal_summary(terminalreporter):
    from . import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
