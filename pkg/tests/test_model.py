import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vibronic.errors import ModelError
from vibronic.grid import GridConfig, build_potential_matrix
from vibronic.model import (
    CONSTANT,
    MultiIndex,
    VibronicModel,
    dipole_matrix,
    parse_model,
    serialize_model,
    validate_model,
)
from vibronic.units import HARTREE_IN_EV

from .conftest import mi, random_model


def doc(**overrides):
    base = {
        "states": 2,
        "modes": [1.0],
        "unit": "au",
        "max_degree": 0,
        "couplings": [{"bra": 0, "ket": 1, "powers": [], "value": 0.1}],
    }
    base.update(overrides)
    return json.dumps(base)


# -- MultiIndex ------------------------------------------------------------------


def test_multiindex_rejects_unsorted_modes():
    with pytest.raises(ValueError):
        MultiIndex(((1, 1), (0, 1)))


def test_multiindex_rejects_zero_exponent():
    with pytest.raises(ValueError):
        MultiIndex(((0, 0),))


def test_from_powers_merges_and_sorts():
    assert MultiIndex.from_powers([(2, 1), (0, 1), (2, 2), (1, 0)]) == MultiIndex(((0, 1), (2, 3)))


def test_constant_index():
    assert CONSTANT.degree == 0 and CONSTANT.powers == ()


def test_factors_and_str():
    a = mi((0, 2), (3, 1))
    assert a.factors() == (0, 0, 3)
    assert a.degree == 3
    assert str(a) == "Q0^2*Q3"


@given(st.lists(st.integers(0, 5), min_size=0, max_size=6))
def test_factor_round_trip(factors):
    a = MultiIndex.from_factors(factors)
    assert a.factors() == tuple(sorted(factors))
    assert a.degree == len(factors)


# -- parsing ---------------------------------------------------------------------


def test_minimal_document():
    m = parse_model(doc())
    assert m.n_states == 2 and m.n_modes == 1 and m.max_degree == 0
    assert m.couplings == {(0, 1, CONSTANT): 0.1, (1, 0, CONSTANT): 0.1}


def test_five_states_pad_to_eight():
    m = parse_model(doc(states=5, couplings=[{"bra": 0, "ket": 4, "powers": [], "value": 0.2}]))
    assert m.n_states_logical == 5
    assert m.n_states == 8 and m.n_qubits == 3
    assert all(j < 5 and i < 5 for (j, i, _) in m.couplings)


def test_missing_mirror_is_symmetrized(k3):
    m = parse_model(doc(max_degree=1, couplings=[{"bra": 0, "ket": 1, "powers": [[0, 1]], "value": 0.2}]))
    assert m.coupling(0, 1, mi((0, 1))) == 0.2
    assert m.coupling(1, 0, mi((0, 1))) == 0.2
    V = build_potential_matrix(m, k3, include_v0=False).toarray()
    assert np.max(np.abs(V - V.T)) == 0.0


def test_conflicting_mirror_rejected():
    recs = [
        {"bra": 0, "ket": 1, "powers": [], "value": 0.1},
        {"bra": 1, "ket": 0, "powers": [], "value": 0.2},
    ]
    with pytest.raises(ModelError, match="asymmetric coupling"):
        parse_model(doc(couplings=recs))


def test_duplicate_key_rejected():
    recs = [{"bra": 0, "ket": 1, "powers": [], "value": 0.1}] * 2
    with pytest.raises(ModelError, match="duplicate"):
        parse_model(doc(couplings=recs))


def test_syntax_error_reports_position():
    with pytest.raises(ModelError) as info:
        parse_model('{\n  "states": 2,\n  "modes": [1.0,,]\n}')
    assert info.value.line == 3
    assert info.value.column is not None
    assert "line 3" in str(info.value)


def test_negative_frequency_rejected():
    with pytest.raises(ModelError, match="frequency nonpositive, mode 0"):
        parse_model(doc(modes=[-0.5]))


def test_state_index_out_of_range():
    with pytest.raises(ModelError, match="out of range"):
        parse_model(doc(couplings=[{"bra": 0, "ket": 2, "powers": [], "value": 0.1}]))


def test_mode_index_out_of_range():
    with pytest.raises(ModelError, match="mode index out of range"):
        parse_model(doc(max_degree=1, couplings=[{"bra": 0, "ket": 1, "powers": [[3, 1]], "value": 0.1}]))


def test_degree_above_declared_maximum():
    with pytest.raises(ModelError, match="max_degree"):
        parse_model(doc(max_degree=1, couplings=[{"bra": 0, "ket": 0, "powers": [[0, 2]], "value": 0.1}]))


def test_missing_field():
    with pytest.raises(ModelError, match="missing field 'modes'"):
        parse_model(json.dumps({"states": 2, "couplings": []}))


def test_unit_conversion_ev():
    m = parse_model(doc(unit="eV", modes=[HARTREE_IN_EV], couplings=[{"bra": 0, "ket": 1, "value": HARTREE_IN_EV}]))
    assert m.frequencies[0] == pytest.approx(1.0, rel=1e-15)
    assert m.coupling(0, 1) == pytest.approx(1.0, rel=1e-15)


def test_unknown_unit_is_model_error():
    with pytest.raises(ModelError):
        parse_model(doc(unit="furlong"))


def test_asymmetric_dipole_rejected():
    with pytest.raises(ModelError, match="dipole"):
        parse_model(doc(dipole=[[0, 1], [0.5, 0]]))


def test_full_precision_floats():
    v = 0.1234567890123456789
    m = parse_model(doc(couplings=[{"bra": 0, "ket": 1, "value": v}]))
    assert m.coupling(0, 1) == v


# -- validation ------------------------------------------------------------------


def test_valid_lvc_model_has_no_diagnostics(rng):
    assert validate_model(random_model(rng, 4, 3, 1)) == []


def test_negative_frequency_diagnostic():
    m = VibronicModel.from_terms(2, [1.0, -0.5], {})
    diags = validate_model(m)
    assert [str(d) for d in diags] == ["frequency nonpositive, mode 1"]


def test_injected_asymmetry_names_key():
    m = VibronicModel.from_terms(2, [1.0], {(0, 1, mi((0, 1))): 0.2})
    m.couplings[(0, 1, mi((0, 1)))] = 0.3
    diags = validate_model(m)
    assert any(d.invariant == "symmetry" and d.key == (0, 1, mi((0, 1))) for d in diags)


def test_padded_block_coupling_diagnosed():
    m = VibronicModel.from_terms(3, [1.0], {})
    m.couplings[(3, 3, CONSTANT)] = 1.0
    assert [d.invariant for d in validate_model(m)] == ["padding"]


def test_dipole_padding():
    m = VibronicModel.from_terms(3, [1.0], {}, dipole=np.array([[0, 1, 2], [1, 0, 0], [2, 0, 0]], float))
    mu = dipole_matrix(m)
    assert mu.shape == (4, 4)
    assert np.all(mu[3] == 0) and np.all(mu[:, 3] == 0)


# -- round trip and padding invariants -----------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 3), st.integers(0, 3))
def test_serialize_parse_round_trip(seed, n_states, n_modes, degree):
    m = random_model(np.random.default_rng(seed), n_states, n_modes, degree)
    back = parse_model(serialize_model(m))
    assert back == m


@given(st.integers(0, 2**32 - 1))
def test_padding_leaves_logical_blocks_unchanged(seed):
    rng = np.random.default_rng(seed)
    m3 = random_model(rng, 3, 1, 2)
    g = GridConfig(2)
    V = build_potential_matrix(m3, g).toarray()
    # three logical states built without padding, one block at a time
    q = g.delta * np.array([0, 1, -2, -1])
    for j in range(3):
        for i in range(3):
            expected = sum(c * q ** a.degree for a, c in m3.block(j, i).items())
            if j == i:
                expected = expected + 0.5 * m3.frequencies[0] * q**2
            block = V[j * 4 : (j + 1) * 4, i * 4 : (i + 1) * 4]
            assert np.allclose(np.diag(block), expected, atol=1e-12)
            assert np.count_nonzero(block - np.diag(np.diag(block))) == 0
