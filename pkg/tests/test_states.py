import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from catlink.errors import InvalidEfficiency
from catlink.states import (
    is_hermitian,
    lossy_four_mode,
    lossy_pair,
    lossy_pair_direct,
    perfect_four_mode,
    residue_series,
)
from catlink.verify import pair_trace_distance

ENCODINGS = ["mod2", "mod4"]
LATTICE = list(itertools.product(ENCODINGS, [0.3, 0.8, 1.5, 2.5], [0.5, 0.8, 1.0]))


@pytest.mark.parametrize("encoding,alpha,eta1", LATTICE)
def test_pair_trace_hermitian_positive(encoding, alpha, eta1):
    m = lossy_pair(encoding, alpha, eta1).matrix()
    assert np.trace(m).real == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(m, m.conj().T, atol=1e-14)
    assert np.linalg.eigvalsh(m).min() > -1e-12


@pytest.mark.parametrize("encoding,alpha,eta1", LATTICE)
def test_four_mode_invariants(encoding, alpha, eta1):
    state = lossy_four_mode(encoding, alpha, eta1)
    assert state.trace() == pytest.approx(1.0, abs=1e-12)
    assert is_hermitian(state)


@pytest.mark.parametrize("encoding", ENCODINGS)
@pytest.mark.parametrize("alpha", [0.3, 1.0, 2.0])
def test_unit_efficiency_is_perfect(encoding, alpha):
    lossy = lossy_four_mode(encoding, alpha, 1.0)
    np.testing.assert_allclose(lossy.coeff, perfect_four_mode(encoding, alpha).coeff, atol=1e-14)


@pytest.mark.parametrize("encoding", ENCODINGS)
def test_near_unit_efficiency_limit(encoding):
    a = 1.2
    near = lossy_four_mode(encoding, a, 1 - 1e-12).coeff
    np.testing.assert_allclose(near, perfect_four_mode(encoding, a).coeff, atol=1e-10)


@given(st.sampled_from(ENCODINGS), st.floats(0.3, 2.5), st.floats(0.3, 1.0))
def test_closed_form_matches_branch_sum(encoding, alpha, eta1):
    a = lossy_pair(encoding, alpha, eta1).coeff
    b = lossy_pair_direct(encoding, alpha, eta1).coeff
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_closed_form_stable_at_small_alpha():
    for enc in ENCODINGS:
        st_ = lossy_pair(enc, 0.02, 0.7)
        assert st_.trace() == pytest.approx(1.0, abs=1e-14)
        assert np.linalg.eigvalsh(st_.matrix()).min() > -1e-15


@pytest.mark.parametrize("encoding", ENCODINGS)
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_qubit_coherence_decays_with_loss(encoding, alpha):
    # trace norm of the <g|rho|e> block; loss maps compose and contract it.
    # Single cat-basis entries can grow as coherence moves into error classes.
    etas = np.linspace(1.0, 0.3, 15)
    norms = [np.linalg.svd(lossy_pair(encoding, alpha, eta).coeff[0, :, 1, :], compute_uv=False).sum()
             for eta in etas]
    assert np.all(np.diff(norms) <= 1e-14)


@pytest.mark.parametrize("encoding,alpha,eta1", [("mod2", 1.0, 0.8), ("mod4", 1.0, 0.8),
                                                 ("mod4", 1.5, 0.5), ("mod2", 0.5, 0.6)])
def test_pair_matches_kraus_evolution(encoding, alpha, eta1):
    assert pair_trace_distance(encoding, alpha, eta1) < 1e-9


def test_residue_series_partition():
    for z in (0.01, 0.7, 1.99, 2.0, 5.0):
        total = sum(residue_series(z, r, 4) for r in range(4))
        assert total == pytest.approx(np.exp(z), rel=1e-14)
        assert residue_series(z, 0, 2) + residue_series(z, 1, 2) == pytest.approx(np.exp(z), rel=1e-14)


def test_mod4_selection_rule():
    c = lossy_pair("mod4", 1.3, 0.7).coeff
    for j, g, jp, gp in itertools.product(range(2), range(4), range(2), range(4)):
        if (2 * j - g) % 4 != (2 * jp - gp) % 4:
            assert c[j, g, jp, gp] == 0


def test_states_are_immutable():
    s = lossy_four_mode("mod2", 1.0, 0.9)
    with pytest.raises(ValueError):
        s.coeff[0, 0, 0, 0, 0, 0, 0, 0] = 1.0
    with pytest.raises(Exception):
        s.alpha = 2.0


def test_terms_reconstruct_coefficients():
    s = lossy_four_mode("mod4", 0.9, 0.8)
    rebuilt = np.zeros_like(s.coeff)
    for t in s.terms():
        rebuilt[t.ket_qubits + t.ket_cats + t.bra_qubits + t.bra_cats] = t.coeff
    np.testing.assert_array_equal(rebuilt, s.coeff)


def test_unequal_arm_losses():
    s = lossy_four_mode("mod2", 1.0, 0.9, eta1_b=0.6)
    assert s.alpha_bars == pytest.approx((np.sqrt(0.9), np.sqrt(0.6)))
    assert s.trace() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("eta", [0.0, -0.1, 1.1, float("nan")])
def test_invalid_efficiency(eta):
    with pytest.raises(InvalidEfficiency):
        lossy_pair("mod2", 1.0, eta)


def test_bad_arguments():
    with pytest.raises(ValueError):
        lossy_pair("mod3", 1.0, 0.9)
    with pytest.raises(ValueError):
        lossy_pair("mod2", 0.0, 0.9)
