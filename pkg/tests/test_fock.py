import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from catlink.cats import CatSpec
from catlink.errors import InvalidEfficiency, TruncationError
from catlink.fock import (
    OraclePipeline,
    default_nmax,
    fock_cat,
    fock_coherent,
    hermite_functions,
    initial_pair,
    kraus_loss,
    loss_channel,
    modk_projector,
    quadrature_project,
    quadrature_wavefunction,
    trace_distance,
)
from catlink.measurement import HomodynePOVM, JointOutcome, homodyne_overlaps, joint_outcomes

from conftest import gauss_legendre


def test_hermite_orthonormal():
    x, w = gauss_legendre(-12, 12, 500)
    psi = hermite_functions(40, x)
    np.testing.assert_allclose((psi * w) @ psi.T, np.eye(41), atol=1e-12)


def test_hermite_low_orders():
    x = np.linspace(-2, 2, 11)
    g = (2 / math.pi) ** 0.25 * np.exp(-x * x)
    np.testing.assert_allclose(quadrature_wavefunction(0, x), g, rtol=1e-15)
    np.testing.assert_allclose(quadrature_wavefunction(1, x), 2 * x * g, atol=1e-15)
    np.testing.assert_allclose(quadrature_wavefunction(2, x), (4 * x * x - 1) / math.sqrt(2) * g, atol=1e-15)


@pytest.mark.parametrize("alpha,expected", [(0.5, 20), (1.0, 20), (2.0, 30), (3.0, 43)])
def test_default_nmax(alpha, expected):
    assert default_nmax(alpha) == expected


@given(st.floats(0.05, 3.0), st.integers(0, 3))
def test_fock_cat_support_and_norm(alpha, lam):
    vec = fock_cat(CatSpec(alpha, lam=lam), default_nmax(alpha))
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-14)
    n = np.nonzero(np.abs(vec) > 0)[0]
    assert np.all(n % 4 == lam)


def test_truncation_error():
    with pytest.raises(TruncationError):
        fock_cat(CatSpec(3.0, parity=1), 10)


def test_kraus_completeness():
    ops = kraus_loss(0.7, 15)
    total = sum(e.T @ e for e in ops)
    np.testing.assert_allclose(total, np.eye(16), atol=1e-14)
    with pytest.raises(InvalidEfficiency):
        kraus_loss(0.0, 5)


def test_loss_maps_coherent_to_coherent():
    nmax, beta, eta = 40, 1.2 + 0.5j, 0.6
    v = fock_coherent(beta, nmax)
    out = loss_channel(np.outer(v, v.conj()), eta)
    w = fock_coherent(math.sqrt(eta) * beta, nmax)
    assert trace_distance(out, np.outer(w, w.conj())) < 1e-10


def test_loss_channels_compose():
    v = fock_cat(CatSpec(1.3, lam=2), 30)
    rho = np.outer(v, v.conj())
    two = loss_channel(loss_channel(rho, 0.8), 0.7)
    one = loss_channel(rho, 0.56)
    np.testing.assert_allclose(two, one, atol=1e-13)


def test_loss_on_second_subsystem():
    rho = initial_pair("mod2", 1.0, 20)
    out = loss_channel(rho, 0.8, dims=(2, 21), mode=1)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-12)
    # the qubit populations are untouched
    red = out.reshape(2, 21, 2, 21).trace(axis1=1, axis2=3)
    np.testing.assert_allclose(np.diag(red).real, [0.5, 0.5], atol=1e-12)


def test_modk_projector():
    rho = np.eye(8) / 8
    proj, tr = modk_projector(rho, 4, 1)
    assert tr == pytest.approx(2 / 8)
    with pytest.raises(ValueError):
        modk_projector(rho, 4, 4)


def test_gaussian_povm_equals_loss_then_homodyne():
    alpha, eta2, nmax = 1.1, 0.7, 40
    q = np.array([-1.3, 0.1, 0.8])
    engine = homodyne_overlaps(alpha, "mod4", q, HomodynePOVM(eta2))
    vecs = [fock_cat(CatSpec(alpha, lam=g), nmax) for g in range(4)]
    psi = hermite_functions(nmax, q)
    for g in range(4):
        for h in range(4):
            lossy = loss_channel(np.outer(vecs[g], vecs[h].conj()), eta2)
            ref = np.einsum("nq,nm,mq->q", psi, lossy, psi)
            np.testing.assert_allclose(engine[:, g, h], ref, atol=1e-12)


def _dense_condition(encoding, alpha, eta1, eta2, nmax, outcome, qa, qb):
    """Full four-subsystem construction (qubit_a, mode_a, qubit_b, mode_b)."""
    from catlink.fock import lossy_pair_fock

    k = 2 if encoding == "mod2" else 4
    pair = lossy_pair_fock(encoding, alpha, eta1, nmax)
    dims = (2, nmax + 1, 2, nmax + 1)
    rho = np.kron(pair, pair)
    lam = (0 if outcome.value == 1 else 1) if outcome.kind == "mod2" else outcome.value
    rho, _ = modk_projector(rho, k, lam, dims=dims, modes=(1, 3))
    if outcome.parities is not None:
        for mode, p in zip((1, 3), outcome.parities):
            rho, _ = modk_projector(rho, 2, 0 if p == 1 else 1, dims=dims, modes=(mode,))
    rho = loss_channel(rho, eta2, dims=dims, mode=1)
    rho = loss_channel(rho, eta2, dims=dims, mode=3)
    rho, rest = quadrature_project(rho, qb, dims, 3)
    rho, _ = quadrature_project(rho, qa, rest, 1)
    return rho


@pytest.mark.parametrize("encoding,outcome", [
    ("mod2", JointOutcome("mod2", 1)),
    ("mod2", JointOutcome("mod2", -1)),
    ("mod4", JointOutcome("mod4", 0)),
    ("mod4", JointOutcome("mod4", 3)),
    ("mod4", JointOutcome("mod4", 1, (1, -1))),
])
def test_block_method_matches_dense(encoding, outcome):
    nmax, alpha, eta1, eta2 = 12, 0.6, 0.8, 0.7
    pipe = OraclePipeline(encoding, alpha, eta1, eta2, nmax=nmax)
    for qa, qb in [(0.3, -0.5), (-1.0, 0.9)]:
        dense = _dense_condition(encoding, alpha, eta1, eta2, nmax, outcome, qa, qb)
        block, _ = pipe.condition(outcome, qa, qb)
        np.testing.assert_allclose(block, dense, atol=1e-14)


@pytest.mark.parametrize("encoding", ["mod2", "mod4"])
def test_truncation_robustness(encoding):
    alpha, eta = 1.2, 0.8
    lo = OraclePipeline(encoding, alpha, eta, eta)
    hi = OraclePipeline(encoding, alpha, eta, eta, nmax=2 * lo.nmax)
    outcomes = joint_outcomes(encoding)
    for o in outcomes:
        assert abs(lo.probability(o) - hi.probability(o)) < 1e-9
        for qa, qb in [(0.4, 0.9), (-1.2, 0.2)]:
            a, da = lo.condition(o, qa, qb)
            b, db = hi.condition(o, qa, qb)
            assert abs(da - db) < 1e-9
            assert trace_distance(a / da, b / db) < 1e-9
