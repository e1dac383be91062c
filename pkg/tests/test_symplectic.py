import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_unitary2
from ngnull import fock
from ngnull import symplectic as sy
from ngnull.errors import InvalidParameterError, InvalidTransmissivityError, InvalidVarianceError
from ngnull.nullifiers import gaussian_nullifiers_for_graph


def fock_cov_single(rho, dim):
    """Covariance of (x, p) computed from a Fock density matrix."""
    x, p = fock.quadratures(dim + 2)
    x, p = fock.crop(x, dim), fock.crop(p, dim)
    xx, pp = fock.quadratures(dim + 2)
    x2 = fock.crop(xx @ xx, dim)
    p2 = fock.crop(pp @ pp, dim)
    sym = fock.crop((xx @ pp + pp @ xx) / 2, dim)
    mx, mp = fock.expectation(rho, x), fock.expectation(rho, p)
    return np.array([[fock.expectation(rho, x2) - mx * mx, fock.expectation(rho, sym) - mx * mp],
                     [fock.expectation(rho, sym) - mx * mp, fock.expectation(rho, p2) - mp * mp]])


@given(st.floats(0.05, 20.0), st.floats(-math.pi, math.pi), st.floats(0.0, 1.0))
def test_constructors_are_symplectic(g, theta, t):
    assert sy.is_symplectic(sy.squeeze_sym(g))
    assert sy.is_symplectic(sy.phase_sym(theta, 1, 2))
    assert sy.is_symplectic(sy.bs_sym(t))
    M = sy.compose(sy.bs_sym(t), sy.squeeze_sym(g, 1, 2))
    assert np.allclose(sy.inverse(M) @ M, np.eye(4), atol=1e-9)


@given(st.integers(0, 10_000))
def test_passive_roundtrip(seed):
    u = random_unitary2(np.random.default_rng(seed))
    M = sy.passive_sym(u)
    assert sy.is_symplectic(M)
    assert np.allclose(sy.sym_to_mode_matrix(M), u)


def test_active_map_is_not_passive():
    with pytest.raises(InvalidParameterError):
        sy.sym_to_mode_matrix(sy.squeeze_sym(2.0, 0, 2))
    with pytest.raises(InvalidParameterError):
        sy.check_symplectic(np.diag([2.0, 2.0]))


@pytest.mark.parametrize("r", [-0.4, 0.3])
def test_squeeze_matches_fock_gate(r):
    dim = 50
    rho = fock.dm(fock.squeezed_vacuum(r, dim))
    cov = sy.transform_cov(sy.squeeze_sym(math.exp(-2 * r)), sy.vacuum_cov(1))
    assert np.allclose(fock_cov_single(rho, dim), cov, atol=1e-9)


def test_phase_matches_fock_gate():
    dim, r, theta = 50, 0.3, 0.7
    psi = fock.phase(theta, dim) @ fock.squeezed_vacuum(r, dim)
    M = sy.compose(sy.phase_sym(theta), sy.squeeze_sym(math.exp(-2 * r)))
    assert np.allclose(fock_cov_single(fock.dm(psi), dim), sy.transform_cov(M, sy.vacuum_cov(1)), atol=1e-9)


def test_beamsplitter_matches_fock_gate():
    dim, r, t = 14, 0.3, 0.8
    sq = fock.dm(fock.squeezed_vacuum(r, dim))
    joint = fock.apply_unitary(fock.beamsplitter(t, dim), fock.tensor(sq, fock.vacuum(dim)))
    M = sy.compose(sy.bs_sym(t), sy.squeeze_sym(math.exp(-2 * r), 0, 2))
    cov = sy.transform_cov(M, sy.vacuum_cov(2))
    for mode in (0, 1):
        red = fock.partial_trace(joint, dim, keep=mode)
        assert np.allclose(fock_cov_single(red, dim), cov[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2],
                           atol=1e-7)


def test_loss_matches_fock_channel():
    dim, r, t = 50, 0.4, 0.75
    rho = fock.loss_channel(fock.dm(fock.squeezed_vacuum(r, dim)), t)
    cov = sy.loss_cov(sy.transform_cov(sy.squeeze_sym(math.exp(-2 * r)), sy.vacuum_cov(1)), t)
    assert np.allclose(fock_cov_single(rho, dim), cov, atol=1e-9)


def test_uncertainty_check():
    assert sy.satisfies_uncertainty(sy.vacuum_cov(2))
    assert not sy.satisfies_uncertainty(0.2 * np.eye(2))
    assert sy.satisfies_uncertainty(np.diag([0.1, 2.5]))


def test_decibel_conversions():
    assert sy.db(0.5) == pytest.approx(0.0)
    assert sy.db(sy.db_inverse(-3.2)) == pytest.approx(-3.2)
    with pytest.raises(InvalidVarianceError):
        sy.db(0.0)


def test_two_mode_cluster_network_map():
    M = sy.two_mode_cluster_network()
    s = 1 / math.sqrt(2)
    expected = np.array([[s, 0, 0, s], [0, s, -s, 0], [0, -s, -s, 0], [s, 0, 0, -s]])
    assert np.allclose(M, expected, atol=1e-12)


@pytest.mark.parametrize("r", [-3.0, -1.0, -0.2, 0.0])
def test_cluster_nullifier_variances(r):
    cov = sy.two_mode_cluster_cov(r)
    for vec in gaussian_nullifiers_for_graph(np.array([[0, 1], [1, 0]])):
        assert sy.gaussian_nullifier_variance(cov, vec) == pytest.approx(math.exp(2 * r), rel=1e-10, abs=1e-14)


def test_untwisting_recovers_input_quadratures():
    M = sy.two_mode_cluster_network()
    rx, rp = sy.untwisted_rows(M, 0)
    cov = sy.two_mode_cluster_cov(-1.0)
    # input p-quadratures were squeezed to exp(-2) / 2
    assert sy.gaussian_nullifier_variance(cov, rp) == pytest.approx(math.exp(-2) / 2)
    assert sy.gaussian_nullifier_variance(cov, rx) == pytest.approx(math.exp(2) / 2)


def test_argument_errors():
    with pytest.raises(InvalidParameterError):
        sy.squeeze_sym(0.0)
    with pytest.raises(InvalidTransmissivityError):
        sy.bs_sym(-0.1)
    with pytest.raises(InvalidTransmissivityError):
        sy.loss_cov(sy.vacuum_cov(1), 2.0)
    with pytest.raises(InvalidParameterError):
        sy.gaussian_nullifier_variance(sy.vacuum_cov(1), [1, 0, 0])
