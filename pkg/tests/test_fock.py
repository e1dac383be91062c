import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density, random_unitary2
from ngnull import fock
from ngnull.errors import (HeraldImpossibleError, IncreaseCutoffError, InvalidDimensionError,
                           InvalidParameterError, InvalidTransmissivityError, NonHermitianExpectationError,
                           NonHermitianOperatorError)


def test_commutator_holds_below_cutoff():
    a, ad, n = fock.ladder_ops(12)
    comm = a @ ad - ad @ a
    assert np.allclose(comm[:-1, :-1], np.eye(11))
    assert np.allclose(ad @ a, n)


def test_vacuum_quadrature_variance_is_half():
    x, p = fock.quadratures(10)
    vac = fock.vacuum(10)
    assert fock.expectation(vac, x @ x) == pytest.approx(0.5, abs=1e-15)
    assert fock.expectation(vac, p @ p) == pytest.approx(0.5, abs=1e-15)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2 * math.pi))
def test_coherent_state_mean_field(mag, ang):
    alpha = mag * np.exp(1j * ang)
    psi = fock.coherent_state(alpha, 40)
    a, _, _ = fock.ladder_ops(40)
    assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-10)
    assert np.vdot(psi, a @ psi) == pytest.approx(alpha, abs=1e-9)


@pytest.mark.parametrize("r", [-0.8, -0.3, 0.0, 0.4, 1.0])
def test_squeezed_vacuum_closed_form_matches_gate(r):
    dim = 30
    assert np.allclose(fock.squeezed_vacuum(r, dim), fock.squeeze(r, dim, pad=60) @ fock.fock_state(0, dim),
                       atol=1e-10)


@pytest.mark.parametrize("r", [-0.5, 0.2, 0.7])
def test_squeezing_shrinks_x_for_positive_r(r):
    dim = 60
    x, p = fock.quadratures(dim + 2)
    rho = fock.dm(fock.squeezed_vacuum(r, dim))
    vx = fock.expectation(rho, fock.crop(x @ x, dim))
    vp = fock.expectation(rho, fock.crop(p @ p, dim))
    assert vx == pytest.approx(math.exp(-2 * r) / 2, abs=1e-9)
    assert vp == pytest.approx(math.exp(2 * r) / 2, abs=1e-9)


def test_squeeze_heisenberg_picture():
    big, dim = 80, 10
    S = fock.squeeze(0.3, big, pad=40)
    x, _ = fock.quadratures(big)
    lhs = (S.conj().T @ x @ S)[:dim, :dim]
    assert np.allclose(lhs, math.exp(-0.3) * x[:dim, :dim], atol=1e-10)


@pytest.mark.parametrize("r", [-0.4, 0.0, 0.25])
def test_squeezed_single_photon_matches_gate(r):
    dim = 30
    ref = fock.squeeze(r, dim, pad=60) @ fock.fock_state(1, dim)
    assert np.allclose(fock.squeezed_single_photon(r, dim), ref, atol=1e-10)


def test_displacement_moves_vacuum_to_coherent():
    alpha = 0.7 - 0.4j
    assert np.allclose(fock.displace(alpha, 30) @ fock.fock_state(0, 30), fock.coherent_state(alpha, 30),
                       atol=1e-10)


def test_phase_rotates_annihilator():
    a, _, _ = fock.ladder_ops(8)
    R = fock.phase(0.9, 8)
    assert np.allclose(R.conj().T @ a @ R, np.exp(1j * 0.9) * a)


def test_quadrature_power_is_exact_inside_cutoff():
    big = fock.quadrature_operator(0.4, 60)
    ref = np.linalg.matrix_power(big, 4)[:20, :20]
    assert np.allclose(fock.quadrature_power(0.4, 4, 20), ref, atol=1e-12)


def _interior_heisenberg_error(u, dim):
    U = fock.passive_unitary(u, dim)
    a, _, _ = fock.ladder_ops(dim)
    eye = np.eye(dim)
    modes = [np.kron(a, eye), np.kron(eye, a)]
    idx = np.array([i * dim + j for i in range(dim) for j in range(dim) if i + j < dim - 1])
    err = 0.0
    for i in range(2):
        lhs = U.conj().T @ modes[i] @ U
        rhs = u[i, 0] * modes[0] + u[i, 1] * modes[1]
        err = max(err, np.max(np.abs((lhs - rhs)[np.ix_(idx, idx)])))
    return err


@given(st.integers(0, 10_000))
def test_passive_unitary_heisenberg_map(seed):
    u = random_unitary2(np.random.default_rng(seed))
    assert _interior_heisenberg_error(u, 8) < 1e-12


def test_passive_unitary_is_unitary_on_complete_number_blocks():
    dim = 7
    U = fock.beamsplitter(0.6, dim)
    idx = np.array([i * dim + j for i in range(dim) for j in range(dim) if i + j < dim])
    block = U[np.ix_(idx, idx)]
    assert np.allclose(block.conj().T @ block, np.eye(idx.size), atol=1e-12)
    with pytest.raises(InvalidParameterError):
        fock.passive_unitary(np.array([[1, 1], [0, 1]]), 5)


def test_beamsplitter_splits_single_photon():
    dim = 4
    U = fock.beamsplitter(0.8, dim)
    out = U @ np.kron(fock.fock_state(1, dim), fock.fock_state(0, dim))
    assert abs(out[1 * dim + 0]) ** 2 == pytest.approx(0.64)
    assert abs(out[0 * dim + 1]) ** 2 == pytest.approx(0.36)


@given(st.floats(0.0, 1.0), st.integers(0, 10_000))
def test_loss_kraus_matches_dilation(t, seed):
    rho = random_density(10, 6, np.random.default_rng(seed))
    assert np.allclose(fock.loss_channel(rho, t), fock.loss_channel_dilated(rho, t), atol=1e-12)


def test_loss_maps_coherent_to_coherent():
    alpha, t = 1.2 + 0.3j, 0.7
    out = fock.loss_channel(fock.dm(fock.coherent_state(alpha, 40)), t)
    assert np.allclose(out, fock.dm(fock.coherent_state(t * alpha, 40)), atol=1e-10)
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)


def test_full_loss_gives_vacuum():
    rho = random_density(8, 5, np.random.default_rng(1))
    assert np.allclose(fock.loss_channel(rho, 0.0), fock.vacuum(8))


def test_herald_povm_and_conditioning():
    assert np.allclose(fock.herald_povm(0.5, 4), [0, 0.5, 0.75, 0.875])
    dim = 6
    joint = np.kron(fock.vacuum(dim), fock.vacuum(dim))
    with pytest.raises(HeraldImpossibleError):
        fock.condition_on_herald(joint, fock.herald_povm(1.0, dim), dim)


def test_thermal_state_mean_photon_number():
    rho = fock.thermal_state(0.3, 60)
    _, _, n = fock.ladder_ops(60)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-12)
    assert fock.expectation(rho, n) == pytest.approx(0.3, abs=1e-12)


def test_partial_trace_of_product():
    rng = np.random.default_rng(3)
    a, b = random_density(5, 4, rng), random_density(5, 3, rng)
    joint = fock.tensor(a, b)
    assert np.allclose(fock.partial_trace(joint, 5, keep=0), a)
    assert np.allclose(fock.partial_trace(joint, 5, keep=1), b)


def test_validate_density_rejects_bad_input():
    with pytest.raises(InvalidParameterError):
        fock.validate_density(np.eye(3) / 2)
    with pytest.raises(InvalidParameterError):
        fock.validate_density(np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(IncreaseCutoffError):
        fock.validate_density(fock.dm(fock.coherent_state(3.0, 10)) / np.linalg.norm(fock.coherent_state(3.0, 10)) ** 2)
    fock.validate_density(fock.vacuum(5))


def test_argument_errors():
    with pytest.raises(InvalidDimensionError):
        fock.ladder_ops(1)
    with pytest.raises(InvalidTransmissivityError):
        fock.bs_mode_matrix(1.5)
    with pytest.raises(NonHermitianOperatorError):
        fock.hermitize(np.array([[0, 1], [0, 0]]))
    with pytest.raises(NonHermitianExpectationError):
        fock.expectation(fock.dm(fock.fock_state(0, 2) + fock.fock_state(1, 2)) / 2, np.array([[0, 1j], [0, 0]]))
    with pytest.raises(InvalidParameterError):
        fock.gate_unitary("teleport", 1.0, 4)


def test_gate_dispatch_and_cutoff_drift():
    assert np.allclose(fock.gate_unitary("phase", 0.3, 5), fock.phase(0.3, 5))

    def mean_n(dim):
        _, _, n = fock.ladder_ops(dim)
        return fock.expectation(fock.dm(fock.coherent_state(1.0, dim)), n)

    value, drift = fock.cutoff_drift(mean_n, 30)
    assert value == pytest.approx(1.0, abs=1e-12)
    assert drift < 1e-12
