import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ngnull import fock, weyl
from ngnull.errors import DegenerateAnglesError, InvalidParameterError


def test_expand_power_reproduces_quadrature_power():
    dim, theta, n = 12, 0.37, 4
    total = sum(c * weyl.weyl_operator_oracle(mono, dim) for mono, c in weyl.expand_power(theta, n).items())
    assert np.allclose(total, fock.quadrature_power(theta, n, dim), atol=1e-10)


def test_oracle_for_mixed_monomial():
    dim = 10
    x, p = fock.quadratures(dim + 4)
    ref = fock.crop((x @ p + p @ x) / 2, dim)
    assert np.allclose(weyl.weyl_operator_oracle((1, 1), dim), ref)


@pytest.mark.parametrize("mono", [(4, 0), (3, 1), (2, 2), (1, 3), (0, 4), (5, 1), (3, 3)])
def test_monomials_on_evenly_spaced_angles(mono):
    n = sum(mono)
    angles = [k * math.pi / (n + 1) for k in range(n + 1)]
    coeffs = weyl.solve_monomial(mono, angles)
    dim = 20
    rec = weyl.reconstruct_operator(coeffs, angles, n, dim)
    assert np.allclose(rec, weyl.weyl_operator_oracle(mono, dim), atol=1e-9)


def test_quartic_presets_solve_symmetric_targets():
    # x^4 + p^4 + 2 W[x^2 p^2] on the four-angle presets
    target = {(4, 0): 1.0, (2, 2): 2.0, (0, 4): 1.0}
    c15 = weyl.solve_weyl(target, weyl.EQ15_ANGLES)
    assert np.allclose(c15, [2 / 3] * 4)
    c16 = weyl.solve_weyl(target, weyl.EQ16_ANGLES)
    assert np.allclose(c16, [0.0, 8 / 9, 8 / 9, 8 / 9])


@given(st.lists(st.floats(-math.pi, math.pi), min_size=5, max_size=5))
def test_uniform_random_quartic_angles_solve_or_reject(angles):
    try:
        coeffs = weyl.solve_monomial((2, 2), angles)
    except DegenerateAnglesError:
        return
    C = weyl.build_system(angles, 4)
    d = np.zeros(5)
    d[2] = 1.0 / 6.0
    assert np.linalg.norm(C @ coeffs - d) <= 1e-9 * max(1.0, np.linalg.norm(coeffs))


def test_degenerate_angles_are_rejected():
    with pytest.raises(DegenerateAnglesError):
        weyl.check_angles([0.0, math.pi])
    with pytest.raises(DegenerateAnglesError):
        weyl.solve_monomial((1, 1), [0.2, 0.2 + 1e-12, 1.0])
    with pytest.raises(DegenerateAnglesError):
        # x^3 needs four angles; three cannot span the cubic space
        weyl.solve_monomial((2, 1), [0.0, 1.0, 2.0])


def test_near_degenerate_square_system_is_rejected():
    with pytest.raises(DegenerateAnglesError):
        weyl.build_system([0.0, 1e-7, 2e-7, 1.0, 2.0, 3.0, 2.5], 6)


def test_invalid_targets():
    with pytest.raises(InvalidParameterError):
        weyl.solve_weyl({(2, 0): 1.0, (1, 0): 1.0}, [0.0, 1.0, 2.0])
    with pytest.raises(InvalidParameterError):
        weyl.solve_monomial((5, 4), [0.1 * k for k in range(10)])
    with pytest.raises(InvalidParameterError):
        weyl.expand_power(0.0, 0)
