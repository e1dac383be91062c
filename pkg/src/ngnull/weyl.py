"""Write Weyl-symmetric quadrature monomials as sums of rotated-quadrature powers.

The degree-``N`` power of a rotated quadrature expands as::

    X(theta)^N = sum_l  binom(N, l) cos^(N-l)(theta) sin^l(theta)  W[x^(N-l) p^l]

where ``W[...]`` is the symmetrized (Weyl-ordered) product.  Collecting the
trigonometric factors of ``K`` angles in the ``(N+1) x K`` matrix ``C`` with
``C[l, k] = cos^(N-l)(theta_k) sin^l(theta_k)``, the coefficients ``A`` of
``sum_k A_k X(theta_k)^N`` that reproduce a target combination of Weyl
monomials solve ``C A = d``, where ``d[l]`` is the target coefficient of
``W[x^(N-l) p^l]`` divided by ``binom(N, l)``.  Rows index monomials and
columns index angles.
"""

import itertools
import math
from collections import namedtuple
from functools import reduce

import numpy as np

from .errors import DegenerateAnglesError, InvalidParameterError
from .fock import crop, quadrature_power, quadratures

COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-9
MAX_DEGREE = 8

EQ15_ANGLES = (0.0, math.pi / 4, math.pi / 2, -math.pi / 4)
EQ16_ANGLES = (0.0, math.pi / 6, math.pi / 2, 5 * math.pi / 6)
ANGLE_PRESETS = {"eq15": EQ15_ANGLES, "eq16": EQ16_ANGLES}

WeylMonomial = namedtuple("WeylMonomial", ["m", "n"])
WeylMonomial.__doc__ = "Symmetrized product of ``m`` factors of x and ``n`` factors of p."


def _as_monomial(mono):
    m, n = mono
    if m < 0 or n < 0 or m + n < 1:
        raise InvalidParameterError(f"invalid Weyl monomial {mono!r}")
    if m + n > MAX_DEGREE:
        raise InvalidParameterError(f"degree {m + n} exceeds the maximum {MAX_DEGREE}")
    return WeylMonomial(int(m), int(n))


def check_angles(angles, tol=1e-9):
    """Reject angle sets with two entries equal modulo pi."""
    angles = [float(a) for a in angles]
    for i, j in itertools.combinations(range(len(angles)), 2):
        diff = (angles[i] - angles[j]) % math.pi
        if min(diff, math.pi - diff) < tol:
            raise DegenerateAnglesError(
                f"angles {angles[i]!r} and {angles[j]!r} coincide modulo pi")
    return angles


def expand_power(theta, n):
    """Weyl-monomial coefficients of ``X(theta)**n`` as ``{WeylMonomial: coef}``."""
    if n < 1:
        raise InvalidParameterError("power must be >= 1")
    c, s = math.cos(theta), math.sin(theta)
    return {WeylMonomial(n - l, l): math.comb(n, l) * c ** (n - l) * s ** l for l in range(n + 1)}


def build_system(angles, n):
    """Matrix ``C`` with ``C[l, k] = cos^(n-l)(theta_k) sin^l(theta_k)``."""
    angles = check_angles(angles)
    th = np.asarray(angles)
    l = np.arange(n + 1)[:, None]
    C = np.cos(th)[None, :] ** (n - l) * np.sin(th)[None, :] ** l
    if len(angles) == n + 1:
        cond = np.linalg.cond(C)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise DegenerateAnglesError(f"system condition number {cond:.3e} exceeds {COND_LIMIT:g}")
    return C


def _target_vector(weyl_coeffs, n):
    d = np.zeros(n + 1)
    for mono, coef in weyl_coeffs.items():
        m, p = _as_monomial(mono)
        if m + p != n:
            raise InvalidParameterError(f"monomial {mono!r} is not of degree {n}")
        d[p] += coef / math.comb(n, p)
    return d


def solve_weyl(weyl_coeffs, angles):
    """Coefficients ``A`` with ``sum_k A_k X(theta_k)^N`` equal to the target.

    ``weyl_coeffs`` maps degree-``N`` monomials to real coefficients.  Fewer
    than ``N + 1`` angles are allowed when the target lies in the span of the
    chosen powers (symmetric angle pairs cancel odd monomials); the residual
    is checked either way.
    """
    degrees = {sum(mono) for mono in weyl_coeffs}
    if len(degrees) != 1:
        raise InvalidParameterError("target must be homogeneous in degree")
    n = degrees.pop()
    C = build_system(angles, n)
    d = _target_vector(weyl_coeffs, n)
    A, _, rank, sv = np.linalg.lstsq(C, d, rcond=None)
    if rank < C.shape[1] or sv[0] / sv[-1] > COND_LIMIT:
        raise DegenerateAnglesError(f"rank-deficient system (rank {rank} of {C.shape[1]} columns)")
    resid = np.linalg.norm(C @ A - d)
    if resid > RESIDUAL_TOL:
        raise DegenerateAnglesError(f"target not representable on these angles (residual {resid:.3e})")
    return A


def solve_monomial(target, angles):
    """Coefficients reproducing a single Weyl monomial."""
    target = _as_monomial(target)
    return solve_weyl({target: 1.0}, angles)


def reconstruct_operator(coeffs, angles, power, dim):
    return sum(c * quadrature_power(th, power, dim) for c, th in zip(coeffs, angles))


def weyl_operator_oracle(mono, dim):
    """Average of every distinct ordering of ``m`` x-factors and ``n`` p-factors."""
    m, n = _as_monomial(mono)
    big = dim + m + n + 1
    x, p = quadratures(big)
    total = np.zeros((big, big), dtype=complex)
    count = 0
    for pos in itertools.combinations(range(m + n), n):
        pset = set(pos)
        factors = [p if i in pset else x for i in range(m + n)]
        total += reduce(np.matmul, factors)
        count += 1
    return crop(total / count, dim)
