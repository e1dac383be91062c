"""Covariance matrices and symplectic maps in the ordering (x1, p1, x2, p2, ...).

A symplectic matrix ``M`` acts on the quadrature vector in the Heisenberg
picture, ``r' = M r``, so a covariance matrix transforms as ``M cov M^T``.
Every constructor here matches the Fock-space gate of the same name in
:mod:`ngnull.fock`.
"""

import math

import numpy as np

from .errors import InvalidParameterError, InvalidTransmissivityError, InvalidVarianceError
from .fock import VACUUM_VARIANCE

SYMPLECTIC_TOL = 1e-10


def omega(n_modes):
    """Standard symplectic form for ``n_modes`` modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def is_symplectic(M, tol=SYMPLECTIC_TOL):
    M = np.asarray(M, dtype=float)
    om = omega(M.shape[0] // 2)
    return bool(np.max(np.abs(M @ om @ M.T - om)) <= tol)


def check_symplectic(M, tol=SYMPLECTIC_TOL):
    if not is_symplectic(M, tol):
        raise InvalidParameterError("matrix is not symplectic")
    return np.asarray(M, dtype=float)


def vacuum_cov(n_modes):
    return VACUUM_VARIANCE * np.eye(2 * n_modes)


def satisfies_uncertainty(cov, tol=1e-9):
    """Robertson-Schroedinger check ``cov + i/2 Omega >= 0``."""
    cov = np.asarray(cov, dtype=float)
    if np.max(np.abs(cov - cov.T)) > 1e-12:
        return False
    lmin = np.linalg.eigvalsh(cov + 0.5j * omega(cov.shape[0] // 2)).min()
    return bool(lmin >= -tol)


def embed(local, mode, n_modes):
    """Place a single-mode 2x2 map on ``mode`` of an ``n_modes`` register."""
    M = np.eye(2 * n_modes)
    M[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] = local
    return M


def squeeze_sym(g, mode=0, n_modes=1):
    """``x -> sqrt(g) x``, ``p -> p / sqrt(g)``; vacuum goes to diag(g/2, 1/(2g))."""
    if not g > 0:
        raise InvalidParameterError(f"squeezing factor g must be positive, got {g!r}")
    sg = math.sqrt(g)
    return embed(np.diag([sg, 1 / sg]), mode, n_modes)


def phase_sym(theta, mode=0, n_modes=1):
    """Rotation matching ``a -> exp(i theta) a``."""
    c, s = math.cos(theta), math.sin(theta)
    return embed(np.array([[c, -s], [s, c]]), mode, n_modes)


def passive_sym(u):
    """Symplectic (orthogonal) matrix of the passive map ``a -> u a``."""
    u = np.asarray(u, dtype=complex)
    n = u.shape[0]
    X, Y = u.real, u.imag
    M = np.zeros((2 * n, 2 * n))
    M[0::2, 0::2] = X
    M[0::2, 1::2] = -Y
    M[1::2, 0::2] = Y
    M[1::2, 1::2] = X
    return M


def sym_to_mode_matrix(M):
    """Inverse of :func:`passive_sym`; rejects active (squeezing) maps."""
    M = check_symplectic(M)
    if np.max(np.abs(M @ M.T - np.eye(M.shape[0]))) > SYMPLECTIC_TOL:
        raise InvalidParameterError("symplectic map is not passive")
    return M[0::2, 0::2] + 1j * M[1::2, 0::2]


def bs_sym(t, n_modes=2, modes=(0, 1)):
    """Beam splitter ``a -> t a - s b``, ``b -> s a + t b`` with ``s = sqrt(1 - t^2)``."""
    if not 0.0 <= t <= 1.0:
        raise InvalidTransmissivityError(f"transmissivity must lie in [0, 1], got {t!r}")
    s = math.sqrt(1 - t * t)
    i, j = modes
    M = np.eye(2 * n_modes)
    for q in range(2):
        M[2 * i + q, 2 * i + q] = t
        M[2 * i + q, 2 * j + q] = -s
        M[2 * j + q, 2 * i + q] = s
        M[2 * j + q, 2 * j + q] = t
    return M


def compose(A, B):
    """Apply ``B`` first, then ``A``."""
    return np.asarray(A) @ np.asarray(B)


def inverse(M):
    """Inverse through the symplectic identity ``M^-1 = -Omega M^T Omega``."""
    M = np.asarray(M, dtype=float)
    om = omega(M.shape[0] // 2)
    return -om @ M.T @ om


def transform_cov(M, cov):
    return M @ cov @ M.T


def loss_cov(cov, t, mode=0):
    """Pure loss of amplitude transmissivity ``t`` on one mode."""
    if not 0.0 <= t <= 1.0:
        raise InvalidTransmissivityError(f"transmissivity must lie in [0, 1], got {t!r}")
    cov = np.array(cov, dtype=float)
    n = cov.shape[0] // 2
    scale = np.ones(2 * n)
    scale[2 * mode:2 * mode + 2] = t
    out = cov * np.outer(scale, scale)
    out[2 * mode:2 * mode + 2, 2 * mode:2 * mode + 2] += (1 - t * t) * VACUUM_VARIANCE * np.eye(2)
    return out


def db(variance):
    """Variance relative to vacuum in decibels."""
    if not variance > 0:
        raise InvalidVarianceError(f"variance must be positive, got {variance!r}")
    return 10 * math.log10(variance / VACUUM_VARIANCE)


def db_inverse(value_db):
    return VACUUM_VARIANCE * 10 ** (value_db / 10)


def gaussian_nullifier_variance(cov, nullifier):
    """Variance ``n^T cov n`` of a linear quadrature combination."""
    n = np.asarray(nullifier, dtype=float)
    cov = np.asarray(cov, dtype=float)
    if n.shape[0] != cov.shape[0]:
        raise InvalidParameterError(f"nullifier length {n.shape[0]} does not match {cov.shape[0]}")
    return float(n @ cov @ n)


def untwist(M):
    """Untwisting map ``M^-1``.

    Rows ``2k`` and ``2k + 1`` of the result express the initial ``x`` and
    ``p`` of mode ``k`` in terms of the measured quadratures.
    """
    return inverse(check_symplectic(M))


def untwisted_rows(M, mode):
    inv = untwist(M)
    return inv[2 * mode], inv[2 * mode + 1]


def two_mode_cluster_network():
    """Phase, balanced beam splitter, phase on mode 2 giving the canonical two-node map.

    Resulting Heisenberg map::

        x1' = (x1 + p2)/sqrt2   p1' = (p1 - x2)/sqrt2
        x2' = (-x2 - p1)/sqrt2  p2' = (x1 - p2)/sqrt2
    """
    first = phase_sym(math.pi / 2, mode=1, n_modes=2)
    second = phase_sym(math.pi / 2, mode=1, n_modes=2)
    return compose(second, compose(bs_sym(1 / math.sqrt(2)), first))


def two_mode_cluster_cov(r):
    """Covariance of the two-node cluster from p-squeezed inputs ``p = e^r p0``."""
    g = math.exp(-2 * r)
    sq = compose(squeeze_sym(g, 0, 2), squeeze_sym(g, 1, 2))
    M = compose(two_mode_cluster_network(), sq)
    return transform_cov(M, vacuum_cov(2))
