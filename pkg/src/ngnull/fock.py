"""Truncated Fock-space linear algebra for one and two bosonic modes.

Conventions used throughout the package::

    x = (a + a^dag) / sqrt(2),   p = (a - a^dag) / (i sqrt(2)),   [x, p] = i

so the vacuum variance of every quadrature is 1/2.  The squeezing gate is
``S(r) = exp(r/2 (a^2 - a^dag^2))``, for which ``S(r)^dag x S(r) = exp(-r) x``:
positive ``r`` squeezes ``x``.  Operators and states are plain complex numpy
arrays.  Two-mode objects live on the ``D*D`` product basis with mode 0 as
the major index, ``|i>|j> -> i*D + j``.

Gates that do not conserve photon number (squeezing, displacement) are built
in a padded space and cropped, so the matrix elements between low-lying Fock
states are those of the untruncated operator.  Passive two-mode gates are
assembled block by block in total photon number, which is exact.
"""

import math

import numpy as np
from scipy.linalg import expm, schur
from scipy.special import gammaln

from .errors import (
    HeraldImpossibleError,
    IncreaseCutoffError,
    InvalidDimensionError,
    InvalidParameterError,
    InvalidTransmissivityError,
    NonHermitianExpectationError,
    NonHermitianOperatorError,
)

VACUUM_VARIANCE = 0.5
DEFAULT_DIM = 40
DEFAULT_TWO_MODE_DIM = 25
LEAKAGE_TOL = 1e-6
HERMITIAN_TOL = 1e-12
SYMMETRIZE_TOL = 1e-10
IMAG_TOL = 1e-9
HERALD_MIN_PROB = 1e-12


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"Fock cutoff must be an integer >= 2, got {dim!r}")
    return int(dim)


def _check_t(t):
    if not 0.0 <= t <= 1.0:
        raise InvalidTransmissivityError(f"transmissivity must lie in [0, 1], got {t!r}")
    return float(t)


def _padded(dim, pad):
    return dim + (max(dim, 20) if pad is None else int(pad))


def crop(op, dim):
    """Restrict a single-mode matrix or vector to the first ``dim`` levels."""
    op = np.asarray(op)
    if op.ndim == 1:
        return op[:dim].copy()
    return op[:dim, :dim].copy()


def ladder_ops(dim):
    """Return ``(a, a_dagger, n)`` truncated to ``dim`` Fock levels."""
    dim = _check_dim(dim)
    a = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    return a, a.conj().T, np.diag(np.arange(dim, dtype=float)).astype(complex)


def quadratures(dim):
    a, ad, _ = ladder_ops(dim)
    return (a + ad) / math.sqrt(2), (a - ad) / (1j * math.sqrt(2))


def quadrature_operator(theta, dim):
    """Rotated quadrature ``X(theta) = cos(theta) x + sin(theta) p``."""
    x, p = quadratures(dim)
    return math.cos(theta) * x + math.sin(theta) * p


def quadrature_power(theta, power, dim):
    """``X(theta)**power`` with exact matrix elements inside the cutoff.

    The power is taken in a space padded by ``power`` levels; paths that
    leave the truncated space would otherwise be lost.
    """
    dim = _check_dim(dim)
    if power < 0 or int(power) != power:
        raise InvalidParameterError(f"power must be a nonnegative integer, got {power!r}")
    big = quadrature_operator(theta, dim + int(power) + 1)
    return crop(np.linalg.matrix_power(big, int(power)), dim)


def hermitize(op, tol=SYMMETRIZE_TOL):
    """Symmetrize ``op`` if its anti-Hermitian residue is below ``tol``."""
    op = np.asarray(op)
    residue = np.max(np.abs(op - op.conj().T)) if op.size else 0.0
    if residue > tol:
        raise NonHermitianOperatorError(f"anti-Hermitian residue {residue:.3e} exceeds {tol:g}")
    return (op + op.conj().T) / 2


def is_hermitian(op, tol=HERMITIAN_TOL):
    return bool(np.max(np.abs(op - op.conj().T)) <= tol)


# --- states -----------------------------------------------------------------

def dm(psi):
    """Density matrix of a pure state vector."""
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def fock_state(k, dim):
    dim = _check_dim(dim)
    if not 0 <= k < dim:
        raise InvalidParameterError(f"Fock level {k} outside cutoff {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[k] = 1.0
    return psi


def vacuum(dim):
    return dm(fock_state(0, dim))


def coherent_state(alpha, dim):
    """Truncated coherent state vector; the components are exact."""
    dim = _check_dim(dim)
    k = np.arange(dim)
    if alpha == 0:
        return fock_state(0, dim)
    logmag = -abs(alpha) ** 2 / 2 + k * math.log(abs(alpha)) - 0.5 * gammaln(k + 1)
    return np.exp(logmag) * np.exp(1j * k * np.angle(alpha))


def squeezed_vacuum(r, dim):
    """Closed-form components of ``S(r)|0>`` (even Fock levels only)."""
    dim = _check_dim(dim)
    psi = np.zeros(dim, dtype=complex)
    kk = np.arange(0, (dim + 1) // 2)
    th = math.tanh(r)
    if th == 0.0:
        psi[0] = 1.0
        return psi
    logc = 0.5 * gammaln(2 * kk + 1) - kk * math.log(2) - gammaln(kk + 1)
    psi[2 * kk] = (np.exp(logc + kk * math.log(abs(th))) * np.sign(-th) ** kk
                   / math.sqrt(math.cosh(r)))
    return psi


def squeezed_fock(r, k, dim, pad=None):
    """``S(r)|k>`` obtained from the padded squeezing gate."""
    big = _padded(dim, pad)
    return crop(squeeze(r, big, pad=0) @ fock_state(k, big), dim)


def thermal_state(nbar, dim):
    dim = _check_dim(dim)
    if nbar < 0:
        raise InvalidParameterError("mean photon number must be >= 0")
    if nbar == 0:
        return vacuum(dim)
    k = np.arange(dim)
    pops = (nbar / (1 + nbar)) ** k / (1 + nbar)
    return np.diag(pops).astype(complex)


def leakage(rho, n_top=2):
    """Population of the top ``n_top`` Fock levels of a single-mode state."""
    rho = np.asarray(rho)
    if rho.ndim == 1:
        return float(np.sum(np.abs(rho[-n_top:]) ** 2))
    return float(np.sum(np.real(np.diag(rho))[-n_top:]))


def two_mode_leakage(joint, dim, n_top=2):
    d0 = np.real(np.diag(partial_trace(joint, dim, keep=0)))
    d1 = np.real(np.diag(partial_trace(joint, dim, keep=1)))
    return float(max(d0[-n_top:].sum(), d1[-n_top:].sum()))


def validate_density(rho, leakage_tol=LEAKAGE_TOL, dim=None):
    """Check the density-operator invariants; raise on violation.

    ``dim`` marks ``rho`` as a two-mode state with ``dim`` levels per mode.
    """
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidParameterError(f"density matrix must be square, got {rho.shape}")
    if not is_hermitian(rho, 1e-12):
        raise InvalidParameterError("density matrix is not Hermitian")
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-10:
        raise InvalidParameterError(f"density matrix trace {tr!r} != 1")
    lmin = np.linalg.eigvalsh(rho).min()
    if lmin < -1e-10:
        raise InvalidParameterError(f"density matrix has eigenvalue {lmin:.3e}")
    leak = two_mode_leakage(rho, dim) if dim is not None else leakage(rho)
    if leak > leakage_tol:
        raise IncreaseCutoffError(f"truncation leakage {leak:.3e} exceeds {leakage_tol:g}")
    return rho


# --- gates ------------------------------------------------------------------

def squeeze(r, dim, pad=None):
    """Single-mode squeezing ``S(r) = exp(r/2 (a^2 - a^dag^2))``."""
    dim = _check_dim(dim)
    big = _padded(dim, pad)
    a, ad, _ = ladder_ops(big)
    return crop(expm(0.5 * r * (a @ a - ad @ ad)), dim)


def displace(alpha, dim, pad=None):
    """Displacement ``D(alpha) = exp(alpha a^dag - conj(alpha) a)``."""
    dim = _check_dim(dim)
    big = _padded(dim, pad)
    a, ad, _ = ladder_ops(big)
    return crop(expm(alpha * ad - np.conj(alpha) * a), dim)


def phase(theta, dim):
    """Phase rotation ``exp(i theta n)``; maps ``a -> exp(i theta) a``."""
    dim = _check_dim(dim)
    return np.diag(np.exp(1j * theta * np.arange(dim)))


def bs_mode_matrix(t):
    """2x2 mode transformation of ``exp(-phi (a^dag b - a b^dag))``, ``phi = arccos t``."""
    t = _check_t(t)
    s = math.sqrt(max(0.0, 1 - t * t))
    return np.array([[t, -s], [s, t]], dtype=complex)


def passive_unitary(u, dim):
    """Fock representation of the passive two-mode gate with mode matrix ``u``.

    The returned ``U`` satisfies ``U^dag a_i U = sum_j u_ij a_j``.  It is
    exact on the truncated product space because the generator conserves
    the total photon number; each number block is exponentiated separately
    and entries with a mode above the cutoff are dropped.
    """
    dim = _check_dim(dim)
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.max(np.abs(u @ u.conj().T - np.eye(2))) > 1e-10:
        raise InvalidParameterError("mode matrix must be a 2x2 unitary")
    T, Z = schur(u, output="complex")
    gen = Z @ np.diag(1j * np.angle(np.diag(T))) @ Z.conj().T  # anti-Hermitian log(u)
    U = np.zeros((dim * dim, dim * dim), dtype=complex)
    for total in range(2 * dim - 1):
        k = np.arange(total + 1)  # basis |k, total - k>
        m = total - k
        block = np.diag(gen[0, 0] * k + gen[1, 1] * m)
        hop_up = np.sqrt((k[:-1] + 1) * m[:-1])  # a0^dag a1 : k -> k+1
        block[k[1:], k[:-1]] += gen[0, 1] * hop_up
        block[k[:-1], k[1:]] += gen[1, 0] * hop_up  # a1^dag a0 : k+1 -> k
        ub = expm(block)
        keep = (k < dim) & (m < dim)
        idx = k[keep] * dim + m[keep]
        U[np.ix_(idx, idx)] = ub[np.ix_(keep, keep)]
    return U


def beamsplitter(t, dim):
    """Two-mode beam splitter of amplitude transmissivity ``t``."""
    return passive_unitary(bs_mode_matrix(t), dim)


def gate_unitary(kind, value, dim):
    """Dispatch by gate name: ``squeeze``, ``displace``, ``phase``, ``beamsplitter``."""
    builders = {"squeeze": squeeze, "displace": displace, "phase": phase, "beamsplitter": beamsplitter}
    try:
        return builders[kind](value, dim)
    except KeyError:
        raise InvalidParameterError(f"unknown gate {kind!r}") from None


def apply_unitary(U, rho):
    return U @ rho @ U.conj().T


# --- channels and measurements ---------------------------------------------

def damped_sum(rho, t, weights=None):
    """``sum_k w_k E_k rho E_k^dag`` over the amplitude-damping Kraus operators.

    ``E_k`` removes ``k`` photons into a vacuum ancilla through a beam
    splitter of amplitude transmissivity ``t``.  With all weights equal to
    one this is the loss channel; weights ``1 - (1 - eta)**k`` give the
    unnormalized heralded state of photon subtraction.
    """
    rho = np.asarray(rho, dtype=complex)
    d = rho.shape[0]
    t = _check_t(t)
    m = np.arange(d)
    refl2 = 1.0 - t * t
    out = np.zeros_like(rho)
    with np.errstate(divide="ignore"):
        logt = math.log(t) if t > 0 else -np.inf
        logr = 0.5 * math.log(refl2) if refl2 > 0 else -np.inf
    for k in range(d):
        w = 1.0 if weights is None else float(weights[k])
        if w == 0.0:
            continue
        if k > 0 and logr == -np.inf:
            break
        mm = m[: d - k]
        logc = 0.5 * (gammaln(mm + k + 1) - gammaln(mm + 1) - gammaln(k + 1)) + k * (logr if k else 0.0)
        with np.errstate(invalid="ignore"):
            logc = logc + np.where(mm > 0, mm * logt, 0.0)
        c = np.exp(logc)
        out[: d - k, : d - k] += w * np.outer(c, c) * rho[k:, k:]
    return out


def loss_channel(rho, t):
    """Pure-loss channel of amplitude transmissivity ``t`` (intensity ``t**2``)."""
    return damped_sum(rho, t)


def tensor(rho_a, rho_b):
    return np.kron(rho_a, rho_b)


def partial_trace(joint, dim, keep=0):
    r = np.asarray(joint).reshape(dim, dim, dim, dim)
    if keep == 0:
        return np.einsum("ikjk->ij", r)
    return np.einsum("kikj->ij", r)


def loss_channel_dilated(rho, t):
    """Loss channel as beam splitter with a vacuum ancilla plus partial trace."""
    d = rho.shape[0]
    joint = apply_unitary(beamsplitter(t, d), tensor(rho, vacuum(d)))
    return partial_trace(joint, d, keep=0)


def herald_povm(eta, dim):
    """Diagonal of the click element ``1 - sum_k (1 - eta)**k |k><k|``."""
    if not 0.0 <= eta <= 1.0:
        raise InvalidParameterError(f"detector efficiency must lie in [0, 1], got {eta!r}")
    dim = _check_dim(dim)
    return 1.0 - (1.0 - eta) ** np.arange(dim)


def condition_on_herald(joint, povm, dim, heralded_mode=1):
    """Apply a diagonal herald element to one mode and trace it out.

    Returns the normalized state of the other mode and the herald probability.
    """
    povm = np.asarray(povm, dtype=float)
    eye = np.ones(dim)
    diag = np.kron(eye, povm) if heralded_mode == 1 else np.kron(povm, eye)
    weighted = np.asarray(joint) * diag[np.newaxis, :]
    keep = 0 if heralded_mode == 1 else 1
    out = partial_trace(weighted, dim, keep=keep)
    prob = float(np.trace(out).real)
    if prob < HERALD_MIN_PROB:
        raise HeraldImpossibleError(f"herald probability {prob:.3e} is below {HERALD_MIN_PROB:g}")
    out = out / prob
    return (out + out.conj().T) / 2, prob


def expectation(rho, op):
    """``Re Tr[rho op]``; raises if the imaginary part is not negligible."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape:
        raise InvalidDimensionError(f"shape mismatch {rho.shape} vs {op.shape}")
    val = np.einsum("ij,ji->", rho, op)
    if abs(val.imag) > IMAG_TOL:
        raise NonHermitianExpectationError(f"imaginary residue {val.imag:.3e}")
    return float(val.real)


def cutoff_drift(fn, dim, step=10):
    """Difference of a scalar result evaluated at ``dim`` and ``dim + step``."""
    base = fn(dim)
    return base, abs(fn(dim + step) - base)


def squeezed_single_photon(r, dim):
    """``S(r)|1>`` from ``S a^dag S^dag = a^dag cosh r + a sinh r`` acting on ``S(r)|0>``."""
    dim = _check_dim(dim)
    big = dim + 2
    a, ad, _ = ladder_ops(big)
    psi = (math.cosh(r) * ad + math.sinh(r) * a) @ squeezed_vacuum(r, big)
    return crop(psi, dim)
