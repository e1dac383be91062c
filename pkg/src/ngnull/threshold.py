"""Minimum nullifier expectation over Gaussian states.

By linearity of the trace the minimum over Gaussian mixtures is attained on
pure states, which are parameterized as ``S(r') D(alpha)|0>``.  The search
is a multi-start Nelder-Mead over ``(r', Re alpha, Im alpha)`` from a
deterministic set of starting points.
"""

import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from . import fock
from .errors import IncreaseCutoffError, InvalidParameterError, OptimizerFailedError
from .nullifiers import KITTEN_HETERODYNE, HeterodyneForm, kitten_nullifier_fock

R_BOX = 5.0
ALPHA_BOX = 10.0
STATE_LEAK_TOL = 1e-8
SPREAD_TOL = 1e-4
DEFAULT_RESTARTS = 20


@dataclass(frozen=True)
class GaussianPureParams:
    r_prime: float = 0.0
    alpha: complex = 0j

    def __post_init__(self):
        if abs(self.r_prime) > R_BOX or abs(self.alpha) > ALPHA_BOX:
            raise InvalidParameterError(
                f"parameters outside the search box |r'| <= {R_BOX}, |alpha| <= {ALPHA_BOX}")

    def to_dict(self):
        return {"r_prime": self.r_prime, "alpha_re": self.alpha.real, "alpha_im": self.alpha.imag,
                "alpha_abs": abs(self.alpha)}


@dataclass
class ThresholdResult:
    min_value: float
    argmin: GaussianPureParams
    kind: str
    dim: int
    restarts: int
    iterations: int
    evaluations: int
    converged: bool
    spread: float
    restart_values: list = field(default_factory=list)
    squeezing_free: bool = True

    def to_dict(self):
        out = asdict(self)
        out["argmin"] = self.argmin.to_dict()
        return out


@lru_cache(maxsize=8)
def _squeeze_eigensystem(big):
    """Eigen-decomposition of the Hermitian generator ``i (a^2 - a^dag^2) / 2``."""
    a, ad, _ = fock.ladder_ops(big)
    lam, vec = np.linalg.eigh(0.5j * (a @ a - ad @ ad))
    return lam, vec


def gaussian_state(params, dim, pad=None):
    """``S(r') D(alpha)|0>`` truncated to ``dim`` levels, with its leakage.

    Leakage is the norm lost by the truncation plus the weight on the top
    two retained levels.
    """
    big = dim + (max(dim, 40) if pad is None else pad)
    psi = fock.coherent_state(complex(params.alpha), big)
    if params.r_prime != 0:
        lam, vec = _squeeze_eigensystem(big)
        # S(r) = exp(r K) with K = -i H, H the Hermitian generator above
        psi = vec @ (np.exp(-1j * params.r_prime * lam) * (vec.conj().T @ psi))
    tail = float(np.sum(np.abs(psi[dim:]) ** 2))
    psi = psi[:dim]
    leak = tail + float(np.sum(np.abs(psi[-2:]) ** 2))
    return psi / np.linalg.norm(psi), leak


def gaussian_expectation(params, op, leak_tol=STATE_LEAK_TOL):
    """``<psi_G|op|psi_G>``; raises :class:`IncreaseCutoffError` on excessive leakage."""
    psi, leak = gaussian_state(params, op.shape[0])
    if leak > leak_tol:
        raise IncreaseCutoffError(f"Gaussian state leaks {leak:.3e} past cutoff {op.shape[0]}")
    return float(np.real(np.vdot(psi, op @ psi)))


def _start_points(restarts, seed, free_squeeze):
    rng = np.random.default_rng(seed)
    starts = [np.zeros(3)]
    while len(starts) < restarts:
        r0 = rng.uniform(-1.0, 1.0) if free_squeeze else 0.0
        mag = rng.uniform(0.0, 2.0)
        ang = rng.uniform(0.0, 2 * math.pi)
        starts.append(np.array([r0, mag * math.cos(ang), mag * math.sin(ang)]))
    return starts


def _is_parity_even(op):
    parity = (-1.0) ** np.arange(op.shape[0])
    return np.allclose(op * np.outer(parity, parity), op, atol=1e-12)


def _minimize(op, kind, restarts, seed, free_squeeze, leak_tol):
    dim = op.shape[0]
    scale = max(1.0, float(np.max(np.abs(np.diag(op)))))

    def params_of(v):
        r = float(v[0]) if free_squeeze else 0.0
        return r, complex(v[-2], v[-1])

    def objective(v):
        r, alpha = params_of(v)
        outside = max(0.0, abs(r) - R_BOX) + max(0.0, abs(alpha) - ALPHA_BOX)
        if outside > 0:
            return scale * (1.0 + outside)
        psi, leak = gaussian_state(GaussianPureParams(r, alpha), dim)
        val = float(np.real(np.vdot(psi, op @ psi)))
        if leak > leak_tol:
            val += scale * leak / leak_tol
        return val

    runs = []
    nit = nfev = 0
    for x0 in _start_points(restarts, seed, free_squeeze):
        x0 = x0 if free_squeeze else x0[1:]
        res = minimize(objective, x0, method="Nelder-Mead",
                       options={"xatol": 1e-7, "fatol": 1e-11, "maxiter": 4000, "maxfev": 8000})
        nit += int(res.nit)
        nfev += int(res.nfev)
        runs.append((float(res.fun), np.asarray(res.x)))
    runs.sort(key=lambda item: item[0])
    values = [v for v, _ in runs]
    spread = values[min(2, len(values) - 1)] - values[0]
    diagnostics = {"restart_values": values, "iterations": nit, "evaluations": nfev, "spread": spread}
    if not np.isfinite(values[0]):
        raise OptimizerFailedError("no restart produced a finite objective", diagnostics)

    r, alpha = params_of(runs[0][1])
    if np.count_nonzero(np.abs(op - np.diag(np.diag(op))) > 1e-12) == 0:
        alpha = complex(abs(alpha))  # phase-invariant objective
    elif alpha.real < 0 and _is_parity_even(op):
        alpha = -alpha
    best = GaussianPureParams(r, alpha)
    _, leak = gaussian_state(best, dim)
    if leak > leak_tol:
        raise OptimizerFailedError(f"optimum leaks {leak:.3e} past the cutoff; increase it", diagnostics)
    return ThresholdResult(
        min_value=values[0], argmin=best, kind=kind, dim=dim, restarts=len(runs), iterations=nit,
        evaluations=nfev, converged=bool(spread < SPREAD_TOL), spread=float(spread),
        restart_values=values, squeezing_free=free_squeeze)


def minimize_homodyne_threshold(op=None, g=1.0, dim=fock.DEFAULT_DIM, restarts=DEFAULT_RESTARTS, seed=0,
                                leak_tol=STATE_LEAK_TOL, require_convergence=True):
    """Gaussian minimum of ``op`` (default: the kitten nullifier at ``g``)."""
    if restarts < 1:
        raise InvalidParameterError("need at least one restart")
    if op is None:
        op = kitten_nullifier_fock(g, dim)
    result = _minimize(np.asarray(op), "homodyne", restarts, seed, True, leak_tol)
    if require_convergence and not result.converged:
        raise OptimizerFailedError("restarts disagree on the minimum", result.to_dict())
    return result


def antinormal_operator(form, dim):
    a, ad, _ = fock.ladder_ops(dim + 3)
    op = form.quartic * (a @ a @ ad @ ad) + form.quadratic * (a @ ad) + form.constant * np.eye(dim + 3)
    return fock.hermitize(fock.crop(op, dim))


def minimize_heterodyne_threshold(form=KITTEN_HETERODYNE, dim=fock.DEFAULT_DIM, restarts=DEFAULT_RESTARTS,
                                  seed=0, absorb_squeezing=True, leak_tol=STATE_LEAK_TOL,
                                  require_convergence=True):
    """Gaussian minimum of the heterodyne function ``form``.

    The objective is the Husimi average of ``form``, evaluated as
    antinormally ordered Fock moments.  With ``absorb_squeezing`` (default)
    the squeezing of the test state is absorbed into the nullifier and the
    search runs over displacements only; this is the heterodyne threshold
    quoted for the kitten nullifier.  Releasing the squeezing makes the
    objective the full operator expectation again.
    """
    if not isinstance(form, HeterodyneForm):
        raise InvalidParameterError("form must be a HeterodyneForm")
    op = antinormal_operator(form, dim)
    result = _minimize(op, "heterodyne", restarts, seed, not absorb_squeezing, leak_tol)
    if require_convergence and not result.converged:
        raise OptimizerFailedError("restarts disagree on the minimum", result.to_dict())
    return result
