"""Imperfect photon-subtracted squeezed sources and two-mode non-Gaussian clusters.

An impure squeezed state with quadrature variances ``(V_x, V_p)`` is modelled
as a pure squeezed vacuum with x-variance ``g/2`` sent through a loss channel
of amplitude transmissivity ``t``::

    V_x = t^2 g / 2 + (1 - t^2) / 2,     V_p = t^2 / (2 g) + (1 - t^2) / 2.

Photon subtraction taps the state on a beam splitter of transmissivity
``tap_t`` and heralds on a click of a detector with efficiency ``eta``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import fock, symplectic
from .errors import HeraldImpossibleError, InvalidParameterError, UnphysicalSpecError
from .nullifiers import kitten_nullifier_fock, kitten_nullifier_poly, network_unitary

GAUSSIAN_THRESHOLD = 0.611
DEFAULT_TAP_T = 0.97
WORK_TAIL = 1e-18
MAX_WORK_DIM = 600
# kitten squeezing whose x-variance matches -2 dB
R_MINUS_2DB = 0.1 * math.log(10)


@dataclass(frozen=True)
class SourceSpec:
    """Photon-subtracted impure squeezed source."""

    squeeze_db: float = -2.0
    antisqueeze_db: float = 2.0
    tap_t: float = DEFAULT_TAP_T
    eta: float = 1.0

    def __post_init__(self):
        vx = symplectic.db_inverse(self.squeeze_db)
        vp = symplectic.db_inverse(self.antisqueeze_db)
        if vx * vp < 0.25 - 1e-12:
            raise UnphysicalSpecError(f"variances {vx:.4g}, {vp:.4g} violate the uncertainty bound")
        if not 0.0 < self.tap_t <= 1.0:
            raise InvalidParameterError(f"tap transmissivity must lie in (0, 1], got {self.tap_t!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParameterError(f"detector efficiency must lie in [0, 1], got {self.eta!r}")


def solve_impure_squeezing(squeeze_db, antisqueeze_db):
    """Pure-squeezing factor ``g`` and loss transmissivity ``t`` reaching the target variances."""
    vx = symplectic.db_inverse(squeeze_db)
    vp = symplectic.db_inverse(antisqueeze_db)
    ax, ap = 2 * vx - 1, 2 * vp - 1  # t^2 (g - 1) and t^2 (1/g - 1)
    if abs(ax) < 1e-14 and abs(ap) < 1e-14:
        return 1.0, 1.0
    if vx * vp < 0.25 - 1e-12 or ax * ap >= 0:
        raise UnphysicalSpecError(
            f"({squeeze_db} dB, {antisqueeze_db} dB) is not a lossy pure squeezed state")
    g = -ax / ap
    t2 = ax / (g - 1)
    if t2 > 1 + 1e-12:
        raise UnphysicalSpecError(f"required transmissivity^2 {t2:.6f} exceeds one")
    return g, math.sqrt(min(1.0, t2))


def _work_dim(r, dim):
    th = abs(math.tanh(r))
    if th < 1e-12:
        return dim + 4
    need = int(math.ceil(math.log(WORK_TAIL) / math.log(th))) + 4
    return min(max(dim + 4, need), MAX_WORK_DIM)


def _finish(rho, dim):
    out = fock.crop(rho, dim)
    out = out / np.trace(out).real
    return (out + out.conj().T) / 2


def _impure_work(squeeze_db, antisqueeze_db, dim):
    g, t = solve_impure_squeezing(squeeze_db, antisqueeze_db)
    r = -0.5 * math.log(g)
    big = _work_dim(r, dim)
    return fock.loss_channel(fock.dm(fock.squeezed_vacuum(r, big)), t)


def impure_squeezed(squeeze_db, antisqueeze_db, dim=fock.DEFAULT_DIM):
    """Zero-mean Gaussian state with the requested x (squeezed) and p variances in dB."""
    return _finish(_impure_work(squeeze_db, antisqueeze_db, dim), dim)


def photon_subtract(rho, tap_t=DEFAULT_TAP_T, eta=1.0):
    """Heralded photon subtraction; returns ``(state, herald probability)``.

    The tap reflects ``k`` photons into the herald arm with the amplitude
    damping Kraus operator ``E_k``; the click element weights that branch by
    ``1 - (1 - eta)**k``.
    """
    if not 0.0 < tap_t <= 1.0:
        raise InvalidParameterError(f"tap transmissivity must lie in (0, 1], got {tap_t!r}")
    d = rho.shape[0]
    weights = fock.herald_povm(eta, d)
    out = fock.damped_sum(rho, tap_t, weights)
    prob = float(np.trace(out).real)
    if prob < fock.HERALD_MIN_PROB:
        raise HeraldImpossibleError(f"herald probability {prob:.3e} is below {fock.HERALD_MIN_PROB:g}")
    out = out / prob
    return (out + out.conj().T) / 2, prob


def photon_subtract_dilated(rho, tap_t=DEFAULT_TAP_T, eta=1.0):
    """Same map through an explicit tap beam splitter and herald POVM (slow)."""
    d = rho.shape[0]
    joint = fock.apply_unitary(fock.beamsplitter(tap_t, d), fock.tensor(rho, fock.vacuum(d)))
    return fock.condition_on_herald(joint, fock.herald_povm(eta, d), d, heralded_mode=1)


def subtracted_source(spec, dim=fock.DEFAULT_DIM):
    """State and herald probability produced by a :class:`SourceSpec`."""
    work = _impure_work(spec.squeeze_db, spec.antisqueeze_db, dim)
    out, prob = photon_subtract(work, spec.tap_t, spec.eta)
    return _finish(out, dim), prob


def ideal_kitten(r, dim=fock.DEFAULT_DIM):
    return fock.dm(fock.squeezed_single_photon(r, dim))


def lossy_kitten(r, loss, dim=fock.DEFAULT_DIM):
    """Ideal kitten after an intensity loss ``loss``."""
    return fock.loss_channel(ideal_kitten(r, dim), math.sqrt(1.0 - loss))


def source_state(source, dim):
    """Resolve a source description into a single-mode density matrix.

    Accepts a density matrix, a :class:`SourceSpec`, ``"vacuum"``, or a
    tuple ``("kitten", r)``.
    """
    if isinstance(source, SourceSpec):
        return subtracted_source(source, dim)[0]
    if isinstance(source, str):
        if source == "vacuum":
            return fock.vacuum(dim)
        raise InvalidParameterError(f"unknown source {source!r}")
    if isinstance(source, tuple) and source and source[0] == "kitten":
        return ideal_kitten(float(source[1]), dim)
    rho = np.asarray(source)
    if rho.shape != (dim, dim):
        raise InvalidParameterError(f"source state has shape {rho.shape}, expected {(dim, dim)}")
    return rho


def assemble_cluster(sources, network, dim=fock.DEFAULT_TWO_MODE_DIM):
    """Apply the two-mode passive ``network`` to the product of two sources."""
    if len(sources) != 2:
        raise InvalidParameterError("the Fock-space cluster model supports exactly two modes")
    rho_a, rho_b = (source_state(s, dim) for s in sources)
    return fock.apply_unitary(network_unitary(network, dim), fock.tensor(rho_a, rho_b))


def untwisted_state(joint, network, dim):
    """Undo the assumed preparation ``network`` on a two-mode state."""
    U = network_unitary(network, dim)
    return U.conj().T @ joint @ U


def untwisted_value(joint, g, network, mode=0, dim=fock.DEFAULT_TWO_MODE_DIM):
    """Kitten-nullifier expectation on ``mode`` after untwisting with ``network``."""
    reduced = fock.partial_trace(untwisted_state(joint, network, dim), dim, keep=mode)
    return fock.expectation(reduced, kitten_nullifier_fock(g, dim))


def optimal_g(rho, preset="eq15", log_g_bounds=(-3.0, 3.0)):
    """Minimize the polynomial nullifier value over the analysis parameter ``g``.

    The quadrature moments are computed once; only the coefficients depend
    on ``g``.  Returns ``(value, g)``.
    """
    base = kitten_nullifier_poly(1.0, preset)
    angles = sorted({(t.theta, p) for t in base.terms for p in (2, 4)})
    dim = rho.shape[0]
    moments = {(th, p): fock.expectation(rho, fock.quadrature_power(th, p, dim)) for th, p in angles}

    def value(log_g):
        poly = kitten_nullifier_poly(math.exp(log_g), preset)
        return poly.evaluate(lambda th, n: moments[(th, n)])

    lo, hi = log_g_bounds
    grid = np.linspace(lo, hi, 61)
    vals = [value(v) for v in grid]
    i = int(np.argmin(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = minimize_scalar(value, bounds=(a, b), method="bounded", options={"xatol": 1e-10})
    if res.fun <= vals[i]:
        return float(res.fun), math.exp(res.x)
    return float(vals[i]), math.exp(grid[i])


@dataclass
class EtaAntisqSweep:
    etas: np.ndarray
    antisqueeze_db: np.ndarray
    values: np.ndarray  # shape (len(etas), len(antisqueeze_db))
    g_opt: np.ndarray
    herald_prob: np.ndarray
    squeeze_db: float
    tap_t: float
    dim: int

    def crossing(self, eta_index, threshold=GAUSSIAN_THRESHOLD):
        """Antisqueezing (dB) where the row crosses ``threshold``, by linear interpolation."""
        row = self.values[eta_index]
        above = np.flatnonzero(row >= threshold)
        if above.size == 0 or above[0] == 0:
            return None
        j = above[0]
        x0, x1 = self.antisqueeze_db[j - 1], self.antisqueeze_db[j]
        y0, y1 = row[j - 1], row[j]
        return float(x0 + (threshold - y0) * (x1 - x0) / (y1 - y0))

    def rows(self):
        for i, eta in enumerate(self.etas):
            for j, va in enumerate(self.antisqueeze_db):
                yield float(eta), float(va), float(self.values[i, j])


def sweep_eta_antisq(etas, antisqueeze_dbs, squeeze_db=-2.0, tap_t=DEFAULT_TAP_T, dim=fock.DEFAULT_DIM,
                     preset="eq15"):
    """Heralded-state nullifier over a grid of detector efficiency and antisqueezing."""
    etas = np.asarray(etas, dtype=float)
    antisq = np.asarray(antisqueeze_dbs, dtype=float)
    if etas.size == 0 or antisq.size == 0:
        raise InvalidParameterError("sweep grid must be nonempty")
    values = np.empty((etas.size, antisq.size))
    g_opt = np.empty_like(values)
    probs = np.empty_like(values)
    for j, va in enumerate(antisq):
        work = _impure_work(squeeze_db, va, dim)
        for i, eta in enumerate(etas):
            out, prob = photon_subtract(work, tap_t, eta)
            values[i, j], g_opt[i, j] = optimal_g(_finish(out, dim), preset)
            probs[i, j] = prob
    return EtaAntisqSweep(etas, antisq, values, g_opt, probs, squeeze_db, tap_t, dim)


@dataclass
class MismatchSweep:
    deltas: np.ndarray
    losses: tuple
    values: dict = field(default_factory=dict)  # loss -> array over deltas
    r: float = R_MINUS_2DB
    dim: int = fock.DEFAULT_TWO_MODE_DIM

    def rows(self):
        for loss in self.losses:
            for d, v in zip(self.deltas, self.values[loss]):
                yield float(d), float(loss), float(v)


def sweep_mismatch(deltas, losses=(0.0, 0.10, 0.20), r=R_MINUS_2DB, dim=fock.DEFAULT_TWO_MODE_DIM, mode=0):
    """Nullifier of a balanced two-kitten cluster untwisted with ``t' = 1/sqrt2 + delta``.

    Each kitten ``S(r)|1>`` suffers intensity loss ``loss`` before the beam
    splitter; the nullifier uses ``g = exp(r)``.
    """
    deltas = np.asarray(deltas, dtype=float)
    t0 = 1 / math.sqrt(2)
    if np.any(t0 + deltas <= 0) or np.any(t0 + deltas >= 1):
        raise InvalidParameterError("every 1/sqrt2 + delta must lie in (0, 1)")
    g = math.exp(r)
    op = kitten_nullifier_fock(g, dim)
    U = fock.beamsplitter(t0, dim)
    untwisters = [fock.beamsplitter(t0 + d, dim) for d in deltas]
    out = MismatchSweep(deltas, tuple(losses), r=r, dim=dim)
    for loss in losses:
        rho = lossy_kitten(r, loss, dim)
        joint = fock.apply_unitary(U, fock.tensor(rho, rho))
        vals = []
        for V in untwisters:
            reduced = fock.partial_trace(V.conj().T @ joint @ V, dim, keep=mode)
            vals.append(fock.expectation(reduced, op))
        out.values[loss] = np.array(vals)
    return out
