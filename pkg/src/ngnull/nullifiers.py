"""Nullifier operators and their measurable representations.

The kitten nullifier with analysis parameter ``g`` is the operator

    O_g = S(r) (n - 1)^2 S(r)^dag,    r = ln g,

whose unique zero-eigenvalue state is the squeezed single photon ``S(r)|1>``.
In quadratures it is ``O_1(g x, p / g)`` with

    4 O_1 = x^4 + p^4 + 2 W[x^2 p^2] - 6 (x^2 + p^2) + 8,

which is what the homodyne polynomials below reproduce on fixed angle sets.
"""

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np

from . import fock, symplectic, weyl
from .errors import GridTooSmallError, InvalidParameterError

PolyTerm = namedtuple("PolyTerm", ["coef", "theta", "power"])

_QUARTIC_ANGLES = {"eq15": weyl.EQ15_ANGLES, "eq16": weyl.EQ16_ANGLES}
_QUADRATIC_ANGLES = (0.0, math.pi / 2)
_DROP_TOL = 1e-13


@dataclass(frozen=True)
class NullifierPolynomial:
    """``sum_k c_k X(theta_k)^(n_k) + constant`` in measured quadratures."""

    terms: tuple
    constant: float = 0.0
    g: float = None
    preset: str = None

    def __post_init__(self):
        terms = tuple(PolyTerm(float(c), float(th), int(n)) for c, th, n in self.terms)
        for t in terms:
            if t.power < 1:
                raise InvalidParameterError(f"term power must be >= 1, got {t.power}")
        object.__setattr__(self, "terms", terms)

    def angles(self):
        """Distinct measurement angles in order of first appearance."""
        out = []
        for t in self.terms:
            if not any(abs(t.theta - a) < 1e-12 for a in out):
                out.append(t.theta)
        return out

    def coefficient(self, theta, power, tol=1e-9):
        return sum(t.coef for t in self.terms if t.power == power and abs(t.theta - theta) < tol)

    def evaluate(self, moment):
        """Evaluate with ``moment(theta, power)`` supplying ``<X(theta)^power>``."""
        return sum(t.coef * moment(t.theta, t.power) for t in self.terms) + self.constant

    def to_dict(self):
        return {
            "preset": self.preset,
            "g": self.g,
            "constant": self.constant,
            "terms": [{"coef": t.coef, "theta": t.theta, "power": t.power} for t in self.terms],
        }


def _check_g(g):
    if not g > 0:
        raise InvalidParameterError(f"analysis parameter g must be positive, got {g!r}")
    return float(g)


def kitten_r(g):
    """Squeezing parameter whose ``S(r)|1>`` is nullified by ``O_g``."""
    return math.log(_check_g(g))


def kitten_nullifier_fock(g, dim):
    """``S(r)(n - 1)^2 S(r)^dag`` with ``r = ln g``.

    Built from the Bogoliubov image ``b = S a S^dag = a cosh r + a^dag sinh r``
    in a slightly padded space, so the retained matrix elements are exact.
    """
    r = kitten_r(g)
    big = dim + 4
    a, ad, _ = fock.ladder_ops(big)
    b = math.cosh(r) * a + math.sinh(r) * ad
    shifted = b.conj().T @ b - np.eye(big)
    return fock.hermitize(fock.crop(shifted @ shifted, dim))


def kitten_nullifier_quadrature(g, dim):
    """The same operator assembled from ``x`` and ``p`` directly."""
    g = _check_g(g)
    big = dim + 4
    x, p = fock.quadratures(big)
    q = g * g * (x @ x) + (p @ p) / (g * g)
    return fock.hermitize(fock.crop((q @ q - 6 * q + 9 * np.eye(big)) / 4, dim))


def kitten_weyl_symbol(g):
    """Weyl-monomial coefficients of ``O_g`` grouped by degree."""
    g = _check_g(g)
    return {
        4: {(4, 0): g ** 4 / 4, (2, 2): 0.5, (0, 4): g ** -4 / 4},
        2: {(2, 0): -1.5 * g ** 2, (0, 2): -1.5 * g ** -2},
        0: 2.0,
    }


def kitten_nullifier_poly(g, preset="eq15"):
    """Homodyne polynomial of ``O_g`` on the named angle preset.

    ``eq15`` uses the quartic angles (0, pi/4, pi/2, -pi/4) and ``eq16`` uses
    (0, pi/6, pi/2, 5 pi/6); both take the quadratic part from X(0) and
    X(pi/2).  Coefficients are solved for the requested ``g`` on the fixed
    angles, so the polynomial always refers to the measured quadratures.
    """
    if preset not in _QUARTIC_ANGLES:
        raise InvalidParameterError(f"unknown preset {preset!r}; expected one of {sorted(_QUARTIC_ANGLES)}")
    symbol = kitten_weyl_symbol(g)
    terms = []
    for degree, angles in ((4, _QUARTIC_ANGLES[preset]), (2, _QUADRATIC_ANGLES)):
        coeffs = weyl.solve_weyl(symbol[degree], angles)
        terms.extend((c, th, degree) for c, th in zip(coeffs, angles) if abs(c) > _DROP_TOL)
    return NullifierPolynomial(tuple(terms), symbol[0], g=float(g), preset=preset)


def state_moments(rho, poly):
    """``{(theta, power): <X(theta)^power>}`` for every term of ``poly``."""
    dim = rho.shape[0]
    return {(t.theta, t.power): fock.expectation(rho, fock.quadrature_power(t.theta, t.power, dim))
            for t in poly.terms}


def eval_poly_on_state(poly, rho):
    moments = state_moments(rho, poly)
    return poly.evaluate(lambda th, n: moments[(th, n)])


# --- heterodyne -------------------------------------------------------------

@dataclass(frozen=True)
class HeterodyneForm:
    """Function ``quartic |alpha|^4 + quadratic |alpha|^2 + constant`` of the heterodyne outcome."""

    quartic: float = 1.0
    quadratic: float = -5.0
    constant: float = 4.0

    def __call__(self, alpha):
        m = np.abs(alpha) ** 2
        return self.quartic * m * m + self.quadratic * m + self.constant


KITTEN_HETERODYNE = HeterodyneForm()


def antinormal_expectation(rho, form=KITTEN_HETERODYNE):
    """``quartic <a^2 a^dag^2> + quadratic <a a^dag> + constant`` from Fock moments."""
    dim = rho.shape[0]
    a, ad, _ = fock.ladder_ops(dim + 3)
    aad = fock.crop(a @ ad, dim)
    a2ad2 = fock.crop(a @ a @ ad @ ad, dim)
    return (form.quartic * fock.expectation(rho, a2ad2)
            + form.quadratic * fock.expectation(rho, aad) + form.constant)


def husimi_q(rho, alphas):
    """``Q(alpha) = <alpha|rho|alpha> / pi`` at the given complex points."""
    alphas = np.asarray(alphas, dtype=complex).ravel()
    dim = rho.shape[0]
    coh = np.empty((alphas.size, dim), dtype=complex)
    coh[:, 0] = np.exp(-np.abs(alphas) ** 2 / 2)
    for k in range(1, dim):
        coh[:, k] = coh[:, k - 1] * alphas / math.sqrt(k)
    return np.einsum("ai,ij,aj->a", coh.conj(), rho, coh).real / math.pi


def heterodyne_eval(rho=None, samples=None, form=KITTEN_HETERODYNE, half_width=7.0, step=0.05,
                    leak_tol=1e-6):
    """Mean of the heterodyne function over the Husimi distribution.

    With ``samples`` (complex heterodyne outcomes) the sample mean is
    returned.  Otherwise ``rho`` is integrated on a square grid of
    half-width ``half_width`` in ``alpha``; missing mass above ``leak_tol``
    raises :class:`GridTooSmallError`.
    """
    if samples is not None:
        return float(np.mean(form(np.asarray(samples))))
    if rho is None:
        raise InvalidParameterError("need either rho or samples")
    u = np.arange(-half_width, half_width + step / 2, step)
    uu, vv = np.meshgrid(u, u, indexing="ij")
    alpha = (uu + 1j * vv).ravel()
    q = husimi_q(rho, alpha)
    mass = q.sum() * step * step
    if abs(1 - mass) > leak_tol:
        raise GridTooSmallError(f"Q-function mass {mass:.8f} deviates from 1 by more than {leak_tol:g}")
    return float(np.sum(form(alpha) * q) * step * step)


# --- cluster-level nullifiers ----------------------------------------------

def gaussian_nullifiers_for_graph(adjacency):
    """Linear nullifiers ``p_i - sum_{j ~ i} x_j`` as coefficient vectors over (x1, p1, ...)."""
    adj = np.asarray(adjacency)
    if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
        raise InvalidParameterError("adjacency must be a square matrix")
    if not np.array_equal(adj, adj.T) or not np.all(np.isin(adj, (0, 1))):
        raise InvalidParameterError("adjacency must be symmetric with 0/1 entries")
    n = adj.shape[0]
    out = []
    for i in range(n):
        vec = np.zeros(2 * n)
        vec[2 * i + 1] = 1.0
        for j in np.flatnonzero(adj[i]):
            if j != i:
                vec[2 * j] -= 1.0
        out.append(vec)
    return out


def network_unitary(network, dim):
    """Fock unitary for a two-mode passive network.

    ``network`` may be an amplitude transmissivity, a 2x2 mode matrix, a 4x4
    passive symplectic matrix, or an already built ``dim**2`` unitary.
    """
    if np.isscalar(network):
        return fock.beamsplitter(float(network), dim)
    net = np.asarray(network)
    if net.shape == (2, 2):
        return fock.passive_unitary(net, dim)
    if net.shape == (4, 4):
        return fock.passive_unitary(symplectic.sym_to_mode_matrix(net.real), dim)
    if net.shape == (dim * dim, dim * dim):
        return net
    raise InvalidParameterError(f"cannot interpret network of shape {net.shape}")


def untwist_nullifier(op, network, mode=0):
    """Nullifier acting on the cluster: ``U (O x I) U^dag`` for preparation ``U``.

    Its expectation in ``U rho0 U^dag`` equals the expectation of ``op`` on
    ``mode`` of the pre-network state ``rho0``.
    """
    dim = op.shape[0]
    U = network_unitary(network, dim)
    eye = np.eye(dim)
    local = np.kron(op, eye) if mode == 0 else np.kron(eye, op)
    return U @ local @ U.conj().T
