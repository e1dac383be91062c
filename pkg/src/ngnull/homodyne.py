"""Homodyne sampling from Fock-space states and nullifier estimation from quadrature data.

Phases are in radians throughout.  Datasets on disk are one CSV per phase
group with header ``phase_rad,value`` plus a ``manifest.json`` listing them.
"""

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from . import fock
from .errors import (DatasetParseError, GridTooSmallError, InsufficientDataError,
                     InvalidParameterError, MissingAngleError)

PDF_MASS_TOL = 1e-6
PDF_NEG_TOL = 1e-9
MAX_STEP = 0.01
DEFAULT_STEP = 0.005
ANGLE_TOL = 1e-6
DEFAULT_BINS = 1000
CSV_HEADER = ("phase_rad", "value")
MANIFEST_NAME = "manifest.json"
DATASET_FORMAT = "ngnull-quadrature-dataset"


# --- densities and sampling --------------------------------------------------

def hermite_functions(x, n_max):
    """Rows ``psi_0 .. psi_{n_max-1}`` evaluated at ``x`` (vacuum variance 1/2)."""
    x = np.asarray(x, dtype=float)
    out = np.empty((n_max, x.size))
    out[0] = math.pi ** -0.25 * np.exp(-x * x / 2)
    if n_max > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = math.sqrt(2.0 / (n + 1)) * x * out[n] - math.sqrt(n / (n + 1)) * out[n - 1]
    return out


def quadrature_mean_std(rho, theta):
    dim = rho.shape[0]
    m1 = fock.expectation(rho, fock.quadrature_power(theta, 1, dim))
    m2 = fock.expectation(rho, fock.quadrature_power(theta, 2, dim))
    return m1, math.sqrt(max(m2 - m1 * m1, 0.0))


def default_grid(rho, theta, step=DEFAULT_STEP):
    """Grid covering ``|mean| + 10 std`` (at least 6) on each side."""
    mean, std = quadrature_mean_std(rho, theta)
    half = max(6.0, abs(mean) + 10.0 * std)
    k = int(math.ceil(half / step))
    return step * np.arange(-k, k + 1)


def quadrature_pdf(rho, theta, grid=None):
    """Probability density of ``X(theta)`` on ``grid``; returns ``(grid, pdf)``.

    ``P(x) = sum_{m,n} rho_mn exp(i (n - m) theta) psi_m(x) psi_n(x)``.
    """
    if grid is None:
        grid = default_grid(rho, theta)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise InvalidParameterError("grid must be a 1-D array with at least 3 points")
    step = float(np.max(np.diff(grid)))
    if step > MAX_STEP + 1e-12:
        raise InvalidParameterError(f"grid spacing {step:g} exceeds {MAX_STEP}")
    dim = rho.shape[0]
    psi = hermite_functions(grid, dim)
    ph = np.exp(1j * theta * np.arange(dim))
    rotated = ph.conj()[:, None] * rho * ph[None, :]
    pdf = np.einsum("mx,mn,nx->x", psi, rotated, psi).real
    if pdf.min() < -PDF_NEG_TOL:
        raise GridTooSmallError(f"density dips to {pdf.min():.3e}; state is not normalized or physical")
    pdf = np.clip(pdf, 0.0, None)
    mass = float(trapezoid(pdf, grid))
    if abs(1.0 - mass) > PDF_MASS_TOL:
        raise GridTooSmallError(f"density integrates to {mass:.9f} on [{grid[0]:g}, {grid[-1]:g}]")
    return grid, pdf


def _cdf(grid, pdf):
    cdf = np.concatenate(([0.0], np.cumsum((pdf[1:] + pdf[:-1]) * np.diff(grid) / 2)))
    return cdf / cdf[-1]


def sample_from_pdf(grid, pdf, n, rng):
    """Inverse-CDF sampling with linear interpolation of the discretized CDF."""
    return np.interp(rng.random(n), _cdf(grid, pdf), grid)


def sample_quadrature(rho, theta, n, seed=0, grid=None):
    """``n`` homodyne outcomes of ``X(theta)``, reproducible for fixed ``seed``."""
    if n < 1:
        raise InvalidParameterError("need at least one sample")
    grid, pdf = quadrature_pdf(rho, theta, grid)
    return sample_from_pdf(grid, pdf, int(n), np.random.default_rng(seed))


def ks_distance(samples, grid, pdf):
    """Kolmogorov-Smirnov distance between samples and the discretized target."""
    xs = np.sort(np.asarray(samples))
    target = np.interp(xs, grid, _cdf(grid, pdf))
    k = np.arange(1, xs.size + 1)
    return float(max(np.max(k / xs.size - target), np.max(target - (k - 1) / xs.size)))


# --- datasets ---------------------------------------------------------------

@dataclass(frozen=True)
class PhaseGroup:
    theta: float
    samples: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=float).ravel()
        if arr.size == 0:
            raise InvalidParameterError(f"phase group at {self.theta!r} is empty")
        if not math.isfinite(self.theta) or not np.all(np.isfinite(arr)):
            raise InvalidParameterError("phase and samples must be finite")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "samples", arr)


@dataclass(frozen=True)
class QuadratureDataset:
    groups: tuple
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))
        meta = {"vacuum_variance": fock.VACUUM_VARIANCE}
        meta.update(self.metadata)
        object.__setattr__(self, "metadata", meta)

    def angles(self):
        return [g.theta for g in self.groups]

    def find(self, theta, tol=ANGLE_TOL):
        """Group whose phase equals ``theta`` modulo ``2 pi``."""
        for g in self.groups:
            d = (g.theta - theta) % (2 * math.pi)
            if min(d, 2 * math.pi - d) < tol:
                return g
        raise MissingAngleError(theta)


def _seed_sequence(seed):
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def simulate_dataset(rho, angles, n, seed=0, metadata=None, pdfs=None):
    """Sample ``n`` outcomes at each angle; each angle draws from its own child seed."""
    children = _seed_sequence(seed).spawn(len(angles))
    groups = []
    for k, (theta, child) in enumerate(zip(angles, children)):
        grid, pdf = pdfs[k] if pdfs is not None else quadrature_pdf(rho, theta)
        groups.append(PhaseGroup(theta, sample_from_pdf(grid, pdf, int(n), np.random.default_rng(child))))
    return QuadratureDataset(tuple(groups), dict(metadata or {}))


def _fmt(v):
    return repr(float(v))


def save_dataset(dataset, directory, prefix="phase"):
    """Write one CSV per group plus the manifest; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    files = []
    for k, grp in enumerate(dataset.groups):
        name = f"{prefix}_{k:02d}.csv"
        with open(os.path.join(directory, name), "w", newline="") as fh:
            fh.write(",".join(CSV_HEADER) + "\n")
            ph = _fmt(grp.theta)
            fh.writelines(f"{ph},{_fmt(v)}\n" for v in grp.samples)
        files.append({"path": name, "phase_rad": grp.theta, "count": int(grp.samples.size)})
    manifest = {"format": DATASET_FORMAT, "version": 1,
                "convention": {"vacuum_variance": fock.VACUUM_VARIANCE},
                "files": files, "metadata": dataset.metadata}
    path = os.path.join(directory, MANIFEST_NAME)
    with open(path, "w") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return path


def read_group_csv(path):
    """Parse one phase-group CSV; errors name the offending line."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DatasetParseError(f"{path}: cannot open ({exc.strerror})") from exc
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DatasetParseError(f"{path}: line 1: file is empty")
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise DatasetParseError(f"{path}: line 1: expected header 'phase_rad,value', got {','.join(header)!r}")
        theta, values = None, []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise DatasetParseError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
            try:
                ph, val = float(row[0]), float(row[1])
            except ValueError:
                raise DatasetParseError(f"{path}: line {lineno}: non-numeric field in {row!r}") from None
            if not (math.isfinite(ph) and math.isfinite(val)):
                raise DatasetParseError(f"{path}: line {lineno}: non-finite value")
            if theta is None:
                theta = ph
            elif abs(ph - theta) > ANGLE_TOL:
                raise DatasetParseError(f"{path}: line {lineno}: phase {ph} differs from the file's phase {theta}")
            values.append(val)
    if theta is None:
        raise DatasetParseError(f"{path}: line 2: no samples")
    return PhaseGroup(theta, np.array(values))


def load_dataset(paths):
    """Load from a manifest, a directory holding one, or a list of group CSVs."""
    if isinstance(paths, (str, os.PathLike)):
        paths = [paths]
    paths = [os.fspath(p) for p in paths]
    if len(paths) == 1 and os.path.isdir(paths[0]):
        paths = [os.path.join(paths[0], MANIFEST_NAME)]
    if len(paths) == 1 and paths[0].endswith(".json"):
        mpath = paths[0]
        try:
            with open(mpath) as fh:
                manifest = json.load(fh)
        except OSError as exc:
            raise DatasetParseError(f"{mpath}: cannot open ({exc.strerror})") from exc
        except json.JSONDecodeError as exc:
            raise DatasetParseError(f"{mpath}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
        if manifest.get("format") != DATASET_FORMAT or not manifest.get("files"):
            raise DatasetParseError(f"{mpath}: not a quadrature dataset manifest")
        vv = manifest.get("convention", {}).get("vacuum_variance")
        if vv is not None and abs(vv - fock.VACUUM_VARIANCE) > 1e-12:
            raise DatasetParseError(f"{mpath}: vacuum variance {vv} differs from {fock.VACUUM_VARIANCE}")
        base = os.path.dirname(mpath)
        groups = [read_group_csv(os.path.join(base, f["path"])) for f in manifest["files"]]
        return QuadratureDataset(tuple(groups), dict(manifest.get("metadata", {})))
    if not paths:
        raise DatasetParseError("no dataset files given")
    return QuadratureDataset(tuple(read_group_csv(p) for p in paths), {})


# --- estimation -------------------------------------------------------------

def bin_histogram(samples, bins=DEFAULT_BINS):
    """Equi-width histogram over ``[min, max]``.

    Returns ``(bin_means, counts, rel_freq)``; empty bins report their centre
    as the mean.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise InsufficientDataError("cannot bin an empty sample")
    counts, edges = np.histogram(x, bins=bins)
    idx = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, bins - 1)
    sums = np.bincount(idx, weights=x, minlength=bins)
    centres = (edges[:-1] + edges[1:]) / 2
    means = np.where(counts > 0, sums / np.maximum(counts, 1), centres)
    return means, counts, counts / x.size


@dataclass(frozen=True)
class MomentEstimate:
    theta: float
    power: int
    mean: float
    var_of_mean: float
    count: int


def _weighted_powers(samples, binned, bins):
    if binned:
        values, counts, _ = bin_histogram(samples, bins)
        keep = counts > 0
        return values[keep], counts[keep].astype(float)
    x = np.asarray(samples, dtype=float).ravel()
    return x, np.ones_like(x)


def estimate_moment(samples, power, theta=0.0, binned=False, bins=DEFAULT_BINS):
    """Sample mean of ``X**power`` and its variance (sample variance / N, N - 1 denominator)."""
    values, w = _weighted_powers(samples, binned, bins)
    n = int(round(w.sum()))
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    y = values ** power
    mean = float(np.dot(w, y) / n)
    var = float(np.dot(w, (y - mean) ** 2) / (n - 1))
    return MomentEstimate(float(theta), int(power), mean, var / n, n)


@dataclass(frozen=True)
class NullifierEstimate:
    mean: float
    sigma: float
    sigma_no_cov: float
    terms: tuple  # (coef, MomentEstimate) pairs
    covariances: tuple  # (theta, power_a, power_b, cov of the means)

    def to_dict(self):
        return {
            "mean": self.mean,
            "sigma": self.sigma,
            "sigma_without_covariance": self.sigma_no_cov,
            "terms": [{"coef": c, "theta": m.theta, "power": m.power, "moment": m.mean,
                       "var_of_mean": m.var_of_mean, "count": m.count} for c, m in self.terms],
            "covariances": [{"theta": th, "power_a": a, "power_b": b, "cov_of_means": cv}
                            for th, a, b, cv in self.covariances],
        }


def estimate_nullifier(dataset, poly, binned=False, bins=DEFAULT_BINS, angle_tol=ANGLE_TOL):
    """Point estimate and propagated standard error of a nullifier polynomial.

    Moments from different phase groups are independent.  Moments from the
    same group are correlated; their covariance enters with weight
    ``c_k c_j``.
    """
    merged = {}
    for t in poly.terms:
        grp = dataset.find(t.theta, angle_tol)
        key = (grp.theta, t.power)
        merged[key] = merged.get(key, 0.0) + t.coef

    by_group = {}
    for (theta, power), coef in merged.items():
        by_group.setdefault(theta, []).append((power, coef))

    mean = float(poly.constant)
    var_diag = 0.0
    var_cov = 0.0
    terms, covs = [], []
    for theta, items in by_group.items():
        grp = dataset.find(theta, angle_tol)
        values, w = _weighted_powers(grp.samples, binned, bins)
        n = int(round(w.sum()))
        if n < 2:
            raise InsufficientDataError(f"phase group {theta} has {n} samples")
        powered = {}
        for power, coef in items:
            y = values ** power
            m = float(np.dot(w, y) / n)
            powered[power] = y - m
            v = float(np.dot(w, (y - m) ** 2) / (n - 1)) / n
            est = MomentEstimate(theta, power, m, v, n)
            terms.append((coef, est))
            mean += coef * m
            var_diag += coef * coef * v
        for i, (pa, ca) in enumerate(items):
            for pb, cb in items[i + 1:]:
                cv = float(np.dot(w, powered[pa] * powered[pb]) / (n - 1)) / n
                covs.append((theta, pa, pb, cv))
                var_cov += 2 * ca * cb * cv
    total = var_diag + var_cov
    return NullifierEstimate(mean, math.sqrt(max(total, 0.0)), math.sqrt(var_diag), tuple(terms), tuple(covs))


# --- convergence ------------------------------------------------------------

DEFAULT_N_LIST = (100, 300, 1000, 3000, 10000)


@dataclass
class ConvergenceRow:
    n_samples: int
    mean: float
    std: float
    mean_sigma: float
    estimates: np.ndarray


def convergence_study(rho, poly, n_list=DEFAULT_N_LIST, repeats=100, seed=0, binned=False):
    """Spread of repeated end-to-end nullifier estimates versus samples per angle.

    Every ``(N, repeat)`` pair gets its own child seed, so results do not
    depend on evaluation order.
    """
    if repeats < 2:
        raise InvalidParameterError("need at least 2 repeats to measure a spread")
    angles = poly.angles()
    pdfs = [quadrature_pdf(rho, th) for th in angles]
    seeds = _seed_sequence(seed).spawn(len(n_list))
    rows = []
    for n, ss in zip(n_list, seeds):
        ests, sigmas = [], []
        for child in ss.spawn(repeats):
            data = simulate_dataset(rho, angles, n, seed=child, pdfs=pdfs)
            est = estimate_nullifier(data, poly, binned=binned)
            ests.append(est.mean)
            sigmas.append(est.sigma)
        ests = np.array(ests)
        rows.append(ConvergenceRow(int(n), float(ests.mean()), float(ests.std(ddof=1)),
                                   float(np.mean(sigmas)), ests))
    return rows
