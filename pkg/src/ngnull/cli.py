"""``ngnull`` command-line interface.

Exit codes: 0 success or certified, 2 numerical failure, 3 not certified,
4 input error.  Every output is a pure function of the resolved
configuration and seed.
"""

import argparse
import csv
import dataclasses
import hashlib
import json
import math
import os
import sys
from importlib import resources

import numpy as np

from . import __version__, cluster, fock, homodyne, threshold
from .errors import (DatasetParseError, GridTooSmallError, HeraldImpossibleError, IncreaseCutoffError,
                     InsufficientDataError, InvalidParameterError, MissingAngleError, NullifierError,
                     OptimizerFailedError)
from .nullifiers import kitten_nullifier_poly

EXIT_OK = 0
EXIT_NUMERICAL = 2
EXIT_NOT_CERTIFIED = 3
EXIT_INPUT = 4

NUMERICAL_ERRORS = (OptimizerFailedError, IncreaseCutoffError, GridTooSmallError, HeraldImpossibleError)

ETA_ANTISQ_HEADER = ("eta", "antisqueeze_db", "nullifier")
MISMATCH_HEADER = ("delta", "loss", "nullifier")
CONVERGENCE_HEADER = ("n_samples", "mean", "std", "r")
DEFAULT_KITTEN_R = 0.2
SOURCES = ("kitten", "lossy-kitten", "subtracted", "squeezed", "vacuum")


class InputError(NullifierError):
    """Bad command-line arguments or configuration."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


@dataclasses.dataclass
class RunConfig:
    cutoff: int = None
    seed: int = 0
    preset: str = "eq15"
    g: float = None
    heterodyne: bool = False
    restarts: int = threshold.DEFAULT_RESTARTS
    threshold_value: float = None
    out: str = "."
    # simulation
    source: str = "kitten"
    r: float = None
    loss: float = 0.0
    squeeze_db: float = -2.0
    antisqueeze_db: float = 2.0
    tap_t: float = cluster.DEFAULT_TAP_T
    eta: float = 1.0
    samples: int = 10000
    angles: list = None
    # sweeps and convergence
    etas: object = None
    antisqueeze_dbs: object = None
    deltas: object = None
    losses: object = None
    n_list: list = None
    repeats: int = 100
    r_values: list = None

    def validate(self):
        if self.cutoff is not None and (not isinstance(self.cutoff, int) or self.cutoff < 2):
            raise InputError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.preset not in ("eq15", "eq16"):
            raise InputError(f"preset must be eq15 or eq16, got {self.preset!r}")
        if self.g is not None and not (math.isfinite(self.g) and self.g > 0):
            raise InputError(f"g must be positive, got {self.g!r}")
        if not 0.0 < self.tap_t <= 1.0:
            raise InputError(f"tap_t must lie in (0, 1], got {self.tap_t!r}")
        if not 0.0 <= self.eta <= 1.0:
            raise InputError(f"eta must lie in [0, 1], got {self.eta!r}")
        if not 0.0 <= self.loss < 1.0:
            raise InputError(f"loss must lie in [0, 1), got {self.loss!r}")
        if self.source not in SOURCES:
            raise InputError(f"source must be one of {', '.join(SOURCES)}, got {self.source!r}")
        if self.samples < 2 or self.repeats < 2 or self.restarts < 1:
            raise InputError("samples and repeats must be >= 2 and restarts >= 1")
        if self.source == "subtracted":
            cluster.SourceSpec(self.squeeze_db, self.antisqueeze_db, self.tap_t, self.eta)
        return self

    def to_dict(self):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(self).items()}


def _jsonable(v):
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else None
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    return v


def parse_grid(spec):
    """A list of numbers, ``"a,b,c"``, ``"start:stop:num"`` or ``{"start", "stop", "num"}``."""
    if spec is None:
        return None
    if isinstance(spec, dict):
        try:
            return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad grid spec {spec!r}") from exc
    if isinstance(spec, (list, tuple)):
        try:
            return np.array([float(v) for v in spec])
        except (TypeError, ValueError) as exc:
            raise InputError(f"bad grid values {spec!r}") from exc
    text = str(spec).strip()
    try:
        if ":" in text:
            start, stop, num = text.split(":")
            return np.linspace(float(start), float(stop), int(num))
        return np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError as exc:
        raise InputError(f"bad grid spec {spec!r}") from exc


def _load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise InputError(f"{path}: cannot open ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path}: configuration must be a JSON object")
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise InputError(f"{path}: unknown configuration keys {unknown}")
    return data


_FLAG_FIELDS = ("cutoff", "seed", "preset", "g", "heterodyne", "restarts", "threshold_value", "out", "source",
                "r", "loss", "squeeze_db", "antisqueeze_db", "tap_t", "eta", "samples", "angles", "etas",
                "antisqueeze_dbs", "deltas", "losses", "n_list", "repeats", "r_values")


def resolve_config(args):
    """Defaults, then the ``--config`` file, then explicit flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(_load_config(args.config))
    for name in _FLAG_FIELDS:
        v = getattr(args, name, None)
        if v is not None and v is not False:
            values[name] = v
    cfg = RunConfig(**values)
    degrees = getattr(args, "degrees", False)
    if cfg.angles is not None:
        angles = parse_grid(cfg.angles)
        cfg.angles = [math.radians(a) for a in angles] if degrees else [float(a) for a in angles]
    for name in ("n_list", "r_values"):
        grid = parse_grid(getattr(cfg, name))
        if grid is not None:
            setattr(cfg, name, [int(v) if name == "n_list" else float(v) for v in grid])
    try:
        return cfg.validate()
    except (InvalidParameterError, ValueError) as exc:
        raise InputError(str(exc)) from exc


# --- output helpers ---------------------------------------------------------

def load_schema(name):
    """Published JSON schema: ``report``, ``threshold`` or ``manifest``."""
    text = resources.files("ngnull").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def provenance(command, cfg, inputs=()):
    return {
        "tool": "ngnull",
        "version": __version__,
        "command": command,
        "seed": cfg.seed,
        "cutoff": cfg.cutoff,
        "inputs": [{"path": p, "sha256": _sha256(p)} for p in inputs],
        "config": {k: v for k, v in cfg.to_dict().items() if k != "out"},
    }


def write_json(path, payload):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")
    return path


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


# --- commands ---------------------------------------------------------------

def compute_threshold(cfg):
    dim = cfg.cutoff or fock.DEFAULT_DIM
    if cfg.heterodyne:
        return threshold.minimize_heterodyne_threshold(dim=dim, restarts=cfg.restarts, seed=cfg.seed)
    return threshold.minimize_homodyne_threshold(g=cfg.g or 1.0, dim=dim, restarts=cfg.restarts, seed=cfg.seed)


def cmd_threshold(cfg, args):
    cfg = dataclasses.replace(cfg, cutoff=cfg.cutoff or fock.DEFAULT_DIM)
    path = os.path.join(cfg.out, "threshold.json")
    try:
        res = compute_threshold(cfg)
    except OptimizerFailedError as exc:
        write_json(path, {"status": "failed", "error": str(exc), "diagnostics": exc.diagnostics,
                          "provenance": provenance("threshold", cfg)})
        raise
    payload = {"status": "ok", "threshold": res.to_dict(), "g": cfg.g or 1.0,
               "provenance": provenance("threshold", cfg)}
    write_json(path, payload)
    print(f"{res.kind} threshold {res.min_value:.6f} (cutoff {res.dim}, spread {res.spread:.2e}) -> {path}")
    return EXIT_OK


def _threshold_value(cfg):
    if cfg.threshold_value is not None:
        return float(cfg.threshold_value), "homodyne", None
    res = compute_threshold(dataclasses.replace(cfg, heterodyne=False))
    return res.min_value, res.kind, res.dim


def build_report(dataset, poly, thr_value, thr_kind, thr_dim, est):
    certified = bool(est.mean < thr_value)
    z = (thr_value - est.mean) / est.sigma if est.sigma > 0 else None
    return {
        "nullifier": {"preset": poly.preset, "g": poly.g, "angles": poly.angles(), "polynomial": poly.to_dict()},
        "estimate": est.to_dict(),
        "threshold": {"value": thr_value, "kind": thr_kind, "cutoff": thr_dim},
        "verdict": "certified" if certified else "not-certified",
        "certified": certified,
        "z": z,
        "dataset": {"groups": [{"phase_rad": g.theta, "count": int(g.samples.size)} for g in dataset.groups],
                    "metadata": dataset.metadata},
    }


def cmd_certify(cfg, args):
    cfg = dataclasses.replace(cfg, cutoff=cfg.cutoff or fock.DEFAULT_DIM)
    if cfg.heterodyne:
        raise InputError("certify reads homodyne datasets only; heterodyne data is not supported")
    dataset = homodyne.load_dataset(args.dataset)
    g = cfg.g
    if g is None:
        g = dataset.metadata.get("g")
    if g is None:
        raise InputError("no --g given and the dataset manifest does not record one")
    poly = kitten_nullifier_poly(float(g), cfg.preset)
    est = homodyne.estimate_nullifier(dataset, poly)
    thr, kind, dim = _threshold_value(cfg)
    report = build_report(dataset, poly, thr, kind, dim, est)
    inputs = _input_files(args.dataset)
    report["provenance"] = provenance("certify", dataclasses.replace(cfg, g=float(g)), inputs)
    path = write_json(os.path.join(cfg.out, "report.json"), report)
    z = "n/a" if report["z"] is None else f"{report['z']:.2f}"
    print(f"{report['verdict']}: nullifier {est.mean:.6f} +- {est.sigma:.6f} vs threshold {thr:.6f} (z = {z}) -> {path}")
    return EXIT_OK if report["certified"] else EXIT_NOT_CERTIFIED


def _input_files(paths):
    out = []
    for p in paths:
        if os.path.isdir(p):
            p = os.path.join(p, homodyne.MANIFEST_NAME)
        out.append(p)
        if p.endswith(".json"):
            with open(p) as fh:
                manifest = json.load(fh)
            base = os.path.dirname(p)
            out.extend(os.path.join(base, f["path"]) for f in manifest["files"])
    return out


def simulated_state(cfg, dim):
    if cfg.source == "kitten" and cfg.loss == 0.0:
        return cluster.ideal_kitten(cfg.r, dim)
    if cfg.source in ("kitten", "lossy-kitten"):
        return cluster.lossy_kitten(cfg.r, cfg.loss, dim)
    if cfg.source == "subtracted":
        spec = cluster.SourceSpec(cfg.squeeze_db, cfg.antisqueeze_db, cfg.tap_t, cfg.eta)
        return cluster.subtracted_source(spec, dim)[0]
    if cfg.source == "squeezed":
        return cluster.impure_squeezed(cfg.squeeze_db, cfg.antisqueeze_db, dim)
    return fock.vacuum(dim)


def cmd_simulate(cfg, args):
    dim = cfg.cutoff or fock.DEFAULT_DIM
    if cfg.r is None:
        cfg = dataclasses.replace(cfg, r=DEFAULT_KITTEN_R)
    g = cfg.g if cfg.g is not None else math.exp(cfg.r)
    angles = cfg.angles if cfg.angles is not None else kitten_nullifier_poly(g, cfg.preset).angles()
    rho = simulated_state(cfg, dim)
    meta = {"source": cfg.source, "r": cfg.r, "loss": cfg.loss, "g": g, "preset": cfg.preset,
            "seed": cfg.seed, "cutoff": dim, "samples_per_angle": cfg.samples, "tool_version": __version__}
    if cfg.source in ("subtracted", "squeezed"):
        meta.update(squeeze_db=cfg.squeeze_db, antisqueeze_db=cfg.antisqueeze_db, tap_t=cfg.tap_t, eta=cfg.eta)
    data = homodyne.simulate_dataset(rho, angles, cfg.samples, seed=cfg.seed, metadata=_jsonable(meta))
    path = homodyne.save_dataset(data, cfg.out)
    print(f"wrote {len(angles)} phase groups of {cfg.samples} samples -> {path}")
    return EXIT_OK


def cmd_sweep(cfg, args):
    if args.kind == "eta-antisq":
        etas = parse_grid(cfg.etas) if cfg.etas is not None else np.linspace(0.2, 1.0, 20)
        antisq = parse_grid(cfg.antisqueeze_dbs) if cfg.antisqueeze_dbs is not None else np.linspace(2.0, 6.0, 20)
        dim = cfg.cutoff or fock.DEFAULT_DIM
        sw = cluster.sweep_eta_antisq(etas, antisq, squeeze_db=cfg.squeeze_db, tap_t=cfg.tap_t, dim=dim,
                                      preset=cfg.preset)
        path = write_csv(os.path.join(cfg.out, "sweep_eta_antisq.csv"), ETA_ANTISQ_HEADER, sw.rows())
        crossings = [{"eta": float(e), "antisqueeze_db": sw.crossing(i)} for i, e in enumerate(sw.etas)]
        write_json(os.path.join(cfg.out, "sweep_eta_antisq.json"),
                   {"threshold": cluster.GAUSSIAN_THRESHOLD, "crossings": crossings,
                    "g_opt": sw.g_opt, "herald_prob": sw.herald_prob,
                    "provenance": provenance("sweep eta-antisq", dataclasses.replace(cfg, cutoff=dim))})
    else:
        deltas = parse_grid(cfg.deltas) if cfg.deltas is not None else np.round(np.linspace(-0.15, 0.15, 31), 10)
        losses = parse_grid(cfg.losses) if cfg.losses is not None else np.array([0.0, 0.1, 0.2])
        dim = cfg.cutoff or fock.DEFAULT_TWO_MODE_DIM
        r = cfg.r if cfg.r is not None else cluster.R_MINUS_2DB
        sw = cluster.sweep_mismatch(deltas, tuple(float(v) for v in losses), r=r, dim=dim)
        path = write_csv(os.path.join(cfg.out, "sweep_mismatch.csv"), MISMATCH_HEADER, sw.rows())
        minima = [{"loss": l, "argmin_delta": float(sw.deltas[int(np.argmin(v))]), "min": float(np.min(v))}
                  for l, v in sw.values.items()]
        write_json(os.path.join(cfg.out, "sweep_mismatch.json"),
                   {"minima": minima, "r": sw.r,
                    "provenance": provenance("sweep mismatch", dataclasses.replace(cfg, cutoff=dim))})
    print(f"wrote {path}")
    return EXIT_OK


def cmd_convergence(cfg, args):
    dim = cfg.cutoff or fock.DEFAULT_DIM
    n_list = cfg.n_list or list(homodyne.DEFAULT_N_LIST)
    r_values = cfg.r_values or [0.1, 0.2]
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(r_values))
    rows, summary = [], []
    for r, ss in zip(r_values, seeds):
        poly = kitten_nullifier_poly(cfg.g if cfg.g is not None else math.exp(r), cfg.preset)
        study = homodyne.convergence_study(cluster.ideal_kitten(r, dim), poly, n_list, cfg.repeats, seed=ss)
        for row in study:
            rows.append((row.n_samples, row.mean, row.std, float(r)))
            summary.append({"r": r, "n_samples": row.n_samples, "mean": row.mean, "std": row.std,
                            "mean_reported_sigma": row.mean_sigma})
    path = write_csv(os.path.join(cfg.out, "convergence.csv"), CONVERGENCE_HEADER, rows)
    write_json(os.path.join(cfg.out, "convergence.json"),
               {"rows": summary, "provenance": provenance("convergence", dataclasses.replace(cfg, cutoff=dim))})
    print(f"wrote {path}")
    return EXIT_OK


# --- parser -----------------------------------------------------------------

def _common_flags():
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--cutoff", type=int, help="Fock cutoff D per mode")
    p.add_argument("--seed", type=int, help="master random seed (default 0)")
    p.add_argument("--config", help="JSON file with RunConfig fields")
    p.add_argument("--out", help="output directory (default .)")
    p.add_argument("--heterodyne", action="store_true", help="use the heterodyne threshold")
    p.add_argument("--g", type=float, help="nullifier analysis parameter g")
    p.add_argument("--preset", choices=("eq15", "eq16"), help="homodyne angle preset")
    p.add_argument("--degrees", action="store_true", help="interpret --angles in degrees")
    p.add_argument("--restarts", type=int, help="optimizer restarts")
    return p


def build_parser():
    common = _common_flags()
    parser = _Parser(prog="ngnull", description="Non-Gaussian nullifier thresholds, simulation and certification.")
    parser.add_argument("--version", action="version", version=f"ngnull {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("threshold", parents=[common], help="Gaussian threshold of the kitten nullifier")

    p = sub.add_parser("certify", parents=[common], help="certify a quadrature dataset")
    p.add_argument("dataset", nargs="+", help="manifest.json, a dataset directory, or phase-group CSVs")
    p.add_argument("--threshold-value", type=float, help="use this threshold instead of computing it")

    p = sub.add_parser("simulate", parents=[common], help="simulate a quadrature dataset")
    p.add_argument("--source", choices=SOURCES)
    p.add_argument("--r", type=float, help="kitten squeezing parameter")
    p.add_argument("--loss", type=float, help="intensity loss applied to the kitten")
    p.add_argument("--squeeze-db", type=float)
    p.add_argument("--antisqueeze-db", type=float)
    p.add_argument("--tap-t", type=float)
    p.add_argument("--eta", type=float)
    p.add_argument("--samples", type=int, help="samples per angle")
    p.add_argument("--angles", help="comma-separated phases (radians unless --degrees)")

    p = sub.add_parser("sweep", parents=[common], help="parameter sweeps")
    p.add_argument("kind", choices=("eta-antisq", "mismatch"))
    p.add_argument("--etas", help="grid: 'a,b,c' or 'start:stop:num'")
    p.add_argument("--antisqueeze-dbs", help="grid: 'a,b,c' or 'start:stop:num'")
    p.add_argument("--squeeze-db", type=float)
    p.add_argument("--tap-t", type=float)
    p.add_argument("--deltas", help="grid: 'a,b,c' or 'start:stop:num'")
    p.add_argument("--losses", help="grid: 'a,b,c'")
    p.add_argument("--r", type=float, help="kitten squeezing parameter (mismatch)")

    p = sub.add_parser("convergence", parents=[common], help="estimator spread versus sample count")
    p.add_argument("--n-list", help="comma-separated sample counts")
    p.add_argument("--repeats", type=int)
    p.add_argument("--r-values", help="comma-separated kitten squeezing parameters")
    return parser


COMMANDS = {"threshold": cmd_threshold, "certify": cmd_certify, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "convergence": cmd_convergence}

INPUT_ERRORS = (InputError, DatasetParseError, MissingAngleError, InsufficientDataError, OSError)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except NUMERICAL_ERRORS as exc:
        print(f"ngnull: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except INPUT_ERRORS as exc:
        print(f"ngnull: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NullifierError as exc:
        # parameter-type errors are ValueErrors; anything else is numerical
        kind, code = ("input error", EXIT_INPUT) if isinstance(exc, ValueError) else ("numerical failure", EXIT_NUMERICAL)
        print(f"ngnull: {kind}: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
