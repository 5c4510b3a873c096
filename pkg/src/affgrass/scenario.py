"""Scenario files, experiment dispatch and report bundles."""

import json
import os
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from ._validation import check_degree, check_positive_float, check_positive_int, check_seed
from .drift import drift_verify
from .exceptions import (
    BadDegree,
    BlockStructureViolated,
    DegenerateSubspace,
    ParseError,
    RankDeficient,
    RecipeFailure,
    SingularInput,
    ValidationError,
)
from .grassmannian import AffineSubspace
from .group import GROUP_KINDS, MeasureSpec, WordSampler
from .limit_laws import (
    block_exponents,
    lil_diagnostic,
    lyapunov_spectrum,
    sigma_and_phi,
    spectrum_checks,
    spectrum_crosscheck,
)
from .plots import emit_plots
from .serialize import csv_text, dumps
from .walks import (
    RECURRENT_MASS,
    STREAM_CESARO,
    TRANSIENT_MASS,
    backward_coupling,
    cesaro_mass,
    classify,
    log_grid,
    ratio_series,
    run_forward,
)

EXPERIMENTS = ("spectrum", "classify", "cesaro", "coupling", "ratio", "drift", "lil", "full")
MAX_D = 10
CROSSCHECK_MAX_D = 6

DEFAULTS = {
    "seed": 0,
    "N": 10_000,
    "replicas": 256,
    "R": 10.0,
    "delta": None,
    "n0": None,
    "spectrum_replicas": 64,
    "samples": 2000,
    "words": 100,
    "ratio_words": 16,
    "coupling_N": 500,
    "lil_words": 32,
}

MODULE_ERRORS = (
    ValidationError, SingularInput, BadDegree, RankDeficient, DegenerateSubspace,
    BlockStructureViolated, RecipeFailure,
)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    group_kind: str
    d: int
    k: int
    measure: MeasureSpec
    experiment: str
    seed: int = 0
    N: int = 10_000
    replicas: int = 256
    R: float = 10.0
    delta: float = None
    n0: int = None
    spectrum_replicas: int = 64
    samples: int = 2000
    words: int = 100
    ratio_words: int = 16
    coupling_N: int = 500
    lil_words: int = 32
    x0: AffineSubspace = None
    y0: AffineSubspace = None
    out: str = None
    thresholds: dict = field(default_factory=lambda: {
        "recurrent": RECURRENT_MASS, "transient": TRANSIENT_MASS})

    def __post_init__(self):
        if self.group_kind not in GROUP_KINDS:
            raise ValidationError(f"group_kind must be one of {GROUP_KINDS}")
        if self.experiment not in EXPERIMENTS:
            raise ValidationError(f"experiment must be one of {EXPERIMENTS}")
        d = check_positive_int(self.d, "d")
        if d > MAX_D:
            raise ValidationError(f"d <= {MAX_D} required, got d={d}")
        check_degree(self.k, d)
        if self.measure.d != d:
            raise ValidationError(f"measure acts on R^{self.measure.d}, scenario says d={d}")
        if self.measure.group_kind != self.group_kind:
            raise ValidationError("measure group_kind does not match the scenario")
        check_seed(self.seed)
        for name in ("N", "replicas", "spectrum_replicas", "samples", "words", "ratio_words",
                     "coupling_N", "lil_words"):
            check_positive_int(getattr(self, name), name)
        check_positive_float(self.R, "R")
        if self.delta is not None:
            check_positive_float(self.delta, "delta")
        if self.n0 is not None:
            check_positive_int(self.n0, "n0")
        x0, y0 = self.x0, self.y0
        if x0 is None:
            x0 = default_start(d, self.k)
        if y0 is None:
            y0 = default_second_start(d, self.k)
        for name, x in (("x0", x0), ("y0", y0)):
            if x.d != d or x.k != self.k:
                raise ValidationError(f"{name} must be a {self.k}-dimensional subspace of R^{d}")
        if x0.same_as(y0):
            raise ValidationError("x0 and y0 must be distinct")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "y0", y0)

    def to_dict(self, include_out=False):
        out = {
            "group_kind": self.group_kind,
            "d": self.d,
            "k": self.k,
            "experiment": self.experiment,
            "measure": self.measure.to_dict(),
        }
        for name in DEFAULTS:
            out[name] = getattr(self, name)
        out["x0"] = self.x0.to_dict()
        out["y0"] = self.y0.to_dict()
        out["thresholds"] = dict(self.thresholds)
        if include_out and self.out is not None:
            out["out"] = self.out
        return out

    def __eq__(self, other):
        if not isinstance(other, ScenarioConfig):
            return NotImplemented
        return dumps(self.to_dict(True)) == dumps(other.to_dict(True))


def default_start(d, k):
    """The coordinate k-plane through the origin."""
    return AffineSubspace.through(np.zeros(d), np.eye(d)[:k])


def default_second_start(d, k):
    """Coordinate k-plane translated by the next basis vector."""
    return AffineSubspace.through(np.eye(d)[k], np.eye(d)[:k])


def _field(data, name, kind, required=False):
    if name not in data or data[name] is None:
        if required:
            raise ParseError("missing required field", field=name)
        return DEFAULTS.get(name)
    value = data[name]
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
            raise ParseError(f"expected an integer, got {value!r}", field=name)
        return int(value)
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParseError(f"expected a number, got {value!r}", field=name)
        return float(value)
    if not isinstance(value, kind):
        raise ParseError(f"expected {kind.__name__}, got {type(value).__name__}", field=name)
    return value


def scenario_from_dict(data, out=None):
    if not isinstance(data, dict):
        raise ParseError("scenario must be a JSON object")
    group_kind = _field(data, "group_kind", str, required=True)
    d = _field(data, "d", int, required=True)
    k = _field(data, "k", int, required=True)
    experiment = _field(data, "experiment", str, required=True)
    measure = _field(data, "measure", dict, required=True)
    if not isinstance(measure.get("atoms"), list) or not measure["atoms"]:
        raise ParseError("measure needs a non-empty 'atoms' list", field="measure.atoms")
    for i, atom in enumerate(measure["atoms"]):
        if not isinstance(atom, dict):
            raise ParseError("atom must be an object", field=f"measure.atoms[{i}]")
        for key in ("weight", "A"):
            if key not in atom:
                raise ParseError("missing atom entry", field=f"measure.atoms[{i}].{key}")
    check_positive_int(d, "d")
    if d > MAX_D:
        raise ValidationError(f"d <= {MAX_D} required, got d={d}")
    check_degree(k, d)
    try:
        mu = MeasureSpec.from_dict(group_kind, d, measure)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"bad measure: {exc}") from None
    kwargs = {}
    for name in DEFAULTS:
        kind = float if name in ("R", "delta") else int
        kwargs[name] = _field(data, name, kind)
    for name in ("x0", "y0"):
        if data.get(name) is not None:
            kwargs[name] = AffineSubspace.from_dict(_field(data, name, dict))
    if "thresholds" in data:
        kwargs["thresholds"] = {"recurrent": RECURRENT_MASS, "transient": TRANSIENT_MASS}
        if data["thresholds"] != kwargs["thresholds"]:
            raise ValidationError("verdict thresholds are fixed at 0.9 / 0.1")
    out = out if out is not None else data.get("out")
    return ScenarioConfig(group_kind, d, k, mu, experiment, out=out, **kwargs)


def load_scenario(path):
    """Read and validate a scenario file, resolving defaults."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    return scenario_from_dict(data)


def write_scenario(config, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(config.to_dict(include_out=True)))


@dataclass
class ReportBundle:
    """Everything one run produces; ``tables`` map file names to ``(header, rows)``."""

    scenario: dict
    reports: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    failed_stage: str = None
    error: str = None
    error_kind: str = None
    notes: list = field(default_factory=list)
    wall_clock: float = 0.0

    def manifest(self):
        files = ["scenario.json"] + [f"{name}.json" for name in self.reports] + list(self.tables)
        return {
            "tool": "affgrass",
            "version": __version__,
            "experiment": self.scenario.get("experiment"),
            "files": sorted(files),
            "failed_stage": self.failed_stage,
            "error": self.error,
            "notes": list(self.notes),
        }

    def payloads(self):
        """File name -> text for every JSON and CSV payload."""
        out = {"scenario.json": dumps(self.scenario)}
        for name, rep in self.reports.items():
            out[f"{name}.json"] = dumps(rep)
        for name, (header, rows) in self.tables.items():
            out[name] = csv_text(header, rows)
        out["manifest.json"] = dumps(self.manifest())
        return out


def write_bundle(bundle, out_dir, plots=True):
    """Write payloads (and SVG plots unless disabled); returns the written file names."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for name, text in bundle.payloads().items():
        with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        written.append(name)
    if plots:
        svgs, notes = emit_plots(bundle)
        for name, text in svgs.items():
            with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            written.append(name)
        if notes:
            with open(os.path.join(out_dir, "plot_notes.txt"), "w", encoding="utf-8") as fh:
                fh.write("\n".join(notes) + "\n")
    with open(os.path.join(out_dir, "timing.txt"), "w", encoding="utf-8") as fh:
        fh.write(f"wall_clock_seconds {bundle.wall_clock:.3f}\n")
    return written


def _stage_spectrum(cfg, bundle, n_jobs):
    mu = cfg.measure
    spec = lyapunov_spectrum(mu, cfg.N, cfg.spectrum_replicas, cfg.seed, n_jobs)
    cross = []
    if mu.d <= CROSSCHECK_MAX_D:
        cross = [spectrum_crosscheck(mu, p, cfg.N, cfg.spectrum_replicas, cfg.seed, n_jobs)
                 for p in range(1, mu.d + 1)]
    blocks = [block_exponents(mu, k, cfg.N, cfg.spectrum_replicas, cfg.seed, n_jobs)
              for k in range(mu.d)]
    law = sigma_and_phi(mu, cfg.N, cfg.spectrum_replicas, cfg.seed, n_jobs)
    bundle.reports["spectrum"] = {
        "lambda": spec.exponents,
        "stderr": spec.stderr,
        "n_steps": spec.n_steps,
        "replicas": spec.replicas,
        "sigma": law.sigma_hat,
        "sigma_stderr": law.sigma_se,
        "phi": law.phi_hat,
        "crosscheck": [c.to_dict() for c in cross],
        "blocks": [b.to_dict() for b in blocks],
        "checks": spectrum_checks(mu, spec, cross, blocks, law),
    }
    bundle.tables["spectrum.csv"] = (
        ("p", "lambda", "stderr"),
        [(p + 1, lam, se) for p, (lam, se) in enumerate(zip(spec.exponents, spec.stderr))],
    )
    return spec


def _stage_classify(cfg, bundle, n_jobs, spec=None):
    if spec is None:
        spec = lyapunov_spectrum(cfg.measure, cfg.N, cfg.spectrum_replicas, cfg.seed, n_jobs)
    result = classify(cfg.measure, cfg.k, spec)
    bundle.reports["classify"] = {
        **result.to_dict(),
        "lambda": spec.exponents,
        "stderr": spec.stderr,
        "all_k": [classify(cfg.measure, k, spec).to_dict() for k in range(cfg.d)],
    }
    return result


def _stage_cesaro(cfg, bundle, n_jobs):
    rep = cesaro_mass(cfg.measure, cfg.x0, cfg.N, cfg.R, cfg.replicas, cfg.seed, n_jobs=n_jobs)
    bundle.reports["cesaro"] = rep.to_dict()
    bundle.tables["cesaro_mass.csv"] = (
        ("n", "mass", "stderr"), list(zip(rep.n_grid, rep.mass_curve, rep.stderr)))
    traj = run_forward(cfg.measure, cfg.x0, cfg.N, WordSampler(cfg.seed, STREAM_CESARO, 0))
    bundle.tables["trajectory.csv"] = (
        ("n", "dist"), [(n + 1, v) for n, v in enumerate(traj.dist)])
    return rep


def _stage_coupling(cfg, bundle, n_jobs):
    rep = backward_coupling(cfg.measure, cfg.x0, cfg.y0, cfg.coupling_N, cfg.words, cfg.seed,
                            n_jobs)
    bundle.reports["coupling"] = {**rep.to_dict(), "x0": cfg.x0.to_dict(), "y0": cfg.y0.to_dict()}
    grid = log_grid(cfg.coupling_N)
    bundle.tables["coupling.csv"] = (
        ("word", "n", "distance"),
        [(w, n, rep.distances[w, n - 1]) for w in range(rep.words) for n in grid],
    )
    return rep


def _stage_ratio(cfg, bundle, n_jobs):
    rep = ratio_series(cfg.measure, cfg.k, cfg.N, cfg.ratio_words, cfg.seed, n_jobs=n_jobs)
    bundle.reports["ratio"] = rep.to_dict()
    t, sup = rep.T_values, rep.runsup_values
    bundle.tables["ratio_series.csv"] = (
        ("word", "n", "T_n", "runsup"),
        [(w, n, t[w, j], sup[w, j]) for w in range(t.shape[0]) for j, n in enumerate(rep.n_grid)],
    )
    return rep


def _stage_drift(cfg, bundle, n_jobs):
    rep = drift_verify(cfg.measure, cfg.k, cfg.delta, cfg.n0, samples=cfg.samples, seed=cfg.seed)
    bundle.reports["drift"] = rep.to_dict()
    bundle.tables["drift_cells.csv"] = (
        ("cell_lo", "cell_hi", "ratio_mean", "stderr", "n_samples"), rep.cell_rows())
    if not rep.recipe_ok:
        raise RecipeFailure(f"drift recipe did not reach a_hat < 1 (a_hat = {rep.a_hat:.6g})")
    return rep


def _stage_lil(cfg, bundle, n_jobs):
    rep = lil_diagnostic(cfg.measure, cfg.N, cfg.lil_words, cfg.seed, n_jobs=n_jobs)
    bundle.reports["lil"] = rep.to_dict()
    d = cfg.d
    pts = rep.lil_points
    bundle.tables["lil_points.csv"] = (
        ("word", "n") + tuple(f"x{i + 1}" for i in range(d)),
        [(w, n, *pts[w, j]) for w in range(pts.shape[0]) for j, n in enumerate(rep.lil_n_grid)],
    )
    return rep


STAGES = {
    "spectrum": _stage_spectrum,
    "classify": _stage_classify,
    "cesaro": _stage_cesaro,
    "coupling": _stage_coupling,
    "ratio": _stage_ratio,
    "drift": _stage_drift,
    "lil": _stage_lil,
}


def run_experiment(config, n_jobs=None):
    """Run the configured experiment and collect a :class:`ReportBundle`.

    ``full`` runs the spectrum and the classifier, then the diagnostics of the
    predicted branch: Cesàro mass, drift and coupling when recurrent; Cesàro
    mass and the ratio series otherwise. A module error stops the run and is
    recorded as ``failed_stage`` on the partial bundle.
    """
    start = time.perf_counter()
    bundle = ReportBundle(scenario=config.to_dict())
    stage = config.experiment
    try:
        if config.experiment == "full":
            stage = "spectrum"
            spec = _stage_spectrum(config, bundle, n_jobs)
            stage = "classify"
            verdict = _stage_classify(config, bundle, n_jobs, spec).verdict
            branch = ["cesaro", "drift", "coupling"] if verdict == "recurrent" else ["cesaro", "ratio"]
            if verdict == "inconclusive":
                bundle.notes.append("classifier inconclusive; ran the transient branch")
            for stage in branch:
                STAGES[stage](config, bundle, n_jobs)
        else:
            STAGES[stage](config, bundle, n_jobs)
    except MODULE_ERRORS as exc:
        bundle.failed_stage = stage
        bundle.error = f"{type(exc).__name__}: {exc} (scenario experiment={config.experiment}, stage={stage})"
        bundle.error_kind = type(exc).__name__
    bundle.wall_clock = time.perf_counter() - start
    return bundle


def with_overrides(config, **changes):
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(config, **changes) if changes else config

