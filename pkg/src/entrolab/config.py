"""Flat ``key = value`` experiment configs.

One setting per line, ``#`` starts a comment, and blank lines are
ignored.  Key names carry their units (``epsilon_metric``, ``n_iterates``).
Every parse or validation problem raises :class:`ConfigError` with the
offending line number.

Value syntax:

* ``int`` / ``float``: a single literal
* ``floats`` / ``ints``: comma-separated literals
* ``matrix``: rows separated by ``;``, entries by ``,`` (``2,1;1,1``)
* ``str`` / choice: a bare word
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Dict, Optional

from .exceptions import ConfigError

EXPERIMENTS = ("entropy", "tail", "pliss", "splitting", "conjecture", "metric_entropy", "profile")
MAP_KINDS = ("cat", "toral", "identity", "rotation", "standard", "henon", "perturbed")


@dataclass(frozen=True)
class Key:
    kind: str
    default: Any = None
    choices: tuple = ()
    lo: Optional[float] = None  # inclusive lower bound on every entry
    hi: Optional[float] = None
    positive: bool = False
    doc: str = ""


SCHEMA: Dict[str, Key] = {
    "experiment": Key("choice", choices=EXPERIMENTS, doc="must match the CLI argument if given"),
    "map_kind": Key("choice", choices=MAP_KINDS, doc="dynamics from the zoo"),
    "map_matrix": Key("matrix", doc="integer lift matrix (toral, perturbed)"),
    "map_angles": Key("floats", doc="translation vector in turns (rotation)"),
    "map_dim": Key("int", 2, lo=1, doc="identity dimension"),
    "map_kick_K": Key("float", doc="standard-map kick strength"),
    "map_henon_a": Key("float", 1.4),
    "map_henon_b": Key("float", 0.3),
    "map_eta": Key("float", 0.0, doc="perturbation amplitude"),
    "seed": Key("int", lo=0, doc="mandatory for randomized sampling"),
    "workers": Key("int", 1, lo=1),
    # separated-set entropy
    "grid_points_per_axis": Key("int", lo=1),
    "epsilon_metric": Key("floats", positive=True, doc="radii in the phase-space metric"),
    "n_iterates": Key("int", lo=2, doc="longest orbit segment n_max"),
    "n_min_iterates": Key("int", 2, lo=1),
    "saturation_fraction": Key("float", 0.1, positive=True, hi=1.0),
    "conjecture_tolerance": Key("float", 0.15, lo=0.0),
    # tail entropy and expansiveness profiles
    "horizon_iterates": Key("int", 20, lo=1, doc="truncation T of the infinite ball"),
    "beta_metric": Key("float", positive=True),
    "sample_count": Key("int", lo=1),
    "weighting": Key("choice", "sup", choices=("sup", "empirical_measure")),
    "orbit_x0": Key("floats"),
    "orbit_length_iterates": Key("int", lo=1),
    "burn_in_iterates": Key("int", 0, lo=0),
    # Pliss times
    "pliss_sequence": Key("floats"),
    "pliss_a_star": Key("float"),
    "pliss_c1": Key("float"),
    "pliss_c2": Key("float"),
    # splittings and periodic orbits
    "x0": Key("floats"),
    "n_blocks": Key("int", 50, lo=1),
    "block_length_iterates": Key("int", 1, lo=1),
    "exponent_threshold": Key("float", positive=True),
    "lambda0_nats": Key("float", 0.1, lo=0.0),
    "L0_iterates": Key("int", 8, lo=1),
    "periodic_point": Key("floats"),
    "period_iterates": Key("int", lo=1),
    "gamma_gap_nats": Key("float", 0.5, lo=0.0),
    # metric entropy
    "measure_kind": Key("choice", "uniform", choices=("uniform", "orbit")),
    "cells_per_axis": Key("int", 16, lo=1),
    "n_window": Key("ints", (4, 10), lo=1),
    "entropy_estimator": Key("choice", "chao_shen", choices=("chao_shen", "plugin")),
    "variational_tolerance": Key("float", 0.15, lo=0.0),
}

_ENTROPY_KEYS = ("grid_points_per_axis", "epsilon_metric", "n_iterates")
REQUIRED = {
    "entropy": _ENTROPY_KEYS,
    "conjecture": _ENTROPY_KEYS,
    "tail": ("grid_points_per_axis", "epsilon_metric", "sample_count"),
    "profile": ("grid_points_per_axis", "epsilon_metric"),
    "pliss": ("pliss_a_star", "pliss_c1", "pliss_c2"),
    "splitting": ("x0",),
    "metric_entropy": (),
}


@dataclass
class ExperimentConfig:
    experiment: str
    values: Dict[str, Any]
    lines: Dict[str, int] = field(default_factory=dict)
    n_lines: int = 0

    def __getitem__(self, key):
        return self.values[key]

    def get(self, key, default=None):
        v = self.values.get(key)
        return default if v is None else v

    def has(self, key):
        return self.values.get(key) is not None

    def line_of(self, key):
        return self.lines.get(key, self.n_lines)

    def echo(self):
        """Explicitly set and defaulted values, JSON-ready, sorted by key."""
        out = {}
        for k in sorted(self.values):
            v = self.values[k]
            if v is None or k == "workers":
                continue
            out[k] = list(v) if isinstance(v, tuple) else v
        return out


def _number(tok, kind, line, key):
    try:
        return int(tok) if kind == "int" else float(tok)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {tok!r} as {kind}", line) from None


def _parse_value(key, raw, line):
    spec = SCHEMA[key]
    raw = raw.strip()
    if raw == "":
        raise ConfigError(f"{key}: empty value", line)
    if spec.kind == "int":
        val = _number(raw, "int", line, key)
        items = [val]
    elif spec.kind == "float":
        val = _number(raw, "float", line, key)
        items = [val]
    elif spec.kind in ("floats", "ints"):
        base = spec.kind[:-1]
        val = tuple(_number(t.strip(), base, line, key) for t in raw.split(","))
        items = list(val)
    elif spec.kind == "matrix":
        rows = [r for r in raw.split(";")]
        val = tuple(tuple(_number(t.strip(), "int", line, key) for t in r.split(",")) for r in rows)
        if len({len(r) for r in val}) != 1 or len(val) != len(val[0]):
            raise ConfigError(f"{key}: matrix must be square", line)
        items = []
    elif spec.kind == "choice":
        if raw not in spec.choices:
            raise ConfigError(f"{key}: {raw!r} is not one of {', '.join(spec.choices)}", line)
        val, items = raw, []
    else:
        val, items = raw, []
    for v in items:
        if v != v or v in (float("inf"), float("-inf")):
            raise ConfigError(f"{key}: value must be finite", line)
        if spec.positive and not v > 0:
            raise ConfigError(f"{key}: values must be > 0, got {v}", line)
        if spec.lo is not None and v < spec.lo:
            raise ConfigError(f"{key}: values must be >= {spec.lo}, got {v}", line)
        if spec.hi is not None and v > spec.hi:
            raise ConfigError(f"{key}: values must be <= {spec.hi}, got {v}", line)
    return val


def parse_config(text, experiment):
    """Parse and validate config text for ``experiment``."""
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    values: Dict[str, Any] = {}
    lines: Dict[str, int] = {}
    all_lines = text.splitlines()
    for no, raw in enumerate(all_lines, start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", no)
        key, val = (s.strip() for s in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}", no)
        if key in values:
            raise ConfigError(f"duplicate key {key!r} (first set on line {lines[key]})", no)
        values[key] = _parse_value(key, val, no)
        lines[key] = no
    n = len(all_lines)
    if values.get("experiment", experiment) != experiment:
        raise ConfigError(f"config is for experiment {values['experiment']!r}, not {experiment!r}",
                          lines["experiment"])
    values["experiment"] = experiment
    for key, spec in SCHEMA.items():
        values.setdefault(key, spec.default)
    cfg = ExperimentConfig(experiment, values, lines, n)
    _validate(cfg)
    return cfg


def _require(cfg, key, why):
    if not cfg.has(key):
        raise ConfigError(f"missing required key {key!r} ({why})", cfg.n_lines)


def _validate(cfg):
    exp = cfg.experiment
    _require(cfg, "map_kind", "every experiment needs dynamics")
    kind = cfg["map_kind"]
    needs = {"toral": "map_matrix", "perturbed": "map_matrix", "rotation": "map_angles",
             "standard": "map_kick_K"}
    if kind in needs:
        _require(cfg, needs[kind], f"map_kind = {kind}")
    for key in REQUIRED[exp]:
        _require(cfg, key, f"experiment {exp}")
    if exp == "tail" and len(cfg["epsilon_metric"]) != 1:
        raise ConfigError("tail takes a single epsilon_metric value", cfg.line_of("epsilon_metric"))
    if exp == "profile":
        eps = cfg["epsilon_metric"]
        if any(b > a for a, b in zip(eps, eps[1:])):
            raise ConfigError("epsilon_metric must be decreasing for a profile",
                              cfg.line_of("epsilon_metric"))
        if cfg["weighting"] == "sup":
            _require(cfg, "sample_count", "weighting = sup samples random points")
        else:
            _require(cfg, "orbit_x0", "weighting = empirical_measure")
            _require(cfg, "orbit_length_iterates", "weighting = empirical_measure")
    if exp in ("tail", "profile") and cfg.get("weighting") == "sup" and not cfg.has("seed"):
        raise ConfigError("missing required key 'seed' (random sample points)", cfg.n_lines)
    if exp == "pliss" and not cfg.has("pliss_sequence"):
        _require(cfg, "x0", "pliss without pliss_sequence derives one from an orbit")
    if exp == "splitting" and cfg.has("periodic_point"):
        _require(cfg, "period_iterates", "periodic_point given")
    if exp == "metric_entropy":
        w = cfg["n_window"]
        if len(w) != 2 or not w[0] < w[1]:
            raise ConfigError("n_window needs two increasing integers", cfg.line_of("n_window"))
        if cfg["measure_kind"] == "uniform":
            _require(cfg, "sample_count", "measure_kind = uniform")
            _require(cfg, "seed", "uniform samples are random")
        else:
            _require(cfg, "orbit_x0", "measure_kind = orbit")
            _require(cfg, "orbit_length_iterates", "measure_kind = orbit")
        if cfg.has("epsilon_metric"):
            _require(cfg, "grid_points_per_axis", "variational check needs a topological estimate")
            _require(cfg, "n_iterates", "variational check needs a topological estimate")


def load_config(path, experiment):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, experiment)
