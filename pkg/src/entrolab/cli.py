"""Command-line experiment runner.

``entrolab <experiment> --config <path> [--out <dir>] [--workers N] [--seed S]``

Each run writes ``<experiment>_report.json`` plus CSV curves into the output
directory.  The directory is ``--out`` if given, else ``$ENTROLAB_OUT``, else
``./entrolab_out``.  Logs go to stderr.

Exit codes: 0 success, 2 config error, 3 runtime error, 4 unavailable
capability.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Dict, List, Sequence

import numpy as np

from . import __version__
from . import entropy as E
from . import hyperbolicity as H
from . import homology as G
from . import metric_entropy as ME
from .config import EXPERIMENTS, ExperimentConfig, load_config
from .dynamics import Henon, PerturbedToral, make_map
from .exceptions import ConfigError, EntrolabError, UnavailableError

SCHEMA_VERSION = "1.0"
OUT_ENV = "ENTROLAB_OUT"
DEFAULT_OUT = "entrolab_out"

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_UNAVAILABLE = 0, 2, 3, 4

log = logging.getLogger("entrolab")

# CSV columns per file kind; documented in docs/reports.md
CSV_COLUMNS = {
    "entropy": ("epsilon", "n", "separated_count", "log_count"),
    "tail": ("sample", "epsilon", "beta", "tail_entropy", "candidates"),
    "profile": ("epsilon", "h_star", "beta", "horizon", "max_candidates"),
    "pliss": ("i", "a_i", "prefix_excess", "is_pliss_time"),
    "exponents": ("index", "exponent"),
    "metric_entropy": ("n", "distinct_words", "entropy", "plugin_entropy"),
}


@dataclass
class Report:
    experiment: str
    config: dict
    results: dict
    provenance: dict
    curves: Dict[str, List[tuple]]

    def as_dict(self):
        return {"schema_version": SCHEMA_VERSION, "experiment": self.experiment,
                "config": self.config, "results": self.results, "provenance": self.provenance}


def _plain(v):
    """Recursively convert numpy scalars and arrays; non-finite floats become ``None``."""
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, np.ndarray):
        return _plain(v.tolist())
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        f = float(v)
        return f if np.isfinite(f) else None
    return v


def canonical_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, indent=2, allow_nan=False)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


# ---------------------------------------------------------------------------
# pipelines


def build_map(cfg: ExperimentConfig):
    kind = cfg["map_kind"]
    if kind == "toral":
        return make_map("toral", matrix=cfg["map_matrix"])
    if kind == "perturbed":
        return PerturbedToral(np.array(cfg["map_matrix"]), eta=cfg["map_eta"])
    if kind == "rotation":
        return make_map("rotation", angles=cfg["map_angles"])
    if kind == "standard":
        return make_map("standard", K=cfg["map_kick_K"])
    if kind == "henon":
        return Henon(a=cfg["map_henon_a"], b=cfg["map_henon_b"])
    if kind == "identity":
        return make_map("identity", dim=cfg["map_dim"])
    return make_map(kind)


def _entropy_block(m, cfg, workers):
    K = E.PointCloud.grid(m, cfg["grid_points_per_axis"])
    est = E.entropy_estimate(m, K, cfg["epsilon_metric"], cfg["n_iterates"],
                             n_min=cfg["n_min_iterates"], saturation=cfg["saturation_fraction"],
                             workers=workers)
    rows = []
    for curve in est.curves:
        for n, c in curve.entries:
            rows.append((curve.epsilon, n, c, float(np.log(c))))
    res = {"value": est.value, "bound": est.bound, "epsilon_schedule": list(est.epsilon_schedule),
           "n_window": list(est.n_window), "fit_residual": est.fit_residual,
           "per_epsilon": list(est.per_epsilon), "grid_points": len(K), "mesh": K.mesh,
           "units": "nats per iterate"}
    return est, res, rows


def run_entropy(m, cfg, workers):
    _, res, rows = _entropy_block(m, cfg, workers)
    return {"entropy": res}, {"entropy": rows}


def run_conjecture(m, cfg, workers):
    action = G.homology_action(m)  # fail fast (exit 4) before the expensive estimate
    est, res, rows = _entropy_block(m, cfg, workers)
    rep = G.conjecture_report(m, est, cfg["conjecture_tolerance"])
    out = {"entropy": res, "log_sp": rep.log_sp, "sp_f_star": action.sp_f_star,
           "homology_spectral_radii": list(action.spectral_radii),
           "homology_matrices": [M.tolist() for M in action.matrices],
           "margin": rep.margin, "verdict": rep.verdict, "tolerance": rep.tolerance,
           "log_sp_first_homology": float(np.log(action.spectral_radii[1]))}
    return out, {"entropy": rows}


def _samples(m, cfg):
    return E.PointCloud.random(m, cfg["sample_count"], cfg["seed"])


def run_tail(m, cfg, workers):
    K = E.PointCloud.grid(m, cfg["grid_points_per_axis"])
    eps = cfg["epsilon_metric"][0]
    beta = cfg.get("beta_metric", eps / 4)
    T = cfg["horizon_iterates"]
    S = _samples(m, cfg).points
    res = E._map_ordered(lambda x: E._tail(m, x, eps, T, beta, K), list(S), workers)
    rows = [(i, eps, beta, r.rate, r.candidates) for i, r in enumerate(res)]
    vals = [r.rate for r in res]
    return ({"tail_entropy": vals, "max": max(vals), "epsilon": eps, "beta": beta,
             "horizon": T, "bound": "lower", "samples": len(S)}, {"tail": rows})


def run_profile(m, cfg, workers):
    K = E.PointCloud.grid(m, cfg["grid_points_per_axis"])
    if cfg["weighting"] == "sup":
        samples = _samples(m, cfg)
    else:
        samples = ME.EmpiricalMeasure.from_orbit(m, cfg["orbit_x0"], cfg["orbit_length_iterates"],
                                                 cfg["burn_in_iterates"])
    prof, details = E.expansiveness_profile(m, cfg["epsilon_metric"], samples, K,
                                            T=cfg["horizon_iterates"], beta=cfg.get("beta_metric"),
                                            weighting=cfg["weighting"], workers=workers,
                                            return_details=True)
    rows = [(d["epsilon"], d["h_star"], d["beta"], d["horizon"], d["max_candidates"])
            for d in details]
    return ({"profile": [{"epsilon": e, "h_star": h, "bound": "lower"} for e, h in prof],
             "details": details, "weighting": cfg["weighting"]}, {"profile": rows})


def pliss_sequence_from_orbit(m, x0, N, L):
    """``a_i = log ||Df^L||`` at the starts of ``N`` consecutive blocks."""
    x = np.asarray(x0, dtype=float)
    a = np.empty(N)
    for i in range(N):
        D = H.cocycle_product(m, x, L)
        if isinstance(D, H.FactoredCocycle):
            D = D.matrix()
        a[i] = np.log(np.linalg.norm(D, 2))
        for _ in range(L):
            x = m(x)
    return a


def run_pliss(m, cfg, workers):
    p = H.PlissParams(cfg["pliss_a_star"], cfg["pliss_c1"], cfg["pliss_c2"])
    if cfg.has("pliss_sequence"):
        a = np.asarray(cfg["pliss_sequence"], dtype=float)
        source = "explicit"
    else:
        a = pliss_sequence_from_orbit(m, cfg["x0"], cfg["n_blocks"], cfg["block_length_iterates"])
        source = "orbit_block_log_norm"
    r = H.pliss_times(a, p)
    excess = np.cumsum(a - p.c1)
    times = set(r.times)
    rows = [(i + 1, a[i], excess[i], (i + 1) in times) for i in range(a.size)]
    return ({"times": list(r.times), "count_l": r.count_l, "N": r.N, "theta": r.theta,
             "theta_N": r.theta * r.N, "hypothesis_holds": r.hypothesis_holds,
             "sequence_source": source, "sequence": a.tolist()}, {"pliss": rows})


def run_splitting(m, cfg, workers):
    N, L = cfg["n_blocks"], cfg["block_length_iterates"]
    s = H.estimate_splitting(m, np.asarray(cfg["x0"], float), N, L,
                             threshold=cfg.get("exponent_threshold"))
    d1, d2, d3 = s.dims
    lam0, L0 = cfg["lambda0_nats"], cfg["L0_iterates"]
    avg = {}
    if d1 and not s.failed and m.invertible:
        avg["forward_on_E1"] = bool(H.averaged_contraction(
            m, s.orbit[0], lambda p, i: H.stable_frame(m, p, d1), L0, lam0, N, "forward_on_E1"))
    if d3 and not s.failed:
        avg["backward_on_E3"] = bool(H.averaged_contraction(
            m, s.orbit[0], lambda p, i: H.unstable_frame(m, p, d3), L0, lam0, N,
            "backward_on_E3"))
    out = {"dims": list(s.dims), "exponents": s.exponents.tolist(), "margin": s.margin,
           "margins": s.margins, "dominated": s.dominated, "center_at_most_one": s.center_at_most_one,
           "failed": s.failed, "lambda0_estimate": s.lambda0, "L": s.L,
           "bundles_at_x0": {k: v[0].tolist() for k, v in s.bundles.items()},
           "averaged_contraction": avg, "lambda0": lam0, "L0": L0,
           "margin_kind": "sampled lower bound on the worst ratio; dominated iff < 0.5"}
    if cfg.has("periodic_point"):
        pa = H.periodic_orbit_analysis(m, cfg["periodic_point"], cfg["period_iterates"],
                                       cfg["gamma_gap_nats"])
        out["periodic"] = {"period": pa.period, "exponents": pa.exponents.tolist(),
                           "center_count": pa.center_count, "passes_gap": pa.passes_gap,
                           "dims": list(pa.dims), "gamma_gap": pa.gamma_gap}
    rows = [(i, v) for i, v in enumerate(s.exponents)]
    return out, {"exponents": rows}


def run_metric_entropy(m, cfg, workers):
    if cfg["measure_kind"] == "uniform":
        mu = ME.EmpiricalMeasure.uniform_samples(m, cfg["sample_count"], cfg["seed"])
    else:
        mu = ME.EmpiricalMeasure.from_orbit(m, cfg["orbit_x0"], cfg["orbit_length_iterates"],
                                            cfg["burn_in_iterates"])
    xi = ME.BoxPartition.uniform(m, cfg["cells_per_axis"])
    est = ME.metric_entropy_estimate(m, mu, xi, cfg["n_window"], cfg["entropy_estimator"])
    out = {"h_mu": est.value, "estimator": est.estimator, "n_window": list(cfg["n_window"]),
           "entropies": list(est.entropies), "plugin_entropies": list(est.plugin_entropies),
           "distinct_words": list(est.word_counts), "undersampled": est.undersampled,
           "sample_size": est.sample_size, "fit_residual": est.fit_residual,
           "measure": mu.provenance, "partition_mesh": xi.mesh, "units": "nats per iterate",
           "bound": "point"}
    curves = {"metric_entropy": [(n, w, h, hp) for n, w, h, hp in
                                 zip(est.n_values, est.word_counts, est.entropies,
                                     est.plugin_entropies)]}
    if cfg.has("epsilon_metric"):
        top, res, rows = _entropy_block(m, cfg, workers)
        v = ME.variational_check(est.value, top, cfg["variational_tolerance"])
        out["topological"] = res
        out["variational"] = {"verdict": v.verdict, "caveat": v.caveat, "tolerance": v.tolerance,
                              "h_mu": v.h_mu, "h_top": v.h_top}
        curves["entropy"] = rows
    return out, curves


PIPELINES = {"entropy": run_entropy, "tail": run_tail, "pliss": run_pliss,
             "splitting": run_splitting, "conjecture": run_conjecture,
             "metric_entropy": run_metric_entropy, "profile": run_profile}


def run_experiment(cfg: ExperimentConfig, workers=None) -> Report:
    workers = int(workers if workers is not None else cfg["workers"])
    m = build_map(cfg)
    t0 = time.perf_counter()
    results, curves = PIPELINES[cfg.experiment](m, cfg, workers)
    runtime = time.perf_counter() - t0
    prov = {"version": __version__, "seed": cfg.get("seed"), "runtime_seconds": runtime,
            "workers": workers, "python": platform.python_version(), "numpy": np.__version__,
            "map": m.to_config(), "log_base": "e"}
    return Report(cfg.experiment, cfg.echo(), _plain(results), prov, curves)


def write_report(report: Report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    jpath = out / f"{report.experiment}_report.json"
    jpath.write_text(canonical_json(report.as_dict()) + "\n", encoding="utf-8")
    paths.append(jpath)
    for name, rows in report.curves.items():
        p = out / f"{report.experiment}_{name}.csv"
        with open(p, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS[name])
            for r in rows:
                w.writerow([_fmt(v) for v in r])
        paths.append(p)
    return paths


def schema():
    """The JSON Schema every report validates against."""
    return json.loads(resources.files("entrolab").joinpath("report_schema.json").read_text())


class _StderrHandler(logging.StreamHandler):
    """Writes to whatever ``sys.stderr`` is at emit time (it may be swapped after setup)."""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


def _parser():
    p = argparse.ArgumentParser(prog="entrolab", description="Entropy and hyperbolicity experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./{DEFAULT_OUT})")
    p.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--seed", type=int, help="overrides the config seed")
    return p


def main(argv: Sequence[str] = None) -> int:
    args = _parser().parse_args(argv)
    if not log.handlers:
        h = _StderrHandler()
        h.setFormatter(logging.Formatter("%(asctime)s %(levelname)s %(name)s: %(message)s"))
        log.addHandler(h)
        log.setLevel(logging.INFO)
    try:
        cfg = load_config(args.config, args.experiment)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be >= 0")
            cfg.values["seed"] = args.seed
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    out_dir = args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT
    log.info("running %s from %s", args.experiment, args.config)
    try:
        report = run_experiment(cfg, args.workers)
    except UnavailableError as exc:
        log.error("unavailable: %s", exc)
        return EXIT_UNAVAILABLE
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (EntrolabError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        log.error("runtime error: %s: %s", type(exc).__name__, exc)
        return EXIT_RUNTIME
    try:
        paths = write_report(report, out_dir)
    except OSError as exc:
        log.error("runtime error: cannot write outputs to %s: %s", out_dir, exc)
        return EXIT_RUNTIME
    for p in paths:
        log.info("wrote %s", p)
    log.info("done in %.2f s", report.provenance["runtime_seconds"])
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
