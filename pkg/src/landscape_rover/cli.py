"""
``rover`` command line: one experiment per invocation.

    rover <subcommand> --config config.json [--seed N] [--noise-sigma S] [--out-dir P]

Outputs (``trajectory.csv``, ``hessian_*.json``, ``scan_*.csv``) and a
``manifest.json`` land in the output directory. The same config and seed
reproduce every byte.

Exit status: 0 on success (topology warnings included), 2 for an invalid
config, 3 when the measurement budget runs out (partial outputs kept).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config
from .estimators import gradient_central_diff, gradient_noise_floor, hessian_least_squares
from .instrument import MEASUREMENT_COST, PRNG_ALGORITHM, BudgetExhausted, Spectrometer
from .output import TrajectoryCSV, read_trajectory_csv, write_json_atomic, write_scan_csv
from .rover import (run_ascent_descent, run_gradient_search, run_levelset_distance,
                    run_levelset_energy, run_top_drive)
from .spectra import classify_critical_point, eigendecompose, eigenvector_scan
from .spin import analytic_hessian, dc_minimum, dc_optimum, objective

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3

_START_DEFAULTS = {
    # experiment: (half width of the random box, J window for the start or None)
    "ascend": (20.0, None),
    "descend": (20.0, None),
    "levelset-energy": (30.0, [0.5, 0.7]),
    "levelset-distance": (20.0, [0.4, 0.6]),
}


class Session:
    """State shared by one CLI run: config, instrument, collected results."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.instrument = Spectrometer(cfg.system(), cfg.noise(), cfg.n_intervals,
                                       cfg.total_time, cfg.budget)
        self.estimator = cfg.estimator()
        self.rover = cfg.rover()
        self.out_dir = cfg.out_dir
        self.summary: dict = {}
        self.warnings: list[str] = []
        self.outputs: list[str] = []
        self.partial = False

    @property
    def dim(self) -> int:
        return self.instrument.dim

    def path(self, name: str) -> str:
        self.outputs.append(name)
        return os.path.join(self.out_dir, name)

    def absorb(self, traj) -> None:
        self.warnings.extend(traj.warnings)
        if traj.budget_exhausted:
            self.partial = True

    def grad_threshold(self) -> float:
        floor = gradient_noise_floor(self.instrument.sigma, self.estimator.d, self.dim)
        return self.rover.grad_floor_factor * max(floor, self.rover.grad_floor_min)

    # -- control selection -------------------------------------------------

    def start_control(self, experiment: str) -> np.ndarray:
        cfg = self.cfg
        if cfg.x_init is not None:
            return np.array(cfg.x_init)
        half_width, window = _START_DEFAULTS.get(experiment, (20.0, None))
        half_width = cfg.init_half_width if cfg.init_half_width is not None else half_width
        window = cfg.start_j_window if cfg.start_j_window is not None else window
        rng = self.instrument.derived_rng(f"start-{experiment}")
        for _ in range(10_000):
            x = rng.uniform(-half_width, half_width, self.dim)
            if window is None:
                return x
            j = self.instrument.measure(x).value / self.instrument.j_max
            if window[0] <= j <= window[1]:
                return x
        raise ConfigError(f"no start found with J in {window}")

    def location(self) -> np.ndarray:
        at = self.cfg.at
        if isinstance(at, list):
            if len(at) != self.dim:
                raise ConfigError(f"'at' needs {self.dim} entries")
            return np.array(at)
        kw = dict(n_intervals=self.cfg.n_intervals, total_time=self.cfg.total_time,
                  params=self.cfg.system())
        if at == "optimal":
            return dc_optimum(**kw).x.copy()
        if at == "minimum":
            return dc_minimum(**kw).x.copy()
        if at in ("ascent-max", "descent-min"):
            name = "ascent" if at == "ascent-max" else "descent"
            traj = run_ascent_descent(self.instrument, self.start_control("ascend"),
                                      self.rover, self.estimator, directions=(name,))[name]
            self.absorb(traj)
            return traj.final.x.copy()
        raise ConfigError(f"unknown location {at!r}")

    # -- shared probes -----------------------------------------------------

    def probe(self, x: np.ndarray, label: str, extra: dict | None = None):
        est = hessian_least_squares(self.instrument, x, self.estimator.n_samples,
                                    self.estimator.delta)
        ge = gradient_central_diff(self.instrument, x, self.estimator.d)
        spec = eigendecompose(est.H, self.rover.null_rel_tol)
        verdict = classify_critical_point(spec, ge.norm, self.grad_threshold())
        doc = spec.to_dict()
        doc.update(verdict.to_dict())
        doc.update({
            "x": x,
            "j0": est.j0,
            "grad_norm": ge.norm,
            "grad_floor": self.grad_threshold(),
            "estimate": est.to_dict(),
        })
        doc.update(extra or {})
        write_json_atomic(self.path(f"hessian_{label}.json"), doc)
        return est, spec, verdict


# -- subcommands ---------------------------------------------------------------

def _cmd_gradient(session: Session, sign: int) -> None:
    name = "ascend" if sign > 0 else "descend"
    x0 = session.start_control(name)
    with TrajectoryCSV(session.path("trajectory.csv"), session.dim) as sink:
        traj = run_gradient_search(session.instrument, x0, session.rover, session.estimator,
                                   sign, sink)
    session.absorb(traj)
    session.summary.update({
        "iterations": len(traj.records),
        "converged": traj.converged,
        "final_J": traj.final.j / session.instrument.j_max if traj.records else None,
        "final_grad_norm": traj.final.grad_norm if traj.records else None,
        "grad_threshold": session.grad_threshold(),
        "final_rel_distance": traj.final.rel_distance if traj.records else None,
    })


def _sweep_candidates(session: Session) -> list[dict]:
    cfg = session.cfg
    if cfg.trajectory:
        rows = []
        for p in cfg.trajectory:
            rows.extend(read_trajectory_csv(p))
        return rows
    x0 = session.start_control("ascend")
    sinks = {n: TrajectoryCSV(session.path(f"trajectory_{n}.csv"), session.dim)
             for n in ("ascent", "descent")}
    try:
        trajs = run_ascent_descent(session.instrument, x0, session.rover, session.estimator,
                                   sinks=sinks)
    finally:
        for s in sinks.values():
            s.close()
    rows = []
    for traj in trajs.values():
        session.absorb(traj)
        rows.extend({"iter": r.iter, "J": r.j, "x": r.x} for r in traj.records)
    return rows


def _cmd_hessian_probe(session: Session) -> None:
    cfg = session.cfg
    if not cfg.sweep:
        x = session.location()
        label = cfg.at if isinstance(cfg.at, str) else "point"
        _, spec, verdict = session.probe(x, label)
        session.summary.update({"n_pos": spec.n_pos, "n_neg": spec.n_neg,
                                "n_null": spec.n_null, "label": verdict.label})
        return
    rows = _sweep_candidates(session)
    if session.partial:
        return
    if not rows:
        raise ConfigError("sweep needs at least one trajectory row")
    jmax = session.instrument.j_max
    heights = []
    for target in cfg.sweep_heights:
        best = min(rows, key=lambda r: abs(r["J"] / jmax - target))
        label = f"J{target:+.2f}"
        _, spec, verdict = session.probe(best["x"], label,
                                         {"target_height": target, "source_J": best["J"]})
        heights.append({"target": target, "J": best["J"] / jmax, "n_pos": spec.n_pos,
                        "n_neg": spec.n_neg, "n_null": spec.n_null, "label": verdict.label})
    session.summary["heights"] = heights


def _cmd_scan(session: Session) -> None:
    cfg = session.cfg
    x0 = session.location()
    _, spec, _ = session.probe(x0, "scan-origin")
    scans = []
    for i in range(spec.dim):
        scan = eigenvector_scan(session.instrument, x0, spec.eigenvectors[:, i],
                                cfg.scan_max_rel_distance, cfg.scan_points)
        write_scan_csv(session.path(f"scan_v{i + 1}.csv"), scan)
        scans.append({
            "eigenvalue": spec.eigenvalues[i],
            "null": bool(spec.null_mask[i]),
            "a": scan.coeffs[0], "b": scan.coeffs[1], "c": scan.coeffs[2],
            "r2": scan.r2,
            "max_drop": scan.max_drop,
            "fitted_drop_10pct": scan.fitted_drop(0.1),
        })
    session.summary.update({"n_neg": spec.n_neg, "n_null": spec.n_null, "scans": scans})


def _cmd_drive_top(session: Session) -> None:
    cfg = session.cfg
    x_top = session.location()
    h = np.ones(session.dim) if cfg.h_free is None else np.array(cfg.h_free)
    n_iter = cfg.n_iter if cfg.n_iter is not None else 10
    with TrajectoryCSV(session.path("trajectory.csv"), session.dim) as sink:
        traj = run_top_drive(session.instrument, x_top, h, n_iter, session.rover, sink)
    session.absorb(traj)
    if traj.records:
        probes = [r for r in traj.records if r.event == "hessian-probe"]
        session.summary.update({
            "iterations": len(probes),
            "final_J": traj.final.j / session.instrument.j_max,
            "min_J": float(min(traj.j)) / session.instrument.j_max,
            "final_rel_distance": traj.final.rel_distance,
            "n_neg_per_iteration": [r.info["n_neg"] for r in probes],
            "topology_violations": sum("topology" in w for w in traj.warnings),
        })


def _cmd_levelset_energy(session: Session) -> None:
    cfg = session.cfg
    x0 = session.start_control("levelset-energy")
    n_iter = cfg.n_iter if cfg.n_iter is not None else 30
    with TrajectoryCSV(session.path("trajectory.csv"), session.dim) as sink:
        traj = run_levelset_energy(session.instrument, x0, n_iter, session.rover,
                                   session.estimator, sink)
    session.absorb(traj)
    if traj.records:
        e0 = traj.records[0].info["energy"]
        session.summary.update({
            "J0": traj.records[0].j / session.instrument.j_max,
            "final_J": traj.final.j / session.instrument.j_max,
            "max_abs_J_drift": float(np.max(np.abs(traj.j - traj.j[0]))),
            "energy_ratio": traj.final.info["energy"] / e0,
        })


def _cmd_levelset_distance(session: Session) -> None:
    cfg = session.cfg
    x0 = session.start_control("levelset-distance")
    with TrajectoryCSV(session.path("trajectory.csv"), session.dim) as sink:
        traj = run_levelset_distance(session.instrument, x0, cfg.target_rel_distance,
                                     session.rover, session.estimator, sink=sink)
    session.absorb(traj)
    if traj.failed:
        session.warnings.append("level-set distance run failed")
    if traj.records:
        session.summary.update({
            "J0": traj.records[0].j / session.instrument.j_max,
            "final_J": traj.final.j / session.instrument.j_max,
            "final_rel_distance": traj.final.rel_distance,
            "correction_count": traj.corrections,
            "iterations": len(traj.records),
            "reached_target": traj.converged,
        })


def _cmd_calibrate(session: Session) -> None:
    cfg = session.cfg
    params = cfg.system()
    top = dc_optimum(cfg.n_intervals, cfg.total_time, params)
    sigma = session.instrument.sigma
    per_component = sigma / (np.sqrt(2) * session.estimator.d)
    evals = np.linalg.eigvalsh(analytic_hessian(top, params))[::-1]
    measured = session.instrument.measure(top).value
    info = {
        "calib_k": params.calib_k,
        "dc_90deg_amplitude": top.x[-1],
        "dc_optimum_J_noiseless": objective(top, params),
        "dc_optimum_J_measured": measured,
        "gradient_noise_per_component": per_component,
        "gradient_noise_floor": gradient_noise_floor(sigma, session.estimator.d, session.dim),
        "convergence_threshold": session.grad_threshold(),
        "optimum_hessian_eigenvalues": evals,
    }
    session.summary.update(info)
    for k, v in info.items():
        if isinstance(v, np.ndarray):
            v = np.array2string(v, precision=4)
        print(f"{k:32s} {v}")


COMMANDS = {
    "ascend": lambda s: _cmd_gradient(s, +1),
    "descend": lambda s: _cmd_gradient(s, -1),
    "hessian-probe": _cmd_hessian_probe,
    "scan-eigenvectors": _cmd_scan,
    "drive-top": _cmd_drive_top,
    "levelset-energy": _cmd_levelset_energy,
    "levelset-distance": _cmd_levelset_distance,
    "calibrate": _cmd_calibrate,
}


def _manifest(session: Session) -> dict:
    clock = session.instrument.clock
    return {
        "artifact": {"name": "landscape_rover", "version": __version__},
        "experiment": session.cfg.experiment,
        "config": session.cfg.to_dict(),
        "prng": {"algorithm": PRNG_ALGORITHM, "seed": session.cfg.seed},
        "measurement_count": clock.measurement_count,
        "measurement_cost_s": MEASUREMENT_COST,
        "total_lab_time": clock.total_lab_time,
        "partial": session.partial,
        "warnings": session.warnings,
        "warning_count": len(session.warnings),
        "summary": session.summary,
        "outputs": sorted(set(session.outputs)),
    }


def run(config_path: str | None, overrides: dict | None = None) -> int:
    """Execute one experiment; returns the process exit status."""
    try:
        cfg = load_config(config_path, overrides)
    except ConfigError as exc:
        print(f"rover: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(cfg.out_dir, exist_ok=True)
    session = Session(cfg)
    status = EXIT_OK
    try:
        COMMANDS[cfg.experiment](session)
    except BudgetExhausted as exc:
        session.partial = True
        session.warnings.append(str(exc))
    except ConfigError as exc:
        print(f"rover: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if session.partial:
        status = EXIT_BUDGET
        print("rover: measurement budget exhausted; partial outputs kept", file=sys.stderr)
    write_json_atomic(os.path.join(cfg.out_dir, "manifest.json"), _manifest(session))
    return status


def _parse_set(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rover",
                                     description="Simulated NMR control-landscape experiments.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--noise-sigma", type=float, dest="noise_sigma",
                       help="noise standard deviation in units of j_max")
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--budget", type=int, help="maximum number of measurements")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", dest="set_items",
                       help="override any config key (value parsed as JSON)")
        if name in ("hessian-probe", "scan-eigenvectors", "drive-top"):
            p.add_argument("--at", help="optimal, minimum, ascent-max, descent-min "
                                        "or a JSON list of controls")
        if name == "hessian-probe":
            p.add_argument("--sweep", action="store_true", default=None,
                           help="probe five heights along an ascent/descent trajectory")
            p.add_argument("--trajectory", action="append",
                           help="trajectory CSV to pick sweep points from (repeatable)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = _parse_set(args.set_items)
    except ConfigError as exc:
        print(f"rover: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    overrides["experiment"] = args.experiment
    for key in ("seed", "noise_sigma", "out_dir", "budget", "sweep", "trajectory"):
        value = getattr(args, key, None)
        if value is not None:
            overrides[key] = value
    at = getattr(args, "at", None)
    if at is not None:
        overrides["at"] = json.loads(at) if at.lstrip().startswith("[") else at
    return run(args.config, overrides)


if __name__ == "__main__":
    sys.exit(main())
