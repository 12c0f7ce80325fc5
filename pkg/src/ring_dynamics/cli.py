"""Command-line front end: scenario simulation, structural verification,
periodicity sweeps, and trajectory analysis.

Subcommands:
    simulate  run one scenario (config file): analytic + numeric trajectory
              files, drift/bounds/deviation summary
    verify    involution residuals, independence rank, and gradient
              agreement at random phase points
    sweep     periodicity classification over an (m, Q) grid
    analyze   closure / planarity / bounds re-audit of a trajectory file

Config files are flat `key = value` text; unknown keys are rejected with
their line number. Trajectory files are CSV (17 significant digits, exact
float round-trip) with `# key=value` metadata lines, or the JSON mirror of
the same columns. Exit codes: 0 ok, 1 validation error, 2 numerical check
failure, 3 singularity abort. RING_DYNAMICS_THREADS caps worker threads.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import analysis, coulomb_orbit, integrals, oscillator_orbit
from .errors import (ConfigError, DomainError, SingularityError,
                     StepLimitError, UnboundedOrbitError)
from .integrate import (IntegratorConfig, Trajectory, drift_report, integrate,
                        sample_orbit)
from .phase import PhasePoint, numerical_gradient
from .potentials import CoulombParams, OscillatorParams, Params

TRAJECTORY_COLUMNS = ("t", "x", "y", "z", "px", "py", "pz",
                      "rho", "phi_unwrapped", "r", "theta",
                      "I1", "I2", "I3", "I4")

_SCENARIO_KEYS = {
    "system", "omega", "coulomb_z", "ring_q", "initial_state",
    "e1", "e2", "m", "t0", "t0_axial", "phi0",
    "energy", "k_total", "beta0",
    "duration_periods", "method", "steps_per_period", "axis_epsilon",
    "max_steps", "label",
}
_SWEEP_KEYS = {
    "system", "omega", "coulomb_z", "energy", "m_values", "q_values",
    "tol", "max_denominator",
}

INVOLUTION_TOL = 1e-8
GRADIENT_TOL = 1e-6
BOUNDS_SLACK = 1e-6
RANK_FRACTION = 0.99


def _fmt(v) -> str:
    return format(float(v), ".17g")


# ---------------------------------------------------------------------------
# config files

def _read_kv(path):
    """Flat key = value file -> {key: (value, line_number)}."""
    entries = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in entries:
            raise ConfigError(f"{path}:{lineno}: duplicate key '{key}' "
                              f"(first set on line {entries[key][1]})")
        entries[key] = (value, lineno)
    return entries


class _KeyView:
    """Typed access to raw entries with line-numbered diagnostics."""

    def __init__(self, path, entries, allowed):
        self.path = path
        self.entries = entries
        unknown = set(entries) - allowed
        if unknown:
            key = sorted(unknown)[0]
            raise ConfigError(f"{path}:{entries[key][1]}: unknown key '{key}'")

    def has(self, key):
        return key in self.entries

    def _raw(self, key, default):
        if key not in self.entries:
            if default is _REQUIRED:
                raise ConfigError(f"{self.path}: missing required key '{key}'")
            return None
        return self.entries[key]

    def string(self, key, default=None, choices=None):
        raw = self._raw(key, default)
        if raw is None:
            value = default
        else:
            value = raw[0]
        if choices is not None and value not in choices:
            where = f":{raw[1]}" if raw else ""
            raise ConfigError(f"{self.path}{where}: '{key}' must be one of "
                              f"{sorted(choices)}, got {value!r}")
        return value

    def number(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return float(raw[0])
        except ValueError:
            raise ConfigError(f"{self.path}:{raw[1]}: '{key}' must be a number, "
                              f"got {raw[0]!r}") from None

    def integer(self, key, default=None):
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return int(raw[0])
        except ValueError:
            raise ConfigError(f"{self.path}:{raw[1]}: '{key}' must be an integer, "
                              f"got {raw[0]!r}") from None

    def numbers(self, key, default=None, count=None):
        raw = self._raw(key, default)
        if raw is None:
            return default
        parts = raw[0].replace(",", " ").split()
        try:
            values = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"{self.path}:{raw[1]}: '{key}' must be a list of "
                              f"numbers, got {raw[0]!r}") from None
        if count is not None and len(values) != count:
            raise ConfigError(f"{self.path}:{raw[1]}: '{key}' needs exactly "
                              f"{count} numbers, got {len(values)}")
        if not values:
            raise ConfigError(f"{self.path}:{raw[1]}: '{key}' must not be empty")
        return values

    def line_of(self, key):
        return self.entries[key][1] if key in self.entries else None


class _Required:
    pass


_REQUIRED = _Required()


@dataclass
class ScenarioConfig:
    path: str
    system: str
    params: Params
    initial_state: Optional[PhasePoint]
    constants: Optional[dict]
    duration_periods: float
    method: str
    steps_per_period: int
    axis_epsilon: float
    max_steps: int
    label: str


def parse_scenario(path) -> ScenarioConfig:
    view = _KeyView(path, _read_kv(path), _SCENARIO_KEYS)
    system = view.string("system", _REQUIRED, choices={"oscillator", "coulomb"})
    ring_q = view.number("ring_q", _REQUIRED)
    try:
        if system == "oscillator":
            if view.has("coulomb_z"):
                raise ConfigError(f"{path}:{view.line_of('coulomb_z')}: "
                                  f"'coulomb_z' is not valid for the oscillator system")
            params = OscillatorParams(view.number("omega", _REQUIRED), ring_q)
        else:
            if view.has("omega"):
                raise ConfigError(f"{path}:{view.line_of('omega')}: "
                                  f"'omega' is not valid for the coulomb system")
            params = CoulombParams(view.number("coulomb_z", _REQUIRED), ring_q)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    state_keys = {"initial_state"}
    const_keys = {"e1", "e2"} if system == "oscillator" else {"energy", "k_total"}
    has_state = view.has("initial_state")
    has_consts = any(view.has(k) for k in const_keys | {"m"})
    if has_state and has_consts:
        raise ConfigError(f"{path}: give either 'initial_state' or orbit "
                          f"constants, not both")
    if not has_state and not has_consts:
        raise ConfigError(f"{path}: missing an initial condition: either "
                          f"'initial_state' or orbit constants "
                          f"({', '.join(sorted(const_keys | {'m'}))})")

    initial_state = None
    constants = None
    if has_state:
        values = view.numbers("initial_state", _REQUIRED, count=6)
        initial_state = PhasePoint.of(*values)
        for key in ("e1", "e2", "energy", "k_total", "m", "t0", "t0_axial",
                    "phi0", "beta0"):
            if view.has(key):
                raise ConfigError(f"{path}:{view.line_of(key)}: '{key}' "
                                  f"conflicts with 'initial_state'")
    else:
        if system == "oscillator":
            constants = {
                "E1": view.number("e1", _REQUIRED),
                "E2": view.number("e2", _REQUIRED),
                "m": view.number("m", _REQUIRED),
                "t0": view.number("t0", 0.0),
                "t0p": view.number("t0_axial", 0.0),
                "phi0": view.number("phi0", 0.0),
            }
            if view.has("beta0"):
                raise ConfigError(f"{path}:{view.line_of('beta0')}: 'beta0' "
                                  f"is not valid for the oscillator system")
        else:
            constants = {
                "E": view.number("energy", _REQUIRED),
                "K": view.number("k_total", _REQUIRED),
                "m": view.number("m", _REQUIRED),
                "t0": view.number("t0", 0.0),
                "beta0": view.number("beta0", 0.5 * math.pi),
                "phi0": view.number("phi0", 0.0),
            }
            if view.has("t0_axial"):
                raise ConfigError(f"{path}:{view.line_of('t0_axial')}: "
                                  f"'t0_axial' is not valid for the coulomb system")

    duration = view.number("duration_periods", _REQUIRED)
    if not duration > 0.0:
        raise ConfigError(f"{path}:{view.line_of('duration_periods')}: "
                          f"'duration_periods' must be positive, got {duration}")
    method = view.string("method", "rk4", choices={"rk4", "leapfrog"})
    steps = view.integer("steps_per_period", 10_000)
    if steps < 1:
        raise ConfigError(f"{path}:{view.line_of('steps_per_period')}: "
                          f"'steps_per_period' must be >= 1, got {steps}")
    axis_epsilon = view.number("axis_epsilon", 1e-8)
    max_steps = view.integer("max_steps", 2_000_000)
    label = view.string("label", "scenario")
    return ScenarioConfig(str(path), system, params, initial_state, constants,
                          duration, method, steps, axis_epsilon, max_steps, label)


@dataclass
class SweepConfig:
    path: str
    system: str
    base_period: float
    m_values: list
    q_values: list
    tol: float
    max_denominator: int


def parse_sweep(path) -> SweepConfig:
    view = _KeyView(path, _read_kv(path), _SWEEP_KEYS)
    system = view.string("system", _REQUIRED, choices={"oscillator", "coulomb"})
    if system == "oscillator":
        omega = view.number("omega", _REQUIRED)
        if not omega > 0.0:
            raise ConfigError(f"{path}:{view.line_of('omega')}: 'omega' must "
                              f"be positive, got {omega}")
        base_period = 2.0 * math.pi / omega
    else:
        z = view.number("coulomb_z", _REQUIRED)
        energy = view.number("energy", _REQUIRED)
        if not z > 0.0:
            raise ConfigError(f"{path}:{view.line_of('coulomb_z')}: "
                              f"'coulomb_z' must be positive, got {z}")
        if not energy < 0.0:
            raise ConfigError(f"{path}:{view.line_of('energy')}: 'energy' must "
                              f"be negative for bounded Coulomb orbits, got {energy}")
        base_period = 2.0 * math.pi * z * (-2.0 * energy) ** -1.5
    m_values = view.numbers("m_values", _REQUIRED)
    q_values = view.numbers("q_values", _REQUIRED)
    for q in q_values:
        if q < 0.0:
            raise ConfigError(f"{path}:{view.line_of('q_values')}: ring "
                              f"strengths must be >= 0, got {q}")
    tol = view.number("tol", 1e-12)
    max_den = view.integer("max_denominator", 10 ** 6)
    return SweepConfig(str(path), system, base_period, m_values, q_values,
                       tol, max_den)


# ---------------------------------------------------------------------------
# trajectory serialization

def _metadata(traj: Trajectory, extra=None):
    params = traj.params
    meta = {"system": "oscillator" if isinstance(params, OscillatorParams) else "coulomb"}
    if isinstance(params, OscillatorParams):
        meta["omega"] = _fmt(params.omega)
    else:
        meta["Z"] = _fmt(params.Z)
    meta["Q"] = _fmt(params.Q)
    meta.update({k: str(v) for k, v in (extra or {}).items()})
    return meta


def _params_from_metadata(meta, where):
    system = meta.get("system")
    try:
        if system == "oscillator":
            return OscillatorParams(float(meta["omega"]), float(meta["Q"]))
        if system == "coulomb":
            return CoulombParams(float(meta["Z"]), float(meta["Q"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"{where}: bad trajectory metadata: {exc}") from exc
    raise ConfigError(f"{where}: missing or unknown system in trajectory metadata")


def _trajectory_rows(traj: Trajectory):
    cols = traj.integrals()
    for i in range(len(traj)):
        yield (traj.t[i], *traj.q[i], *traj.p[i], traj.rho[i], traj.phi[i],
               traj.r[i], traj.theta[i], *cols[i])


def write_trajectory_csv(path, traj: Trajectory, extra=None):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key, value in _metadata(traj, extra).items():
            fh.write(f"# {key}={value}\n")
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for row in _trajectory_rows(traj):
            writer.writerow([_fmt(v) for v in row])


def write_trajectory_json(path, traj: Trajectory, extra=None):
    payload = {
        "metadata": _metadata(traj, extra),
        "columns": list(TRAJECTORY_COLUMNS),
        "rows": [[float(v) for v in row] for row in _trajectory_rows(traj)],
    }
    _write_json(path, payload)


def read_trajectory(path) -> Tuple[Trajectory, dict]:
    """Load a trajectory file (CSV or JSON); derived columns are recomputed
    from (t, q, p), which round-trips exactly at 17 significant digits."""
    path = str(path)
    if path.endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        meta = payload.get("metadata", {})
        rows = np.array(payload["rows"], dtype=float)
    else:
        meta = {}
        data_rows = []
        with open(path, "r", encoding="utf-8") as fh:
            header_seen = False
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                if line.startswith("#"):
                    body = line.lstrip("#").strip()
                    if "=" in body:
                        key, value = body.split("=", 1)
                        meta[key.strip()] = value.strip()
                    continue
                if not header_seen:
                    if tuple(line.split(",")) != TRAJECTORY_COLUMNS:
                        raise ConfigError(f"{path}: unexpected column header")
                    header_seen = True
                    continue
                data_rows.append([float(v) for v in line.split(",")])
        rows = np.array(data_rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(TRAJECTORY_COLUMNS) or not len(rows):
        raise ConfigError(f"{path}: malformed trajectory data")
    params = _params_from_metadata(meta, path)
    traj = Trajectory(params, rows[:, 0].copy(), rows[:, 1:4].copy(),
                      rows[:, 4:7].copy())
    return traj, meta


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# shared helpers

def _worker_count(n_tasks: int) -> int:
    raw = os.environ.get("RING_DYNAMICS_THREADS", "")
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ConfigError(
                f"RING_DYNAMICS_THREADS must be an integer, got {raw!r}") from None
        cap = max(1, cap)
    else:
        cap = min(8, os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


def _parallel_map(fn, items):
    items = list(items)
    workers = _worker_count(len(items))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _orbit_of(params: Params, pt: PhasePoint, t: float = 0.0):
    if isinstance(params, OscillatorParams):
        return oscillator_orbit.orbit_from_state(params, pt, t)
    return coulomb_orbit.orbit_from_state(params, pt, t)


def _base_period(orbit) -> float:
    if isinstance(orbit, oscillator_orbit.OscillatorOrbit):
        return oscillator_orbit.trap_period(orbit.params)
    return coulomb_orbit.kepler_period(orbit)


def _orbit_scales(orbit):
    state, length, momentum = analysis._state_and_scales(orbit)
    return length, momentum


def _max_deviation(numeric: Trajectory, analytic: Trajectory, orbit) -> float:
    length, momentum = _orbit_scales(orbit)
    dq = np.linalg.norm(numeric.q - analytic.q, axis=1) / length
    dp = np.linalg.norm(numeric.p - analytic.p, axis=1) / momentum
    return float(np.max(np.sqrt(dq * dq + dp * dp)))


def _verdict_dict(verdict: analysis.PeriodicityVerdict) -> dict:
    # The m = 0 planar case has an infinite ratio; serialize it as None
    # (strict JSON has no Infinity) -- planar_m0 carries the information.
    ratio = verdict.ratio
    if ratio is not None and not math.isfinite(ratio):
        ratio = None
    return {
        "kind": verdict.kind,
        "ratio": ratio,
        "k1": verdict.k1,
        "k2": verdict.k2,
        "T": verdict.T,
        "best_num": verdict.best_num,
        "best_den": verdict.best_den,
        "approx_error": verdict.approx_error,
        "planar_m0": verdict.planar_m0,
    }


def _orbit_dict(orbit) -> dict:
    if isinstance(orbit, oscillator_orbit.OscillatorOrbit):
        return {"E1": orbit.E1, "E2": orbit.E2, "m": orbit.m,
                "M_abs": orbit.M_abs, "rho1": orbit.rho1, "rho2": orbit.rho2,
                "z0": orbit.z0, "t0": orbit.t0, "t0_axial": orbit.t0p,
                "phi0": orbit.phi0}
    return {"E": orbit.E, "K": orbit.K, "m": orbit.m, "M_abs": orbit.M_abs,
            "r1": orbit.r1, "r2": orbit.r2, "theta0": orbit.theta0,
            "t0": orbit.t0, "beta0": orbit.beta0, "phi0": orbit.phi0}


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    cfg = parse_scenario(args.config)
    params = cfg.params
    try:
        if cfg.initial_state is not None:
            pt0 = cfg.initial_state
            orbit = _orbit_of(params, pt0, 0.0)
        elif cfg.system == "oscillator":
            orbit = oscillator_orbit.orbit_from_constants(params, **cfg.constants)
            pt0 = oscillator_orbit.state_of_t(orbit, 0.0)
        else:
            orbit = coulomb_orbit.orbit_from_constants(params, **cfg.constants)
            pt0 = coulomb_orbit.state_of_t(orbit, 0.0)
    except UnboundedOrbitError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 1
    except (DomainError, ValueError) as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 1

    base = _base_period(orbit)
    step = base / cfg.steps_per_period
    n_steps = max(1, round(cfg.duration_periods * cfg.steps_per_period))
    t_end = n_steps * step
    config = IntegratorConfig(method=cfg.method, step=step,
                              axis_epsilon=cfg.axis_epsilon,
                              max_steps=cfg.max_steps)
    try:
        numeric = integrate(params, pt0, (0.0, t_end), config)
    except SingularityError as exc:
        print(f"singularity abort at t={exc.t}: {exc}", file=sys.stderr)
        return 3
    except StepLimitError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return 1
    analytic = sample_orbit(orbit, numeric.t)

    drift = drift_report(numeric)
    bounds_numeric = analysis.bounds_audit(numeric, orbit, slack=BOUNDS_SLACK)
    bounds_analytic = analysis.bounds_audit(analytic, orbit, slack=1e-10)
    deviation = _max_deviation(numeric, analytic, orbit)
    verdict = analysis.classify_periodicity(orbit.m, params.Q, base)

    closure = None
    if verdict.kind == analysis.PERIODIC and verdict.T <= t_end:
        closure = {
            "T": verdict.T,
            "analytic": analysis.closure_distance(orbit, verdict.T, 0.0),
            "numeric": analysis.closure_distance(numeric, verdict.T, 0.0),
        }

    os.makedirs(args.output, exist_ok=True)
    ext = args.format
    write = write_trajectory_json if ext == "json" else write_trajectory_csv
    extra = {"method": cfg.method, "step": _fmt(step), "label": cfg.label}
    numeric_path = os.path.join(args.output, f"{cfg.label}_numeric.{ext}")
    analytic_path = os.path.join(args.output, f"{cfg.label}_analytic.{ext}")
    write(numeric_path, numeric, extra)
    write(analytic_path, analytic, extra)

    summary = {
        "label": cfg.label,
        "system": cfg.system,
        "params": _metadata(numeric),
        "orbit": _orbit_dict(orbit),
        "base_period": base,
        "duration_periods": cfg.duration_periods,
        "method": cfg.method,
        "step": step,
        "samples": len(numeric),
        "periodicity": _verdict_dict(verdict),
        "drift": drift,
        "max_analytic_numeric_deviation": deviation,
        "bounds_numeric": {"slack": BOUNDS_SLACK, "violations": len(bounds_numeric)},
        "bounds_analytic": {"slack": 1e-10, "violations": len(bounds_analytic)},
        "closure": closure,
        "files": {"numeric": numeric_path, "analytic": analytic_path},
    }
    summary_path = os.path.join(args.output, f"{cfg.label}_summary.json")
    _write_json(summary_path, summary)

    print(f"scenario '{cfg.label}': {cfg.system}, {len(numeric)} samples, "
          f"method={cfg.method}")
    print(f"  periodicity: {verdict.kind}"
          + (f" (k1={verdict.k1}, k2={verdict.k2}, T={verdict.T:.6g})"
             if verdict.kind == analysis.PERIODIC else
             f" (best {verdict.best_num}/{verdict.best_den}, "
             f"error {verdict.approx_error:.3g})"))
    print(f"  max integral drift: {max(drift.values()):.3e}")
    print(f"  max analytic-numeric deviation: {deviation:.3e}")
    print(f"  bounds violations (numeric, slack {BOUNDS_SLACK:g}): "
          f"{len(bounds_numeric)}")
    if closure is not None:
        print(f"  closure at T={closure['T']:.6g}: analytic "
              f"{closure['analytic']:.3e}, numeric {closure['numeric']:.3e}")
    print(f"  wrote {numeric_path}, {analytic_path}, {summary_path}")

    checks_ok = len(bounds_numeric) == 0 and math.isfinite(deviation)
    return 0 if checks_ok else 2


# ---------------------------------------------------------------------------
# verify

def _random_point(seed_parts) -> PhasePoint:
    rng = np.random.default_rng(seed_parts)
    rho = rng.uniform(0.6, 1.6)
    phi = rng.uniform(0.0, 2.0 * math.pi)
    z = rng.uniform(-1.2, 1.2)
    mom = rng.uniform(-1.2, 1.2, 3)
    return PhasePoint.of(rho * math.cos(phi), rho * math.sin(phi), z, *mom)


def cmd_verify(args) -> int:
    if args.system == "oscillator":
        params = OscillatorParams(args.omega, args.ring_q)
    else:
        params = CoulombParams(args.coulomb_z, args.ring_q)
    count = args.count
    set_ids = integrals.available_sets(params)
    functions = integrals.integral_functions(params)

    def check_point(i):
        pt = _random_point((args.seed, i))
        residuals = {
            set_id: max(abs(v) for v in
                        integrals.involution_residuals(params, set_id, pt))
            for set_id in set_ids
        }
        rank = integrals.independence_rank(params, pt)
        grad_err = 0.0
        for fn in functions:
            ana = fn.gradient(pt)
            num = numerical_gradient(fn, pt)
            scale = max(1.0, float(np.linalg.norm(ana)))
            grad_err = max(grad_err, float(np.linalg.norm(num - ana)) / scale)
        return residuals, rank, grad_err

    results = _parallel_map(check_point, range(count))
    worst_residuals = {set_id: max(res[0][set_id] for res in results)
                       for set_id in set_ids}
    rank4 = sum(1 for res in results if res[1] == 4)
    over_rank = sum(1 for res in results if res[1] > 4)
    worst_grad = max(res[2] for res in results)
    min_rank4 = math.ceil(RANK_FRACTION * count)

    involution_pass = all(v < INVOLUTION_TOL for v in worst_residuals.values())
    rank_pass = rank4 >= min_rank4 and over_rank == 0
    grad_pass = worst_grad < GRADIENT_TOL
    ok = involution_pass and rank_pass and grad_pass

    report = {
        "system": args.system,
        "params": {"Q": params.Q,
                   **({"omega": params.omega} if args.system == "oscillator"
                      else {"Z": params.Z})},
        "count": count,
        "seed": args.seed,
        "involution": {set_id: {"max_abs_residual": worst_residuals[set_id],
                                "tolerance": INVOLUTION_TOL}
                       for set_id in set_ids},
        "independence_rank": {"rank4_points": rank4, "points": count,
                              "min_required": min_rank4,
                              "rank_above_4": over_rank},
        "gradient_agreement": {"max_rel_error": worst_grad,
                               "tolerance": GRADIENT_TOL},
        "pass": ok,
    }
    for set_id in set_ids:
        status = "PASS" if worst_residuals[set_id] < INVOLUTION_TOL else "FAIL"
        print(f"{status} involution[{set_id}]: max |bracket| = "
              f"{worst_residuals[set_id]:.3e} (tol {INVOLUTION_TOL:g})")
    print(f"{'PASS' if rank_pass else 'FAIL'} independence rank: {rank4}/{count} "
          f"points at rank 4 (need {min_rank4}), {over_rank} above 4")
    print(f"{'PASS' if grad_pass else 'FAIL'} gradient agreement: max rel err "
          f"{worst_grad:.3e} (tol {GRADIENT_TOL:g})")
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        path = os.path.join(args.output, "verify.json")
        _write_json(path, report)
        print(f"wrote {path}")
    return 0 if ok else 2


# ---------------------------------------------------------------------------
# sweep

def cmd_sweep(args) -> int:
    cfg = parse_sweep(args.config)

    def classify(cell):
        q, m = cell
        verdict = analysis.classify_periodicity(
            m, q, cfg.base_period, tol=cfg.tol,
            max_denominator=cfg.max_denominator)
        case = "planar-m0" if verdict.planar_m0 else "generic"
        return {"system": cfg.system, "m": m, "Q": q, **_verdict_dict(verdict),
                "T_over_base": (None if verdict.T is None
                                else verdict.T / cfg.base_period),
                "case": case}

    cells = [(q, m) for q in cfg.q_values for m in cfg.m_values]
    rows = _parallel_map(classify, cells)

    os.makedirs(args.output, exist_ok=True)
    columns = ("system", "m", "Q", "kind", "ratio", "k1", "k2", "T",
               "T_over_base", "best_num", "best_den", "approx_error", "case")
    if args.format == "json":
        path = os.path.join(args.output, "sweep.json")
        _write_json(path, {"base_period": cfg.base_period, "rows": rows})
    else:
        path = os.path.join(args.output, "sweep.csv")
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(["" if row[c] is None
                                 else (_fmt(row[c]) if isinstance(row[c], float)
                                       else row[c])
                                 for c in columns])
    periodic = sum(1 for r in rows if r["kind"] == analysis.PERIODIC)
    print(f"sweep: {len(rows)} grid points, {periodic} periodic, "
          f"{len(rows) - periodic} quasi-periodic")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------
# analyze

def cmd_analyze(args) -> int:
    traj, meta = read_trajectory(args.input)
    params = traj.params
    plan = analysis.planarity(traj)
    report = {
        "input": str(args.input),
        "samples": len(traj),
        "span": [float(traj.t[0]), float(traj.t[-1])],
        "params": {k: meta[k] for k in ("system", "omega", "Z", "Q") if k in meta},
        "planarity": {
            "planar": plan.planar,
            "normal": None if plan.normal is None else list(plan.normal),
            "max_offset": plan.max_offset,
            "scale": plan.scale,
            "max_torsion": (None if math.isnan(plan.max_torsion)
                            else plan.max_torsion),
            "collinear": plan.collinear,
        },
        "drift": drift_report(traj),
    }

    violations = []
    try:
        orbit = _orbit_of(params, traj.state(0), float(traj.t[0]))
    except UnboundedOrbitError as exc:
        report["orbit"] = None
        report["note"] = f"unbounded motion: {exc}"
        orbit = None
    if orbit is not None:
        base = _base_period(orbit)
        verdict = analysis.classify_periodicity(orbit.m, params.Q, base)
        violations = analysis.bounds_audit(traj, orbit, slack=BOUNDS_SLACK)
        report["orbit"] = _orbit_dict(orbit)
        report["base_period"] = base
        report["periodicity"] = _verdict_dict(verdict)
        report["bounds"] = {"slack": BOUNDS_SLACK, "violations": len(violations)}
        closure_T = args.closure_period
        if closure_T is None and args.closure_periods is not None:
            closure_T = args.closure_periods * base
        if closure_T is None and verdict.kind == analysis.PERIODIC:
            closure_T = verdict.T
        if closure_T is not None:
            if traj.t[0] + closure_T <= traj.t[-1]:
                report["closure"] = {
                    "T": closure_T,
                    "trajectory": analysis.closure_distance(traj, closure_T,
                                                            float(traj.t[0])),
                    "analytic": analysis.closure_distance(orbit, closure_T,
                                                          float(traj.t[0])),
                }
            else:
                report["closure"] = {"T": closure_T,
                                     "note": "span too short for closure test"}

    print(f"analyze {args.input}: {len(traj)} samples")
    print(f"  planar: {plan.planar} (max offset {plan.max_offset:.3e} over "
          f"scale {plan.scale:.3g})")
    print(f"  max integral drift: {max(report['drift'].values()):.3e}")
    if orbit is not None:
        print(f"  periodicity: {report['periodicity']['kind']}")
        print(f"  bounds violations: {report['bounds']['violations']}")
    if "closure" in report and "trajectory" in report.get("closure", {}):
        print(f"  closure at T={report['closure']['T']:.6g}: "
              f"{report['closure']['trajectory']:.3e}")
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        path = os.path.join(args.output, "analyze.json")
        _write_json(path, report)
        print(f"wrote {path}")
    return 0 if not violations else 2


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ring-dynamics",
        description="Classical dynamics of the two super-integrable "
                    "ring-shaped potentials")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario config")
    sim.add_argument("--config", required=True)
    sim.add_argument("--output", default=".")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.set_defaults(func=cmd_simulate)

    ver = sub.add_parser("verify", help="structural checks at random points")
    ver.add_argument("--system", choices=("oscillator", "coulomb"),
                     required=True)
    ver.add_argument("--omega", type=float, default=1.0)
    ver.add_argument("--coulomb-z", type=float, default=1.0)
    ver.add_argument("--ring-q", type=float, default=1.0)
    ver.add_argument("--count", type=int, default=100)
    ver.add_argument("--seed", type=int, default=1)
    ver.add_argument("--output", default=None)
    ver.set_defaults(func=cmd_verify)

    swp = sub.add_parser("sweep", help="periodicity classification grid")
    swp.add_argument("--config", required=True)
    swp.add_argument("--output", default=".")
    swp.add_argument("--format", choices=("csv", "json"), default="csv")
    swp.set_defaults(func=cmd_sweep)

    ana = sub.add_parser("analyze", help="closure/planarity of a trajectory file")
    ana.add_argument("--input", required=True)
    ana.add_argument("--closure-period", type=float, default=None)
    ana.add_argument("--closure-periods", type=float, default=None)
    ana.add_argument("--output", default=None)
    ana.set_defaults(func=cmd_analyze)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (DomainError, UnboundedOrbitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SingularityError as exc:
        print(f"singularity abort: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
