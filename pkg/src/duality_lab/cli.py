"""duality-lab command line: JSON scenario in, CSV series and JSON summary out.

    duality-lab <command> --config FILE --out-dir DIR [--seed N] [--engine full|symmetric|auto]

Commands: duality, scaling, lr, covariance, torsion, expansive.  Each run
writes ``<name>_<command>.csv`` and ``<name>_<command>.json`` into the
output directory.  The CSV depends only on the resolved scenario, so equal
inputs give byte-identical files; wall time is reported in the JSON only.

Exit codes: 0 success, 1 bound violated, 2 configuration error,
3 numerical failure.
"""

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import duality as du
from .meanfield import UndefinedFrequency, measure_torsion
from .pauli import InvalidInput
from .schedules import OutOfRange, Schedule

log = logging.getLogger("duality_lab")

COMMANDS = ("duality", "scaling", "lr", "covariance", "torsion", "expansive")
EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

# command-specific parameters and their defaults
PARAM_DEFAULTS = {
    "duality": {},
    "scaling": {"t_fixed": None},
    "lr": {"k_list": [1, 2], "t_list": None, "samples": 200},
    "covariance": {"t_list": None, "samples": 500},
    "torsion": {"v1": 1.0, "x0_list": [-1.0, -0.5, 0.0, 0.5, 1.0]},
    "expansive": {"phi_b": None},
}


class ConfigError(ValueError):
    """Scenario file problem; ``line`` points into the file (1-based)."""

    def __init__(self, message: str, line: int = 1):
        super().__init__(message)
        self.line = line


@dataclass
class Scenario:
    name: str
    phi: list
    schedule: dict
    t_final: float
    output_step: float
    n: int | None = None
    n_list: list | None = None
    dt: float | None = None
    engine: str = "auto"
    seed: int = 0
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict, command: str = "duality", text: str = "") -> "Scenario":
        return parse_scenario(d, command, text)

    def qubit(self) -> np.ndarray:
        return _phi_vector(self.phi)

    def build_schedule(self) -> Schedule:
        return Schedule.from_dict(self.schedule)

    def time_grid(self) -> np.ndarray:
        steps = int(round(self.t_final / self.output_step))
        return np.linspace(0.0, steps * self.output_step, steps + 1)


def _line_of(text: str, key: str) -> int:
    """First line mentioning ``"key"`` in the raw file (1 when unknown)."""
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return 1


def _phi_vector(phi) -> np.ndarray:
    """Qubit from (re0, im0, re1, im1), renormalized to remove the 1e-9 config slack."""
    re0, im0, re1, im1 = phi
    v = np.array([complex(re0, im0), complex(re1, im1)])
    return v / np.linalg.norm(v)


def _real(d: dict, key: str, text: str, positive=False, allow_zero=True) -> float:
    try:
        x = float(d[key])
    except KeyError:
        raise ConfigError(f"missing required field {key!r}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a number", _line_of(text, key)) from None
    if not math.isfinite(x) or (positive and (x < 0 or (x == 0 and not allow_zero))):
        raise ConfigError(f"{key!r} has invalid value {d[key]!r}", _line_of(text, key))
    return x


def _int_list(value, key: str, text: str) -> list:
    if not isinstance(value, list) or not value or not all(
            isinstance(x, int) and not isinstance(x, bool) for x in value):
        raise ConfigError(f"{key!r} must be a non-empty list of integers", _line_of(text, key))
    return list(value)


def _real_list(value, key: str, text: str) -> list:
    try:
        out = [float(x) for x in value]
    except (TypeError, ValueError):
        raise ConfigError(f"{key!r} must be a list of numbers", _line_of(text, key)) from None
    if not out or not all(math.isfinite(x) for x in out):
        raise ConfigError(f"{key!r} must be a non-empty list of finite numbers",
                          _line_of(text, key))
    return out


def _check_phi(value, key: str, text: str) -> list:
    if not isinstance(value, list) or len(value) != 4:
        raise ConfigError(f"{key!r} must be 4 reals (re0, im0, re1, im1)", _line_of(text, key))
    phi = _real_list(value, key, text)
    norm = math.sqrt(sum(x * x for x in phi))
    if abs(norm - 1) > 1e-9:
        raise ConfigError(f"{key!r} is not normalized (norm {norm:.12g})", _line_of(text, key))
    return phi


def parse_scenario(d: dict, command: str, text: str = "") -> Scenario:
    """Validate a decoded scenario and fill in defaults."""
    if not isinstance(d, dict):
        raise ConfigError("scenario must be a JSON object")
    known = {"name", "phi", "schedule", "t_final", "output_step", "n", "n_list", "dt",
             "engine", "seed", "params"}
    for key in d:
        if key not in known:
            raise ConfigError(f"unknown field {key!r}", _line_of(text, key))
    name = d.get("name", "scenario")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError("'name' must be a non-empty string without path separators",
                          _line_of(text, "name"))
    if "phi" not in d:
        raise ConfigError("missing required field 'phi'")
    phi = _check_phi(d["phi"], "phi", text)
    t_final = _real(d, "t_final", text, positive=True)
    output_step = _real(d, "output_step", text, positive=True, allow_zero=False)
    if abs(t_final / output_step - round(t_final / output_step)) > 1e-9:
        raise ConfigError("'t_final' must be a whole number of output steps",
                          _line_of(text, "output_step"))

    if "schedule" not in d:
        raise ConfigError("missing required field 'schedule'")
    raw = d["schedule"]
    if not isinstance(raw, dict) or "segments" not in raw:
        raise ConfigError("'schedule' must be an object with 'segments'", _line_of(text, "schedule"))
    try:
        schedule = Schedule.from_dict({"segments": raw["segments"],
                                       "horizon": raw.get("horizon", t_final)})
    except (InvalidInput, ValueError) as exc:
        raise ConfigError(f"bad schedule: {exc}", _line_of(text, "segments")) from None
    if schedule.horizon < t_final:
        raise ConfigError(f"schedule horizon {schedule.horizon} ends before t_final",
                          _line_of(text, "horizon"))

    n = d.get("n")
    n_list = d.get("n_list")
    if n is not None and (isinstance(n, bool) or not isinstance(n, int) or n < 2):
        raise ConfigError("'n' must be an integer >= 2", _line_of(text, "n"))
    if n_list is not None:
        n_list = _int_list(n_list, "n_list", text)
        if min(n_list) < 2 or any(b <= a for a, b in zip(n_list, n_list[1:])):
            raise ConfigError("'n_list' must be strictly increasing integers >= 2",
                              _line_of(text, "n_list"))
    needs_list = command == "scaling"
    needs_n = command in ("duality", "lr", "covariance")
    if needs_list and n_list is None:
        raise ConfigError(f"command {command!r} needs 'n_list'")
    if needs_n and n is None and n_list is None:
        raise ConfigError(f"command {command!r} needs 'n' or 'n_list'")
    if command in ("duality", "covariance") and n is None:
        raise ConfigError(f"command {command!r} needs a single 'n'")

    dt = d.get("dt")
    if dt is not None:
        dt = _real(d, "dt", text, positive=True, allow_zero=False)
    engine = d.get("engine", "auto")
    if engine not in du.ENGINES:
        raise ConfigError(f"'engine' must be one of {du.ENGINES}", _line_of(text, "engine"))
    seed = d.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("'seed' must be a non-negative integer", _line_of(text, "seed"))

    given = d.get("params", {})
    if not isinstance(given, dict):
        raise ConfigError("'params' must be an object", _line_of(text, "params"))
    params = dict(PARAM_DEFAULTS[command])
    for key, value in given.items():
        if key not in params:
            raise ConfigError(f"unknown parameter {key!r} for {command!r}", _line_of(text, key))
        params[key] = value
    params = _check_params(command, params, t_final, text)
    return Scenario(name, phi, schedule.to_dict(), t_final, output_step, n, n_list, dt,
                    engine, seed, params)


def _check_params(command: str, p: dict, t_final: float, text: str) -> dict:
    if "t_list" in p:
        p["t_list"] = [t_final] if p["t_list"] is None else _real_list(p["t_list"], "t_list", text)
        if any(t < 0 or t > t_final for t in p["t_list"]):
            raise ConfigError("'t_list' entries must lie in [0, t_final]", _line_of(text, "t_list"))
    if "samples" in p:
        s = p["samples"]
        if isinstance(s, bool) or not isinstance(s, int) or s < 1:
            raise ConfigError("'samples' must be a positive integer", _line_of(text, "samples"))
    if command == "scaling":
        t = t_final if p["t_fixed"] is None else p["t_fixed"]
        p["t_fixed"] = _real({"t_fixed": t}, "t_fixed", text, positive=True)
        if p["t_fixed"] > t_final:
            raise ConfigError("'t_fixed' exceeds t_final", _line_of(text, "t_fixed"))
    if command == "lr":
        p["k_list"] = _int_list(p["k_list"], "k_list", text)
        if any(k not in (1, 2) for k in p["k_list"]):
            raise ConfigError("'k_list' entries must be 1 or 2", _line_of(text, "k_list"))
    if command == "torsion":
        p["v1"] = _real({"v1": p["v1"]}, "v1", text)
        p["x0_list"] = _real_list(p["x0_list"], "x0_list", text)
        if any(abs(x) > 1 for x in p["x0_list"]):
            raise ConfigError("'x0_list' entries must lie in [-1, 1]", _line_of(text, "x0_list"))
    if command == "expansive":
        if p["phi_b"] is None:
            raise ConfigError("command 'expansive' needs params.phi_b")
        p["phi_b"] = _check_phi(p["phi_b"], "phi_b", text)
    return p


def load_scenario(path: str, command: str) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}") from None
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    return parse_scenario(d, command, text)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format(float(x), ".17g")


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def write_atomic(path: str, text: str):
    """Write via a temporary file in the same directory, then rename."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_safe(x):
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def cmd_duality(sc: Scenario):
    schedule = sc.build_schedule()
    run = du.run_duality(sc.qubit(), schedule, sc.n, sc.time_grid(), engine=sc.engine, dt=sc.dt)
    header = ["t", "mf_x", "mf_y", "mf_z", "ex_x", "ex_y", "ex_z", "trace_distance", "es_bound"]
    rows = [[t, *mf, *ex, d, b] for t, mf, ex, d, b in
            zip(run.t_grid, run.mf.bloch, run.exact_bloch, run.distances, run.bound_values)]
    summary = {
        "max_distance": float(run.distances.max()),
        "max_margin": float(run.margins.max()),
        "min_margin": float(run.margins.min()),
        "violation": run.violated,
        "violation_indices": run.violations,
        "integrator_tolerance": run.tolerance,
        "engine": run.engine,
        "dt": run.dt,
    }
    return header, rows, summary, run.violated


def cmd_scaling(sc: Scenario):
    from .parallel import parallel_map

    schedule = sc.build_schedule()
    t_fixed = sc.params["t_fixed"]
    jobs = [(sc.qubit(), schedule, n, t_fixed, sc.engine, sc.dt) for n in sc.n_list]
    points = parallel_map(du._scaling_point, jobs)
    distances = [d for d, _ in points]
    tolerances = [tol for _, tol in points]
    report = du.fit_loglog(sc.n_list, distances, tolerances, t_fixed)
    b = schedule.bounds()
    header = ["n", "distance", "tolerance", "es_bound", "used"]
    rows = [[n, d, tol, du.es_bound(t_fixed, n, b), used]
            for n, d, tol, used in zip(sc.n_list, distances, tolerances, report.used)]
    violated = any(d > du.es_bound(t_fixed, n, b) + 10 * tol + 1e-12
                   for n, d, tol in zip(sc.n_list, distances, tolerances))
    summary = {"t_fixed": t_fixed, "slope": report.fitted_slope,
               "intercept": report.fitted_intercept, "violation": violated,
               "engines": [du.resolve_engine(sc.engine, n) for n in sc.n_list]}
    return header, rows, summary, violated


def _n_values(sc: Scenario) -> list:
    return sc.n_list if sc.n_list is not None else [sc.n]


def cmd_lr(sc: Scenario):
    schedule = sc.build_schedule()
    header = ["n", "k", "t", "max_ratio", "max_operator_ratio", "bound", "violated"]
    rows = []
    seed = sc.seed
    for n in _n_values(sc):
        for k in sc.params["k_list"]:
            if k > n - 1:
                continue
            for t in sc.params["t_list"]:
                res = du.lr_check(schedule, n, k, t, sc.params["samples"], seed, check=False)
                bad = max(res.max_ratio, res.max_operator_ratio) > res.bound + 1e-12
                rows.append([n, k, t, res.max_ratio, res.max_operator_ratio, res.bound, bad])
                seed += 1
    violated = any(r[-1] for r in rows)
    summary = {"checks": len(rows), "violations": sum(bool(r[-1]) for r in rows),
               "violation": violated, "samples_per_check": sc.params["samples"]}
    return header, rows, summary, violated


def cmd_covariance(sc: Scenario):
    schedule = sc.build_schedule()
    header = ["t", "max_normalized_cov", "bound_per_norm", "worst_margin", "violated"]
    rows = []
    for i, t in enumerate(sc.params["t_list"]):
        res = du.covariance_check(sc.qubit(), schedule, sc.n, t, sc.params["samples"],
                                  sc.seed + i, dt=sc.dt, check=False)
        rows.append([t, res.max_normalized_cov, res.bound_per_norm, res.max_violation_margin,
                     res.violations > 0])
    violated = any(r[-1] for r in rows)
    summary = {"worst_margin": min(r[3] for r in rows), "violation": violated}
    return header, rows, summary, violated


def cmd_torsion(sc: Scenario):
    v1 = sc.params["v1"]
    header = ["x0", "x_used", "omega", "expected", "relative_error"]
    rows = []
    for x0 in sc.params["x0_list"]:
        res = measure_torsion(v1, x0, dt=sc.dt or 1e-3)
        exp = res["expected"]
        rel = abs(res["omega"] - exp) / abs(exp) if exp else abs(res["omega"])
        rows.append([x0, res["x_used"], res["omega"], exp, rel])
    summary = {"v1": v1, "max_relative_error": max(r[4] for r in rows), "violation": False}
    return header, rows, summary, False


def cmd_expansive(sc: Scenario):
    schedule = sc.build_schedule()
    t_grid = sc.time_grid()
    ratios = du.expansive_demo(sc.qubit(), _phi_vector(sc.params["phi_b"]), schedule, t_grid,
                               dt=sc.dt)
    header = ["t", "distance_ratio"]
    rows = [[t, r] for t, r in zip(t_grid, ratios)]
    i = int(np.argmax(ratios))
    summary = {"max_ratio": float(ratios[i]), "t_at_max": float(t_grid[i]), "violation": False}
    return header, rows, summary, False


HANDLERS = {
    "duality": cmd_duality, "scaling": cmd_scaling, "lr": cmd_lr,
    "covariance": cmd_covariance, "torsion": cmd_torsion, "expansive": cmd_expansive,
}


def run_command(command: str, sc: Scenario, out_dir: str) -> int:
    """Execute one command and write its outputs; returns the exit code."""
    started = time.perf_counter()
    with np.errstate(over="raise", invalid="raise", divide="raise"):
        header, rows, summary, violated = HANDLERS[command](sc)
    if any(isinstance(x, float) and not math.isfinite(x) for row in rows for x in row):
        raise FloatingPointError("non-finite value in results")
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.join(out_dir, f"{sc.name}_{command}")
    write_atomic(stem + ".csv", csv_text(header, rows))
    summary = {"command": command, **summary, "engine": summary.get("engine", sc.engine),
               "seed": sc.seed, "wall_time_s": time.perf_counter() - started,
               "config": sc.to_dict()}
    write_atomic(stem + ".json", json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")
    return EXIT_VIOLATION if violated else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="duality-lab", description=__doc__.split("\n")[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="scenario JSON file")
    p.add_argument("--out-dir", required=True, help="directory for CSV and JSON outputs")
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--engine", choices=du.ENGINES, help="override the scenario engine")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        sc = load_scenario(args.config, args.command)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            sc = replace(sc, seed=args.seed)
        if args.engine is not None:
            sc = replace(sc, engine=args.engine)
    except ConfigError as exc:
        print(f"{args.config}:{exc.line}: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code = run_command(args.command, sc, args.out_dir)
    except (InvalidInput, OutOfRange) as exc:
        print(f"{args.config}:1: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError, MemoryError, du.FitUndefined,
            du.DegeneratePair, UndefinedFrequency) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if code == EXIT_VIOLATION:
        print("bound violated; see the JSON summary", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
