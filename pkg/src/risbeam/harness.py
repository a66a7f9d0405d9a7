"""
Experiment configuration, seeded batch execution, summaries and CSV output.

A config file is YAML with the top-level sections ``scenario``,
``constraints``, ``algorithm``, ``sweep``, ``run``, ``output`` and ``frame``
(all optional, plus an optional ``name``). Unknown keys anywhere are
rejected. See the README for the full schema.

Output layout for one experiment directory:

* ``summary.csv``  one row per (algorithm, sweep value), columns
  :data:`SUMMARY_HEADER`
* ``runs.csv``     one row per run, columns :data:`RUNS_HEADER`; read back
  with :func:`load_runs`
* ``trace_<alg>_<sweepval>_<seed>.csv``  per-iteration global fitness
"""

import csv
import io
import math
from dataclasses import asdict, dataclass, field, fields, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .afsa import AFSAParams, run_training
from .baselines import ACOParams, PSOParams, run_aco, run_pso
from .channel import Scenario
from .errors import (
    ConfigNotFoundError,
    ConfigParseError,
    ConfigValidationError,
    InvalidInputError,
)
from .oracle import FeedbackOracle

ALGORITHMS = ("afsa", "pso", "aco")
SWEEP_AXES = ("eta_max", "M", "N")

RUNS_HEADER = (
    "algorithm",
    "seed",
    "sweep_value",
    "final_fitness_w",
    "final_user_power_w",
    "feasible",
    "iters_to_95",
    "echo_evals",
)
SUMMARY_HEADER = (
    "algorithm",
    "sweep_axis",
    "sweep_value",
    "n_runs",
    "median_fitness_w",
    "min_fitness_w",
    "max_fitness_w",
    "median_fitness_db",
    "feasibility_rate",
    "median_iters_to_95",
)
TRACE_HEADER = ("iteration", "global_fitness_w", "feasible_count", "case")


class ExperimentRunError(RuntimeError):
    """An optimizer or model error, tagged with the run that raised it."""

    def __init__(self, message, algorithm=None, seed=None, sweep_value=None):
        super().__init__(message)
        self.algorithm = algorithm
        self.seed = seed
        self.sweep_value = sweep_value


def split_ris(N):
    """Factor N into (N1, N2) with N1 the largest divisor not above sqrt(N)."""
    N = int(N)
    if N < 1:
        raise InvalidInputError("N must be >= 1")
    n1 = max(d for d in range(1, math.isqrt(N) + 1) if N % d == 0)
    return n1, N // n1


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = field(default_factory=Scenario)
    algorithm: str = "afsa"
    afsa: AFSAParams = field(default_factory=AFSAParams)
    pso: PSOParams = field(default_factory=PSOParams)
    aco: ACOParams = field(default_factory=ACOParams)
    eta_min: float = 0.0
    eta_max: float = math.inf
    budget_match: bool = False
    sweep_axis: str = None
    sweep_values: tuple = ()
    n_seeds: int = 1
    output_path: str = "results"
    # frame bookkeeping, recorded but not simulated
    T2: int = 0
    L: int = 0
    U: int = 0
    name: str = "experiment"

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS + ("all",):
            raise ConfigValidationError(f"unknown algorithm {self.algorithm!r}", keys=("algorithm.name",))
        if int(self.n_seeds) < 1:
            raise ConfigValidationError("n_seeds must be >= 1", keys=("run.n_seeds",))
        if not 0 <= self.eta_min <= self.eta_max:
            raise ConfigValidationError(
                f"eta_min={self.eta_min} must satisfy 0 <= eta_min <= eta_max={self.eta_max}",
                keys=("constraints.eta_min", "constraints.eta_max"),
            )
        if min(self.T2, self.L, self.U) < 0:
            raise ConfigValidationError("frame fields must be >= 0", keys=("frame",))
        vals = tuple(float(v) for v in self.sweep_values)
        object.__setattr__(self, "sweep_values", vals)
        if self.sweep_axis is None:
            if vals:
                raise ConfigValidationError("sweep values given without an axis", keys=("sweep.axis",))
            return
        if self.sweep_axis not in SWEEP_AXES:
            raise ConfigValidationError(f"unknown sweep axis {self.sweep_axis!r}", keys=("sweep.axis",))
        if not vals:
            raise ConfigValidationError("sweep needs at least one value", keys=("sweep.values",))
        if any(not v > 0 or not math.isfinite(v) for v in vals):
            raise ConfigValidationError("sweep values must be positive and finite", keys=("sweep.values",))
        if list(vals) != sorted(set(vals)):
            raise ConfigValidationError("sweep values must be strictly increasing", keys=("sweep.values",))
        if self.sweep_axis in ("M", "N") and any(v != int(v) for v in vals):
            raise ConfigValidationError("M and N sweep values must be integers", keys=("sweep.values",))
        if self.sweep_axis == "eta_max" and vals[0] < self.eta_min:
            raise ConfigValidationError(
                "eta_max sweep values must be >= eta_min", keys=("sweep.values", "constraints.eta_min")
            )

    @property
    def T1(self):
        """Training period in pilot slots, one sub-block of S slots per iteration."""
        return self.afsa.K * self.afsa.S

    @property
    def algorithms(self):
        return ALGORITHMS if self.algorithm == "all" else (self.algorithm,)

    @property
    def points(self):
        """Sweep values to run; a single ``None`` when there is no sweep."""
        return self.sweep_values if self.sweep_axis else (None,)

    def with_overrides(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class RunRecord:
    algorithm: str
    seed: int
    sweep_value: float
    final_fitness_w: float
    final_user_power_w: float
    feasible: bool
    iters_to_95: int
    echo_evals: int


# --------------------------------------------------------------------------
# config loading

_SCENARIO_KEYS = {f.name for f in fields(Scenario)} | {"N"}
_SECTION_KEYS = {
    "constraints": {"eta_min", "eta_max"},
    "algorithm": {"name", "budget_match", "afsa", "pso", "aco"},
    "sweep": {"axis", "values"},
    "run": {"n_seeds"},
    "output": {"path"},
    "frame": {"T1", "T2", "L", "U"},
}
_PARAM_TYPES = {"afsa": AFSAParams, "pso": PSOParams, "aco": ACOParams}
# eta and seed are set per run by the harness, not per algorithm
_RESERVED = {"eta_min", "eta_max", "rng_seed"}


def shipped_configs():
    base = resources.files("risbeam") / "configs"
    return sorted(p.name[:-5] for p in base.iterdir() if p.name.endswith(".yaml"))


def _resolve_path(path):
    p = Path(path)
    if p.is_file():
        return p.read_text(), str(p)
    name = str(path)
    if name in shipped_configs():
        res = resources.files("risbeam") / "configs" / f"{name}.yaml"
        return res.read_text(), f"<shipped:{name}>"
    raise ConfigNotFoundError(f"config not found: {path}")


def _number(value, key):
    if isinstance(value, bool):
        raise ConfigValidationError(f"{key} must be a number, got {value!r}", keys=(key,))
    if isinstance(value, str):
        # plain YAML reads 1e-7 as a string
        lowered = value.strip().lower()
        if lowered in ("inf", "+inf", ".inf"):
            return math.inf
        try:
            return float(lowered)
        except ValueError:
            pass
    if isinstance(value, (int, float)):
        return float(value)
    raise ConfigValidationError(f"{key} must be a number, got {value!r}", keys=(key,))


def _integer(value, key):
    x = _number(value, key)
    if x != int(x):
        raise ConfigValidationError(f"{key} must be an integer, got {value!r}", keys=(key,))
    return int(x)


def _mapping(value, key):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigValidationError(f"section {key} must be a mapping", keys=(key,))
    return value


def _reject_unknown(section, allowed, prefix):
    extra = sorted(set(section) - set(allowed))
    if extra:
        names = tuple(f"{prefix}.{k}" if prefix else k for k in extra)
        raise ConfigValidationError(f"unknown key(s): {', '.join(names)}", keys=names)


def _point(value, key):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigValidationError(f"{key} must be a list of 3 numbers", keys=(key,))
    return tuple(_number(v, key) for v in value)


def _rho(value, key):
    if not isinstance(value, (list, tuple)) or len(value) != 5:
        raise ConfigValidationError(f"{key} must list 5 coefficients", keys=(key,))
    out = []
    for item in value:
        if isinstance(item, (list, tuple)):
            if len(item) != 2:
                raise ConfigValidationError(f"{key} entries must be numbers or [re, im]", keys=(key,))
            out.append(complex(_number(item[0], key), _number(item[1], key)))
        else:
            out.append(complex(_number(item, key)))
    return tuple(out)


def _build_scenario(section):
    _reject_unknown(section, _SCENARIO_KEYS, "scenario")
    kw = {}
    for name, value in section.items():
        key = f"scenario.{name}"
        if name.endswith("_pos"):
            kw[name] = _point(value, key)
        elif name == "rho":
            kw[name] = _rho(value, key)
        elif name in ("M", "N1", "N2", "N", "rng_seed"):
            kw[name] = _integer(value, key)
        else:
            kw[name] = _number(value, key)
    if "N" in kw:
        N = kw.pop("N")
        if "N1" in kw or "N2" in kw:
            n1, n2 = kw.get("N1", N // kw.get("N2", 1)), kw.get("N2", N // kw.get("N1", 1))
            if n1 * n2 != N:
                raise ConfigValidationError(
                    "scenario.N disagrees with N1 * N2", keys=("scenario.N", "scenario.N1", "scenario.N2")
                )
        else:
            if N < 1:
                raise ConfigValidationError("scenario.N must be >= 1", keys=("scenario.N",))
            kw["N1"], kw["N2"] = split_ris(N)
    try:
        return Scenario(**kw)
    except (InvalidInputError, ValueError) as exc:
        raise ConfigValidationError(f"invalid scenario: {exc}", keys=("scenario",)) from exc


def _build_params(name, section):
    cls = _PARAM_TYPES[name]
    prefix = f"algorithm.{name}"
    allowed = {f.name for f in fields(cls)} - _RESERVED
    _reject_unknown(section, allowed, prefix)
    int_fields = {f.name for f in fields(cls) if f.type in (int, "int")}
    kw = {}
    for key, value in section.items():
        kw[key] = _integer(value, f"{prefix}.{key}") if key in int_fields else _number(value, f"{prefix}.{key}")
    try:
        return cls(**kw)
    except (InvalidInputError, ValueError) as exc:
        raise ConfigValidationError(f"invalid {prefix}: {exc}", keys=(prefix,)) from exc


def parse_config(data, source="<config>"):
    """Validate an already-parsed mapping and build the experiment config."""
    data = _mapping(data, "<root>")
    _reject_unknown(data, set(_SECTION_KEYS) | {"scenario", "name"}, "")
    sections = {k: _mapping(data.get(k), k) for k in _SECTION_KEYS}
    for k, allowed in _SECTION_KEYS.items():
        _reject_unknown(sections[k], allowed, k)

    scenario = _build_scenario(_mapping(data.get("scenario"), "scenario"))
    algo = sections["algorithm"]
    params = {n: _build_params(n, _mapping(algo.get(n), f"algorithm.{n}")) for n in ALGORITHMS}
    cons = sections["constraints"]
    eta_min = _number(cons.get("eta_min", 0.0), "constraints.eta_min")
    eta_max = _number(cons.get("eta_max", math.inf), "constraints.eta_max")
    sweep = sections["sweep"]
    values = sweep.get("values", [])
    if not isinstance(values, (list, tuple)):
        raise ConfigValidationError("sweep.values must be a list", keys=("sweep.values",))
    frame = sections["frame"]
    if "T1" in frame and _integer(frame["T1"], "frame.T1") != params["afsa"].K * params["afsa"].S:
        raise ConfigValidationError(
            "frame.T1 must equal K * S", keys=("frame.T1", "algorithm.afsa.K", "algorithm.afsa.S")
        )
    budget_match = algo.get("budget_match", False)
    if not isinstance(budget_match, bool):
        raise ConfigValidationError("algorithm.budget_match must be true or false", keys=("algorithm.budget_match",))

    return ExperimentConfig(
        scenario=scenario,
        algorithm=str(algo.get("name", "afsa")).lower(),
        afsa=params["afsa"],
        pso=params["pso"],
        aco=params["aco"],
        eta_min=eta_min,
        eta_max=eta_max,
        budget_match=budget_match,
        sweep_axis=sweep.get("axis"),
        sweep_values=tuple(_number(v, "sweep.values") for v in values),
        n_seeds=_integer(sections["run"].get("n_seeds", 1), "run.n_seeds"),
        output_path=str(sections["output"].get("path", "results")),
        T2=_integer(frame.get("T2", 0), "frame.T2"),
        L=_integer(frame.get("L", 0), "frame.L"),
        U=_integer(frame.get("U", 0), "frame.U"),
        name=str(data.get("name", Path(source).stem)),
    )


def load_config(path):
    """Load a YAML experiment file, or a shipped config by name (e.g. ``paper_fig2``)."""
    text, source = _resolve_path(path)
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigParseError(f"{source}: {exc}") from exc
    return parse_config(data, source)


# --------------------------------------------------------------------------
# running


def point_scenario(config, value):
    axis, sc = config.sweep_axis, config.scenario
    if axis == "M":
        sc = replace(sc, M=int(value))
    elif axis == "N":
        n1, n2 = split_ris(int(value))
        sc = replace(sc, N1=n1, N2=n2)
    return sc


def point_window(config, value):
    if config.sweep_axis == "eta_max":
        return config.eta_min, float(value)
    return config.eta_min, config.eta_max


def iterations_to_fraction(trace, fraction=0.95):
    """Smallest 1-based iteration whose global fitness reaches ``fraction`` of
    the final value; 0 when the run never recorded a positive fitness."""
    trace = np.asarray(trace, dtype=float)
    final = trace[-1] if trace.size else -np.inf
    if not (np.isfinite(final) and final > 0):
        return 0
    return int(np.argmax(trace >= fraction * final)) + 1


def _run_one(name, scenario, config, seed, window, budget):
    eta_min, eta_max = window
    oracle = FeedbackOracle(scenario)
    if name == "afsa":
        params = replace(config.afsa, rng_seed=seed, eta_min=eta_min, eta_max=eta_max)
        return run_training(scenario, params, oracle)
    base = config.pso if name == "pso" else config.aco
    params = replace(base, rng_seed=seed, eta_min=eta_min, eta_max=eta_max)
    if budget is not None:
        params = params.with_budget(budget)
    runner = run_pso if name == "pso" else run_aco
    return runner(scenario, params, oracle)


def _record(name, seed, value, result, scenario, window):
    oracle = FeedbackOracle(scenario)
    fitness, user = oracle.final_metrics(result.best_beam)
    return RunRecord(
        algorithm=name,
        seed=int(seed),
        sweep_value=value,
        final_fitness_w=fitness,
        final_user_power_w=user,
        feasible=bool(window[0] <= user <= window[1]),
        iters_to_95=iterations_to_fraction(result.fitness_trace),
        echo_evals=int(result.echo_evals),
    )


def execute(config):
    """Run every (sweep value, seed, algorithm); returns records and traces.

    Nothing is written to disk. Traces map ``(algorithm, value, seed)`` to the
    training result's trace.
    """
    records, traces = [], {}
    for value in config.points:
        scenario = point_scenario(config, value)
        window = point_window(config, value)
        for seed in range(config.n_seeds):
            sc = replace(scenario, rng_seed=seed)
            budget = None
            for name in config.algorithms:
                try:
                    if config.budget_match and name != "afsa" and budget is None:
                        budget = _run_one("afsa", sc, config, seed, window, None).echo_evals
                    result = _run_one(name, sc, config, seed, window, budget)
                except (InvalidInputError, ValueError, RuntimeError) as exc:
                    raise ExperimentRunError(
                        f"{name} run failed (seed={seed}, {config.sweep_axis}={value}): {exc}",
                        algorithm=name,
                        seed=seed,
                        sweep_value=value,
                    ) from exc
                if name == "afsa" and config.budget_match:
                    budget = result.echo_evals
                records.append(_record(name, seed, value, result, sc, window))
                traces[(name, value, seed)] = result.trace
    return records, traces


def summarize(records):
    """Per (algorithm, sweep value): median/min/max fitness, feasibility rate,
    median iterations-to-95% over runs that ever found a feasible beam."""
    records = list(records)
    if not records:
        raise InvalidInputError("cannot summarize an empty record list")
    groups = {}
    for rec in records:
        groups.setdefault((rec.algorithm, rec.sweep_value), []).append(rec)

    def order(key):
        alg, val = key
        rank = ALGORITHMS.index(alg) if alg in ALGORITHMS else len(ALGORITHMS)
        return (rank, alg, -math.inf if val is None else val)

    rows = []
    for key in sorted(groups, key=order):
        group = groups[key]
        fit = np.array([r.final_fitness_w for r in group])
        iters = [r.iters_to_95 for r in group if r.iters_to_95 > 0]
        med = float(np.median(fit))
        rows.append(
            {
                "algorithm": key[0],
                "sweep_value": key[1],
                "n_runs": len(group),
                "median_fitness_w": med,
                "min_fitness_w": float(fit.min()),
                "max_fitness_w": float(fit.max()),
                "median_fitness_db": 10 * math.log10(med) if med > 0 else -math.inf,
                "feasibility_rate": float(np.mean([r.feasible for r in group])),
                "median_iters_to_95": float(np.median(iters)) if iters else math.nan,
            }
        )
    return rows


# --------------------------------------------------------------------------
# CSV


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _value_label(value):
    return "base" if value is None else format(float(value), "g")


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def runs_csv(records):
    return _csv_text(RUNS_HEADER, ([_fmt(v) for v in asdict(r).values()] for r in records))


def summary_csv(rows, sweep_axis=None):
    def cells(row):
        out = [row["algorithm"], sweep_axis or "", _fmt(row["sweep_value"]), str(row["n_runs"])]
        for k in SUMMARY_HEADER[4:]:
            v = row[k]
            if not math.isfinite(v):
                out.append(str(v))
            elif k == "median_fitness_db":
                out.append("%.4f" % v)
            else:
                out.append("%.6e" % v)
        return out

    return _csv_text(SUMMARY_HEADER, (cells(r) for r in rows))


def trace_csv(trace):
    rows = (
        [str(i), _fmt(rec.global_fitness), str(rec.feasible_count), rec.case_label or ""]
        for i, rec in enumerate(trace, start=1)
    )
    return _csv_text(TRACE_HEADER, rows)


def load_runs(path):
    """Read a ``runs.csv`` back into RunRecords."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != RUNS_HEADER:
            raise InvalidInputError(f"unexpected runs.csv header {header}")
        out = []
        for row in reader:
            alg, seed, val, fit, user, feas, iters, evals = row
            out.append(
                RunRecord(
                    algorithm=alg,
                    seed=int(seed),
                    sweep_value=None if val == "" else float(val),
                    final_fitness_w=float(fit),
                    final_user_power_w=float(user),
                    feasible=feas == "1",
                    iters_to_95=int(iters),
                    echo_evals=int(evals),
                )
            )
        return out


def write_outputs(config, records, traces, out_dir=None):
    files = {
        "summary.csv": summary_csv(summarize(records), config.sweep_axis),
        "runs.csv": runs_csv(records),
    }
    for (name, value, seed), trace in traces.items():
        files[f"trace_{name}_{_value_label(value)}_{seed}.csv"] = trace_csv(trace)
    out = Path(out_dir or config.output_path)
    out.mkdir(parents=True, exist_ok=True)
    for fname, text in files.items():
        (out / fname).write_text(text)
    return out


def run_experiment(config, out_dir=None):
    """Execute the config and write summary, runs and trace CSVs."""
    records, traces = execute(config)
    write_outputs(config, records, traces, out_dir)
    return records
