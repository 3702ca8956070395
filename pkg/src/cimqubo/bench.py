"""Hardware-cost accounting and solver success-rate studies.

Cell counts use the array shapes actually programmed: the filter needs
2 * rows * n cells (working plane plus replica), the item crossbar n^2 * M
single-bit cells for M magnitude planes, and the penalty formulation
(n + C)^2 * M' cells with no filter.  The search-space exponent is the count
of auxiliary slack bits the filter makes unnecessary, i.e. the capacity.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .anneal import MODE_DQUBO, MODE_HYCIM, AnnealSchedule, batch_solve, default_schedule
from .errors import CapacityError, ConfigurationError
from .filter_sim import FilterConfig, build_filter, filter_check, sample_balanced_configs
from .qkp import ORACLE_MAX_ITEMS, QkpInstance, brute_force_oracle, qkp_weight
from .transform import build_dqubo, build_inequality_qubo, quantization_info


@dataclass(frozen=True)
class OverheadReport:
    instance: str
    n: int
    capacity: int
    dqubo_dim: int
    hycim_bits: int
    dqubo_bits: int
    hycim_cells: int
    dqubo_cells: int
    saving_fraction: float
    search_space_reduction_exponent: int


def _dqubo_max_abs(instance: QkpInstance, alpha: int, beta: int) -> int:
    """Largest penalty coefficient magnitude, computed blockwise with Python
    ints so it works past the dense-matrix and int64 limits."""
    w = [int(v) for v in instance.weights]
    p = instance.profits
    cap = instance.capacity
    xb = 0
    for i in range(instance.n):
        xb = max(xb, abs(beta * w[i] * w[i] - int(p[i, i])))
        for j in range(i + 1, instance.n):
            xb = max(xb, abs(2 * beta * w[i] * w[j] - 2 * int(p[i, j])))
    ypair = 2 * alpha + 2 * beta * cap * (cap - 1) if cap >= 2 else 0
    ydiag = max(abs(beta * k * k - alpha) for k in (1, cap))
    cross = 2 * beta * max(w) * cap
    return max(xb, ypair, ydiag, cross)


def overhead_report(
    instance: QkpInstance,
    alpha: int = 2,
    beta: int = 2,
    filter_config: FilterConfig | None = None,
) -> OverheadReport:
    """Compare programmed-cell budgets of the two formulations.

    When the penalty matrix is too large to materialize its bit depth is still
    exact, computed blockwise from the coefficient formulas."""
    cfg = filter_config or FilterConfig()
    n = instance.n
    ineq = build_inequality_qubo(instance)
    hbits = quantization_info(ineq.qubo.q).bits
    hycim_cells = 2 * cfg.rows * n + n * n * hbits
    dqubo_dim = n + instance.capacity
    try:
        dq = build_dqubo(instance, alpha, beta)
        dbits = quantization_info(dq.qubo.q).bits
    except (OverflowError, CapacityError):
        worst = _dqubo_max_abs(instance, alpha, beta)
        dbits = 1 if worst <= 1 else int(worst - 1).bit_length()
    dcells = dqubo_dim * dqubo_dim * dbits
    saving = 1.0 - hycim_cells / dcells
    return OverheadReport(
        instance=instance.name,
        n=n,
        capacity=instance.capacity,
        dqubo_dim=dqubo_dim,
        hycim_bits=hbits,
        dqubo_bits=dbits,
        hycim_cells=hycim_cells,
        dqubo_cells=dcells,
        saving_fraction=saving,
        search_space_reduction_exponent=instance.capacity,
    )


@dataclass(frozen=True)
class SuccessReport:
    """Success is scored two ways: per initial configuration (an initial
    succeeds when any of its runs reaches the threshold; the headline rate)
    and per individual run."""

    instance: str
    optimum: int
    threshold: float
    hycim_rate: float
    dqubo_rate: float
    hycim_run_rate: float
    dqubo_run_rate: float
    hycim_runs: int
    dqubo_runs: int
    iterations: int
    num_initials: int
    runs_per_initial: int
    master_seed: int


def _success_rates(records, threshold, runs_per_initial):
    hits = np.array([r.best_qkp_value >= threshold for r in records])
    per_run = float(hits.mean())
    per_initial = float(hits.reshape(-1, runs_per_initial).any(axis=1).mean())
    return per_initial, per_run


def success_rate_study(
    instance: QkpInstance,
    num_initials: int,
    runs_per_initial: int,
    schedule: AnnealSchedule | None = None,
    master_seed: int = 0,
    *,
    iterations: int = 1000,
    alpha: int = 2,
    beta: int = 2,
    threshold_fraction: float = 0.95,
    best_known: int | None = None,
    jobs: int = 1,
) -> SuccessReport:
    """Run both modes over a shared pool of initials and score each run
    against threshold_fraction of the optimum.

    With schedule=None each mode cools from its own coefficient scale over
    the given iteration count; an explicit schedule applies to both modes.
    The optimum comes from exhaustive search for n <= 24; larger instances
    need best_known."""
    if best_known is not None:
        optimum = int(best_known)
    elif instance.n <= ORACLE_MAX_ITEMS:
        optimum = brute_force_oracle(instance).best_value
    else:
        raise ConfigurationError(
            f"n={instance.n} is beyond exhaustive search, pass best_known"
        )
    threshold = threshold_fraction * optimum
    h_schedule = d_schedule = schedule
    if schedule is None and iterations != 1000:
        h_schedule = default_schedule(build_inequality_qubo(instance), iterations)
        d_schedule = default_schedule(build_dqubo(instance, alpha, beta), iterations)
    h_records = batch_solve(
        instance, MODE_HYCIM, num_initials, runs_per_initial,
        schedule=h_schedule, master_seed=master_seed, jobs=jobs,
    )
    d_records = batch_solve(
        instance, MODE_DQUBO, num_initials, runs_per_initial,
        schedule=d_schedule, master_seed=master_seed,
        alpha=alpha, beta=beta, jobs=jobs,
    )
    iters = schedule.iterations if schedule is not None else iterations
    h_init, h_run = _success_rates(h_records, threshold, runs_per_initial)
    d_init, d_run = _success_rates(d_records, threshold, runs_per_initial)
    return SuccessReport(
        instance=instance.name,
        optimum=optimum,
        threshold=threshold,
        hycim_rate=h_init,
        dqubo_rate=d_init,
        hycim_run_rate=h_run,
        dqubo_run_rate=d_run,
        hycim_runs=len(h_records),
        dqubo_runs=len(d_records),
        iterations=iters,
        num_initials=num_initials,
        runs_per_initial=runs_per_initial,
        master_seed=master_seed,
    )


@dataclass(frozen=True)
class FilterCase:
    instance: str
    config_id: int
    weight_sum: int
    capacity: int
    working_ml: float
    replica_ml: float
    normalized_ml: float
    predicted: bool
    actual: bool


@dataclass(frozen=True)
class FilterStudy:
    instance: str
    num_cases: int
    accuracy: float
    noise_sigma: float
    seed: int
    cases: list[FilterCase] = field(repr=False)


def filter_study(
    instance: QkpInstance,
    num_samples: int,
    config: FilterConfig | None = None,
    seed: int = 0,
) -> FilterStudy:
    """Per-configuration matchline detail over a balanced feasible/infeasible
    sample, plus the aggregate classification accuracy."""
    cfg = config or FilterConfig()
    model = build_filter(instance.weights, instance.capacity, cfg)
    nf = num_samples // 2
    configs, labels = sample_balanced_configs(
        instance.weights, instance.capacity, nf, num_samples - nf, seed=seed
    )
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    cases = []
    correct = 0
    for k, x in enumerate(configs):
        decision = filter_check(model, x, rng)
        actual = bool(labels[k])
        if decision.feasible == actual:
            correct += 1
        norm = decision.working_ml / decision.replica_ml if decision.replica_ml > 0 else float("inf")
        cases.append(FilterCase(
            instance=instance.name,
            config_id=k,
            weight_sum=qkp_weight(instance, x),
            capacity=instance.capacity,
            working_ml=decision.working_ml,
            replica_ml=decision.replica_ml,
            normalized_ml=norm,
            predicted=decision.feasible,
            actual=actual,
        ))
    return FilterStudy(
        instance=instance.name,
        num_cases=len(cases),
        accuracy=correct / len(cases),
        noise_sigma=model.config.noise_sigma,
        seed=seed,
        cases=cases,
    )


def filter_suite(
    instances: list[QkpInstance],
    config: FilterConfig | None = None,
    configs_per_instance: int = 20,
    seed: int = 0,
) -> FilterStudy:
    """filter_study over many instances with one aggregate accuracy; each
    instance samples its own balanced configuration set."""
    cases = []
    correct = 0
    noise = (config or FilterConfig()).noise_sigma
    for idx, inst in enumerate(instances):
        sub_seed = int(np.random.SeedSequence(seed, spawn_key=(idx,)).generate_state(1, np.uint64)[0])
        study = filter_study(inst, configs_per_instance, config=config, seed=sub_seed)
        cases.extend(study.cases)
        correct += round(study.accuracy * study.num_cases)
    return FilterStudy(
        instance=f"suite[{len(instances)}]",
        num_cases=len(cases),
        accuracy=correct / len(cases) if cases else 1.0,
        noise_sigma=noise,
        seed=seed,
        cases=cases,
    )


def report_filename(instance: str, kind: str, seed: int, ext: str) -> str:
    return f"{instance}_{kind}_s{seed}.{ext}"


def _write_csv(path, header, rows, meta):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def write_overhead_csv(reports: list[OverheadReport], path, meta: dict | None = None) -> None:
    header = ["instance", "n", "capacity", "dqubo_dim", "hycim_bits", "dqubo_bits",
              "hycim_cells", "dqubo_cells", "saving_fraction",
              "search_space_reduction_exponent"]
    rows = [[r.instance, r.n, r.capacity, r.dqubo_dim, r.hycim_bits, r.dqubo_bits,
             r.hycim_cells, r.dqubo_cells, f"{r.saving_fraction:.6f}",
             r.search_space_reduction_exponent] for r in reports]
    _write_csv(path, header, rows, meta or {})


def write_success_csv(reports: list[SuccessReport], path, meta: dict | None = None) -> None:
    header = ["instance", "optimum", "threshold", "hycim_rate", "dqubo_rate",
              "hycim_run_rate", "dqubo_run_rate", "hycim_runs", "dqubo_runs",
              "iterations", "num_initials", "runs_per_initial", "master_seed"]
    rows = [[r.instance, r.optimum, f"{r.threshold:.2f}", f"{r.hycim_rate:.4f}",
             f"{r.dqubo_rate:.4f}", f"{r.hycim_run_rate:.4f}",
             f"{r.dqubo_run_rate:.4f}", r.hycim_runs, r.dqubo_runs, r.iterations,
             r.num_initials, r.runs_per_initial, r.master_seed] for r in reports]
    _write_csv(path, header, rows, meta or {})


def write_filter_csv(study: FilterStudy, path, meta: dict | None = None) -> None:
    header = ["instance", "config_id", "weight_sum", "capacity", "working_ml",
              "replica_ml", "normalized_ml", "predicted", "actual"]
    rows = [[c.instance, c.config_id, c.weight_sum, c.capacity,
             f"{c.working_ml:.6f}", f"{c.replica_ml:.6f}", f"{c.normalized_ml:.6f}",
             int(c.predicted), int(c.actual)] for c in study.cases]
    merged = {"accuracy": f"{study.accuracy:.4f}", "noise_sigma": study.noise_sigma,
              "num_cases": study.num_cases, "seed": study.seed}
    merged.update(meta or {})
    _write_csv(path, header, rows, merged)


def _as_jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def write_report_json(report, path) -> None:
    """Serialize any of the report dataclasses; nested case lists included."""
    from dataclasses import asdict

    payload = asdict(report)

    def clean(obj):
        if isinstance(obj, dict):
            return {k: clean(v) for k, v in obj.items()}
        if isinstance(obj, list):
            return [clean(v) for v in obj]
        return _as_jsonable(obj)

    with open(path, "w", encoding="utf-8") as fh:
        json.dump(clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")
