"""Filter-gated simulated annealing over both problem formulations.

Modes follow the problem type: an InequalityQuboModel anneals n item bits with
the inequality filter screening every proposal before the crossbar is read
("hycim"), a DQuboModel anneals all n + C bits on the penalty landscape with
no filter ("dqubo").  Backends share one decision procedure: "exact-software"
computes energies digitally with incremental updates, "behavioral-cim" reads
them from the array models.  With noise disabled the two backends consume the
same random stream and return identical records.

Proposals flip one uniformly chosen bit.  A proposal is accepted when its
energy change dE satisfies dE <= 0, otherwise with probability exp(-dE / T)
under a geometric temperature schedule.  In hycim mode the gated energy is
(w.x <= C) * x^T q x: while the current configuration is still infeasible it
sits at energy zero and over-weight proposals are accepted as zero-energy
drift without touching the crossbar; once a feasible configuration has been
accepted, over-weight proposals are filter-rejected outright and the walk
never leaves the feasible region.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .crossbar_sim import program_crossbar, vmv_energy
from .errors import ConfigurationError, ValidationError
from .filter_sim import FilterConfig, build_filter, filter_check
from .qkp import QkpInstance, as_bits, qkp_objective
from .transform import DQuboModel, InequalityQuboModel, build_dqubo, build_inequality_qubo

MODE_HYCIM = "hycim"
MODE_DQUBO = "dqubo"
BACKEND_EXACT = "exact-software"
BACKEND_CIM = "behavioral-cim"


@dataclass(frozen=True)
class AnnealSchedule:
    """Geometric cooling from t_start down to exactly t_end at the last step."""

    iterations: int = 1000
    t_start: float = 1.0
    t_end: float = 0.01
    decay: str = "geometric"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValidationError("iterations", f"must be >= 1, got {self.iterations}")
        if not self.t_end > 0:
            raise ValidationError("t_end", f"must be positive, got {self.t_end}")
        if self.t_start < self.t_end:
            raise ValidationError("t_start", f"must be >= t_end, got {self.t_start} < {self.t_end}")
        if self.decay != "geometric":
            raise ValidationError("decay", f"only geometric decay is supported, got {self.decay!r}")

    def temperatures(self) -> np.ndarray:
        if self.iterations == 1:
            return np.array([self.t_start])
        ratio = (self.t_end / self.t_start) ** (1.0 / (self.iterations - 1))
        return self.t_start * ratio ** np.arange(self.iterations)


def flip_scale(problem: InequalityQuboModel | DQuboModel) -> float:
    """Mean magnitude scale of a single-bit flip: flipping bit j changes the
    energy by at most sum_i |(Q + Q^T)_ij| + |Q_jj|, averaged over j."""
    q = problem.qubo.q
    if not q.size:
        return 0.0
    paired = np.abs(q + q.T).astype(np.float64)
    np.fill_diagonal(paired, 0.0)
    return float(paired.sum(axis=0).mean() + np.abs(np.diagonal(q)).mean())


def default_schedule(problem: InequalityQuboModel | DQuboModel, iterations: int = 1000) -> AnnealSchedule:
    """Start hot enough to accept typical uphill swaps, halve over the run.

    A typical flip at half occupancy moves the energy by about half the flip
    scale; t_start = scale / 3.5 accepts such moves with probability around
    exp(-1.75) at the start and exp(-3.5) at the end.
    """
    t_start = max(flip_scale(problem) / 3.5, 1.0)
    return AnnealSchedule(iterations=iterations, t_start=t_start, t_end=0.5 * t_start)


@dataclass(eq=False)
class RunRecord:
    seed: int
    mode: str
    best_energy: int | float
    best_config: np.ndarray
    best_qkp_value: int
    trajectory: list[tuple[int, float, bool, bool]] | None
    filter_rejections: int
    evaluations: int

    def __eq__(self, other):
        if not isinstance(other, RunRecord):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.mode == other.mode
            and self.best_energy == other.best_energy
            and np.array_equal(self.best_config, other.best_config)
            and self.best_qkp_value == other.best_qkp_value
            and self.trajectory == other.trajectory
            and self.filter_rejections == other.filter_rejections
            and self.evaluations == other.evaluations
        )


class _Context:
    """Everything reusable across runs of one (problem, backend, schedule) triple."""

    def __init__(self, problem, backend, schedule, filter_config=None, crossbar_noise_sigma=0.0):
        if isinstance(problem, InequalityQuboModel):
            self.mode = MODE_HYCIM
        elif isinstance(problem, DQuboModel):
            self.mode = MODE_DQUBO
        else:
            raise ConfigurationError(f"cannot anneal a {type(problem).__name__}")
        if backend not in (BACKEND_EXACT, BACKEND_CIM):
            raise ConfigurationError(f"unknown backend {backend!r}")
        self.backend = backend
        self.problem = problem
        self.instance = problem.instance
        self.qubo = problem.qubo
        self.dim = problem.qubo.dim
        self.n = self.instance.n
        self.capacity = problem.capacity
        self.offset = problem.qubo.offset
        q = problem.qubo.q
        r0 = (q + q.T).copy()
        np.fill_diagonal(r0, 0)
        self.r0 = r0
        self.diag = np.diagonal(q).astype(np.int64).tolist()
        self.weights = self.instance.weights.tolist()
        self.iterations = schedule.iterations
        self.temps = schedule.temperatures().tolist()
        self.schedule = schedule
        self.filter_model = None
        self.crossbar = None
        if backend == BACKEND_CIM:
            self.crossbar = program_crossbar(problem.qubo, noise_sigma=crossbar_noise_sigma)
            if self.mode == MODE_HYCIM:
                self.filter_model = build_filter(
                    self.instance.weights, self.capacity, filter_config or FilterConfig()
                )
        elif crossbar_noise_sigma:
            raise ConfigurationError("crossbar_noise_sigma needs the behavioral-cim backend")
        self.crossbar_noisy = crossbar_noise_sigma > 0


def _finish(ctx, seed, best_energy, best_v, traj, rejections, evaluations):
    best_bits = np.array(best_v, dtype=np.int8)
    xs = best_bits if ctx.mode == MODE_HYCIM else best_bits[: ctx.n]
    wsum = int(ctx.instance.weights @ xs.astype(np.int64))
    qkp = qkp_objective(ctx.instance, xs) if wsum <= ctx.capacity else 0
    return RunRecord(
        seed=seed,
        mode=ctx.mode,
        best_energy=best_energy,
        best_config=best_bits,
        best_qkp_value=qkp,
        trajectory=traj,
        filter_rejections=rejections,
        evaluations=evaluations,
    )


def _pregenerate(rng, dim, iters):
    flips = rng.integers(0, dim, size=iters).tolist()
    # Metropolis thresholds: accept dE > 0 iff dE < T * g with g = -log u
    gates = (-np.log(rng.random(size=iters))).tolist()
    return flips, gates


def _run_exact(ctx, initial, seed, record_trajectory, on_evaluate):
    rng = np.random.default_rng(seed)
    iters = ctx.iterations
    flips, gates = _pregenerate(rng, ctx.dim, iters)
    temps = ctx.temps
    hycim = ctx.mode == MODE_HYCIM
    v = [int(b) for b in as_bits(initial, ctx.dim)]
    varr = np.array(v, dtype=np.int64)
    qf = int(varr @ ctx.qubo.q @ varr) + ctx.offset
    c = ctx.r0 @ varr
    r0 = ctx.r0
    diag = ctx.diag
    w = ctx.weights
    cap = ctx.capacity
    n = ctx.n
    wsum = sum(w[i] for i in range(n) if v[i])
    if hycim:
        feas = wsum <= cap
        energy = qf if feas else 0
    else:
        feas = True
        energy = qf
    best_e = energy
    best_v = v.copy()
    rejections = 0
    evaluations = 0
    traj = [] if record_trajectory else None
    for i in range(iters):
        j = flips[i]
        delta = 1 - 2 * v[j]
        if hycim:
            wn = wsum + delta * w[j]
            if wn > cap:
                rejections += 1
                accepted = False
                if not feas:
                    # zero-energy drift before the first feasible acceptance
                    qf += delta * (diag[j] + int(c[j]))
                    if delta == 1:
                        c += r0[j]
                    else:
                        c -= r0[j]
                    v[j] = 1 - v[j]
                    wsum = wn
                    accepted = True
                if traj is not None:
                    traj.append((i, energy, accepted, False))
                continue
            qf_new = qf + delta * (diag[j] + int(c[j]))
            evaluations += 1
            if on_evaluate is not None:
                probe = v.copy()
                probe[j] = 1 - probe[j]
                on_evaluate(probe, qf_new)
            if qf_new < best_e:
                # every evaluated proposal counts as seen, accepted or not
                best_e = qf_new
                best_v = v.copy()
                best_v[j] = 1 - best_v[j]
            de = qf_new - energy
            accepted = de <= 0 or de < temps[i] * gates[i]
            if accepted:
                v[j] = 1 - v[j]
                if delta == 1:
                    c += r0[j]
                else:
                    c -= r0[j]
                wsum = wn
                qf = qf_new
                energy = qf_new
                feas = True
            if traj is not None:
                traj.append((i, energy, accepted, True))
        else:
            de = delta * (diag[j] + int(c[j]))
            evaluations += 1
            e_new = energy + de
            if on_evaluate is not None:
                probe = v.copy()
                probe[j] = 1 - probe[j]
                on_evaluate(probe, e_new)
            if e_new < best_e:
                best_e = e_new
                best_v = v.copy()
                best_v[j] = 1 - best_v[j]
            accepted = de <= 0 or de < temps[i] * gates[i]
            if accepted:
                v[j] = 1 - v[j]
                if delta == 1:
                    c += r0[j]
                else:
                    c -= r0[j]
                qf += de
                energy = qf
                if j < n:
                    wsum += delta * w[j]
            if traj is not None:
                traj.append((i, energy, accepted, wsum <= cap))
    return _finish(ctx, seed, best_e, best_v, traj, rejections, evaluations)


def _read(ctx, x, rng):
    reading = vmv_energy(ctx.crossbar, x, rng)
    return reading.value if ctx.crossbar_noisy else reading.exact_value


def _run_behavioral(ctx, initial, seed, record_trajectory, on_evaluate):
    rng = np.random.default_rng(seed)
    iters = ctx.iterations
    flips, gates = _pregenerate(rng, ctx.dim, iters)
    temps = ctx.temps
    hycim = ctx.mode == MODE_HYCIM
    x = as_bits(initial, ctx.dim).copy()
    w = ctx.weights
    cap = ctx.capacity
    n = ctx.n
    wsum = sum(w[i] for i in range(n) if x[i])
    if hycim:
        feas = filter_check(ctx.filter_model, x, rng).feasible
        energy = _read(ctx, x, rng) if feas else 0
    else:
        feas = True
        energy = _read(ctx, x, rng)
    best_e = energy
    best_v = x.tolist()
    rejections = 0
    evaluations = 0
    traj = [] if record_trajectory else None
    for i in range(iters):
        j = flips[i]
        x_new = x.copy()
        x_new[j] = 1 - x_new[j]
        if hycim:
            if not filter_check(ctx.filter_model, x_new, rng).feasible:
                rejections += 1
                accepted = False
                if not feas:
                    x = x_new
                    wsum += (2 * int(x_new[j]) - 1) * w[j]
                    accepted = True
                if traj is not None:
                    traj.append((i, energy, accepted, False))
                continue
            e_new = _read(ctx, x_new, rng)
            evaluations += 1
            if on_evaluate is not None:
                on_evaluate(x_new.tolist(), e_new)
            if e_new < best_e:
                best_e = e_new
                best_v = x_new.tolist()
            de = e_new - energy
            accepted = de <= 0 or de < temps[i] * gates[i]
            if accepted:
                wsum += (2 * int(x_new[j]) - 1) * w[j]
                x = x_new
                energy = e_new
                feas = True
            if traj is not None:
                traj.append((i, energy, accepted, True))
        else:
            e_new = _read(ctx, x_new, rng)
            evaluations += 1
            if on_evaluate is not None:
                on_evaluate(x_new.tolist(), e_new)
            if e_new < best_e:
                best_e = e_new
                best_v = x_new.tolist()
            de = e_new - energy
            accepted = de <= 0 or de < temps[i] * gates[i]
            if accepted:
                if j < n:
                    wsum += (2 * int(x_new[j]) - 1) * w[j]
                x = x_new
                energy = e_new
            if traj is not None:
                traj.append((i, energy, accepted, wsum <= cap))
    return _finish(ctx, seed, best_e, best_v, traj, rejections, evaluations)


def _run(ctx, initial, seed, record_trajectory, on_evaluate):
    if ctx.backend == BACKEND_EXACT:
        return _run_exact(ctx, initial, seed, record_trajectory, on_evaluate)
    return _run_behavioral(ctx, initial, seed, record_trajectory, on_evaluate)


def sa_run(
    problem: InequalityQuboModel | DQuboModel,
    backend: str = BACKEND_EXACT,
    schedule: AnnealSchedule | None = None,
    initial=None,
    seed: int = 0,
    *,
    filter_config: FilterConfig | None = None,
    crossbar_noise_sigma: float = 0.0,
    record_trajectory: bool = False,
    on_evaluate=None,
) -> RunRecord:
    """One annealing run from the given initial configuration.

    on_evaluate, when set, is called with (configuration, energy) at every
    energy evaluation; filter-rejected proposals never reach it.
    """
    if initial is None:
        raise ConfigurationError("an initial configuration is required")
    if schedule is None:
        schedule = default_schedule(problem)
    ctx = _Context(problem, backend, schedule, filter_config, crossbar_noise_sigma)
    return _run(ctx, initial, seed, record_trajectory, on_evaluate)


def _derived_seed(master_seed: int, initial_index: int, run_index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(1, initial_index, run_index))
    return int(ss.generate_state(1, np.uint64)[0])


def _draw_initials(master_seed: int, num_initials: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(0,)))
    return rng.integers(0, 2, size=(num_initials, dim), dtype=np.int8)


def _build_problem(instance, mode, alpha, beta):
    if mode == MODE_HYCIM:
        return build_inequality_qubo(instance)
    if mode == MODE_DQUBO:
        return build_dqubo(instance, alpha, beta)
    raise ConfigurationError(f"unknown mode {mode!r}")


def _batch_worker(payload):
    (instance, mode, num_initials, runs_per_initial, schedule, backend, master_seed,
     alpha, beta, filter_config, crossbar_noise_sigma, lo, hi) = payload
    problem = _build_problem(instance, mode, alpha, beta)
    if schedule is None:
        schedule = default_schedule(problem)
    ctx = _Context(problem, backend, schedule, filter_config, crossbar_noise_sigma)
    initials = _draw_initials(master_seed, num_initials, ctx.dim)
    out = []
    for i in range(lo, hi):
        for r in range(runs_per_initial):
            rec = _run(ctx, initials[i], _derived_seed(master_seed, i, r), False, None)
            out.append((i, r, rec))
    return out


def batch_solve(
    instance: QkpInstance,
    mode: str,
    num_initials: int,
    runs_per_initial: int,
    schedule: AnnealSchedule | None = None,
    backend: str = BACKEND_EXACT,
    master_seed: int = 0,
    *,
    alpha: int = 2,
    beta: int = 2,
    filter_config: FilterConfig | None = None,
    crossbar_noise_sigma: float = 0.0,
    jobs: int = 1,
) -> list[RunRecord]:
    """Anneal num_initials uniform starting points, runs_per_initial runs each.

    Every run's seed derives from (master_seed, initial_index, run_index), so
    results do not depend on execution order or on the jobs worker count.
    Records are ordered by (initial_index, run_index).
    """
    if num_initials < 1:
        raise ValidationError("num_initials", f"must be >= 1, got {num_initials}")
    if runs_per_initial < 1:
        raise ValidationError("runs_per_initial", f"must be >= 1, got {runs_per_initial}")
    if master_seed < 0:
        raise ConfigurationError("master_seed must be nonnegative")
    if jobs <= 1 or num_initials == 1:
        payload = (instance, mode, num_initials, runs_per_initial, schedule, backend,
                   master_seed, alpha, beta, filter_config, crossbar_noise_sigma, 0, num_initials)
        tagged = _batch_worker(payload)
    else:
        from concurrent.futures import ProcessPoolExecutor

        jobs = min(jobs, num_initials)
        bounds = np.linspace(0, num_initials, jobs + 1).astype(int).tolist()
        payloads = [
            (instance, mode, num_initials, runs_per_initial, schedule, backend,
             master_seed, alpha, beta, filter_config, crossbar_noise_sigma, lo, hi)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        tagged = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_batch_worker, payloads):
                tagged.extend(chunk)
    tagged.sort(key=lambda t: (t[0], t[1]))
    return [rec for _, _, rec in tagged]


def write_trajectory_csv(record: RunRecord, path) -> None:
    """Columns: iteration, energy, accepted, feasible (the gate verdict in hycim
    mode, the item-bit weight test in dqubo mode)."""
    if record.trajectory is None:
        raise ConfigurationError("run was made without record_trajectory")
    import csv

    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "energy", "accepted", "feasible"])
        for row in record.trajectory:
            writer.writerow([row[0], row[1], int(row[2]), int(row[3])])
