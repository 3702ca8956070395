"""Behavioral model of the multi-level inequality filter array.

Item weights are decomposed over the rows of a column: each cell stores a
discrete level in [0, levels_per_cell] and a column's levels sum to its item
weight.  Driving input x discharges the matchline by unit_drop volts per unit
of selected weight, so the matchline sits at vdd - unit_drop * sum(w_i x_i),
clamped at zero.  A replica column set stores exactly the capacity and its
matchline is the comparison reference: the working matchline at or above the
replica means the configuration is feasible.  Gaussian noise, when enabled,
multiplies every unit conduction event on the working side; the replica is
read noiselessly.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CapacityError, ConfigurationError, SamplingError, ValidationError
from .qkp import QkpInstance, as_bits


@dataclass(frozen=True)
class FilterConfig:
    rows: int = 16
    levels_per_cell: int = 4
    vdd: float = 2.0
    unit_drop: float | None = None
    noise_sigma: float = 0.0
    comparator_offset: float = 0.0

    def __post_init__(self):
        if self.rows < 1:
            raise ValidationError("rows", f"must be >= 1, got {self.rows}")
        if self.levels_per_cell < 1:
            raise ValidationError("levels_per_cell", f"must be >= 1, got {self.levels_per_cell}")
        if self.vdd <= 0:
            raise ValidationError("vdd", f"must be positive, got {self.vdd}")
        if self.unit_drop is not None and self.unit_drop <= 0:
            raise ValidationError("unit_drop", f"must be positive, got {self.unit_drop}")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma", f"must be >= 0, got {self.noise_sigma}")

    @property
    def column_budget(self) -> int:
        """Largest weight one column can hold."""
        return self.rows * self.levels_per_cell


@dataclass(frozen=True, eq=False)
class WeightPlane:
    """rows x columns cell levels; column sums are the stored weights."""

    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64)
        if cells.ndim != 2:
            raise ValidationError("cells", f"expected a 2-d array, got shape {cells.shape}")
        if cells.size and int(cells.min()) < 0:
            raise ValidationError("cells", "levels must be nonnegative")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)

    @property
    def rows(self) -> int:
        return self.cells.shape[0]

    @property
    def columns(self) -> int:
        return self.cells.shape[1]

    @property
    def column_weights(self) -> np.ndarray:
        return self.cells.sum(axis=0)


@dataclass(frozen=True, eq=False)
class ReplicaConfig:
    """Replica plane plus the fixed input that selects exactly the capacity."""

    plane: WeightPlane
    fixed_input: np.ndarray


@dataclass(frozen=True, eq=False)
class FilterModel:
    """Working plane, replica, and resolved electrical configuration."""

    working: WeightPlane
    replica: ReplicaConfig
    config: FilterConfig
    weights: np.ndarray
    capacity: int
    replica_ml: float


@dataclass(frozen=True)
class FilterDecision:
    working_ml: float
    replica_ml: float
    feasible: bool


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def decompose_weights(weights, config: FilterConfig = FilterConfig()) -> WeightPlane:
    """Split weights over rows greedily: top cells take full levels, one remainder."""
    w = np.asarray(weights, dtype=np.int64)
    if w.ndim != 1:
        raise ValidationError("weights", f"expected a vector, got shape {w.shape}")
    budget = config.column_budget
    for i, wi in enumerate(w.tolist()):
        if wi < 0:
            raise ValidationError(f"weights[{i}]", f"must be >= 0, got {wi}")
        if wi > budget:
            raise CapacityError(
                f"weights[{i}] = {wi} exceeds the {config.rows} x {config.levels_per_cell} "
                f"column budget {budget}; increase rows"
            )
    k = config.levels_per_cell
    full = w // k
    rem = w % k
    levels = np.arange(config.rows, dtype=np.int64)[:, None]
    cells = np.where(levels < full, k, np.where(levels == full, rem, 0))
    return WeightPlane(cells=cells.astype(np.int64))


def build_replica(capacity: int, columns: int, config: FilterConfig = FilterConfig()) -> ReplicaConfig:
    """Spread the capacity over replica columns left to right, one budget at a time."""
    if capacity < 1:
        raise ValidationError("capacity", f"must be >= 1, got {capacity}")
    budget = config.column_budget
    if capacity > columns * budget:
        raise CapacityError(
            f"capacity {capacity} exceeds the replica total budget {columns * budget} "
            f"({columns} columns x {budget})"
        )
    col_weights = np.zeros(columns, dtype=np.int64)
    remaining = capacity
    i = 0
    while remaining > 0:
        take = min(remaining, budget)
        col_weights[i] = take
        remaining -= take
        i += 1
    plane = decompose_weights(col_weights, config)
    fixed_input = (col_weights > 0).astype(np.int8)
    return ReplicaConfig(plane=plane, fixed_input=fixed_input)


def build_filter(weights, capacity: int, config: FilterConfig = FilterConfig()) -> FilterModel:
    """Assemble working and replica planes and resolve the drop per weight unit.

    When unit_drop is not set it defaults to vdd / (2 * max(capacity, max w)),
    placing the replica matchline mid-rail.
    """
    w = np.asarray(weights, dtype=np.int64)
    if config.unit_drop is None:
        scale = max(int(capacity), int(w.max()) if w.size else 1, 1)
        config = replace(config, unit_drop=config.vdd / (2.0 * scale))
    working = decompose_weights(w, config)
    rep = build_replica(capacity, working.columns, config)
    replica_ml = max(0.0, config.vdd - config.unit_drop * float(int(capacity)))
    return FilterModel(
        working=working,
        replica=rep,
        config=config,
        weights=w,
        capacity=int(capacity),
        replica_ml=replica_ml,
    )


def evaluate_ml(plane: WeightPlane, x, config: FilterConfig, rng=None) -> float:
    """Matchline voltage for input x, clamped at zero.

    With noise enabled every unit conduction event drops unit_drop * (1 + eta)
    with eta ~ N(0, noise_sigma); the number of events equals the selected
    weight sum.
    """
    if config.unit_drop is None:
        raise ConfigurationError("unit_drop is unresolved; build the model or set it explicitly")
    bits = as_bits(x, plane.columns).astype(np.int64)
    wsum = int(plane.column_weights @ bits)
    drop = config.unit_drop * float(wsum)
    if config.noise_sigma > 0 and wsum > 0:
        eta = _as_rng(rng).standard_normal(wsum).sum() * config.noise_sigma
        drop += config.unit_drop * float(eta)
    return max(0.0, config.vdd - drop)


def filter_check(model: FilterModel, x, rng=None) -> FilterDecision:
    """Compare the working matchline against the noiseless replica; ties pass."""
    working = evaluate_ml(model.working, x, model.config, rng)
    feasible = working >= model.replica_ml + model.config.comparator_offset
    return FilterDecision(working_ml=working, replica_ml=model.replica_ml, feasible=bool(feasible))


def sample_balanced_configs(
    weights,
    capacity: int,
    num_feasible: int,
    num_infeasible: int,
    seed: int = 0,
    max_attempts: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw unique uniform configurations until both class quotas are met.

    Returns (configs, labels) with the feasible block first.  Raises
    SamplingError with the achieved counts when the attempt budget runs out.
    """
    w = np.asarray(weights, dtype=np.int64)
    n = w.shape[0]
    budget = max_attempts if max_attempts is not None else max(20000, 400 * (num_feasible + num_infeasible))
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(0,)))
    feas: list[np.ndarray] = []
    infeas: list[np.ndarray] = []
    seen: set[bytes] = set()
    attempts = 0
    while (len(feas) < num_feasible or len(infeas) < num_infeasible) and attempts < budget:
        m = min(256, budget - attempts)
        attempts += m
        batch = rng.integers(0, 2, size=(m, n), dtype=np.int8)
        wsums = batch @ w
        for row, wsum in zip(batch, wsums.tolist()):
            key = row.tobytes()
            if key in seen:
                continue
            if wsum <= capacity:
                if len(feas) < num_feasible:
                    seen.add(key)
                    feas.append(row)
            elif len(infeas) < num_infeasible:
                seen.add(key)
                infeas.append(row)
    if len(feas) < num_feasible or len(infeas) < num_infeasible:
        raise SamplingError(
            f"found {len(feas)}/{num_feasible} feasible and {len(infeas)}/{num_infeasible} "
            f"infeasible configurations within {budget} attempts",
            feasible_found=len(feas),
            infeasible_found=len(infeas),
        )
    configs = np.array(feas + infeas, dtype=np.int8)
    labels = np.array([True] * num_feasible + [False] * num_infeasible)
    return configs, labels


def classification_accuracy(model: FilterModel, instance: QkpInstance, num_samples: int, seed: int = 0) -> float:
    """Fraction of balanced samples the filter labels like the exact inequality."""
    if num_samples < 2:
        raise ValidationError("num_samples", f"must be >= 2, got {num_samples}")
    nf = num_samples // 2
    ni = num_samples - nf
    configs, labels = sample_balanced_configs(instance.weights, instance.capacity, nf, ni, seed)
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(1,)))
    hits = 0
    for cfg, actual in zip(configs, labels.tolist()):
        if filter_check(model, cfg, rng).feasible == actual:
            hits += 1
    return hits / num_samples
