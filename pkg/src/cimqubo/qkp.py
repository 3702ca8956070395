"""Quadratic knapsack instances: file formats, random generator, exact oracle.

An instance asks to maximize sum_{i,j} p_ij x_i x_j over binary x subject to
sum_i w_i x_i <= C.  The profit matrix is symmetric and the double sum counts
both orderings, so an off-diagonal pair contributes p_ij + p_ji = 2 p_ij.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, DimensionError, ParseError, ValidationError

TEXT_FORMAT = "canonical-text"
JSON_FORMAT = "json"

ORACLE_MAX_ITEMS = 24
_ENUM_CHUNK = 1 << 18


def as_bits(x, n: int | None = None) -> np.ndarray:
    """Normalize a 0/1 sequence to an int8 vector, checking length when given."""
    bits = np.asarray(x, dtype=np.int8)
    if bits.ndim != 1:
        raise DimensionError(f"expected a 1-d bit vector, got shape {bits.shape}")
    if n is not None and bits.shape[0] != n:
        raise DimensionError(f"bit vector has length {bits.shape[0]}, expected {n}")
    if bits.size and (np.min(bits) < 0 or np.max(bits) > 1):
        raise ValidationError("bits", "entries must be 0 or 1")
    return bits


def _as_int_array(values, fieldname: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(rounded, arr):
            raise ValidationError(fieldname, "entries must be integers")
        arr = rounded
    return arr.astype(np.int64)


@dataclass(frozen=True, eq=False)
class QkpInstance:
    """One quadratic knapsack problem.

    profits is an n x n symmetric matrix of nonnegative integers, weights is a
    vector of n positive integers, capacity is a positive integer.  meta is an
    optional free-form dict (kept out of equality, serialized to JSON only).
    """

    name: str
    n: int
    profits: np.ndarray
    weights: np.ndarray
    capacity: int
    meta: dict | None = field(default=None)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError("n", f"must be a positive integer, got {self.n!r}")
        profits = _as_int_array(self.profits, "profits")
        weights = _as_int_array(self.weights, "weights")
        if profits.shape != (self.n, self.n):
            raise ValidationError("profits", f"expected shape ({self.n}, {self.n}), got {profits.shape}")
        if not np.array_equal(profits, profits.T):
            raise ValidationError("profits", "matrix must be symmetric")
        if profits.size and int(profits.min()) < 0:
            raise ValidationError("profits", "entries must be nonnegative")
        if weights.shape != (self.n,):
            raise ValidationError("weights", f"expected {self.n} weights, got {weights.shape[0]}")
        for i, wi in enumerate(weights.tolist()):
            if wi < 1:
                raise ValidationError(f"weights[{i}]", f"must be >= 1, got {wi}")
        if not isinstance(self.capacity, (int, np.integer)) or int(self.capacity) < 1:
            raise ValidationError("capacity", f"must be a positive integer, got {self.capacity!r}")
        profits.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "profits", profits)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "capacity", int(self.capacity))

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    @property
    def vacuous_constraint(self) -> bool:
        """True when capacity >= total weight, so the knapsack bound never binds."""
        return self.capacity >= self.total_weight

    def __eq__(self, other):
        if not isinstance(other, QkpInstance):
            return NotImplemented
        return (
            self.name == other.name
            and self.n == other.n
            and np.array_equal(self.profits, other.profits)
            and np.array_equal(self.weights, other.weights)
            and self.capacity == other.capacity
        )


@dataclass(frozen=True, eq=False)
class OracleResult:
    best_value: int
    best_config: np.ndarray
    feasible_count: int

    def __eq__(self, other):
        if not isinstance(other, OracleResult):
            return NotImplemented
        return (
            self.best_value == other.best_value
            and np.array_equal(self.best_config, other.best_config)
            and self.feasible_count == other.feasible_count
        )


def qkp_objective(instance: QkpInstance, x) -> int:
    """Profit of configuration x, counting both orderings of every pair."""
    bits = as_bits(x, instance.n).astype(np.int64)
    return int(bits @ instance.profits @ bits)


def qkp_weight(instance: QkpInstance, x) -> int:
    bits = as_bits(x, instance.n).astype(np.int64)
    return int(instance.weights @ bits)


def is_feasible(instance: QkpInstance, x) -> bool:
    return qkp_weight(instance, x) <= instance.capacity


def _read_int_line(line: str, lineno: int, expected: int) -> list[int]:
    tokens = line.split()
    if len(tokens) != expected:
        raise ParseError(lineno, f"expected {expected} integer(s), got {len(tokens)}")
    out = []
    for tok in tokens:
        try:
            out.append(int(tok))
        except ValueError:
            raise ParseError(lineno, f"not an integer: {tok!r}") from None
    return out


def _parse_text(text: str) -> QkpInstance:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    idx = 0

    def next_line() -> tuple[str, int]:
        nonlocal idx
        if idx >= len(lines):
            raise ParseError(len(lines) + 1, "unexpected end of file")
        idx += 1
        return lines[idx - 1], idx

    name_line, _ = next_line()
    name = name_line.strip()
    if not name:
        raise ParseError(1, "instance name is empty")
    nline, ln = next_line()
    n = _read_int_line(nline, ln, 1)[0]
    if n < 1:
        raise ParseError(ln, f"n must be positive, got {n}")
    dline, ln = next_line()
    diag = _read_int_line(dline, ln, n)
    profits = np.zeros((n, n), dtype=np.int64)
    np.fill_diagonal(profits, diag)
    for i in range(n - 1):
        row, ln = next_line()
        vals = _read_int_line(row, ln, n - 1 - i)
        profits[i, i + 1:] = vals
        profits[i + 1:, i] = vals
    cline, ln = next_line()
    capacity = _read_int_line(cline, ln, 1)[0]
    wline, ln = next_line()
    weights = _read_int_line(wline, ln, n)
    if idx < len(lines):
        raise ParseError(idx + 1, "unexpected trailing content")
    return QkpInstance(name=name, n=n, profits=profits, weights=weights, capacity=capacity)


def _parse_json(text: str) -> QkpInstance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError(1, "top-level JSON value must be an object")
    for key in ("name", "n", "profits_diag", "profits_upper", "capacity", "weights"):
        if key not in doc:
            raise ParseError(1, f"missing key {key!r}")
    n = doc["n"]
    if not isinstance(n, int) or n < 1:
        raise ParseError(1, f"n must be a positive integer, got {n!r}")
    diag = doc["profits_diag"]
    upper = doc["profits_upper"]
    if len(diag) != n:
        raise ParseError(1, f"profits_diag has {len(diag)} entries, expected {n}")
    if len(upper) != n * (n - 1) // 2:
        raise ParseError(1, f"profits_upper has {len(upper)} entries, expected {n * (n - 1) // 2}")
    profits = np.zeros((n, n), dtype=np.int64)
    np.fill_diagonal(profits, diag)
    pos = 0
    for i in range(n - 1):
        row = upper[pos:pos + n - 1 - i]
        pos += n - 1 - i
        profits[i, i + 1:] = row
        profits[i + 1:, i] = row
    return QkpInstance(
        name=doc["name"],
        n=n,
        profits=profits,
        weights=doc["weights"],
        capacity=doc["capacity"],
        meta=doc.get("generator"),
    )


def parse_instance(source, fmt: str = TEXT_FORMAT) -> QkpInstance:
    """Parse an instance from a string or file object in either format."""
    text = source.read() if hasattr(source, "read") else source
    if fmt == TEXT_FORMAT:
        return _parse_text(text)
    if fmt == JSON_FORMAT:
        return _parse_json(text)
    raise ValidationError("format", f"unknown format {fmt!r}")


def _upper_triangle(profits: np.ndarray) -> list[int]:
    n = profits.shape[0]
    out = []
    for i in range(n - 1):
        out.extend(profits[i, i + 1:].tolist())
    return out


def dump_instance(instance: QkpInstance, fmt: str = TEXT_FORMAT) -> str:
    if fmt == TEXT_FORMAT:
        lines = [instance.name, str(instance.n)]
        lines.append(" ".join(str(v) for v in np.diagonal(instance.profits).tolist()))
        for i in range(instance.n - 1):
            lines.append(" ".join(str(v) for v in instance.profits[i, i + 1:].tolist()))
        lines.append(str(instance.capacity))
        lines.append(" ".join(str(w) for w in instance.weights.tolist()))
        return "\n".join(lines) + "\n"
    if fmt == JSON_FORMAT:
        doc = {
            "name": instance.name,
            "n": instance.n,
            "profits_diag": np.diagonal(instance.profits).tolist(),
            "profits_upper": _upper_triangle(instance.profits),
            "capacity": instance.capacity,
            "weights": instance.weights.tolist(),
        }
        if instance.meta is not None:
            doc["generator"] = instance.meta
        return json.dumps(doc, indent=2) + "\n"
    raise ValidationError("format", f"unknown format {fmt!r}")


def infer_format(path) -> str:
    return JSON_FORMAT if str(path).lower().endswith(".json") else TEXT_FORMAT


def load_instance(path, fmt: str | None = None) -> QkpInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_instance(fh, fmt or infer_format(path))


def save_instance(instance: QkpInstance, path, fmt: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_instance(instance, fmt or infer_format(path)))


def generate_instance(
    n: int,
    density: float = 0.5,
    wmax: int = 20,
    pmax: int = 50,
    cap_ratio: float = 0.5,
    seed: int = 0,
    name: str | None = None,
) -> QkpInstance:
    """Draw a random instance; the same arguments always give the same instance.

    Weights are uniform on [1, wmax].  Each unordered off-diagonal pair is
    nonzero with probability density with a value uniform on [1, pmax]; the
    diagonal is always drawn.  capacity = max(1, round(cap_ratio * sum(w))).
    """
    if n < 2:
        raise ValidationError("n", "generator needs n >= 2")
    if not 0.0 <= density <= 1.0:
        raise ValidationError("density", f"must be in [0, 1], got {density}")
    if wmax < 1:
        raise ValidationError("wmax", "must be >= 1")
    if pmax < 1:
        raise ValidationError("pmax", "must be >= 1")
    if cap_ratio <= 0.0:
        raise ValidationError("cap_ratio", "must be positive")
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, wmax + 1, size=n, dtype=np.int64)
    diag = rng.integers(1, pmax + 1, size=n, dtype=np.int64)
    present = rng.random(size=(n, n)) < density
    values = rng.integers(1, pmax + 1, size=(n, n), dtype=np.int64)
    profits = np.zeros((n, n), dtype=np.int64)
    iu = np.triu_indices(n, k=1)
    profits[iu] = np.where(present[iu], values[iu], 0)
    profits = profits + profits.T
    np.fill_diagonal(profits, diag)
    capacity = max(1, round(cap_ratio * float(weights.sum())))
    meta = {
        "seed": seed,
        "params": {"n": n, "density": density, "wmax": wmax, "pmax": pmax, "cap_ratio": cap_ratio},
    }
    return QkpInstance(
        name=name or f"gen_n{n}_s{seed}",
        n=n,
        profits=profits,
        weights=weights,
        capacity=capacity,
        meta=meta,
    )


def brute_force_oracle(instance: QkpInstance) -> OracleResult:
    """Exhaustive optimum over all 2^n configurations.

    Configuration k maps to bits with item i at bit position i (LSB first),
    and ties are broken toward the smallest such integer k.  Only instances
    with n <= ORACLE_MAX_ITEMS are accepted.
    """
    n = instance.n
    if n > ORACLE_MAX_ITEMS:
        raise CapacityError(
            f"oracle handles n <= {ORACLE_MAX_ITEMS}, got n = {n}; use the annealer for larger instances"
        )
    total = 1 << n
    shifts = np.arange(n, dtype=np.uint32)
    profits = instance.profits.astype(np.float64)
    weights = instance.weights.astype(np.float64)
    capacity = float(instance.capacity)
    best_value = -1.0
    best_k = 0
    feasible = 0
    for start in range(0, total, _ENUM_CHUNK):
        ks = np.arange(start, min(start + _ENUM_CHUNK, total), dtype=np.uint32)
        x = ((ks[:, None] >> shifts) & 1).astype(np.float64)
        wsum = x @ weights
        mask = wsum <= capacity
        feasible += int(np.count_nonzero(mask))
        obj = np.einsum("ij,ij->i", x @ profits, x)
        obj[~mask] = -1.0
        local = int(np.argmax(obj))
        if obj[local] > best_value:
            best_value = float(obj[local])
            best_k = start + local
    bits = ((best_k >> shifts) & 1).astype(np.int8)
    return OracleResult(best_value=int(best_value), best_config=bits, feasible_count=feasible)
