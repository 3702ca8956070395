"""Shared fixtures and independent reference implementations.

The ref_* functions are deliberately written as plain Python loops over
the mathematical definitions, so test expectations never route through
the vectorized production code they are checking.
"""

import numpy as np
import pytest

from cimqubo import QkpInstance


def ref_objective(profits, x):
    """Sum p_ij x_i x_j over all ordered pairs, diagonal included once."""
    n = len(x)
    total = 0
    for i in range(n):
        for j in range(n):
            total += profits[i][j] * x[i] * x[j]
    return total


def ref_weight(weights, x):
    return sum(w * xi for w, xi in zip(weights, x))


def ref_qubo_energy(q, x, offset=0):
    n = len(x)
    total = 0
    for i in range(n):
        for j in range(n):
            total += q[i][j] * x[i] * x[j]
    return total + offset


def ref_dqubo_energy(profits, weights, capacity, x, y, alpha, beta):
    """Unexpanded penalty form: -obj + alpha*(sum y - 1)^2 + beta*(W - sum k*y_k)^2."""
    obj = ref_objective(profits, x)
    wsum = ref_weight(weights, x)
    ysum = sum(y)
    ksum = sum(k * yk for k, yk in zip(range(1, capacity + 1), y))
    return -obj + alpha * (ysum - 1) ** 2 + beta * (wsum - ksum) ** 2


def ref_enumerate(profits, weights, capacity):
    """Brute-force oracle: (best_value, best_config, feasible_count), LSB-first ties."""
    n = len(weights)
    best_v = 0
    best_x = [0] * n
    feasible = 0
    for k in range(2 ** n):
        x = [(k >> i) & 1 for i in range(n)]
        if ref_weight(weights, x) <= capacity:
            feasible += 1
            v = ref_objective(profits, x)
            if v > best_v:
                best_v = v
                best_x = x
    return best_v, best_x, feasible


def make_instance(profits, weights, capacity, name="test"):
    return QkpInstance(
        name=name,
        n=len(weights),
        profits=np.asarray(profits, dtype=np.int64),
        weights=np.asarray(weights, dtype=np.int64),
        capacity=capacity,
    )


@pytest.fixture
def tiny():
    """Three items, capacity 9. Hand-checkable: optimum 9 at [1,0,1], 6 of 8 feasible."""
    profits = [
        [5, 2, 0],
        [2, 3, 1],
        [0, 1, 4],
    ]
    return make_instance(profits, [4, 7, 2], 9, name="tiny3")


@pytest.fixture
def tiny_profits():
    return [
        [5, 2, 0],
        [2, 3, 1],
        [0, 1, 4],
    ]


@pytest.fixture
def pair():
    """Two items, both selected is feasible. QUBO energy at [1,1] is -12."""
    return make_instance([[5, 2], [2, 3]], [1, 1], 2, name="pair")
