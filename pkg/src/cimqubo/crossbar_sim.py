"""Behavioral model of the bit-sliced coefficient crossbar.

Coefficient magnitudes |q_ij| are split into M binary planes; plane b holds
bit b and a conducting cell contributes one unit current scaled digitally by
2^b.  Signs stay digital: a single-signed matrix is stored as magnitudes with
one global sign, while a mixed-sign matrix is split into a positive and a
negative sub-array whose readings subtract.  Driving x activates cell (i, j)
when x_i = x_j = 1, so the noiseless reading is exactly x^T q x + offset.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .qkp import as_bits
from .transform import QuboMatrix


@dataclass(frozen=True, eq=False)
class SignedPlanes:
    """One single-signed bit-plane stack."""

    sign: int
    bits: int
    planes: np.ndarray  # (bits, dim, dim) of 0/1

    def __post_init__(self):
        if self.sign not in (-1, 1):
            raise ValidationError("sign", f"must be -1 or +1, got {self.sign}")
        planes = np.asarray(self.planes, dtype=np.uint8)
        if planes.ndim != 3 or planes.shape[0] != self.bits:
            raise ValidationError("planes", f"expected ({self.bits}, dim, dim), got {planes.shape}")
        planes.setflags(write=False)
        object.__setattr__(self, "planes", planes)

    def magnitudes(self) -> np.ndarray:
        scales = (1 << np.arange(self.bits, dtype=np.int64))[:, None, None]
        return (self.planes.astype(np.int64) * scales).sum(axis=0)


@dataclass(frozen=True, eq=False)
class CrossbarModel:
    dim: int
    bits: int
    sign: int  # -1 or +1 when single-signed, 0 when split into two stacks
    parts: tuple[SignedPlanes, ...]
    offset: int
    noise_sigma: float = 0.0

    @property
    def planes(self) -> np.ndarray:
        if len(self.parts) != 1:
            raise ValidationError("planes", "mixed-sign model stores two stacks; use .parts")
        return self.parts[0].planes

    def reconstruct(self) -> QuboMatrix:
        q = np.zeros((self.dim, self.dim), dtype=np.int64)
        for part in self.parts:
            q += part.sign * part.magnitudes()
        return QuboMatrix(q, offset=self.offset)


@dataclass(frozen=True)
class EnergyReading:
    value: float
    exact_value: int
    activated_cells: int


def _plane_stack(mags: np.ndarray, sign: int) -> SignedPlanes:
    bits = max(1, int(mags.max()).bit_length())
    shifts = np.arange(bits, dtype=np.int64)[:, None, None]
    planes = ((mags[None, :, :] >> shifts) & 1).astype(np.uint8)
    return SignedPlanes(sign=sign, bits=bits, planes=planes)


def program_crossbar(q: QuboMatrix, noise_sigma: float = 0.0) -> CrossbarModel:
    """Slice a coefficient matrix into bit planes, splitting mixed signs."""
    if noise_sigma < 0:
        raise ValidationError("noise_sigma", f"must be >= 0, got {noise_sigma}")
    mat = q.q
    has_pos = bool(np.any(mat > 0))
    has_neg = bool(np.any(mat < 0))
    parts = []
    if has_pos and has_neg:
        sign = 0
        parts.append(_plane_stack(np.where(mat > 0, mat, 0), 1))
        parts.append(_plane_stack(np.where(mat < 0, -mat, 0), -1))
    elif has_pos:
        sign = 1
        parts.append(_plane_stack(mat.copy(), 1))
    else:
        # all nonpositive, including the zero matrix
        sign = -1
        parts.append(_plane_stack(-mat, -1))
    return CrossbarModel(
        dim=q.dim,
        bits=max(part.bits for part in parts),
        sign=sign,
        parts=tuple(parts),
        offset=q.offset,
        noise_sigma=float(noise_sigma),
    )


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def vmv_energy(model: CrossbarModel, x, rng=None) -> EnergyReading:
    """Read the energy of configuration x.

    exact_value is the digital reconstruction x^T q x + offset.  value adds,
    per conducting cell, a unit-current perturbation eta ~ N(0, noise_sigma)
    scaled by the cell's plane weight; noiseless readings satisfy
    value == exact_value.
    """
    bits = as_bits(x, model.dim)
    on = np.flatnonzero(bits)
    exact = model.offset
    cells = 0
    noise = 0.0
    gen = _as_rng(rng) if model.noise_sigma > 0 else None
    for part in model.parts:
        sub = part.planes[:, on][:, :, on]
        counts = sub.reshape(part.bits, -1).sum(axis=1).astype(np.int64)
        exact += part.sign * int((counts << np.arange(part.bits, dtype=np.int64)).sum())
        cells += int(counts.sum())
        if gen is not None:
            for b, cnt in enumerate(counts.tolist()):
                if cnt:
                    eta = gen.standard_normal(cnt).sum() * model.noise_sigma
                    noise += part.sign * float(1 << b) * eta
    return EnergyReading(value=float(exact) + noise, exact_value=int(exact), activated_cells=cells)


def linearity_sweep(model: CrossbarModel, max_cells: int, rng=None) -> list[tuple[int, float]]:
    """Activate 1..max_cells programmed cells in a fixed order and read unit currents.

    Cells are taken part by part, plane by plane, row-major.  Each step is a
    fresh read: with noise every conducting cell contributes 1 + eta units.
    Noiseless sweeps return exactly (k, k).
    """
    order = []
    for part in model.parts:
        for b in range(part.bits):
            coords = np.argwhere(part.planes[b] == 1)
            order.extend((part.sign, b, int(i), int(j)) for i, j in coords)
    if max_cells > len(order):
        raise ValidationError("max_cells", f"only {len(order)} cells are programmed, asked for {max_cells}")
    gen = _as_rng(rng) if model.noise_sigma > 0 else None
    series = [(0, 0.0)]
    for k in range(1, max_cells + 1):
        if gen is None:
            current = float(k)
        else:
            current = float(k) + gen.standard_normal(k).sum() * model.noise_sigma
        series.append((k, current))
    return series
