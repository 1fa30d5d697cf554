"""Sample pools: empirical distributions carried as flat float arrays.

A pool of N values stands for a probability law on the state space; one
bootstrap step of the distributional map sends pool to pool.  The +inf
sentinel is stored as IEEE +inf, which gives exact extended-real semantics
for min/max/comparisons and an exact fraction-at-infinity via `isinf`.
Additions involving +inf are never performed except where a map guards them
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

INF = np.inf

QUANTILE_LEVELS = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


class StateSpaceError(ValueError):
    """Raised when values land outside the declared state space."""


@dataclass(frozen=True)
class StateSpace:
    """Support descriptor for one coordinate system.

    kind: "scalar" | "vector" | "discrete".  Discrete spaces embed a finite
    alphabet in the reals.  `lower`/`upper` bound finite values; `allows_inf`
    admits the +inf sentinel as a genuine state.
    """

    kind: str = "scalar"
    dim: int = 1
    lower: float = -np.inf
    upper: float = np.inf
    allows_inf: bool = False
    alphabet: tuple = ()

    def __post_init__(self):
        if self.kind not in ("scalar", "vector", "discrete"):
            raise ValueError(f"unknown state-space kind {self.kind!r}")
        if self.kind == "vector" and self.dim < 2:
            raise ValueError("vector spaces need dim >= 2")
        if self.kind != "vector" and self.dim != 1:
            raise ValueError("scalar/discrete spaces have dim 1")

    @property
    def is_scalar(self) -> bool:
        return self.dim == 1

    def check(self, values: np.ndarray, where: str = "") -> None:
        v = np.asarray(values, dtype=float)
        if np.isnan(v).any():
            raise StateSpaceError(f"NaN values {where}".strip())
        if np.isneginf(v).any():
            raise StateSpaceError(f"-inf values {where}".strip())
        finite = v[np.isfinite(v)]
        if finite.size:
            if finite.min() < self.lower - 1e-12:
                raise StateSpaceError(
                    f"value {finite.min()} below support lower bound {self.lower} {where}".strip()
                )
            if finite.max() > self.upper + 1e-12:
                raise StateSpaceError(
                    f"value {finite.max()} above support upper bound {self.upper} {where}".strip()
                )
        if self.kind == "discrete" and finite.size:
            alphabet = np.asarray(self.alphabet, dtype=float)
            if not np.isin(finite, alphabet).all():
                raise StateSpaceError(f"values outside alphabet {self.alphabet} {where}".strip())


SCALAR_POS = StateSpace(kind="scalar", lower=0.0)
SCALAR_REAL = StateSpace(kind="scalar")
BINARY = StateSpace(kind="discrete", lower=0.0, upper=1.0, alphabet=(0.0, 1.0))


@dataclass(frozen=True)
class SamplePool:
    """Empirical distribution: values (N,) or (N, dim), a generation counter
    and the lineage of seeds that produced it."""

    values: np.ndarray
    generation: int = 0
    seed_lineage: tuple = ()
    flags: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim not in (1, 2):
            raise ValueError("pool values must be 1- or 2-dimensional")
        if v.shape[0] < 2:
            raise ValueError("pools need at least 2 samples")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return 1 if self.values.ndim == 1 else self.values.shape[1]

    @property
    def is_scalar(self) -> bool:
        return self.values.ndim == 1

    def coordinate(self, j: int) -> np.ndarray:
        return self.values if self.is_scalar else self.values[:, j]

    def frac_inf(self) -> float:
        return float(np.isinf(self.values).mean())

    def finite(self) -> np.ndarray:
        v = self.values
        if v.ndim != 1:
            raise ValueError("finite() is for scalar pools")
        return v[np.isfinite(v)]

    def child(self, values: np.ndarray, seed) -> "SamplePool":
        return SamplePool(
            values=values,
            generation=self.generation + 1,
            seed_lineage=self.seed_lineage + (int(seed),),
        )

    def summary(self) -> dict:
        """Mean/variance/deciles of the finite part plus the exact inf fraction."""
        out: dict = {"n": self.size, "frac_inf": self.frac_inf()}
        if self.is_scalar:
            fin = self.finite()
            if fin.size:
                out["mean"] = float(fin.mean())
                out["var"] = float(fin.var())
                qs = np.quantile(fin, QUANTILE_LEVELS)
                out["quantiles"] = {f"q{int(100 * l)}": float(q) for l, q in zip(QUANTILE_LEVELS, qs)}
                out["median"] = out["quantiles"]["q50"]
            else:
                out["mean"] = out["var"] = out["median"] = float("inf")
                out["quantiles"] = {}
        else:
            out["mean"] = [float(m) for m in np.nanmean(np.where(np.isinf(self.values), np.nan, self.values), axis=0)]
            med = np.nanmedian(np.where(np.isinf(self.values), np.nan, self.values), axis=0)
            out["median"] = [float(m) for m in med]
        return out


@dataclass(frozen=True)
class BivariatePool:
    """N coupled pairs (X, Y); the carrier for the shared-noise bivariate map."""

    x: np.ndarray
    y: np.ndarray
    generation: int = 0
    seed_lineage: tuple = ()

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.shape != y.shape:
            raise ValueError("bivariate coordinates must have identical shape")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def size(self) -> int:
        return self.x.shape[0]

    @property
    def is_scalar(self) -> bool:
        return self.x.ndim == 1

    def marginal(self, which: int) -> SamplePool:
        return SamplePool(values=(self.x, self.y)[which], generation=self.generation)

    def child(self, x, y, seed) -> "BivariatePool":
        return BivariatePool(
            x=x, y=y, generation=self.generation + 1,
            seed_lineage=self.seed_lineage + (int(seed),),
        )

    def on_diagonal(self, tol: float = 0.0) -> bool:
        same = (self.x == self.y) | (np.isinf(self.x) & np.isinf(self.y))
        if tol > 0:
            both_fin = np.isfinite(self.x) & np.isfinite(self.y)
            same |= both_fin & (np.abs(self.x - self.y) <= tol)
        return bool(same.all())


def constant_pool(value: float, n: int, dim: int = 1) -> SamplePool:
    shape = (n,) if dim == 1 else (n, dim)
    return SamplePool(values=np.full(shape, float(value)))


def pool_from_sampler(sampler, n: int, rng: np.random.Generator, dim: int = 1) -> SamplePool:
    values = sampler(rng, n)
    return SamplePool(values=np.asarray(values, dtype=float))


def independent_bivariate(pool: SamplePool, seed) -> BivariatePool:
    """Pair two independent bootstrap resamplings of `pool` (product coupling)."""
    from .rng import substream

    rng = substream(seed, "bivariate-init")
    i = rng.integers(0, pool.size, size=pool.size)
    j = rng.integers(0, pool.size, size=pool.size)
    return BivariatePool(x=pool.values[i], y=pool.values[j], generation=0,
                         seed_lineage=pool.seed_lineage + (int(seed),))


def diagonal_bivariate(pool: SamplePool) -> BivariatePool:
    return BivariatePool(x=pool.values, y=pool.values.copy(), generation=0,
                         seed_lineage=pool.seed_lineage)
