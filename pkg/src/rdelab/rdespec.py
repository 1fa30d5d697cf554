"""Recursive-equation specifications and their sampling kernels.

An `RdeSpec` bundles a state space, the law of the innovation (noise, arity)
and the map g.  Two kernel families cover every equation in the catalog:

* `BoundedKernel` - finite (possibly random) arity with i.i.d. per-child
  noise and optional extra noise at the node.  One vectorized draw of shape
  (n, K) serves the whole output batch.
* `PoissonKernel` - countably many children attached to the increasing
  points of a Poisson process on (0, inf).  The map is consumed as a fold
  over terms with an exact adaptive stopping rule: given the support bounds
  of the child pool, the fold certifies that no further term can change any
  output.  A hard cap `k_max` backs the rule up; cap hits are reported, not
  fatal.

Noise for output sample i is a pure function of (seed, generation, i), so a
step is deterministic and independent of chunking or worker count, and a
sample's innovation sequence can be extended without re-randomizing earlier
terms (doubling the truncation horizon reproduces identical outputs).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .pools import StateSpace
from .rng import substream


class TruncationCapWarning(Warning):
    pass


@dataclass(frozen=True)
class TruncationRule:
    """Metadata for how an unbounded noise sequence is cut off.

    kind "adaptive" means the kernel stops exactly, once pool support bounds
    prove later terms irrelevant; "none" means arity is a.s. finite.
    """

    kind: str = "none"
    k_max: int = 10_000
    note: str = ""


class NoiseDraw:
    """One innovation: realized arity (None = unbounded), extra payload and a
    lazily extensible term sequence.

    For Poisson-process noise, `term(i)` materializes points on demand from a
    private stream; already-drawn terms are cached, so extending the horizon
    never re-randomizes the prefix.
    """

    def __init__(self, arity, extra=None, child=None, term_fn=None):
        self.arity = arity
        self.extra = extra or {}
        self.child = child or {}
        self._term_fn = term_fn
        self._terms: list = []

    def term(self, i: int):
        if self._term_fn is None:
            raise ValueError("this noise draw has no term sequence")
        while len(self._terms) <= i:
            self._terms.append(self._term_fn(len(self._terms)))
        return self._terms[i]

    @property
    def terms_materialized(self) -> int:
        return len(self._terms)


def poisson_points(rng: np.random.Generator, rate_dim: float = 1.0):
    """Term function for an increasing Poisson-process innovation.

    rate_dim d: intensity x^(d-1), realized by mapping unit-rate points t to
    (d t)^(1/d); d = 1 is the homogeneous rate-1 process.
    """
    state = {"t": 0.0}

    def term(_i: int) -> float:
        state["t"] += rng.exponential()
        t = state["t"]
        return t if rate_dim == 1.0 else (rate_dim * t) ** (1.0 / rate_dim)

    return term


# ---------------------------------------------------------------------------
# bounded-arity kernels


@dataclass(frozen=True)
class BoundedKernel:
    """Finite-arity map: draw arity, per-child noise, extra node noise, then
    apply a vectorized kernel to (n, K) child-value blocks."""

    draw_arity: Callable
    apply: Callable
    child_noise: dict = field(default_factory=dict)
    extra_noise: dict = field(default_factory=dict)

    def _draw_block(self, rng, n: int):
        arity = np.asarray(self.draw_arity(rng, n), dtype=np.int64)
        k = max(int(arity.max(initial=0)), 1)
        noise = {"arity": arity, "mask": np.arange(k)[None, :] < arity[:, None]}
        for name, f in self.child_noise.items():
            noise[name] = f(rng, (n, k))
        for name, f in self.extra_noise.items():
            noise[name] = f(rng, n)
        return noise, k

    def step(self, key: tuple, pools: list[np.ndarray], n: int, horizon_scale: float = 1.0):
        rng = substream(*key, "noise")
        noise, k = self._draw_block(rng, n)
        idx = substream(*key, "idx").integers(0, pools[0].shape[0], size=(n, k))
        outs = [np.asarray(self.apply(noise, pool[idx]), dtype=float) for pool in pools]
        return outs, {}

    # scalar path (tree evaluation, single-sample checks)

    def draw_one(self, rng) -> NoiseDraw:
        noise, k = self._draw_block(rng, 1)
        arity = int(noise["arity"][0])
        child = {name: noise[name][0, :arity] for name in self.child_noise}
        extra = {name: noise[name][0] for name in self.extra_noise}
        return NoiseDraw(arity=arity, extra=extra, child=child)

    def apply_one(self, nd: NoiseDraw, child_values) -> np.ndarray:
        arity = nd.arity
        k = max(arity, 1)
        noise = {
            "arity": np.array([arity]),
            "mask": (np.arange(k) < arity)[None, :],
        }
        for name, row in nd.child.items():
            block = np.zeros((1, k))
            block[0, :arity] = row
            noise[name] = block
        for name, val in nd.extra.items():
            noise[name] = np.asarray([val])
        cv = np.zeros((1, k) if np.ndim(child_values) <= 1 or arity == 0 else (1, k, np.shape(child_values)[-1]))
        if arity:
            cv[0, :arity] = np.asarray(child_values, dtype=float)
        out = self.apply(noise, cv)
        return np.asarray(out, dtype=float)[0]


# ---------------------------------------------------------------------------
# Poisson-process kernels: fold protocol


class Fold:
    """Stateless fold operations; mutable state lives in dicts of arrays.

    threshold() returns the xi-level B per sample such that once the next
    point exceeds B, no later term can change the output (the exact adaptive
    truncation contract).  Monotone tightening of B along the fold keeps the
    rule sound when applied after a whole block of terms.
    """

    dim = 1

    def init(self, n: int) -> dict:
        raise NotImplementedError

    def update(self, st: dict, rows: np.ndarray, xi: np.ndarray, cv: np.ndarray) -> None:
        raise NotImplementedError

    def threshold(self, st: dict, bounds) -> np.ndarray:
        raise NotImplementedError

    def finish(self, st: dict, extras: dict) -> np.ndarray:
        raise NotImplementedError


class MinTermsFold(Fold):
    """out = min_i (xi_i - X_i); stops once xi >= current_min + max(pool)."""

    def init(self, n):
        return {"m": np.full(n, np.inf)}

    def update(self, st, rows, xi, cv):
        st["m"][rows] = np.minimum(st["m"][rows], xi - cv)

    def threshold(self, st, bounds):
        return st["m"] + bounds

    def finish(self, st, extras):
        return st["m"]


class SecondMinTermsFold(Fold):
    """out = second minimum of (xi_i - X_i); both smallest terms must be
    final, so the stopping bar sits at the running second minimum."""

    def init(self, n):
        return {"m1": np.full(n, np.inf), "m2": np.full(n, np.inf)}

    def update(self, st, rows, xi, cv):
        t = xi - cv
        m1 = st["m1"][rows]
        m2 = st["m2"][rows]
        better = t < m1
        st["m2"][rows] = np.where(better, m1, np.minimum(m2, t))
        st["m1"][rows] = np.where(better, t, m1)

    def threshold(self, st, bounds):
        return st["m2"] + bounds

    def finish(self, st, extras):
        return st["m2"]


class SumPositiveFold(Fold):
    """out = sum_i (c - xi_i + X_i)^+; terms vanish for xi > c + max(pool)."""

    def __init__(self, c: float):
        self.c = c

    def init(self, n):
        return {"s": np.zeros(n)}

    def update(self, st, rows, xi, cv):
        st["s"][rows] += np.maximum(self.c - xi + cv, 0.0)

    def threshold(self, st, bounds):
        return np.full(st["s"].shape[0], self.c + bounds)

    def finish(self, st, extras):
        return st["s"]


class MaxDiscountFold(Fold):
    """out = max_i e^(-xi_i) X_i (plus optional additive extra); stops once
    e^(-xi) max(pool) cannot beat the running maximum."""

    def __init__(self, add_extra: Optional[str] = None):
        self.add_extra = add_extra

    def init(self, n):
        return {"m": np.zeros(n)}

    def update(self, st, rows, xi, cv):
        st["m"][rows] = np.maximum(st["m"][rows], np.exp(-xi) * cv)

    def threshold(self, st, bounds):
        m = st["m"]
        if bounds <= 0.0:
            return np.full(m.shape[0], -np.inf)
        with np.errstate(divide="ignore"):
            return np.log(bounds) - np.where(m > 0, np.log(m), -np.inf)

    def finish(self, st, extras):
        out = st["m"]
        if self.add_extra is not None:
            out = out + extras[self.add_extra]
        return out


class MatchingTripleFold(Fold):
    """Coupled triple (X, Y, Z) for the near-optimal-matching recursion.

    X' = min_i(xi_i - X_i); the Y' candidates swap the term at the argmin
    i* for xi_(i*) - Z_(i*) - lambda; Z' = min_i(xi_i - Y_i).  Lowest-index
    tie-breaking keeps the argmin stable under exact truncation.
    """

    dim = 3

    def __init__(self, lam: float):
        self.lam = lam

    def init(self, n):
        return {
            "count": np.zeros(n, np.int64),
            "xm": np.full(n, np.inf),
            "x_arg": np.full(n, -1, np.int64),
            "xi_at_arg": np.zeros(n),
            "z_at_arg": np.zeros(n),
            "y1": np.full(n, np.inf),
            "y1_arg": np.full(n, -2, np.int64),
            "y2": np.full(n, np.inf),
        }

    def update(self, st, rows, xi, cv):
        st["count"][rows] += 1
        cnt = st["count"][rows]
        tx = xi - cv[:, 0]
        ty = xi - cv[:, 1]
        better_x = tx < st["xm"][rows]
        st["xm"][rows] = np.where(better_x, tx, st["xm"][rows])
        st["x_arg"][rows] = np.where(better_x, cnt, st["x_arg"][rows])
        st["xi_at_arg"][rows] = np.where(better_x, xi, st["xi_at_arg"][rows])
        st["z_at_arg"][rows] = np.where(better_x, cv[:, 2], st["z_at_arg"][rows])
        y1 = st["y1"][rows]
        y2 = st["y2"][rows]
        better_y = ty < y1
        st["y2"][rows] = np.where(better_y, y1, np.minimum(y2, ty))
        st["y1_arg"][rows] = np.where(better_y, cnt, st["y1_arg"][rows])
        st["y1"][rows] = np.where(better_y, ty, y1)

    def threshold(self, st, bounds):
        hi_x, hi_y, _hi_z = bounds
        return np.maximum(st["xm"] + hi_x, st["y2"] + hi_y)

    def finish(self, st, extras):
        special = st["xi_at_arg"] - st["z_at_arg"] - self.lam
        y_excl = np.where(st["y1_arg"] == st["x_arg"], st["y2"], st["y1"])
        return np.stack([st["xm"], np.minimum(special, y_excl), st["y1"]], axis=1)


class TourPairFold(Fold):
    """Coupled pair (X, Z) for the tour-percolation recursion: with terms
    t_i = lambda - xi_i + X_i - Z_i^+, X' is the max and Z' the sum of the
    two largest."""

    dim = 2

    def __init__(self, lam: float):
        self.lam = lam

    def init(self, n):
        return {"m1": np.full(n, -np.inf), "m2": np.full(n, -np.inf)}

    def update(self, st, rows, xi, cv):
        t = self.lam - xi + cv[:, 0] - np.maximum(cv[:, 1], 0.0)
        m1 = st["m1"][rows]
        m2 = st["m2"][rows]
        better = t > m1
        st["m2"][rows] = np.where(better, m1, np.maximum(m2, t))
        st["m1"][rows] = np.where(better, t, m1)

    def threshold(self, st, bounds):
        hi_x = bounds[0]
        return self.lam + hi_x - st["m2"]

    def finish(self, st, extras):
        return np.stack([st["m1"], st["m1"] + st["m2"]], axis=1)


def _pool_bounds(values: np.ndarray):
    """Finite support maxima per coordinate, the fuel for stopping rules."""
    if values.ndim == 1:
        finite = values[np.isfinite(values)]
        return float(finite.max()) if finite.size else 0.0
    return tuple(
        float(values[np.isfinite(values[:, j]), j].max()) if np.isfinite(values[:, j]).any() else 0.0
        for j in range(values.shape[1])
    )


def _combine_bounds(all_bounds):
    if isinstance(all_bounds[0], tuple):
        return tuple(max(b[j] for b in all_bounds) for j in range(len(all_bounds[0])))
    return max(all_bounds)


@dataclass(frozen=True)
class PoissonKernel:
    """Unbounded-arity map driven by a Poisson-process innovation."""

    fold: Fold
    extra_noise: dict = field(default_factory=dict)
    rate_dim: float = 1.0
    k0: int = 32
    ext_block: int = 32
    k_max: int = 10_000

    def _xi(self, t: np.ndarray) -> np.ndarray:
        if self.rate_dim == 1.0:
            return t
        return (self.rate_dim * t) ** (1.0 / self.rate_dim)

    def step(self, key: tuple, pools: list[np.ndarray], n: int, horizon_scale: float = 1.0):
        rng_noise = substream(*key, "noise")
        rng_idx = substream(*key, "idx")
        pool_len = pools[0].shape[0]
        extras = {name: f(rng_noise, n) for name, f in self.extra_noise.items()}
        states = [self.fold.init(n) for _ in pools]
        bounds = _combine_bounds([_pool_bounds(p) for p in pools])

        # first block: fixed shape, one row per output sample
        times = np.cumsum(rng_noise.exponential(size=(n, self.k0)), axis=1)
        idx = rng_idx.integers(0, pool_len, size=(n, self.k0))
        rows = np.arange(n)
        for k in range(self.k0):
            xi = self._xi(times[:, k])
            for st, pool in zip(states, pools):
                self.fold.update(st, rows, xi, pool[idx[:, k]])
        t_last = times[:, -1]
        used = np.full(n, self.k0, dtype=np.int64)

        cap_hits = 0
        ext = {}
        while True:
            bar = np.full(n, -np.inf)
            for st in states:
                bar = np.maximum(bar, self.fold.threshold(st, bounds))
            need = self._xi(t_last) < horizon_scale * bar
            active = np.flatnonzero(need & (used < self.k_max))
            newly_capped = int(np.count_nonzero(need & (used >= self.k_max)))
            if newly_capped and not active.size:
                cap_hits = int(np.count_nonzero(need))
                break
            if not active.size:
                break
            for i in active:
                gen = ext.get(i)
                if gen is None:
                    gen = substream(*key, "ext", int(i))
                    ext[i] = gen
                gaps = gen.exponential(size=self.ext_block)
                ii = gen.integers(0, pool_len, size=self.ext_block)
                times_i = t_last[i] + np.cumsum(gaps)
                xi_i = self._xi(times_i)
                row = np.array([i])
                for st, pool in zip(states, pools):
                    for k in range(self.ext_block):
                        self.fold.update(st, row, xi_i[k : k + 1], pool[ii[k : k + 1]])
                t_last[i] = times_i[-1]
                used[i] += self.ext_block

        outs = [np.asarray(self.fold.finish(st, extras), dtype=float) for st in states]
        info = {"truncation_cap_hits": cap_hits} if cap_hits else {}
        return outs, info

    # scalar path

    def draw_one(self, rng) -> NoiseDraw:
        extra = {name: f(rng, 1)[0] for name, f in self.extra_noise.items()}
        return NoiseDraw(arity=None, extra=extra, term_fn=poisson_points(rng, self.rate_dim))

    def apply_one(self, nd: NoiseDraw, children, bounds, horizon_scale: float = 1.0):
        """Evaluate the fold for a single sample: `children(i)` yields the
        i-th child value; `bounds` bounds every child value from above."""
        st = self.fold.init(1)
        row = np.array([0])
        used = 0
        capped = False
        while True:
            xi = nd.term(used)
            cv = np.asarray(children(used), dtype=float)
            cv = cv[None] if self.fold.dim == 1 else cv[None, :]
            self.fold.update(st, row, np.array([xi]), cv if self.fold.dim > 1 else cv)
            used += 1
            bar = float(self.fold.threshold(st, bounds)[0])
            if xi >= horizon_scale * bar:
                break
            if used >= self.k_max:
                capped = True
                break
        extras = {name: np.asarray([v]) for name, v in nd.extra.items()}
        out = np.asarray(self.fold.finish(st, extras), dtype=float)[0]
        return out, capped


@dataclass(frozen=True)
class GwKernel:
    """Level-wise machinery for exact sampling on almost-surely finite trees.

    A node's value is `node_value(node_noise, reduced)` where `reduced` is
    `op` (max or sum) over `term(edge_noise, child_value)` across its
    children; an empty reduction yields the op identity (-inf or 0).
    """

    draw_n: Callable
    op: str                      # "max" | "sum"
    term: Callable               # (edge_noise, child_values) -> per-child contributions
    node_value: Callable         # (node_noise | None, reduced) -> values
    draw_edge: Optional[Callable] = None
    draw_node: Optional[Callable] = None


@dataclass(frozen=True)
class RdeSpec:
    """One recursive distributional equation, ready to iterate.

    `kernel` implements the map g with fresh innovations; `truncation`
    documents how infinite noise is cut (with the exactness contract tested
    per sample); `monotone` asserts pointwise monotonicity of g on a
    nonnegative state space, the hypothesis under which iterates from the
    zero pool increase to the lower invariant law.
    """

    state: StateSpace
    kernel: object
    truncation: TruncationRule = TruncationRule()
    monotone: bool = False
    gw: Optional[GwKernel] = None
    offspring_mean: Optional[float] = None
    default_init: Optional[Callable] = None
    meta: dict = field(default_factory=dict)

    @property
    def entry_id(self) -> str:
        return self.meta.get("id", "<anonymous>")

    @property
    def unbounded(self) -> bool:
        return isinstance(self.kernel, PoissonKernel)

    def init_values(self, rng, n: int) -> np.ndarray:
        if self.default_init is not None:
            return np.asarray(self.default_init(rng, n), dtype=float)
        shape = (n,) if self.state.dim == 1 else (n, self.state.dim)
        return np.zeros(shape)
