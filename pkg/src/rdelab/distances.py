"""Distances and summary diagnostics on sample pools.

Kolmogorov-Smirnov distances treat +inf as a genuine atom above every finite
value.  The p-Wasserstein distance between equal-size pools is computed
exactly through the sorted coupling, which is optimal in one dimension.
"""

from __future__ import annotations

import numpy as np

from .pools import BivariatePool, SamplePool


def _values(pool) -> np.ndarray:
    if isinstance(pool, SamplePool):
        return pool.values
    return np.asarray(pool, dtype=float)


def ks_distance(a, b) -> float:
    """Two-sample sup-norm CDF distance; scalar pools only, +inf allowed."""
    av, bv = _values(a), _values(b)
    if av.ndim != 1 or bv.ndim != 1:
        raise ValueError("ks_distance is defined for scalar pools only")
    a_sorted = np.sort(av)
    b_sorted = np.sort(bv)
    jumps = np.concatenate([a_sorted, b_sorted])
    jumps = np.unique(jumps[np.isfinite(jumps)])
    if jumps.size == 0:
        return 0.0
    fa = np.searchsorted(a_sorted, jumps, side="right") / av.size
    fb = np.searchsorted(b_sorted, jumps, side="right") / bv.size
    return float(np.abs(fa - fb).max())


def ks_to_cdf(values, cdf, atom=None, inf_atom: float = 0.0) -> float:
    """One-sample KS against a closed-form CDF.

    `cdf(x)` must return P(X <= x) for finite x (excluding any +inf atom);
    `atom(x)` returns the point mass at x (0 for continuous laws); `inf_atom`
    is the mass at +infinity.  The sup runs over all finite reals, which picks
    up both one-sided gaps at every atom and the mismatch of inf atoms.
    """
    v = np.sort(_values(values))
    n = v.size
    finite = v[np.isfinite(v)]
    d = abs(finite.size / n - (1.0 - inf_atom))
    if finite.size:
        pts = np.unique(finite)
        f_right = np.asarray(cdf(pts), dtype=float)
        gap = np.asarray(atom(pts), dtype=float) if atom is not None else 0.0
        f_left = f_right - gap
        emp_right = np.searchsorted(finite, pts, side="right") / n
        emp_left = np.searchsorted(finite, pts, side="left") / n
        d = max(
            d,
            float(np.abs(emp_right - f_right).max()),
            float(np.abs(emp_left - f_left).max()),
        )
    return float(d)


def wasserstein_p(a, b, p: float = 1.0) -> float:
    """Exact p-Wasserstein distance between equal-size finite scalar pools."""
    av, bv = _values(a), _values(b)
    if av.ndim != 1 or bv.ndim != 1:
        raise ValueError("wasserstein_p is defined for scalar pools only")
    if av.size != bv.size:
        raise ValueError("wasserstein_p needs equal-size pools")
    if np.isinf(av).any() or np.isinf(bv).any():
        raise ValueError("wasserstein_p rejects pools with infinite values")
    if p < 1:
        raise ValueError("p must be >= 1")
    diff = np.abs(np.sort(av) - np.sort(bv))
    if p == 1:
        return float(diff.mean())
    return float(np.mean(diff**p) ** (1.0 / p))


def pool_distance(a: SamplePool, b: SamplePool, kind: str = "ks", p: float = 1.0) -> float:
    """Successive-iterate distance used by the iteration driver.

    Vector pools are compared by the worst marginal KS distance.
    """
    if kind not in ("ks", "wp"):
        raise ValueError(f"unknown distance {kind!r}")
    if a.is_scalar:
        if kind == "ks":
            return ks_distance(a.values, b.values)
        return wasserstein_p(a.values, b.values, p)
    return max(ks_distance(a.values[:, j], b.values[:, j]) for j in range(a.dim))


def embed_extended(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map two extended-real arrays to finite ones for gap statistics: +inf
    becomes one unit above the largest finite value seen in either array."""
    finite = np.concatenate([x[np.isfinite(x)], y[np.isfinite(y)]])
    top = finite.max() + 1.0 if finite.size else 1.0
    return np.where(np.isinf(x), top, x), np.where(np.isinf(y), top, y)


def diagonal_gap(bp: BivariatePool, p: float = 1.0) -> dict:
    """Distance of a coupled pool from the diagonal law, absolute and
    relative to an independent re-pairing of the same marginals.

    normalized ~ 1 means the coordinates look independent, ~ 0 means glued.
    """
    if not bp.is_scalar:
        raise ValueError("diagonal_gap is defined for scalar coordinates")
    x, y = bp.x, bp.y
    if np.isinf(x).any() or np.isinf(y).any():
        x, y = embed_extended(x, y)
    raw = float(np.mean(np.abs(x - y) ** p) ** (1.0 / p))
    # deterministic independent-style pairing: offset by half the pool
    y_shuffled = np.roll(y, y.size // 2)
    denom = float(np.mean(np.abs(x - y_shuffled) ** p) ** (1.0 / p))
    if denom == 0.0:
        return {"raw": raw, "normalized": 0.0, "degenerate": True}
    return {"raw": raw, "normalized": raw / denom, "degenerate": False}


def tail_exponent(pool, fit_fraction: float = 0.01) -> dict:
    """Least-squares exponential tail rate from the top order statistics.

    Fits log empirical survival against x over the top `fit_fraction` of the
    sample; returns the decay rate alpha (slope sign-flipped) and the r^2 of
    the fit.  Purely diagnostic.
    """
    v = _values(pool)
    if v.ndim != 1:
        raise ValueError("tail_exponent needs a scalar pool")
    if not 0 < fit_fraction <= 1:
        raise ValueError("fit_fraction must be in (0, 1]")
    n = v.size
    k = max(int(np.ceil(fit_fraction * n)), 3)
    top = np.sort(v)[-k:][::-1]
    if not np.isfinite(top).all():
        raise ValueError("tail_exponent needs finite tail values")
    if np.unique(top).size < 3:
        raise ValueError("tail_exponent needs at least 3 distinct tail values")
    survival = (np.arange(k) + 1.0) / n
    x = top
    logs = np.log(survival)
    slope, intercept = np.polyfit(x, logs, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((logs - fitted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return {"alpha": float(-slope), "r2": float(r2)}
