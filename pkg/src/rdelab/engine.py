"""Bootstrap Monte Carlo drivers: the distributional map on pools, its
shared-noise bivariate version, the fixed-point iteration loop and the
endogeny diagnostic.

One step resamples children uniformly with replacement and applies the map
with fresh innovations, one independent draw per output sample.  The
bivariate step feeds the same innovations and the same child indices to both
coordinates, so the diagonal is absorbing exactly, not just statistically.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .distances import diagonal_gap, pool_distance
from .pools import BivariatePool, SamplePool, StateSpaceError, independent_bivariate
from .rdespec import RdeSpec

_CHUNK = 1 << 16


def _run_chunks(spec: RdeSpec, seed, generation: int, pools, n: int, threads: int,
                horizon_scale: float = 1.0):
    """Apply the kernel over fixed-size chunks; chunk boundaries do not
    depend on `threads`, so results never do either."""
    starts = list(range(0, n, _CHUNK))
    outs = [[] for _ in pools]
    infos = []

    def one(ci_start):
        ci, start = ci_start
        m = min(_CHUNK, n - start)
        key = (int(seed), int(generation), "chunk", ci)
        return spec.kernel.step(key, pools, m, horizon_scale=horizon_scale)

    jobs = list(enumerate(starts))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, jobs))
    else:
        results = [one(j) for j in jobs]
    for chunk_outs, info in results:
        for acc, arr in zip(outs, chunk_outs):
            acc.append(arr)
        infos.append(info)
    merged = [np.concatenate(acc) if len(acc) > 1 else acc[0] for acc in outs]
    cap_hits = sum(i.get("truncation_cap_hits", 0) for i in infos)
    return merged, {"truncation_cap_hits": cap_hits} if cap_hits else {}


def _check_output(spec: RdeSpec, values: np.ndarray) -> tuple:
    """Validate one step's output against the state space.

    NaN or values outside the declared support signal a mis-specified map and
    raise.  +inf in a space that disallows it is overflow of a diverging
    iteration; it is flagged on the pool rather than raised.
    """
    if np.isnan(values).any():
        raise StateSpaceError(f"map for {spec.entry_id!r} produced NaN")
    flags = ()
    if np.isinf(values).any() and not spec.state.allows_inf:
        flags = ("overflow",)
    else:
        spec.state.check(values, where=f"in output of {spec.entry_id!r}")
    return flags


def apply_T(pool: SamplePool, spec: RdeSpec, seed: int, threads: int = 1,
            horizon_scale: float = 1.0) -> SamplePool:
    """One bootstrap step of the induced map: same pool size, generation + 1,
    deterministic in (pool, seed)."""
    outs, info = _run_chunks(spec, seed, pool.generation, [pool.values], pool.size,
                             threads, horizon_scale)
    flags = _check_output(spec, outs[0])
    if info.get("truncation_cap_hits"):
        flags = flags + ("truncation_cap",)
    new = pool.child(outs[0], seed)
    return replace(new, flags=flags) if flags else new


def apply_T2(bipool: BivariatePool, spec: RdeSpec, seed: int, threads: int = 1) -> BivariatePool:
    """One shared-noise bivariate step: one innovation and one set of child
    indices per output pair, applied to both coordinates."""
    outs, _ = _run_chunks(spec, seed, bipool.generation, [bipool.x, bipool.y],
                          bipool.size, threads)
    _check_output(spec, outs[0])
    _check_output(spec, outs[1])
    return bipool.child(outs[0], outs[1], seed)


@dataclass(frozen=True)
class IterConfig:
    max_iters: int = 200
    tol: float = 0.005           # tol = 0 disables convergence stopping
    distance: str = "ks"         # "ks" | "wp"
    p: float = 1.0
    divergence_threshold: float = 1.0   # pool standard deviations per generation
    divergence_window: int = 10
    divergence_ratio: float = 1e6
    seed: int = 0
    threads: int = 1


@dataclass
class IterationReport:
    """Per-generation trace of an iteration run."""

    records: list = field(default_factory=list)
    stop_reason: str = "max_iters"
    verdict: str | None = None
    meta: dict = field(default_factory=dict)

    def distances(self) -> np.ndarray:
        return np.array([r["distance"] for r in self.records if r.get("distance") is not None])

    def last(self) -> dict:
        return self.records[-1] if self.records else {}


def _gen_record(pool: SamplePool, distance) -> dict:
    rec = {"generation": pool.generation, "distance": distance}
    rec.update(pool.summary())
    return rec


def iterate(spec: RdeSpec, init: SamplePool, config: IterConfig = IterConfig()):
    """Iterate the map from `init` until successive pools are within `tol`,
    the iteration budget runs out, or the divergence rule fires.

    Divergence (a reported outcome, not an error): the median climbs by more
    than `divergence_threshold` pool standard deviations in every one of the
    last `divergence_window` generations, or it exceeds `divergence_ratio`
    times the generation-1 median, or the pool overflows its state space.
    """
    pool = init
    report = IterationReport(meta={"entry": spec.entry_id, "n_pool": init.size,
                                   "seed": config.seed, "config": config.__dict__.copy()})
    report.records.append(_gen_record(pool, None))
    med_track: list[float] = []
    jump_flags: list[bool] = []
    first_median = None
    stop = "max_iters"

    for _ in range(config.max_iters):
        nxt = apply_T(pool, spec, config.seed, threads=config.threads)
        dist = pool_distance(pool, nxt, kind=config.distance, p=config.p)
        rec = _gen_record(nxt, dist)
        report.records.append(rec)

        if "overflow" in nxt.flags:
            pool = nxt
            stop = "diverged"
            break

        med = rec.get("median")
        med = med if isinstance(med, float) else None
        if med is not None and np.isfinite(med):
            if first_median is None:
                first_median = med
            fin = nxt.finite()
            sd = float(fin.std()) if fin.size else 0.0
            if med_track:
                jump_flags.append(med - med_track[-1] > config.divergence_threshold * sd)
            med_track.append(med)
            w = config.divergence_window
            if len(jump_flags) >= w and all(jump_flags[-w:]):
                pool = nxt
                stop = "diverged"
                break
            if first_median is not None and first_median > 0 and med > config.divergence_ratio * first_median:
                pool = nxt
                stop = "diverged"
                break

        pool = nxt
        if config.tol > 0 and dist < config.tol:
            stop = "converged"
            break

    report.stop_reason = stop
    return pool, report


@dataclass(frozen=True)
class EndogenyConfig:
    max_iters: int = 200
    gap_tol: float = 0.05            # on the normalized gap
    plateau_tol: float = 0.5
    plateau_window: int = 20
    plateau_rel_change: float = 0.02
    p: float = 1.0
    seed: int = 0
    threads: int = 1


def endogeny_iterate(spec: RdeSpec, fixed: SamplePool,
                     config: EndogenyConfig = EndogenyConfig()) -> IterationReport:
    """Bivariate-uniqueness diagnostic at a fixed point.

    Starts the shared-noise bivariate iteration from the product coupling of
    two independent resamplings of `fixed` and tracks the diagonal gap.  The
    verdict is a trend, not a proof: "endogenous-trend" when the normalized
    gap drops below `gap_tol`, "non-endogenous-trend" when it plateaus above
    `plateau_tol` over `plateau_window` generations, else "inconclusive".
    """
    bp = independent_bivariate(fixed, config.seed)
    report = IterationReport(meta={"entry": spec.entry_id, "n_pool": fixed.size,
                                   "seed": config.seed, "config": config.__dict__.copy()})
    gaps: list[float] = []
    verdict = "inconclusive"
    for _ in range(config.max_iters):
        bp = apply_T2(bp, spec, config.seed, threads=config.threads)
        gap = diagonal_gap(bp, p=config.p)
        rec = {"generation": bp.generation, "raw_gap": gap["raw"],
               "normalized_gap": gap["normalized"], "degenerate": gap["degenerate"]}
        report.records.append(rec)
        if not gap["degenerate"]:
            gaps.append(gap["normalized"])
            if gap["normalized"] < config.gap_tol:
                verdict = "endogenous-trend"
                break
    if verdict == "inconclusive" and len(gaps) >= config.plateau_window:
        window = np.asarray(gaps[-config.plateau_window :])
        half = len(window) // 2
        level = float(window.mean())
        drift = abs(float(window[half:].mean()) - float(window[:half].mean()))
        if level > config.plateau_tol and drift / max(level, 1e-12) < config.plateau_rel_change:
            verdict = "non-endogenous-trend"
    report.verdict = verdict
    report.stop_reason = "converged" if verdict == "endogenous-trend" else "max_iters"
    return report
