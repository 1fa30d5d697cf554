"""Local frozen-percolation statistics on the degree-3 tree.

Given a pool approximating the join-time law (density 1/(2y^2) on [1/2, 1]
plus a half atom at infinity), classify a typical edge and a typical vertex
of the final forest by direct local sampling: an edge enters the forest iff
its uniform arrival time beats the join times of the four adjacent directed
subtrees, and it ends in an infinite cluster iff that bar is finite.
"""

from __future__ import annotations

import numpy as np

from .catalog import frozen_perc_oracle
from .distances import ks_to_cdf
from .pools import SamplePool
from .rng import substream


def frozen_perc_local_stats(fixed_pool: SamplePool, n_samples: int, seed: int = 0,
                            precheck_tol: float = 0.05, z_bins: int = 10,
                            chunk: int = 1_000_000) -> dict:
    """Edge/vertex classification probabilities and the join-time histogram.

    The pool must pass a KS pre-check against the closed-form law (full
    support member).  The vertex statistic samples the exact 2-neighborhood:
    three edge clocks, six subtree join times, and the induced directed
    times between neighbors.
    """
    orc = frozen_perc_oracle(1.0)
    ks = ks_to_cdf(fixed_pool.values, orc.cdf, inf_atom=orc.inf_atom)
    if ks > precheck_tol:
        raise ValueError(f"pool is not close to the join-time law (KS {ks:.4f} > {precheck_tol})")

    rng = substream(seed, "frozen-local")
    vals = fixed_pool.values
    edges = np.linspace(0.5, 1.0, z_bins + 1)
    z_counts = np.zeros(z_bins, dtype=np.int64)
    edge_counts = np.zeros(3, dtype=np.int64)    # infinite, finite, out
    vertex_counts = np.zeros(3, dtype=np.int64)

    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        draw = lambda size: vals[rng.integers(0, vals.shape[0], size=size)]

        u = rng.random(m)
        y4 = draw((m, 4))
        bar = y4.min(axis=1)
        in_a1 = u < bar
        inf_edge = in_a1 & np.isfinite(bar)
        edge_counts[0] += int(inf_edge.sum())
        edge_counts[1] += int((in_a1 & ~np.isfinite(bar)).sum())
        edge_counts[2] += int((~in_a1).sum())
        z = bar[inf_edge]
        z_counts += np.histogram(z, bins=edges)[0]

        u3 = rng.random((m, 3))
        mk = np.minimum(draw((m, 3)), draw((m, 3)))
        ydir = np.where(mk > u3, mk, np.inf)
        v_in = np.zeros(m, bool)
        v_inf = np.zeros(m, bool)
        for k in range(3):
            j, l = [c for c in range(3) if c != k]
            cond = np.minimum(mk[:, k], np.minimum(ydir[:, j], ydir[:, l]))
            in_k = u3[:, k] < cond
            v_in |= in_k
            v_inf |= in_k & np.isfinite(cond)
        vertex_counts[0] += int(v_inf.sum())
        vertex_counts[1] += int((v_in & ~v_inf).sum())
        vertex_counts[2] += int((~v_in).sum())
        done += m

    n = float(n_samples)
    return {
        "n_samples": n_samples,
        "precheck_ks": ks,
        "p_edge_inf": edge_counts[0] / n,
        "p_edge_fin": edge_counts[1] / n,
        "p_edge_out": edge_counts[2] / n,
        "p_vertex_inf": vertex_counts[0] / n,
        "p_vertex_fin": vertex_counts[1] / n,
        "p_vertex_out": vertex_counts[2] / n,
        "z_hist_edges": edges,
        "z_hist_counts": z_counts,
    }


def z_density_reference(edges: np.ndarray) -> np.ndarray:
    """Bin masses of the join-time density 1/(4 t^4) between `edges`."""
    anti = lambda t: -1.0 / (12.0 * t**3)
    return anti(edges[1:]) - anti(edges[:-1])
