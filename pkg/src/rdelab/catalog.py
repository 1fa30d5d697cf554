"""Registry of built-in recursive distributional equations.

Each entry pairs a parameterized spec constructor with its analytic oracle
where one exists: a closed-form CDF, a limit constant, a scalar root
equation, or a reference simulation.  The `ref` strings are literature
anchors (equation tags) carried as registry metadata.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate, optimize

from . import brw as brw_mod
from .pools import BINARY, SCALAR_POS, SCALAR_REAL, SamplePool, StateSpace
from .rdespec import (
    BoundedKernel,
    GwKernel,
    MatchingTripleFold,
    MaxDiscountFold,
    MinTermsFold,
    PoissonKernel,
    RdeSpec,
    SecondMinTermsFold,
    SumPositiveFold,
    TourPairFold,
    TruncationRule,
)

PI2_6 = math.pi**2 / 6.0


# ---------------------------------------------------------------------------
# scalar root finding


def solve_root(f: Callable[[float], float], bracket: tuple[float, float], tol: float = 1e-10) -> float:
    """Safeguarded bisection/secant root of f on a sign-changing bracket."""
    lo, hi = float(bracket[0]), float(bracket[1])
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise ValueError(f"no sign change on bracket ({lo}, {hi})")
    for _ in range(200):
        if hi - lo < tol:
            break
        # secant proposal, kept only if it lands safely inside the bracket
        x = 0.5 * (lo + hi)
        if fhi != flo:
            s = hi - fhi * (hi - lo) / (fhi - flo)
            if lo + 0.1 * (hi - lo) < s < hi - 0.1 * (hi - lo):
                x = s
        fx = f(x)
        if abs(fx) < 1e-300 or hi - lo < tol:
            return x
        if flo * fx <= 0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# oracle plumbing


@dataclass(frozen=True)
class Oracle:
    """Analytic ground truth for one entry: what kind, and how to query it."""

    kind: str  # closed_cdf | constant | root_equation | reference_simulation
    cdf: Optional[Callable] = None
    atom: Optional[Callable] = None
    inf_atom: float = 0.0
    sample: Optional[Callable] = None
    constant: Optional[float] = None
    describe: str = ""


@dataclass(frozen=True)
class ParamSpec:
    default: object
    kind: str = "float"  # float | int | choice | pool
    lo: float = -np.inf
    hi: float = np.inf
    choices: tuple = ()


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    ref: str
    build: Callable
    params: dict = field(default_factory=dict)
    oracle: Optional[Callable] = None  # (**params) -> Oracle
    oracle_kind: Optional[str] = None
    scan: Optional[dict] = None
    notes: str = ""


_REGISTRY: dict[str, CatalogEntry] = {}
_ALIASES = {"gw_matching_exp": ("gw_matching", {"nu": "exp"})}


def _register(entry: CatalogEntry) -> None:
    _REGISTRY[entry.id] = entry


def entries() -> list[CatalogEntry]:
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]


def get_entry(entry_id: str) -> CatalogEntry:
    if entry_id in _ALIASES:
        return _REGISTRY[_ALIASES[entry_id][0]]
    if entry_id not in _REGISTRY:
        raise KeyError(f"unknown catalog id {entry_id!r}")
    return _REGISTRY[entry_id]


def _resolve(entry_id: str, params: Optional[dict]) -> tuple[CatalogEntry, dict]:
    params = dict(params or {})
    if entry_id in _ALIASES:
        base_id, forced = _ALIASES[entry_id]
        params = {**forced, **params}
        entry_id = base_id
    entry = get_entry(entry_id)
    merged = {}
    for name, ps in entry.params.items():
        value = params.pop(name, ps.default)
        if ps.kind == "float":
            value = float(value)
            if not ps.lo <= value <= ps.hi:
                raise ValueError(f"{entry.id}: parameter {name}={value} outside [{ps.lo}, {ps.hi}]")
        elif ps.kind == "int":
            value = int(value)
            if not ps.lo <= value <= ps.hi:
                raise ValueError(f"{entry.id}: parameter {name}={value} outside [{ps.lo}, {ps.hi}]")
        elif ps.kind == "choice":
            if value not in ps.choices:
                raise ValueError(f"{entry.id}: parameter {name}={value!r} not in {ps.choices}")
        new = value
        merged[name] = new
    if params:
        raise ValueError(f"{entry.id}: unknown parameters {sorted(params)}")
    return entry, merged


def build_spec(entry_id: str, params: Optional[dict] = None) -> RdeSpec:
    entry, merged = _resolve(entry_id, params)
    return entry.build(**merged)


def oracle(entry_id: str, params: Optional[dict] = None) -> Oracle:
    entry, merged = _resolve(entry_id, params)
    if entry.oracle is None:
        raise ValueError(f"{entry.id} has no oracle")
    return entry.oracle(**merged)


def oracle_cdf(entry_id: str, params: Optional[dict], x) -> float:
    """Closed-form CDF at x; by convention, x = +inf returns the atom at
    infinity itself (the quantity the oracle pins down there)."""
    orc = oracle(entry_id, params)
    if orc.cdf is None:
        raise ValueError(f"{entry_id} has no closed-form CDF oracle")
    if np.isscalar(x) and np.isinf(x):
        return orc.inf_atom
    return float(np.asarray(orc.cdf(np.asarray(x, dtype=float))))


def oracle_constant(entry_id: str, params: Optional[dict] = None) -> float:
    orc = oracle(entry_id, params)
    if orc.constant is None:
        raise ValueError(f"{entry_id} has no constant oracle")
    return float(orc.constant)


def list_registry() -> list[dict]:
    out = []
    for entry in entries():
        out.append(
            {
                "id": entry.id,
                "ref": entry.ref,
                "params": {
                    name: {"default": ps.default, "kind": ps.kind}
                    for name, ps in entry.params.items()
                    if ps.kind != "pool"
                },
                "state": _describe_state(entry),
                "oracle": entry.oracle_kind,
                "scan": entry.scan["param"] if entry.scan else None,
                "notes": entry.notes,
            }
        )
    return out


def _describe_state(entry: CatalogEntry) -> str:
    defaults = {}
    for name, ps in entry.params.items():
        if ps.kind == "pool":
            return "scalar"
        defaults[name] = ps.default
    st = entry.build(**defaults).state
    if st.kind == "discrete":
        return "{" + ",".join(str(int(a)) for a in st.alphabet) + "}"
    if st.kind == "vector":
        return f"R^{st.dim}"
    if st.upper == np.inf:
        base = "[0,inf)" if st.lower == 0 else "R"
    else:
        base = f"[{st.lower},{st.upper}]"
    return base + (" U {inf}" if st.allows_inf else "")


# ---------------------------------------------------------------------------
# shared samplers


def _uniform(rng, shape):
    return rng.random(shape)


def _exp_sampler(mean: float):
    return lambda rng, shape: rng.exponential(scale=mean, size=shape)


def _bern_sampler(p: float):
    return lambda rng, shape: (rng.random(shape) < p) * 1.0


def offspring_sampler(law: str, arg: float):
    if law == "bernoulli":
        return lambda rng, n: (rng.random(n) < arg).astype(np.int64)
    if law == "poisson":
        return lambda rng, n: rng.poisson(arg, size=n)
    if law == "fixed":
        return lambda rng, n: np.full(n, int(arg), dtype=np.int64)
    raise ValueError(f"unknown offspring law {law!r}")


def offspring_mean(law: str, arg: float) -> float:
    if law in ("bernoulli", "poisson", "fixed"):
        return float(arg)
    raise ValueError(f"unknown offspring law {law!r}")


def offspring_pgf(law: str, arg: float):
    if law == "bernoulli":
        return lambda s: 1.0 - arg + arg * s
    if law == "poisson":
        return lambda s: np.exp(arg * (s - 1.0))
    if law == "fixed":
        return lambda s: s ** int(arg)
    raise ValueError(f"unknown offspring law {law!r}")


def child_weight_sampler(nu: str, nu_arg: float):
    """Edge/vertex weight laws for the tree-matching equations."""
    if nu == "exp":
        return _exp_sampler(nu_arg)
    if nu == "bern":
        return _bern_sampler(nu_arg)
    raise ValueError(f"unknown weight law {nu!r}")


def _masked_max(terms: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, terms, -np.inf).max(axis=1)


# ---------------------------------------------------------------------------
# lindley


def _lindley_apply(c: float):
    def apply(noise, cv):
        return np.maximum(0.0, cv[:, 0] + noise["xi"] - c)

    return apply


def _build_lindley(c: float, xi_mean: float) -> RdeSpec:
    kernel = BoundedKernel(
        draw_arity=lambda rng, n: np.ones(n, np.int64),
        apply=_lindley_apply(c),
        extra_noise={"xi": lambda rng, n: rng.exponential(scale=xi_mean, size=n)},
    )
    return RdeSpec(
        state=SCALAR_POS,
        kernel=kernel,
        monotone=True,
        meta={"id": "lindley", "params": {"c": c, "xi_mean": xi_mean}, "ref": "Eq (3)"},
    )


def lindley_reference_sampler(c: float, xi_mean: float):
    """Exact stationary draws: running maximum of the random walk with
    increments xi - c, stopped once a fresh record is impossibly far."""
    if c <= xi_mean:
        raise ValueError("stationary law needs c > mean(xi)")
    eta = solve_root(lambda h: -h * c - math.log1p(-h * xi_mean), (1e-9, (1.0 - 1e-9) / xi_mean))
    margin = 45.0 / eta

    def sample(rng, n, block: int = 128):
        best = np.zeros(n)
        s = np.zeros(n)
        active = np.arange(n)
        while active.size:
            steps = rng.exponential(scale=xi_mean, size=(active.size, block)) - c
            path = np.cumsum(steps, axis=1) + s[active, None]
            best[active] = np.maximum(best[active], path.max(axis=1))
            s[active] = path[:, -1]
            active = active[s[active] > best[active] - margin]
        return best

    return sample


_register(
    CatalogEntry(
        id="lindley",
        ref="Eq (3)",
        params={"c": ParamSpec(2.0, lo=1e-9), "xi_mean": ParamSpec(1.0, lo=1e-9)},
        build=_build_lindley,
        oracle=lambda c, xi_mean: Oracle(
            kind="reference_simulation",
            sample=lindley_reference_sampler(c, xi_mean),
            describe="running maximum of the drifted random walk",
        ),
        oracle_kind="reference_simulation",
        scan={"param": "c", "bracket": (0.5, 2.0), "direction": "converges_above"},
        notes="queueing recursion max(0, X + xi - c)",
    )
)


# ---------------------------------------------------------------------------
# Galton-Watson family


def _build_gw_height(n_law: str, n_arg: float) -> RdeSpec:
    draw_n = offspring_sampler(n_law, n_arg)

    def apply(noise, cv):
        return 1.0 + np.maximum(_masked_max(cv, noise["mask"]), 0.0)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=draw_n, apply=apply),
        monotone=True,
        gw=GwKernel(draw_n=draw_n, op="max", term=lambda edge, vals: vals,
                    node_value=lambda node, reduced: 1.0 + np.maximum(reduced, 0.0)),
        offspring_mean=offspring_mean(n_law, n_arg),
        meta={"id": "gw_height", "params": {"n_law": n_law, "n_arg": n_arg}, "ref": "Eq (23)"},
    )


def gw_height_cdf_table(n_law: str, n_arg: float, tail: float = 1e-12, k_cap: int = 100_000) -> np.ndarray:
    """CDF table F[k] = P(H <= k) from the generating-function recursion
    F_k = pgf(F_{k-1}), F_0 = 0."""
    pgf = offspring_pgf(n_law, n_arg)
    table = [0.0]
    while 1.0 - table[-1] > tail and len(table) < k_cap:
        table.append(float(pgf(table[-1])))
    return np.asarray(table)


def _gw_height_oracle(n_law: str, n_arg: float) -> Oracle:
    table = gw_height_cdf_table(n_law, n_arg)

    def cdf(x):
        k = np.clip(np.floor(np.asarray(x, dtype=float)).astype(int), -1, len(table) - 1)
        return np.where(k < 0, 0.0, table[np.maximum(k, 0)])

    def atom(x):
        xv = np.asarray(x, dtype=float)
        k = np.floor(xv).astype(int)
        integer = np.isclose(xv, k)
        k = np.clip(k, 0, len(table) - 1)
        prev = np.where(k >= 1, table[np.maximum(k - 1, 0)], 0.0)
        return np.where(integer & (k >= 1), table[k] - prev, 0.0)

    def sample(rng, n):
        u = rng.random(n)
        return np.searchsorted(table, u, side="left").astype(float)

    return Oracle(kind="closed_cdf", cdf=cdf, atom=atom, sample=sample,
                  describe="generating-function recursion for the extinction time")


_register(
    CatalogEntry(
        id="gw_height",
        ref="Eq (23)",
        params={"n_law": ParamSpec("bernoulli", kind="choice", choices=("bernoulli", "poisson", "fixed")),
                "n_arg": ParamSpec(0.5, lo=0.0, hi=100.0)},
        build=_build_gw_height,
        oracle=_gw_height_oracle,
        oracle_kind="closed_cdf",
        scan={"param": "n_arg", "bracket": (0.5, 1.6), "direction": "converges_below",
              "fixed": {"n_law": "poisson"}},
        notes="1 + max of children heights; empty max = 0",
    )
)


def _build_gw_progeny(n_law: str, n_arg: float) -> RdeSpec:
    draw_n = offspring_sampler(n_law, n_arg)

    def apply(noise, cv):
        return 1.0 + np.where(noise["mask"], cv, 0.0).sum(axis=1)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=draw_n, apply=apply),
        monotone=True,
        gw=GwKernel(draw_n=draw_n, op="sum", term=lambda edge, vals: vals,
                    node_value=lambda node, reduced: 1.0 + reduced),
        offspring_mean=offspring_mean(n_law, n_arg),
        meta={"id": "gw_progeny", "params": {"n_law": n_law, "n_arg": n_arg}, "ref": "Example 1"},
    )


_register(
    CatalogEntry(
        id="gw_progeny",
        ref="Example 1",
        params={"n_law": ParamSpec("bernoulli", kind="choice", choices=("bernoulli", "poisson", "fixed")),
                "n_arg": ParamSpec(0.5, lo=0.0, hi=0.999)},
        build=_build_gw_progeny,
        oracle=lambda n_law, n_arg: Oracle(
            kind="constant",
            constant=1.0 / (1.0 - offspring_mean(n_law, n_arg)),
            describe="mean total progeny 1/(1 - E N)",
        ),
        oracle_kind="constant",
        notes="total branching population",
    )
)


def _build_gw_matching(n_law: str, n_arg: float, nu: str, nu_arg: float) -> RdeSpec:
    draw_n = offspring_sampler(n_law, n_arg)
    weight = child_weight_sampler(nu, nu_arg)

    def apply(noise, cv):
        return np.maximum(_masked_max(noise["xi"] - cv, noise["mask"]), 0.0)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=draw_n, apply=apply, child_noise={"xi": weight}),
        gw=GwKernel(draw_n=draw_n, op="max", term=lambda edge, vals: edge - vals,
                    node_value=lambda node, reduced: np.maximum(reduced, 0.0),
                    draw_edge=lambda rng, n: weight(rng, n)),
        offspring_mean=offspring_mean(n_law, n_arg),
        meta={"id": "gw_matching", "params": {"n_law": n_law, "n_arg": n_arg, "nu": nu, "nu_arg": nu_arg},
              "ref": "Eq (51)"},
    )


def gw_matching_c() -> float:
    """Positive root of c^2 + e^{-c} = 1."""
    return solve_root(lambda c: c * c + math.exp(-c) - 1.0, (0.1, 2.0))


def gw_matching_bern_x(p: float) -> float:
    """Root of x = e^{-p x}; the fixed point is Bern(1 - x)."""
    return solve_root(lambda x: x - math.exp(-p * x), (1e-9, 1.0))


def _gw_matching_oracle(n_law: str, n_arg: float, nu: str, nu_arg: float) -> Oracle:
    if not (n_law == "poisson" and abs(n_arg - 1.0) < 1e-12):
        raise ValueError("closed-form oracle needs Poisson(1) offspring")
    if nu == "exp":
        if abs(nu_arg - 1.0) > 1e-12:
            raise ValueError("closed-form oracle needs mean-1 exponential weights")
        c = gw_matching_c()

        def cdf(x):
            xv = np.asarray(x, dtype=float)
            return np.where(xv < 0, 0.0, np.exp(-c * np.exp(-np.maximum(xv, 0.0))))

        def atom(x):
            xv = np.asarray(x, dtype=float)
            return np.where(xv == 0.0, math.exp(-c), 0.0)

        def sample(rng, n):
            u = rng.random(n)
            return np.maximum(0.0, -np.log(-np.log(u) / c))

        return Oracle(kind="closed_cdf", cdf=cdf, atom=atom, sample=sample, constant=c,
                      describe="double-exponential law exp(-c e^{-x})")
    if nu == "bern":
        x = gw_matching_bern_x(nu_arg)

        def cdf(v):
            vv = np.asarray(v, dtype=float)
            return np.where(vv < 0, 0.0, np.where(vv < 1.0, x, 1.0))

        def atom(v):
            vv = np.asarray(v, dtype=float)
            return np.where(vv == 0.0, x, np.where(vv == 1.0, 1.0 - x, 0.0))

        def sample(rng, n):
            return (rng.random(n) < 1.0 - x) * 1.0

        return Oracle(kind="closed_cdf", cdf=cdf, atom=atom, sample=sample, constant=1.0 - x,
                      describe="Bernoulli(1 - x), x = e^{-p x}")
    raise ValueError(f"no oracle for weight law {nu!r}")


_register(
    CatalogEntry(
        id="gw_matching",
        ref="Eq (51)",
        params={"n_law": ParamSpec("poisson", kind="choice", choices=("bernoulli", "poisson", "fixed")),
                "n_arg": ParamSpec(1.0, lo=0.0, hi=1.0),
                "nu": ParamSpec("exp", kind="choice", choices=("exp", "bern")),
                "nu_arg": ParamSpec(1.0, lo=0.0, hi=100.0)},
        build=_build_gw_matching,
        oracle=_gw_matching_oracle,
        oracle_kind="closed_cdf",
        notes="maximum-weight partial matching increment on a branching tree",
    )
)


def _build_gw_matching_z(nu: str, nu_arg: float, x_pool) -> RdeSpec:
    if not isinstance(x_pool, SamplePool):
        raise ValueError("gw_matching_Z needs the frozen fixed-point pool of gw_matching as x_pool")
    weight = child_weight_sampler(nu, nu_arg)
    x_values = x_pool.values

    def draw_x(rng, n):
        return x_values[rng.integers(0, x_values.shape[0], size=n)]

    def apply(noise, cv):
        return np.maximum(noise["x"], noise["xi"] - cv[:, 0])

    kernel = BoundedKernel(
        draw_arity=lambda rng, n: np.ones(n, np.int64),
        apply=apply,
        extra_noise={"x": draw_x, "xi": lambda rng, n: weight(rng, n)},
    )
    return RdeSpec(
        state=SCALAR_POS,
        kernel=kernel,
        meta={"id": "gw_matching_Z", "params": {"nu": nu, "nu_arg": nu_arg}, "ref": "Theorem 41"},
    )


def matching_z_quadrature() -> dict:
    """Closed-form-by-quadrature companion for the Poisson(1)/Exp(1) case.

    With F_X(x) = exp(-c e^{-x}), the auxiliary law solves
    h(z) = F_X(z) (1 - beta e^{-z}) with beta = E e^{-Z} fixed by
    self-consistency; the matching limit is E[(1 + X + Z) e^{-(X+Z)}] with
    X, Z independent.
    """
    c = gw_matching_c()

    def fx(x):
        return math.exp(-c * math.exp(-x))

    def fx_density(x):
        return c * math.exp(-x) * fx(x)

    def beta_map(beta):
        def hz_density(z):
            return math.exp(-z) * fx(z) * (c * (1.0 - beta * math.exp(-z)) + beta)

        atom0 = fx(0.0) * (1.0 - beta)
        integral, _ = integrate.quad(lambda z: math.exp(-z) * hz_density(z), 0.0, 60.0, limit=200)
        return atom0 + integral

    beta = solve_root(lambda b: beta_map(b) - b, (1e-6, 1.0 - 1e-6), tol=1e-12)

    def hz_density(z):
        return math.exp(-z) * fx(z) * (c * (1.0 - beta * math.exp(-z)) + beta)

    atom0 = fx(0.0) * (1.0 - beta)
    # E[e^{-X}], E[X e^{-X}] and the analogous Z moments
    e_ex = fx(0.0) + integrate.quad(lambda x: math.exp(-x) * fx_density(x), 0.0, 60.0, limit=200)[0]
    e_xex = integrate.quad(lambda x: x * math.exp(-x) * fx_density(x), 0.0, 60.0, limit=200)[0]
    e_ez = atom0 + integrate.quad(lambda z: math.exp(-z) * hz_density(z), 0.0, 60.0, limit=200)[0]
    e_zez = integrate.quad(lambda z: z * math.exp(-z) * hz_density(z), 0.0, 60.0, limit=200)[0]
    constant = e_ex * e_ez + e_xex * e_ez + e_ex * e_zez
    return {"beta": beta, "constant": constant, "c": c}


def matching_z_constant_mc(x_pool: SamplePool, z_pool: SamplePool, n: int, seed: int,
                           nu: str = "exp", nu_arg: float = 1.0) -> float:
    """Monte Carlo of E[xi 1(xi > X + Z)] with independent draws."""
    from .rng import substream

    rng = substream(seed, "matching-limit")
    xs = x_pool.values[rng.integers(0, x_pool.size, size=n)]
    zs = z_pool.values[rng.integers(0, z_pool.size, size=n)]
    xi = child_weight_sampler(nu, nu_arg)(rng, n)
    return float(np.mean(xi * (xi > xs + zs)))


_register(
    CatalogEntry(
        id="gw_matching_Z",
        ref="Theorem 41",
        params={"nu": ParamSpec("exp", kind="choice", choices=("exp", "bern")),
                "nu_arg": ParamSpec(1.0, lo=0.0, hi=100.0),
                "x_pool": ParamSpec(None, kind="pool")},
        build=_build_gw_matching_z,
        oracle=lambda nu, nu_arg, x_pool=None: Oracle(
            kind="constant", constant=matching_z_quadrature()["constant"],
            describe="matching limit E[xi 1(xi > X + Z)] by quadrature",
        ) if nu == "exp" and abs(nu_arg - 1.0) < 1e-12 else None,
        oracle_kind="constant",
        notes="auxiliary recursion Z = max(X, xi - Z); build the gw_matching pool first",
    )
)


def _build_gw_indep_set(n_law: str, n_arg: float, nu: str, nu_arg: float) -> RdeSpec:
    draw_n = offspring_sampler(n_law, n_arg)
    weight = child_weight_sampler(nu, nu_arg)

    def apply(noise, cv):
        return np.maximum(noise["xi0"] - np.where(noise["mask"], cv, 0.0).sum(axis=1), 0.0)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=draw_n, apply=apply,
                             extra_noise={"xi0": lambda rng, n: weight(rng, n)}),
        gw=GwKernel(draw_n=draw_n, op="sum", term=lambda edge, vals: vals,
                    node_value=lambda node, reduced: np.maximum(node - reduced, 0.0),
                    draw_node=lambda rng, n: weight(rng, n)),
        offspring_mean=offspring_mean(n_law, n_arg),
        meta={"id": "gw_indep_set", "params": {"n_law": n_law, "n_arg": n_arg, "nu": nu, "nu_arg": nu_arg},
              "ref": "Eq (52)"},
    )


_register(
    CatalogEntry(
        id="gw_indep_set",
        ref="Eq (52)",
        params={"n_law": ParamSpec("poisson", kind="choice", choices=("bernoulli", "poisson", "fixed")),
                "n_arg": ParamSpec(1.0, lo=0.0, hi=1.0),
                "nu": ParamSpec("exp", kind="choice", choices=("exp", "bern")),
                "nu_arg": ParamSpec(1.0, lo=0.0, hi=100.0)},
        build=_build_gw_indep_set,
        notes="maximum-weight independent set increment",
    )
)


# ---------------------------------------------------------------------------
# quicksort


def quicksort_toll(u: np.ndarray) -> np.ndarray:
    """Toll C(u) = 1 + 2u log u + 2(1-u) log(1-u), continuous at 0 and 1."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(u > 0, u * np.log(u), 0.0)
        b = np.where(u < 1, (1.0 - u) * np.log1p(-u), 0.0)
    return 1.0 + 2.0 * (a + b)


def quicksort_second_moment() -> float:
    """Variance of the centered solution: 3 E[C(U)^2] by quadrature."""
    val, _err = integrate.quad(lambda u: quicksort_toll(u) ** 2, 0.0, 1.0, limit=200)
    return 3.0 * val


def _build_quicksort() -> RdeSpec:
    def apply(noise, cv):
        u = noise["u"]
        return u * cv[:, 0] + (1.0 - u) * cv[:, 1] + quicksort_toll(u)

    return RdeSpec(
        state=SCALAR_REAL,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"u": lambda rng, n: rng.random(n)}),
        meta={"id": "quicksort", "params": {}, "ref": "Eq (21)"},
    )


_register(
    CatalogEntry(
        id="quicksort",
        ref="Eq (21)",
        params={"which": ParamSpec("second_moment", kind="choice", choices=("mean", "second_moment"))},
        build=lambda which="second_moment": _build_quicksort(),
        oracle=lambda which="second_moment": Oracle(
            kind="constant",
            constant=0.0 if which == "mean" else quicksort_second_moment(),
            describe="centered solution moments",
        ),
        oracle_kind="constant",
        notes="U X1 + (1-U) X2 + C(U); solutions form a Cauchy convolution family",
    )
)


# ---------------------------------------------------------------------------
# discounted tree sums and relatives


def _build_find_worstcase() -> RdeSpec:
    def apply(noise, cv):
        u = noise["u"]
        return 1.0 + np.maximum(u * cv[:, 0], (1.0 - u) * cv[:, 1])

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"u": lambda rng, n: rng.random(n)}),
        monotone=True,
        meta={"id": "find_worstcase", "params": {}, "ref": "Eq (42)",
              "discount_closed": lambda p: 2.0 / (p + 1.0),
              "discount_weights": lambda rng, n: np.stack([rng.random(n)], axis=1)},
    )


_register(
    CatalogEntry(
        id="find_worstcase",
        ref="Eq (42)",
        params={},
        build=_build_find_worstcase,
        notes="worst-case selection cost 1 + max(U X1, (1-U) X2)",
    )
)


def _build_discounted_brw(c: float, eta_mean: float) -> RdeSpec:
    def apply(noise, cv):
        return noise["eta"] + c * np.maximum(cv[:, 0], cv[:, 1])

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"eta": lambda rng, n: rng.exponential(scale=eta_mean, size=n)}),
        monotone=True,
        meta={"id": "discounted_brw", "params": {"c": c, "eta_mean": eta_mean}, "ref": "Eq (43)",
              "discount_closed": lambda p: 2.0 * c**p},
    )


_register(
    CatalogEntry(
        id="discounted_brw",
        ref="Eq (43)",
        params={"c": ParamSpec(0.5, lo=1e-9, hi=1.0 - 1e-9), "eta_mean": ParamSpec(1.0, lo=1e-9)},
        build=_build_discounted_brw,
        notes="eta + c max(X1, X2)",
    )
)


def _build_perc_min(c: float, eta_mean: float) -> RdeSpec:
    def apply(noise, cv):
        return noise["eta"] + c * np.minimum(cv[:, 0], cv[:, 1])

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"eta": lambda rng, n: rng.exponential(scale=eta_mean, size=n)}),
        monotone=True,
        meta={"id": "perc_min", "params": {"c": c, "eta_mean": eta_mean}, "ref": "Eq (49)",
              "discount_closed": lambda p: 2.0 * c**p},
    )


_register(
    CatalogEntry(
        id="perc_min",
        ref="Eq (49)",
        params={"c": ParamSpec(0.5, lo=1e-9, hi=1.0 - 1e-9), "eta_mean": ParamSpec(1.0, lo=1e-9)},
        build=_build_perc_min,
        notes="eta + c min(X1, X2): percolation-to-infinity time",
    )
)


def _build_species_extinction() -> RdeSpec:
    kernel = PoissonKernel(
        fold=MaxDiscountFold(add_extra="eta"),
        extra_noise={"eta": lambda rng, n: rng.exponential(size=n)},
        k0=24,
    )
    return RdeSpec(
        state=SCALAR_POS,
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive", note="stop once e^{-xi} max(pool) <= running max"),
        monotone=True,
        meta={"id": "species_extinction", "params": {}, "ref": "Eq (44)",
              "discount_closed": lambda p: 1.0 / p},
    )


_register(
    CatalogEntry(
        id="species_extinction",
        ref="Eq (44)",
        params={},
        build=_build_species_extinction,
        notes="eta + max_i e^{-xi_i} X_i over a rate-1 point process",
    )
)


def _build_species_extinction_hom(a: float) -> RdeSpec:
    kernel = PoissonKernel(fold=MaxDiscountFold(), k0=24)
    return RdeSpec(
        state=SCALAR_POS,
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive", note="stop once e^{-xi} max(pool) <= running max"),
        monotone=True,
        meta={"id": "species_extinction_hom", "params": {"a": a}, "ref": "Eq (45)",
              "discount_closed": lambda p: 1.0 / p},
    )


def _species_hom_oracle(a: float) -> Oracle:
    def cdf(x):
        xv = np.asarray(x, dtype=float)
        return np.where(xv <= 0, 0.0, xv / (a + xv)) if a > 0 else np.where(xv >= 0, 1.0, 0.0)

    def sample(rng, n):
        u = rng.random(n)
        return a * u / (1.0 - u)

    return Oracle(kind="closed_cdf", cdf=cdf, sample=sample,
                  describe="one-parameter family x/(a+x)")


_register(
    CatalogEntry(
        id="species_extinction_hom",
        ref="Eq (45)",
        params={"a": ParamSpec(1.0, lo=0.0, hi=1e9)},
        build=_build_species_extinction_hom,
        oracle=_species_hom_oracle,
        oracle_kind="closed_cdf",
        notes="homogeneous variant; `a` selects the oracle family member",
    )
)


# ---------------------------------------------------------------------------
# branching random walk family (finite-arity kernels over a BrwSpec)


def _brw_kernel(brw: brw_mod.BrwSpec, apply):
    return BoundedKernel(
        draw_arity=brw.draw_n,
        apply=apply,
        child_noise={"xi": brw.draw_disp},
    )


def _build_brw_range(disp: str, disp_p: float, disp_mu: float, disp_sigma: float,
                     n_law: str, n_arg: float) -> RdeSpec:
    brw = brw_mod.BrwSpec.make(n_law, n_arg, disp, disp_p, disp_mu, disp_sigma)

    def apply(noise, cv):
        return np.maximum(_masked_max(cv + noise["xi"], noise["mask"]), 0.0)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=_brw_kernel(brw, apply),
        monotone=True,
        offspring_mean=brw.offspring_mean,
        meta={"id": "brw_range", "params": brw.describe(), "ref": "Eq (25)", "brw": brw},
    )


_BRW_PARAMS = {
    "disp": ParamSpec("pm1", kind="choice", choices=("pm1", "normal", "const")),
    "disp_p": ParamSpec(0.3, lo=0.0, hi=1.0),
    "disp_mu": ParamSpec(0.0),
    "disp_sigma": ParamSpec(1.0, lo=0.0),
    "n_law": ParamSpec("fixed", kind="choice", choices=("fixed", "poisson", "bernoulli")),
    "n_arg": ParamSpec(2.0, lo=0.0, hi=100.0),
}


_register(
    CatalogEntry(
        id="brw_range",
        ref="Eq (25)",
        params=dict(_BRW_PARAMS, disp_p=ParamSpec(0.03, lo=0.0, hi=1.0)),
        build=_build_brw_range,
        oracle=lambda **kw: Oracle(
            kind="reference_simulation",
            sample=brw_mod.range_reference_sampler(
                brw_mod.BrwSpec.make(kw["n_law"], kw["n_arg"], kw["disp"], kw["disp_p"],
                                     kw["disp_mu"], kw["disp_sigma"])),
            describe="rightmost position ever, by direct simulation",
        ),
        oracle_kind="reference_simulation",
        notes="max(0, max_i(X_i + xi_i)); needs drift < 0 or certain extinction",
    )
)


def _build_brw_greedy_l(disp_p: float) -> RdeSpec:
    brw = brw_mod.BrwSpec.make("fixed", 2, "pm1", disp_p, 0.0, 1.0)

    def apply(noise, cv):
        return np.minimum(0.0, (cv + noise["xi"]).max(axis=1))

    return RdeSpec(
        state=StateSpace(kind="scalar", upper=0.0),
        kernel=_brw_kernel(brw, apply),
        meta={"id": "brw_greedy_L", "params": {"disp_p": disp_p}, "ref": "Eq (34)", "brw": brw},
    )


def greedy_p_crit() -> float:
    """Smaller root of 16 p (1 - p) = 1."""
    return solve_root(lambda p: 16.0 * p * (1.0 - p) - 1.0, (1e-9, 0.5))


_register(
    CatalogEntry(
        id="brw_greedy_L",
        ref="Eq (34)",
        params={"disp_p": ParamSpec(0.3, lo=0.0, hi=1.0)},
        build=_build_brw_greedy_l,
        oracle=lambda disp_p: Oracle(kind="root_equation", constant=greedy_p_crit(),
                                     describe="critical bias of the +-1 binary walk"),
        oracle_kind="root_equation",
        notes="leftmost queried position for the greedy frontier search",
    )
)


def _build_brw_extreme(gamma: float, disp: str, disp_p: float, disp_mu: float,
                       disp_sigma: float, n_law: str, n_arg: float) -> RdeSpec:
    brw = brw_mod.BrwSpec.make(n_law, n_arg, disp, disp_p, disp_mu, disp_sigma)
    if brw.offspring_min < 1:
        raise ValueError("brw_extreme needs offspring >= 1 almost surely")

    def apply(noise, cv):
        return -gamma + _masked_max(cv + noise["xi"], noise["mask"])

    return RdeSpec(
        state=SCALAR_REAL,
        kernel=_brw_kernel(brw, apply),
        meta={"id": "brw_extreme", "params": dict(brw.describe(), gamma=gamma), "ref": "Eq (54)", "brw": brw},
    )


_register(
    CatalogEntry(
        id="brw_extreme",
        ref="Eq (54)",
        params=dict(_BRW_PARAMS, gamma=ParamSpec(0.7)),
        build=_build_brw_extreme,
        notes="centered extreme recursion; convergence reported empirically",
    )
)


# ---------------------------------------------------------------------------
# frozen percolation


def _build_frozen_perc(x0: float = 1.0) -> RdeSpec:
    def apply(noise, cv):
        m = np.minimum(cv[:, 0], cv[:, 1])
        return np.where(m > noise["u"], m, np.inf)

    return RdeSpec(
        state=StateSpace(kind="scalar", lower=0.5, upper=1.0, allows_inf=True),
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"u": lambda rng, n: rng.random(n)}),
        default_init=lambda rng, n: rng.uniform(0.5, 1.0, size=n),
        meta={"id": "frozen_perc", "params": {"x0": x0}, "ref": "Eq (67)"},
    )


def frozen_perc_oracle(x0: float = 1.0) -> Oracle:
    if not 0.5 < x0 <= 1.0:
        raise ValueError("x0 must lie in (1/2, 1]")
    inf_atom = 1.0 / (2.0 * x0)

    def cdf(y):
        yv = np.asarray(y, dtype=float)
        out = np.where(yv < 0.5, 0.0, 1.0 - 1.0 / (2.0 * np.clip(yv, 0.5, x0)))
        return out

    def sample(rng, n):
        u = rng.random(n)
        finite = u < 1.0 - inf_atom
        vals = np.where(finite, 1.0 / (2.0 * (1.0 - np.minimum(u, 1.0 - inf_atom - 1e-15))), np.inf)
        return vals

    return Oracle(kind="closed_cdf", cdf=cdf, inf_atom=inf_atom, sample=sample,
                  describe="density 1/(2y^2) on [1/2, x0] plus an atom at infinity")


_register(
    CatalogEntry(
        id="frozen_perc",
        ref="Eq (67)",
        params={"x0": ParamSpec(1.0, lo=0.5 + 1e-9, hi=1.0)},
        build=_build_frozen_perc,
        oracle=frozen_perc_oracle,
        oracle_kind="closed_cdf",
        notes="join-time law on [1/2,1] U {inf}; x0 selects the oracle family member",
    )
)


# ---------------------------------------------------------------------------
# mean-field optimization family


def _build_meanfield_subtree(c: float) -> RdeSpec:
    kernel = PoissonKernel(fold=SumPositiveFold(c), k0=32)
    return RdeSpec(
        state=SCALAR_POS,
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive", note="terms vanish once xi > c + max(pool)"),
        monotone=True,
        meta={"id": "meanfield_subtree", "params": {"c": c}, "ref": "Eq (77)"},
    )


_register(
    CatalogEntry(
        id="meanfield_subtree",
        ref="Eq (77)",
        params={"c": ParamSpec(0.2, lo=0.0, hi=1.0)},
        build=_build_meanfield_subtree,
        scan={"param": "c", "bracket": (math.exp(-2.0), math.exp(-1.0)), "direction": "converges_below"},
        notes="compensated subtree weight; critical c separates existence",
    )
)


def _build_meanfield_matching(d: float) -> RdeSpec:
    kernel = PoissonKernel(fold=MinTermsFold(), rate_dim=d, k0=32)
    return RdeSpec(
        state=SCALAR_REAL,
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive", note="stop once xi >= running min + max(pool)"),
        default_init=lambda rng, n: rng.uniform(-1.0, 1.0, size=n),
        meta={"id": "meanfield_matching", "params": {"d": d}, "ref": "Eq (86)"},
    )


def logistic_cdf(x):
    return 1.0 / (1.0 + np.exp(-np.asarray(x, dtype=float)))


def logistic_sampler(rng, n):
    u = rng.random(n)
    return np.log(u) - np.log1p(-u)


def _meanfield_matching_oracle(d: float) -> Oracle:
    if abs(d - 1.0) > 1e-12:
        return Oracle(kind="reference_simulation",
                      describe="no closed form away from pseudo-dimension 1")
    return Oracle(kind="closed_cdf", cdf=logistic_cdf, sample=logistic_sampler,
                  constant=PI2_6, describe="logistic law; matching constant pi^2/6")


_register(
    CatalogEntry(
        id="meanfield_matching",
        ref="Eq (86)",
        params={"d": ParamSpec(1.0, lo=0.05, hi=8.0)},
        build=_build_meanfield_matching,
        oracle=_meanfield_matching_oracle,
        oracle_kind="closed_cdf",
        notes="min_i(xi_i - X_i) over a rate x^{d-1} process",
    )
)


def _build_meanfield_tsp(d: float) -> RdeSpec:
    kernel = PoissonKernel(fold=SecondMinTermsFold(), rate_dim=d, k0=32)
    return RdeSpec(
        state=SCALAR_REAL,
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive",
                                  note="stop once xi >= running second min + max(pool)"),
        default_init=lambda rng, n: rng.uniform(-1.0, 1.0, size=n),
        meta={"id": "meanfield_tsp", "params": {"d": d}, "ref": "Eq (95)"},
    )


_register(
    CatalogEntry(
        id="meanfield_tsp",
        ref="Eq (95)",
        params={"d": ParamSpec(1.0, lo=0.05, hi=8.0)},
        build=_build_meanfield_tsp,
        oracle=lambda d: Oracle(kind="constant", constant=2.04,
                                describe="tour-length limit, itself a numerical value")
        if abs(d - 1.0) < 1e-12 else None,
        oracle_kind="constant",
        notes="second minimum of (xi_i - X_i); tour-length analog of the matching recursion",
    )
)


def _build_near_optimal_matching(lam: float) -> RdeSpec:
    kernel = PoissonKernel(fold=MatchingTripleFold(lam), k0=32)
    return RdeSpec(
        state=StateSpace(kind="vector", dim=3),
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive",
                                  note="argmin and both running minima certified against pool maxima"),
        meta={"id": "near_optimal_matching", "params": {"lam": lam}, "ref": "Eq (96)"},
    )


_register(
    CatalogEntry(
        id="near_optimal_matching",
        ref="Eq (96)",
        params={"lam": ParamSpec(0.1, lo=0.0, hi=10.0)},
        build=_build_near_optimal_matching,
        notes="triple recursion behind the near-optimal-solution exponent study",
    )
)


def _build_tsp_percolation(lam: float) -> RdeSpec:
    kernel = PoissonKernel(fold=TourPairFold(lam), k0=32)
    return RdeSpec(
        state=StateSpace(kind="vector", dim=2),
        kernel=kernel,
        truncation=TruncationRule(kind="adaptive",
                                  note="stop once lam - xi + max(pool X) <= running second max"),
        meta={"id": "tsp_percolation", "params": {"lam": lam}, "ref": "Eq (97)"},
    )


_register(
    CatalogEntry(
        id="tsp_percolation",
        ref="Eq (97)",
        params={"lam": ParamSpec(0.5, lo=0.0, hi=10.0)},
        build=_build_tsp_percolation,
        notes="pair recursion behind the tour percolation function",
    )
)


def _build_fpp_flow(a: float) -> RdeSpec:
    def apply(noise, cv):
        w = cv + noise["xi"] - a
        through = np.minimum(np.minimum(w[:, 1], w[:, 2]), w.sum(axis=1))
        around = np.minimum(0.0, np.minimum(w[:, 0] + w[:, 1], w[:, 0] + w[:, 2]))
        return np.maximum(through - around, 0.0)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 3, np.int64), apply=apply,
                             child_noise={"xi": lambda rng, shape: rng.exponential(size=shape)}),
        meta={"id": "fpp_flow", "params": {"a": a}, "ref": "Eq (98)"},
    )


_register(
    CatalogEntry(
        id="fpp_flow",
        ref="Eq (98)",
        params={"a": ParamSpec(0.5, lo=0.0, hi=1.0)},
        build=_build_fpp_flow,
        notes="flow recursion with three unit-exponential edge times, clamped to [0, inf)",
    )
)


def _build_regular_matching(r: int) -> RdeSpec:
    def apply(noise, cv):
        return np.maximum((noise["xi"] - cv).max(axis=1), 0.0)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, r - 1, np.int64), apply=apply,
                             child_noise={"xi": lambda rng, shape: rng.exponential(size=shape)}),
        meta={"id": "regular_matching", "params": {"r": r}, "ref": "Eq (99)"},
    )


def regular_matching_b(r: int) -> float:
    """Root of b = 1 - (1 - b^r) / (r (1 - b)), via the stable polynomial form."""
    def f(b):
        return b - 1.0 + sum(b**k for k in range(r)) / r

    return solve_root(f, (1e-12, 1.0 - 1e-12))


def regular_matching_limit(r: int) -> float:
    """Matching limit per vertex: two nested exponential integrals."""
    b = regular_matching_b(r)
    first = (r * b ** (r - 1) / 2.0) * integrate.quad(
        lambda t: t * math.exp(-t) * (1.0 - math.exp(-t) * (1.0 - b)) ** (r - 1), 0.0, 80.0, limit=200
    )[0]

    def inner(t):
        val, _ = integrate.quad(
            lambda z: math.exp(-z) * (1.0 - math.exp(-z) * (1.0 - b)) ** (r - 2)
            * (1.0 - math.exp(-(t - z)) * (1.0 - b)) ** (r - 1),
            0.0, t, limit=200,
        )
        return val

    second = (r * (r - 1) * (1.0 - b) / 2.0) * integrate.quad(
        lambda t: t * math.exp(-t) * inner(t), 0.0, 80.0, limit=200
    )[0]
    return first + second


def regular_matching_limit_mc(pool: SamplePool, r: int, n: int, seed: int) -> float:
    """Monte Carlo of the per-vertex indicator formula at the invariant law."""
    from .rng import substream

    rng = substream(seed, "regular-matching-limit")
    xi = rng.exponential(size=(n, r))
    xs = pool.values[rng.integers(0, pool.size, size=(n, r))]
    t = xi - xs
    best = t.argmax(axis=1)
    rows = np.arange(n)
    positive = t[rows, best] > 0
    return float(0.5 * r * np.mean(np.where(positive, xi[rows, best], 0.0)))


_register(
    CatalogEntry(
        id="regular_matching",
        ref="Eq (99)",
        params={"r": ParamSpec(2, kind="int", lo=2, hi=64)},
        build=_build_regular_matching,
        oracle=lambda r: Oracle(kind="root_equation", constant=regular_matching_b(r),
                                describe="zero-mass b of the two-step invariant law"),
        oracle_kind="root_equation",
        notes="two-periodic map: stationarity holds at the level of the squared map",
    )
)


# ---------------------------------------------------------------------------
# discrete toy examples


def noisy_voter_low_root(eps: float) -> float:
    """Minority fixed point p* of p = (1-eps) q(p) + eps (1-q(p))."""
    def f(p):
        q = p**3 + 3.0 * p**2 * (1.0 - p)
        return (1.0 - eps) * q + eps * (1.0 - q) - p

    return solve_root(f, (1e-12, 0.4999))


def _build_noisy_voter(eps: float) -> RdeSpec:
    def apply(noise, cv):
        majority = (cv.sum(axis=1) >= 2.0) * 1.0
        return np.where(noise["flip"] > 0.5, 1.0 - majority, majority)

    return RdeSpec(
        state=BINARY,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 3, np.int64), apply=apply,
                             extra_noise={"flip": _bern_sampler(eps)}),
        default_init=lambda rng, n: (rng.random(n) < 0.5) * 1.0,
        meta={"id": "noisy_voter", "params": {"eps": eps}, "ref": "Example 13"},
    )


_register(
    CatalogEntry(
        id="noisy_voter",
        ref="Example 13",
        params={"eps": ParamSpec(0.1, lo=0.0, hi=0.5)},
        build=_build_noisy_voter,
        oracle=lambda eps: Oracle(kind="root_equation", constant=noisy_voter_low_root(eps),
                                  describe="minority invariant level; 1/2 is always invariant"),
        oracle_kind="root_equation",
        notes="majority of three children, flipped with probability eps",
    )
)


def _build_mod2_shift(q: float) -> RdeSpec:
    def apply(noise, cv):
        pick = np.where(noise["i"] < 0.5, cv[:, 0], cv[:, 1])
        return np.where(noise["xi"] > 0.5, 1.0 - pick, pick)

    return RdeSpec(
        state=BINARY,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"i": _bern_sampler(0.5), "xi": _bern_sampler(q)}),
        default_init=lambda rng, n: (rng.random(n) < 0.5) * 1.0,
        meta={"id": "mod2_shift", "params": {"q": q}, "ref": "Example 10"},
    )


def _bern_half_oracle(q: float) -> Oracle:
    def cdf(v):
        vv = np.asarray(v, dtype=float)
        return np.where(vv < 0, 0.0, np.where(vv < 1.0, 0.5, 1.0))

    def atom(v):
        vv = np.asarray(v, dtype=float)
        return np.where((vv == 0.0) | (vv == 1.0), 0.5, 0.0)

    return Oracle(kind="closed_cdf", cdf=cdf, atom=atom,
                  sample=lambda rng, n: (rng.random(n) < 0.5) * 1.0,
                  describe="fair coin, the unique invariant law")


_register(
    CatalogEntry(
        id="mod2_shift",
        ref="Example 10",
        params={"q": ParamSpec(0.3, lo=1e-6, hi=1.0 - 1e-6)},
        build=_build_mod2_shift,
        oracle=_bern_half_oracle,
        oracle_kind="closed_cdf",
        notes="uniform child plus Bernoulli(q) shift mod 2; unique fixed point, not endogenous",
    )
)


def _build_fractal(p: float) -> RdeSpec:
    def apply(noise, cv):
        lo = 2.0 * np.minimum(cv[:, 0], cv[:, 1])
        hi = 0.5 * np.maximum(cv[:, 0], cv[:, 1])
        return np.where(noise["coin"] > 0.5, hi, lo)

    return RdeSpec(
        state=SCALAR_POS,
        kernel=BoundedKernel(draw_arity=lambda rng, n: np.full(n, 2, np.int64), apply=apply,
                             extra_noise={"coin": _bern_sampler(p)}),
        monotone=True,
        default_init=lambda rng, n: np.ones(n),
        meta={"id": "fractal", "params": {"p": p}, "ref": "Section 8.7"},
    )


_register(
    CatalogEntry(
        id="fractal",
        ref="Section 8.7",
        params={"p": ParamSpec(0.5, lo=0.0, hi=1.0)},
        build=_build_fractal,
        notes="2 min(X1, X2) with probability 1-p, else max(X1, X2)/2",
    )
)
