"""Uniform and sample-conditioned hypothesis stability parameters."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import MAX_TABLE_ROWS, BudgetExceeded
from .engine import ROW, combine_codes


@dataclass
class StabilityReport:
    beta1: float | None
    beta2: float
    gamma1: float | None
    gamma2: float | None
    gamma3: float
    gamma4: float
    methods: dict = field(default_factory=dict)
    n: int = 0
    indices: tuple = ()
    # recorded, not asserted
    gamma4_le_gamma3: bool | None = None
    gamma2_le_gamma4: bool | None = None

    def as_dict(self):
        return {k: getattr(self, k) for k in ("beta1", "beta2", "gamma1", "gamma2", "gamma3", "gamma4")}


@dataclass
class DeltaTables:
    """Per-row tables, each a list over classes of the conditioning variable."""

    delta1: list  # per row: dict key -> value
    delta2: list
    lam: list
    mass1: list  # per row: class masses of the hypothesis pair
    value1: list  # per row: Delta_1 per class
    lam_values: list
    second1: list  # per row: E[gap^2 | pair] per class
    mass2: list
    value2: list

    def expected_delta1(self, i):
        return math.fsum(self.mass1[i - 1] * self.value1[i - 1])

    def expected_delta1_sq(self, i):
        return math.fsum(self.mass1[i - 1] * self.value1[i - 1] ** 2)


def _rows(problem, indices):
    return list(range(1, problem.n + 1)) if indices is None else list(indices)


def _pair_gaps(t):
    """Sup over every instance of the loss gap for each distinct (W+, W-) pair, per row."""
    live = t.w > 0
    wp, wm = t.values["wp_id"], t.values["wm_id"]
    keys = wp.astype(np.int64) * len(t.lossmat) + wm
    uniq, inv = np.unique(keys[live], return_inverse=True)
    a, b = uniq // len(t.lossmat), uniq % len(t.lossmat)
    gaps = np.abs(t.lossmat[a] - t.lossmat[b]).max(axis=1)
    return gaps, uniq


def beta2_exact(problem, indices=None) -> float:
    """Largest loss gap over neighbouring samples, seeds and evaluation points."""
    best = 0.0
    for i in _rows(problem, indices):
        gaps, _ = _pair_gaps(problem.table(ROW, i - 1))
        best = max(best, float(gaps.max()) if gaps.size else 0.0)
    return best


def _product_row_table(problem, i, what):
    limit = min(problem.budget, MAX_TABLE_ROWS)
    rows = problem.product_rows(ROW)
    if rows > limit:
        raise BudgetExceeded(what, rows, limit)
    return problem.table(ROW, i - 1, engine="product")


def beta1_exact(problem, indices=None) -> float:
    """Weak uniform stability: the seed-averaged gap, maximized over neighbours and points."""
    if problem.alg.deterministic:
        return beta2_exact(problem, indices)
    best = 0.0
    for i in _rows(problem, indices):
        t = _product_row_table(problem, i, "beta1")
        sel = t.values["u"] == 0
        pos_names = [f"Zp{j}" for j in range(problem.n)] + ["Zm"]
        group, size = combine_codes([t.vars[k][1][sel] for k in pos_names], int(sel.sum()))
        w = t.w[sel]
        den = np.bincount(group, weights=w, minlength=size)
        diff = np.abs(t.lossmat[t.values["wp_id"][sel]] - t.lossmat[t.values["wm_id"][sel]])
        for k in range(diff.shape[1]):
            num = np.bincount(group, weights=w * diff[:, k], minlength=size)
            best = max(best, float(np.max(num[den > 0] / den[den > 0])))
    return best


def _conditional_neighbor_loss(problem, t):
    """Masses of W+ and ``E[loss(W-, z) | W+]`` for every hypothesis and instance."""
    live = t.w > 0
    wp, wm, w = t.values["wp_id"][live], t.values["wm_id"][live], t.w[live]
    h = len(t.lossmat)
    mass = np.bincount(wp, weights=w, minlength=h)
    cond = np.zeros_like(t.lossmat)
    np.add.at(cond, wp, w[:, None] * t.lossmat[wm])
    ok = mass > 0
    cond[ok] /= mass[ok][:, None]
    return mass / mass.sum(), cond, ok


def gamma1_exact(problem, indices=None) -> float:
    best = 0.0
    for i in _rows(problem, indices):
        t = _product_row_table(problem, i, "gamma1")
        _, cond, ok = _conditional_neighbor_loss(problem, t)
        best = max(best, float(np.abs(t.lossmat[ok] - cond[ok]).max()))
    return best


def gamma2_exact(problem, indices=None) -> float:
    best = 0.0
    for i in _rows(problem, indices):
        t = _product_row_table(problem, i, "gamma2")
        mass, cond, ok = _conditional_neighbor_loss(problem, t)
        sq = ((t.lossmat - cond) ** 2) @ problem.p
        best = max(best, math.fsum(mass[ok] * sq[ok]))
    return math.sqrt(best)


def gamma3_exact(problem, indices=None) -> float:
    """``E sup |loss(W, z_i) - loss(W^i, z_i)|`` with the sup over the training point's support."""
    best = 0.0
    for i in _rows(problem, indices):
        t = problem.table(ROW, i - 1)
        gap = np.abs(t.values["lm_zp"] - t.values["lp_zp"])
        sup = t.group_max(gap, "Wt")
        mass = t.class_mass("Wt") / t.total_mass()
        live = mass > 0
        best = max(best, math.fsum(mass[live] * sup[live]))
    return best


def gamma4_exact(problem, indices=None) -> float:
    best = 0.0
    for i in _rows(problem, indices):
        t = problem.table(ROW, i - 1)
        best = max(best, t.expect((t.values["lm_zp"] - t.values["lp_zp"]) ** 2))
    return math.sqrt(best)


def _class_keys(t, names):
    codes, size, _ = t.classify(names)
    first = np.full(size, -1, dtype=np.int64)
    first[codes[::-1]] = np.arange(len(codes))[::-1]
    return first


def delta_tables(problem, indices=None) -> DeltaTables:
    """Minimal Delta_1 per hypothesis pair, Lambda ratios and minimal Delta_2 per instance."""
    d1, d2, lam, m1, v1, lv, s1, m2, v2 = ([] for _ in range(9))
    for i in _rows(problem, indices):
        t = problem.table(ROW, i - 1)
        total = t.total_mass()
        gap = t.values["gap_hat"]
        mass = t.class_mass("Wt") / total
        sup = np.maximum(t.group_max(np.abs(gap), "Wt"), 0.0)
        second = t.group_mean(gap**2, "Wt")
        ratio = np.where(sup > 0, second / np.where(sup > 0, sup, 1.0) ** 2, 0.0)
        first = _class_keys(t, "Wt")
        stats = t.hyp_stats
        keys = [(tuple(stats[t.values["wp_id"][r]].tolist()), tuple(stats[t.values["wm_id"][r]].tolist()))
                for r in first]
        d1.append({k: float(v) for k, v in zip(keys, sup)})
        lam.append({k: float(v) for k, v in zip(keys, ratio)})
        m1.append(mass)
        v1.append(sup)
        lv.append(ratio)
        s1.append(second)

        zgap = np.abs(t.values["lm_zp"] - t.values["lp_zp"])
        mass2 = t.class_mass("Zp") / total
        sup2 = np.maximum(t.group_max(zgap, "Zp"), 0.0)
        first2 = _class_keys(t, "Zp")
        zkeys = [int(t.vars["Zp"][1][r]) for r in first2]
        if not t.exchangeable:
            zkeys = [problem.dist.support[k] for k in zkeys]
            zkeys = [tuple(np.atleast_1d(z).tolist()) if isinstance(z, np.ndarray) else z for z in zkeys]
        d2.append(dict(zip(zkeys, (float(v) for v in sup2))))
        m2.append(mass2)
        v2.append(sup2)
    return DeltaTables(d1, d2, lam, m1, v1, lv, s1, m2, v2)


def delta1_table(problem, indices=None):
    return delta_tables(problem, indices).delta1


def delta2_table(problem, indices=None):
    return delta_tables(problem, indices).delta2


def lambda_ratio(problem, indices=None):
    return delta_tables(problem, indices).lam


def beta_mc(problem, samples, seed=0) -> float:
    """Random-search lower bound on the strong uniform stability constant.

    Each draw uses its own slice of one uniform block, so the running maximum is
    monotone in ``samples`` for a fixed seed.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    n, k = problem.n, problem.K
    rng = np.random.default_rng(seed)
    u = rng.random((int(samples), n + 4))
    cdf = np.cumsum(problem.p)
    cdf[-1] = 1.0
    pos = np.searchsorted(cdf, u[:, :n], side="right")
    zrep = np.searchsorted(cdf, u[:, n], side="right")
    zeval = np.searchsorted(cdf, u[:, n + 1], side="right")
    row = np.minimum((u[:, n + 2] * n).astype(np.int64), n - 1)
    scdf = np.cumsum(problem.alg.seed_mass)
    scdf[-1] = 1.0
    seeds = problem.alg.seed_values[np.searchsorted(scdf, u[:, n + 3], side="right")]
    alt = pos.copy()
    alt[np.arange(len(pos)), row] = zrep
    s1 = problem.alg.statistic(pos, seeds)
    s2 = problem.alg.statistic(alt, seeds)
    feats = problem.feats[zeval]
    l1 = problem.loss.pointwise(problem.alg.params(s1), feats)
    l2 = problem.loss.pointwise(problem.alg.params(s2), feats)
    return float(np.abs(l1 - l2).max())


def stability_report(problem, indices=None) -> StabilityReport:
    methods = {}
    b2 = beta2_exact(problem, indices)
    methods["beta2"] = "exact"
    g3, g4 = gamma3_exact(problem, indices), gamma4_exact(problem, indices)
    methods["gamma3"] = methods["gamma4"] = "exact"
    out = {}
    for name, fn in (("beta1", beta1_exact), ("gamma1", gamma1_exact), ("gamma2", gamma2_exact)):
        try:
            out[name] = fn(problem, indices)
            methods[name] = "exact"
        except BudgetExceeded:
            out[name] = None
            methods[name] = "unavailable"
    rep = StabilityReport(out["beta1"], b2, out["gamma1"], out["gamma2"], g3, g4, methods, problem.n,
                          tuple(_rows(problem, indices)))
    rep.gamma4_le_gamma3 = bool(g4 <= g3 + 1e-12)
    if out["gamma2"] is not None:
        rep.gamma2_le_gamma4 = bool(out["gamma2"] <= g4 + 1e-12)
    return rep
