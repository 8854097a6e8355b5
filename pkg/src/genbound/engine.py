"""Joint tables over the supersample protocol.

A table is a weighted list of rows.  Each row is one outcome of the primitive
draws (plus column, minus entries, seed, masks) together with everything the
protocol derives from it: hypotheses, evaluation points, loss values and
predictions.  Three row sets are used:

``row``     positions ``Z~+_1..n, Z~-_i``, the seed and the mask bit ``U_i``
``full``    positions ``Z~+_1..n, Z~-_1..n``, the seed and all ``2**n`` masks
``sample``  positions ``Z_1..n`` and the seed

Exact tables come in two flavours.  The product engine enumerates every
tuple of support indices.  The exchangeable engine, available for a uniform
one-hot support and a relabelling-equivariant algorithm, enumerates only the
equality patterns of the positions and corrects every entropy by the size of
the orbit of the observed value under coordinate permutations.
"""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .core import (
    DEFAULT_BUDGET,
    MAX_TABLE_ROWS,
    BudgetExceeded,
    DiscreteDistribution,
    LossFunction,
    fsum_dot,
    product_grid,
    quantize,
)

ROW, FULL, SAMPLE = "row", "full", "sample"


def set_partition_patterns(m):
    """Restricted-growth strings of length ``m`` (one per set partition)."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    rows = np.zeros((1, 1), dtype=np.int64)
    top = np.zeros(1, dtype=np.int64)
    for _ in range(1, m):
        reps = top + 2
        base = np.repeat(rows, reps, axis=0)
        nxt = np.concatenate([np.arange(r) for r in reps])
        rows = np.column_stack([base, nxt])
        top = np.maximum(np.repeat(top, reps), nxt)
    return rows


def pattern_mass(patterns, d):
    """Probability that ``m`` uniform draws from ``d`` labels show each pattern."""
    m = patterns.shape[1]
    blocks = patterns.max(axis=1) + 1 if m else np.zeros(len(patterns), dtype=np.int64)
    logs = np.concatenate([[0.0], np.cumsum(np.log(np.arange(d, 0, -1, dtype=np.float64)))])
    out = np.zeros(len(patterns))
    ok = blocks <= d
    out[ok] = np.exp(logs[blocks[ok]] - m * math.log(d))
    return out


def _compress(code):
    uniq, inv = np.unique(code, return_inverse=True)
    return inv.astype(np.int64), len(uniq)


def combine_codes(arrays, n_rows):
    """Joint integer code of several integer columns, compressed to ``0..G-1``."""
    code = np.zeros(n_rows, dtype=np.int64)
    size = 1
    for a in arrays:
        a = np.asarray(a, dtype=np.int64)
        if a.size and a.min() < 0:
            a = np.unique(a, return_inverse=True)[1].reshape(-1)
        s = int(a.max()) + 1 if a.size else 1
        if size * s >= (1 << 62):
            code, size = _compress(code)
        code = code * s + a
        size *= s
    return _compress(code)


class ProtocolTable:
    """Weighted rows with named random variables.

    Variables are stored as components ``(kind, int array)`` with kind
    ``label`` (an instance), ``hyp`` (a hypothesis id) or ``scalar`` (any
    relabelling-invariant value).  Real-valued columns used for expectations
    live in ``values``.
    """

    def __init__(self, kind, weights, method="exact", exch_d=None, width=None):
        self.kind = kind
        self.w = np.asarray(weights, dtype=np.float64)
        self.method = method
        self.exch_d = exch_d
        self.width = width
        self.vars = {}
        self.alias = {}
        self.values = {}
        self.hyp_stats = None
        self.lossmat = None
        self._classes = {}
        self._entropy = {}

    @property
    def exchangeable(self):
        return self.exch_d is not None

    @property
    def n_rows(self):
        return len(self.w)

    def add(self, name, kind, arr):
        if kind not in ("label", "hyp", "scalar"):
            raise ValueError(kind)
        self.vars[name] = (kind, np.asarray(arr))

    def add_real(self, name, arr, as_variable=True):
        """Store a real column and, optionally, its quantized code as a variable."""
        arr = np.asarray(arr, dtype=np.float64)
        self.values[name] = arr
        if as_variable:
            self.add(name, "scalar", quantize(arr))

    def expand(self, names):
        if isinstance(names, str):
            names = [names]
        out = []
        for nm in names:
            if nm in self.alias:
                out.extend(self.expand(self.alias[nm]))
            elif nm in self.vars:
                out.append(nm)
            else:
                raise KeyError(f"unknown variable {nm!r}; table has {sorted(self.vars) + sorted(self.alias)}")
        # order-insensitive but duplicate-free
        return tuple(sorted(set(out)))

    # -- value classes -----------------------------------------------------

    def classify(self, names):
        """Class code per row, number of classes and log orbit size per class."""
        key = self.expand(names)
        if key in self._classes:
            return self._classes[key]
        if not key:
            res = (np.zeros(self.n_rows, dtype=np.int64), 1, np.zeros(1))
        elif self.exchangeable:
            res = self._classify_exchangeable(key)
        else:
            codes, size = combine_codes([self.vars[k][1] for k in key], self.n_rows)
            res = (codes, size, np.zeros(size))
        self._classes[key] = res
        return res

    def _classify_exchangeable(self, key):
        m = self.width
        n_rows = self.n_rows
        prof = np.zeros((n_rows, m), dtype=np.int64)
        radix = 1
        scalars = []
        cmax = int(self.hyp_stats.max()) + 1 if self.hyp_stats is not None and self.hyp_stats.size else 1
        coords = np.arange(m)
        for name in key:
            kind, arr = self.vars[name]
            if kind == "label":
                prof += (arr[:, None] == coords[None, :]).astype(np.int64) * radix
                radix *= 2
            elif kind == "hyp":
                prof += self.hyp_stats[arr][:, :m].astype(np.int64) * radix
                radix *= cmax
            else:
                scalars.append(np.asarray(arr, dtype=np.int64))
            if radix >= (1 << 62):
                raise OverflowError("too many variables for the exchangeable profile code")
        prof.sort(axis=1)
        keycols = np.column_stack([prof] + [s[:, None] for s in scalars]) if scalars else prof
        _, first, codes = np.unique(keycols, axis=0, return_index=True, return_inverse=True)
        codes = codes.ravel().astype(np.int64)
        lg = np.array([math.lgamma(k + 1.0) for k in range(self.exch_d + 2)])
        nonzero = (prof != 0).sum(axis=1)
        acc = np.zeros(n_rows)
        run = np.ones(n_rows, dtype=np.int64)
        for j in range(1, m):
            same = prof[:, j] == prof[:, j - 1]
            closing = (~same) & (prof[:, j - 1] != 0)
            acc += np.where(closing, lg[run], 0.0)
            run = np.where(same, run + 1, 1)
        if m:
            acc += np.where(prof[:, m - 1] != 0, lg[run], 0.0)
        logorb = lg[self.exch_d] - lg[self.exch_d - nonzero] - acc
        return codes, len(first), logorb[first]

    # -- information primitives --------------------------------------------

    def class_mass(self, names):
        codes, size, _ = self.classify(names)
        return np.bincount(codes, weights=self.w, minlength=size)

    def entropy(self, names):
        key = self.expand(names)
        if key not in self._entropy:
            codes, size, lo = self.classify(key)
            p = np.bincount(codes, weights=self.w, minlength=size) / self.w.sum()
            nz = p > 0
            self._entropy[key] = float(-math.fsum(p[nz] * (np.log(p[nz]) - lo[nz])))
        return self._entropy[key]

    def cond_entropy_each(self, names, by):
        """``(P(b), H(X | B=b))`` for every class ``b`` of ``by``."""
        cj, gj, loj = self.classify(tuple(self.expand(names)) + tuple(self.expand(by)))
        cb, gb, lob = self.classify(by)
        jb = np.zeros(gj, dtype=np.int64)
        jb[cj] = cb
        total = self.w.sum()
        pj = np.bincount(cj, weights=self.w, minlength=gj) / total
        pb = np.bincount(cb, weights=self.w, minlength=gb) / total
        nz = pj > 0
        term = np.zeros(gj)
        term[nz] = -pj[nz] * (np.log(pj[nz] / pb[jb[nz]]) - loj[nz])
        hb = np.zeros(gb)
        ok = pb > 0
        hb[ok] = np.bincount(jb, weights=term, minlength=gb)[ok] / pb[ok] - lob[ok]
        return pb, hb

    def group_max(self, values, by):
        codes, size, _ = self.classify(by)
        out = np.full(size, -np.inf)
        live = self.w > 0
        np.maximum.at(out, codes[live], np.asarray(values)[live])
        return out

    def group_mean(self, values, by):
        codes, size, _ = self.classify(by)
        num = np.bincount(codes, weights=self.w * np.asarray(values, dtype=np.float64), minlength=size)
        den = np.bincount(codes, weights=self.w, minlength=size)
        return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    def expect(self, values):
        return fsum_dot(self.w, values) / math.fsum(self.w)

    def total_mass(self):
        return math.fsum(self.w)

    def bootstrap_entropies(self, name_sets, rng, n_resamples=200):
        """Bootstrap replicates ``(n_resamples, len(name_sets))`` of plug-in entropies."""
        if self.exchangeable:
            raise ValueError("bootstrap applies to sampled tables only")
        codes, sizes = [], []
        for names in name_sets:
            c, s, _ = self.classify(names)
            codes.append(c)
            sizes.append(s)
        return _kernels.bootstrap_coded_entropies(np.array(codes), np.array(sizes), n_resamples, rng)


class Problem:
    """A learning problem: distribution, algorithm, loss and sample size.

    ``engine`` is ``auto`` (product enumeration when it fits, otherwise the
    exchangeable engine when it applies), ``product`` or ``exchangeable``.
    """

    def __init__(self, name, dist: DiscreteDistribution, alg, loss: LossFunction, n: int,
                 budget=DEFAULT_BUDGET, engine="auto", info=None):
        if n < 1:
            raise ValueError("n must be >= 1")
        if engine not in ("auto", "product", "exchangeable"):
            raise ValueError(f"unknown engine {engine!r}")
        self.name = name
        self.dist = dist
        self.alg = alg
        self.loss = loss
        self.n = int(n)
        self.budget = int(budget)
        self.engine = engine
        self.info = dict(info or {})
        self.feats = dist.features()
        self.K = len(dist)
        self.p = dist.mass
        self.exchangeable_ok = bool(alg.exchangeable and dist.kind == "onehot" and dist.is_uniform
                                    and alg.deterministic)
        self._tables = {}

    def __repr__(self):
        return f"Problem({self.name!r}, n={self.n}, |support|={self.K})"

    # -- sizes and engine choice ------------------------------------------

    def positions(self, kind):
        return {ROW: self.n + 1, FULL: 2 * self.n, SAMPLE: self.n}[kind]

    def product_rows(self, kind):
        masks = {ROW: 2, FULL: 2**self.n, SAMPLE: 1}[kind]
        return self.K ** self.positions(kind) * len(self.alg.seed_values) * masks

    def pattern_rows(self, kind):
        from math import comb

        m = self.positions(kind)
        bell = [1]
        for k in range(m):
            bell.append(sum(comb(k, j) * bell[j] for j in range(k + 1)))
        masks = {ROW: 2, FULL: 2**self.n, SAMPLE: 1}[kind]
        return bell[m] * masks

    def choose_engine(self, kind, what=None):
        limit = min(self.budget, MAX_TABLE_ROWS)
        what = what or f"{kind} table"
        rows = self.product_rows(kind)
        if self.engine in ("auto", "product") and rows <= limit:
            return "product"
        if self.engine in ("auto", "exchangeable") and self.exchangeable_ok:
            prow = self.pattern_rows(kind)
            if prow <= limit:
                return "exchangeable"
            raise BudgetExceeded(what, prow, limit)
        if self.engine == "exchangeable":
            raise ValueError("the exchangeable engine needs a uniform one-hot support and an equivariant algorithm")
        raise BudgetExceeded(what, rows, limit)

    # -- table construction -----------------------------------------------

    def table(self, kind, i=None, engine=None):
        """Exact table; ``i`` is the 0-based row for ``row`` tables."""
        engine = engine or self.choose_engine(kind)
        key = (kind, i, engine)
        if key not in self._tables:
            if engine == "product":
                self._tables[key] = self._product_table(kind, i)
            else:
                self._tables[key] = self._exchangeable_table(kind, i)
        return self._tables[key]

    def sampled_table(self, kind, i, samples, seed):
        """Monte Carlo table: ``samples`` i.i.d. protocol draws with equal weights."""
        if samples < 1:
            raise ValueError("need at least one sample")
        key = ("mc", kind, i, int(samples), seed)
        if key in self._tables:
            return self._tables[key]
        rng = np.random.default_rng(seed)
        m = self.positions(kind)
        pos = rng.choice(self.K, size=(samples, m), p=self.p)
        seeds = rng.choice(len(self.alg.seed_values), size=samples, p=self.alg.seed_mass)
        masks = None
        if kind == ROW:
            masks = rng.integers(0, 2, size=(samples, 1))
        elif kind == FULL:
            masks = rng.integers(0, 2, size=(samples, self.n))
        weights = np.full(samples, 1.0 / samples)
        t = self._assemble(kind, i, pos, seeds, weights, masks, method="plugin-mc")
        self._tables[key] = t
        return t

    def _product_table(self, kind, i):
        m = self.positions(kind)
        grid = product_grid(self.K, m)
        mass = np.prod(self.p[grid], axis=1) if m else np.ones(1)
        n_seeds = len(self.alg.seed_values)
        pos = np.repeat(grid, n_seeds, axis=0)
        seeds = np.tile(np.arange(n_seeds), len(grid))
        weights = np.repeat(mass, n_seeds) * np.tile(self.alg.seed_mass, len(grid))
        return self._assemble(kind, i, pos, seeds, weights, None, method="exact")

    def _exchangeable_table(self, kind, i):
        m = self.positions(kind)
        pat = set_partition_patterns(m)
        mass = pattern_mass(pat, self.K)
        keep = mass > 0
        pat, mass = pat[keep], mass[keep]
        seeds = np.zeros(len(pat), dtype=np.int64)
        return self._assemble(kind, i, pat, seeds, mass, None, method="exact", exch_width=m)

    def _hypotheses(self, stat_blocks, exch_width):
        """Register hypotheses; returns ids per block, stats, params, loss and prediction matrices."""
        allstats = np.vstack(stat_blocks)
        uniq, inv = np.unique(allstats, axis=0, return_inverse=True)
        inv = inv.ravel()
        ids, start = [], 0
        for b in stat_blocks:
            ids.append(inv[start:start + len(b)])
            start += len(b)
        if exch_width is None:
            params = self.alg.params(uniq)
            feats = self.feats
        else:
            # one extra coordinate stands for every label outside the pattern
            padded = np.column_stack([uniq, np.zeros(len(uniq), dtype=uniq.dtype)])
            params = self.alg.params(padded)
            feats = np.eye(exch_width + 1)
        lossmat = self.loss.matrix(params, feats)
        pred = self.alg.predict(params, feats) if self.alg.predicts else None
        return ids, uniq, params, lossmat, pred

    def population_risks(self, lossmat, exch_width=None):
        if exch_width is None:
            return lossmat @ self.p
        d = self.K
        return (lossmat[:, :exch_width].sum(axis=1) + (d - exch_width) * lossmat[:, exch_width]) / d

    def _assemble(self, kind, i, pos, seeds, weights, masks, method, exch_width=None):
        n = self.n
        alg = self.alg
        sv = alg.seed_values[seeds]
        t = ProtocolTable(kind, weights, method=method,
                          exch_d=self.K if exch_width is not None else None, width=exch_width)
        if kind == SAMPLE:
            (wp,), stats, params, lossmat, pred = self._hypotheses([alg.statistic(pos, sv, exch_width)], exch_width)
            t.hyp_stats, t.lossmat, t.params = stats, lossmat, params
            t.add("Wp", "hyp", wp)
            t.add("R", "scalar", seeds)
            for j in range(n):
                t.add(f"Zp{j}", "label", pos[:, j])
            t.alias["S"] = [f"Zp{j}" for j in range(n)]
            t.alias["W"] = ["Wp"]
            t.values["pop_risk"] = self.population_risks(lossmat, exch_width)[wp]
            t.values["emp_risk"] = lossmat[wp[:, None], pos].mean(axis=1)
            t.values["wp_id"] = wp
            return t

        if kind == ROW:
            zp, zm = pos[:, :n], pos[:, n]
            zn = zp.copy()
            zn[:, i] = zm
            (wp, wm), stats, params, lossmat, pred = self._hypotheses(
                [alg.statistic(zp, sv, exch_width), alg.statistic(zn, sv, exch_width)], exch_width)
            if masks is None:
                # analytic mask average: every outcome appears once per mask bit
                rep = lambda a: np.concatenate([a, a])
                zp, zm, wp, wm, seeds = rep(zp), rep(zm), rep(wp), rep(wm), rep(seeds)
                u = np.repeat(np.array([0, 1]), len(weights))
                t.w = rep(t.w) * 0.5
            else:
                u = masks[:, 0]
            t.hyp_stats, t.lossmat, t.params = stats, lossmat, params
            zi = zp[:, i]
            w_sel = np.where(u == 0, wp, wm)
            w_bar = np.where(u == 0, wm, wp)
            zhat = np.where(u == 0, zi, zm)
            for j in range(n):
                t.add(f"Zp{j}", "label", zp[:, j])
            t.add("Zp", "label", zi)
            t.add("Zm", "label", zm)
            t.add("Zhat", "label", zhat)
            t.add("Wp", "hyp", wp)
            t.add("Wm", "hyp", wm)
            t.add("W", "hyp", w_sel)
            t.add("Wbar", "hyp", w_bar)
            t.add("U", "scalar", u)
            t.add("R", "scalar", seeds)
            t.alias.update({"Wt": ["Wp", "Wm"], "Zt": ["Zp", "Zm"], "S": [f"Zp{j}" for j in range(n)]})
            lp_zp, lm_zp = lossmat[wp, zi], lossmat[wm, zi]
            lp_zm, lm_zm = lossmat[wp, zm], lossmat[wm, zm]
            t.values.update(lp_zp=lp_zp, lm_zp=lm_zp, lp_zm=lp_zm, lm_zm=lm_zm,
                            wp_id=wp, wm_id=wm, u=u)
            t.values["gap_hat"] = np.where(u == 0, lm_zp - lp_zp, lm_zm - lp_zm)
            loss_w = np.where(u == 0, lp_zp, lm_zp)
            loss_wbar = np.where(u == 0, lm_zp, lp_zp)
            t.add_real("L", loss_w)
            t.add_real("Lbar", loss_wbar)
            t.add_real("DL", loss_w - loss_wbar)
            if pred is not None:
                t.add("F", "scalar", pred[w_sel, zi])
                t.add("Fbar", "scalar", pred[w_bar, zi])
            return t

        # full table: every row and every mask
        zp, zm = pos[:, :n], pos[:, n:]
        blocks = [alg.statistic(zp, sv, exch_width)]
        for j in range(n):
            zn = zp.copy()
            zn[:, j] = zm[:, j]
            blocks.append(alg.statistic(zn, sv, exch_width))
        ids, stats, params, lossmat, pred = self._hypotheses(blocks, exch_width)
        wp, wms = ids[0], ids[1:]
        if masks is None:
            mk = product_grid(2, n)
            n_masks = len(mk)
            base = len(weights)
            take = np.repeat(np.arange(base), n_masks)
            zp, zm, wp, seeds = zp[take], zm[take], wp[take], seeds[take]
            wms = [w[take] for w in wms]
            masks = np.tile(mk, (base, 1))
            t.w = np.repeat(t.w, n_masks) / n_masks
        t.hyp_stats, t.lossmat, t.params = stats, lossmat, params
        small = np.int32 if t.n_rows < (1 << 31) else np.int64
        t.add("Wp", "hyp", wp.astype(small))
        t.add("R", "scalar", seeds)
        ucode = (masks * (1 << np.arange(n))).sum(axis=1)
        t.add("U", "scalar", ucode)
        gaps = []
        for j in range(n):
            uj = masks[:, j]
            zhat = np.where(uj == 0, zp[:, j], zm[:, j])
            t.add(f"Wm{j}", "hyp", wms[j].astype(small))
            t.add(f"Zhat{j}", "label", zhat.astype(small))
            t.add(f"Zp{j}", "label", zp[:, j].astype(small))
            t.alias[f"Wt{j}"] = ["Wp", f"Wm{j}"]
            gaps.append(lossmat[wms[j], zhat] - lossmat[wp, zhat])
            if pred is not None:
                w_sel = np.where(uj == 0, wp, wms[j])
                w_bar = np.where(uj == 0, wms[j], wp)
                t.add(f"F{j}", "scalar", pred[w_sel, zp[:, j]].astype(np.int8))
                t.add(f"Fbar{j}", "scalar", pred[w_bar, zp[:, j]].astype(np.int8))
        t.values["gap_hat"] = np.array(gaps)
        t.alias["Wtilde"] = ["Wp"] + [f"Wm{j}" for j in range(n)]
        t.alias["E"] = [f"Zhat{j}" for j in range(n)]
        t.alias["Splus"] = [f"Zp{j}" for j in range(n)]
        if pred is not None:
            t.alias["Fvec"] = [f"F{j}" for j in range(n)] + [f"Fbar{j}" for j in range(n)]
        return t
