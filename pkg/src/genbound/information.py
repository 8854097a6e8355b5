"""Entropies, mutual informations and the catalog of protocol quantities.

All values are in nats.  Exact values come from the enumerated tables of
:mod:`genbound.engine`; Monte Carlo values are plug-in estimates on sampled
tables with a bootstrap standard error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import MASS_TOL, BudgetExceeded, canonical_key
from .engine import FULL, ROW, SAMPLE, ProtocolTable, combine_codes

LN2 = math.log(2.0)
NEG_TOL = 1e-10
N_BOOTSTRAP = 200


@dataclass
class InfoEstimate:
    value: float
    method: str
    quantity: str = ""
    index: object = "joint"
    stderr: float = 0.0
    samples: int = 0
    # per-class disintegrated values: mass and value arrays over the conditioning classes
    class_mass: np.ndarray | None = None
    class_values: np.ndarray | None = None

    def __float__(self):
        return float(self.value)

    @property
    def disintegrated_sup(self):
        if self.class_values is None:
            return self.value
        live = self.class_mass > 0
        return float(self.class_values[live].max()) if live.any() else 0.0


def _clamp(v):
    if -NEG_TOL <= v < 0:
        return 0.0
    return float(v)


class JointTable:
    """Probability mass over tuples of hashable values on named axes."""

    def __init__(self, axes, cells):
        self.axes = list(axes)
        self.cells = {}
        for key, mass in dict(cells).items():
            key = tuple(key)
            if len(key) != len(self.axes):
                raise ValueError(f"cell {key!r} does not match axes {self.axes}")
            if mass <= 0:
                raise ValueError("cell masses must be positive")
            k = canonical_key(key)
            self.cells[k] = self.cells.get(k, 0.0) + float(mass)
        total = math.fsum(self.cells.values())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"cell masses sum to {total!r}, not 1")

    def to_protocol(self):
        keys = list(self.cells)
        weights = np.array([self.cells[k] for k in keys])
        t = ProtocolTable("joint", weights)
        for a, name in enumerate(self.axes):
            col = [canonical_key(k[a]) for k in keys]
            lookup = {}
            codes = np.array([lookup.setdefault(v, len(lookup)) for v in col], dtype=np.int64)
            t.add(name, "scalar", codes)
        return t


def _table(t):
    return t.to_protocol() if isinstance(t, JointTable) else t


def _names(x):
    if x is None:
        return []
    return [x] if isinstance(x, str) else list(x)


# ---------------------------------------------------------------------------
# entropy combinations
# ---------------------------------------------------------------------------

def _mi_terms(x, y, z=None):
    """Coefficients of ``I(X;Y|Z)`` as a signed sum of joint entropies."""
    x, y, z = _names(x), _names(y), _names(z)
    return [(x + z, 1.0), (y + z, 1.0), (x + y + z, -1.0), (z, -1.0)]


def _combine_terms(table, terms):
    return math.fsum(c * table.entropy(names) for names, c in terms if names)


def _bootstrap_stderr(table, terms, rng):
    terms = [(names, c) for names, c in terms if names]
    reps = table.bootstrap_entropies([names for names, _ in terms], rng, N_BOOTSTRAP)
    vals = reps @ np.array([c for _, c in terms])
    return float(np.std(vals, ddof=1))


def entropy(table, names, rng=None) -> InfoEstimate:
    t = _table(table)
    v = t.entropy(_names(names))
    est = InfoEstimate(v, t.method, quantity=f"H({','.join(_names(names))})", samples=_n_samples(t))
    if t.method != "exact" and rng is not None:
        est.stderr = _bootstrap_stderr(t, [(_names(names), 1.0)], rng)
    return est


def _n_samples(t):
    return 0 if t.method == "exact" else t.n_rows


def mutual_info(table, x, y, rng=None) -> InfoEstimate:
    return cond_mutual_info(table, x, y, None, rng=rng)


def cond_mutual_info(table, x, y, z=None, disintegrated=False, rng=None) -> InfoEstimate:
    """``I(X;Y|Z)``; with ``disintegrated`` the per-class values ``I^z(X;Y)`` are attached."""
    t = _table(table)
    terms = _mi_terms(x, y, z)
    v = _clamp(_combine_terms(t, terms))
    est = InfoEstimate(v, t.method, samples=_n_samples(t))
    if t.method != "exact" and rng is not None:
        est.stderr = _bootstrap_stderr(t, terms, rng)
    if disintegrated:
        by = _names(z)
        if not by:
            est.class_mass, est.class_values = np.array([1.0]), np.array([v])
        else:
            x_, y_ = _names(x), _names(y)
            pb, hx = t.cond_entropy_each(x_, by)
            _, hy = t.cond_entropy_each(y_, by)
            _, hxy = t.cond_entropy_each(x_ + y_, by)
            vals = hx + hy - hxy
            vals = np.where((vals < 0) & (vals >= -NEG_TOL), 0.0, vals)
            est.class_mass, est.class_values = pb, vals
    return est


# ---------------------------------------------------------------------------
# the protocol catalog
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantitySpec:
    kind: str
    x: tuple
    y: tuple
    z: tuple = ()
    needs_predictions: bool = False
    description: str = ""


CATALOG = {
    "iomi_individual": QuantitySpec(ROW, ("Wp",), ("Zp",), (), False, "I(W+; Z+_i) = I(W; Z_i)"),
    "iomi_conditional": QuantitySpec(ROW, ("Wp",), ("Zp",), ("Wm",), False, "I(W+; Z+_i | W-_i)"),
    "iomi_seed": QuantitySpec(ROW, ("Wp",), ("Zp",), ("R",), False, "I(W+; Z+_i | R), per seed"),
    "hyp_cmi": QuantitySpec(ROW, ("Zhat",), ("U",), ("Wt",), False, "I(Zhat_i; U_i | W~_i)"),
    "ss_cmi": QuantitySpec(ROW, ("W", "Wbar"), ("U",), ("Zp",), False, "I(W_i, Wbar_i; U_i | Z+_i)"),
    "std_cmi": QuantitySpec(ROW, ("W",), ("U",), ("Zt",), False, "I(W; U_i | Z~_i)"),
    "ld_mi": QuantitySpec(ROW, ("DL",), ("U",), (), False, "I(DL_i; U_i)"),
    "ld_cmi": QuantitySpec(ROW, ("DL",), ("U",), ("Zp",), False, "I(DL_i; U_i | Z+_i)"),
    "e_cmi": QuantitySpec(ROW, ("L", "Lbar"), ("U",), ("Zp",), False, "I(L_i, Lbar_i; U_i | Z+_i)"),
    "f_cmi": QuantitySpec(ROW, ("F", "Fbar"), ("U",), ("Zp",), True, "I(F_i, Fbar_i; U_i | Z+_i)"),
    "f_cmi_given_sample": QuantitySpec(ROW, ("F", "Fbar"), ("U",), ("S",), True, "I(F_i, Fbar_i; U_i | Z+_[n])"),
    "iomi_sample": QuantitySpec(SAMPLE, ("Wp",), ("S",), (), False, "I(W; S)"),
    "vec_cmi": QuantitySpec(FULL, ("E",), ("U",), ("Wtilde",), False, "I(E; U | W~)"),
    "f_cmi_joint": QuantitySpec(FULL, ("Fvec",), ("U",), ("Splus",), True, "I(F_[n], Fbar_[n]; U | Z+_[n])"),
}

PER_ROW = tuple(k for k, s in CATALOG.items() if s.kind == ROW)


class UnsupportedQuantity(ValueError):
    pass


def quantity(name, problem, i=None, mode="exact", samples=None, seed=0, disintegrated=False,
             engine=None) -> InfoEstimate:
    """Evaluate a catalog quantity; ``i`` is 1-based for per-row quantities."""
    if name not in CATALOG:
        raise KeyError(f"unknown quantity {name!r}; known: {', '.join(sorted(CATALOG))}")
    entry = CATALOG[name]
    if entry.needs_predictions and not problem.alg.predicts:
        raise UnsupportedQuantity(f"{name} needs label predictions, which {problem.alg.name} does not produce")
    if entry.kind == ROW:
        if i is None or not 1 <= i <= problem.n:
            raise IndexError(f"row index {i} out of range 1..{problem.n}")
        row = i - 1
        index = i
    else:
        row = None
        index = "joint"
    if mode == "exact":
        try:
            t = problem.table(entry.kind, row, engine=engine)
        except BudgetExceeded as exc:
            fallback = _exact_fallback(name, problem, disintegrated, exc)
            if fallback is None:
                raise BudgetExceeded(name, exc.required, exc.budget) from None
            return fallback
        rng = None
    elif mode == "mc":
        if samples is None or samples < 100:
            raise ValueError("Monte Carlo estimation needs samples >= 100")
        t = problem.sampled_table(entry.kind, row, int(samples), seed)
        rng = np.random.default_rng([int(seed), 1])
    else:
        raise ValueError(f"unknown mode {mode!r}")
    est = cond_mutual_info(t, list(entry.x), list(entry.y), list(entry.z) or None,
                           disintegrated=disintegrated, rng=rng)
    est.quantity = name
    est.index = index
    est.method = "exact" if mode == "exact" else "plugin-mc"
    return est


def _exact_fallback(name, problem, disintegrated, exc):
    n = problem.n
    if name == "vec_cmi":
        # I(E;U|W~) <= H(U) = n log 2 holds for every conditional law
        est = InfoEstimate(n * LN2, "upper-bound", "vec_cmi", "joint")
        if disintegrated:
            est.class_mass, est.class_values = np.array([1.0]), np.array([n * LN2])
        return est
    if name == "f_cmi_joint" and problem.alg.deterministic:
        # given Z+_[n] the rows (U_i, Z-_i) are independent, so the joint CMI splits into row terms
        parts = [quantity("f_cmi_given_sample", problem, i) for i in range(1, n + 1)]
        return InfoEstimate(math.fsum(p.value for p in parts), "exact-row-sum", "f_cmi_joint", "joint")
    return None


def plugin_estimate(name, problem, i=None, samples=100_000, seed=0, disintegrated=False) -> InfoEstimate:
    """Plug-in Monte Carlo estimate with a 200-resample bootstrap standard error.

    The plug-in estimator is biased upwards for mutual information on large
    alphabets; no bias correction is applied.
    """
    return quantity(name, problem, i, mode="mc", samples=samples, seed=seed, disintegrated=disintegrated)


def per_row(name, problem, mode="exact", disintegrated=False, **kw):
    return [quantity(name, problem, i, mode=mode, disintegrated=disintegrated, **kw)
            for i in range(1, problem.n + 1)]


def build_protocol_table(problem, i=None, kind=ROW, engine=None):
    """Exact joint table for row ``i`` (1-based), the full supersample or the sample."""
    return problem.table(kind, None if i is None else i - 1, engine=engine)


def seed_disintegrated_iomi(problem, i):
    """``E_R sqrt(I^R(W+; Z+_i))`` for row ``i``."""
    if problem.alg.deterministic:
        # one seed: the disintegrated value is the plain IOMI, computed the same way
        return math.sqrt(max(quantity("iomi_individual", problem, i).value, 0.0))
    est = quantity("iomi_seed", problem, i, disintegrated=True)
    return math.fsum(est.class_mass * np.sqrt(np.maximum(est.class_values, 0.0)))


def joint_code(table, names):
    """Integer code of a variable tuple on a table (plain tables only)."""
    return combine_codes([table.vars[k][1] for k in table.expand(names)], table.n_rows)[0]
