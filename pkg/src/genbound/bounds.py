"""Closed-form generalization bounds and the exact inputs they consume.

The evaluators ``b_*`` are plain arithmetic on precomputed quantities.
``collect_inputs`` gathers those quantities for a problem and
``evaluate_bounds`` runs every evaluator whose preconditions hold, returning
inapplicable reports (value ``None`` and a reason) for the others.

The DV-style constant usually rounded to 0.72 is ``bernstein_h(1) = e - 2``
and the rounded value is kept in the components for reference.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import BudgetExceeded
from .engine import FULL, ROW, SAMPLE
from .information import LN2, UnsupportedQuantity, quantity, seed_disintegrated_iomi
from .risk import gen_error_standard, second_moment_exact
from .stability import delta_tables, stability_report

SOUND_TOL = 1e-9
ROUNDED_H1 = 0.72
LOG3_HALF = 0.5 * math.log(3.0)


def bernstein_h(x):
    """``(e^x - x - 1) / x^2``, with its Taylor series near zero."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"bernstein_h needs x > 0, got {x!r}")
    if x < 1e-4:
        return 0.5 + x / 6.0 + x * x / 24.0 + x**3 / 120.0
    return math.expm1(x) / (x * x) - 1.0 / x


H1 = bernstein_h(1.0)


@dataclass
class BoundReport:
    theorem_id: str
    value: float | None
    components: dict = field(default_factory=dict)
    applicable: bool = True
    reason: str = ""
    comparison: float | None = None
    comparison_kind: str = "abs_gen_error"
    method: str = "exact"

    @property
    def sound(self):
        """``value >= comparison`` up to ``SOUND_TOL``; ``None`` when undecidable."""
        if not self.applicable or self.value is None or self.comparison is None:
            return None
        return bool(self.value >= self.comparison - SOUND_TOL)


def inapplicable(theorem_id, reason, **components):
    return BoundReport(theorem_id, None, components, applicable=False, reason=reason)


@dataclass
class BernsteinFit:
    B: float
    kappa: float
    w_star: np.ndarray
    excess: float
    w_star_risk: float = 0.0
    source: str = "reachable"

    @property
    def gamma2(self):
        """The SCH-B constant implied by the Bernstein condition."""
        if math.isinf(self.B):
            return math.inf
        return math.sqrt(4.0 * self.B * self.excess)


@dataclass
class LossRenormalization:
    """``loss -> (loss + shift) / scale``."""

    shift: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @classmethod
    def unit_interval(cls, declared_range):
        lo, hi = _check_range(declared_range)
        return cls(-lo, hi - lo if hi > lo else 1.0)

    @classmethod
    def zero_based(cls, declared_range):
        lo, hi = _check_range(declared_range)
        return cls(-lo, 1.0)

    def width(self, declared_range):
        lo, hi = _check_range(declared_range)
        return (hi - lo) / self.scale

    def apply(self, loss_value):
        return (np.asarray(loss_value) + self.shift) / self.scale

    def gen_error(self, gen):
        return gen / self.scale


def _check_range(declared_range):
    if declared_range is None:
        raise ValueError("this bound needs a bounded loss; declare its range or pass a renormalization")
    lo, hi = (float(v) for v in declared_range)
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValueError(f"bad loss range {declared_range!r}")
    return lo, hi


def _nonneg(name, values):
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if np.any(arr < -1e-10) or np.any(np.isnan(arr)):
        raise ValueError(f"{name} must be nonnegative")
    return np.maximum(arr, 0.0)


def _nonneg_scalar(name, value):
    return float(_nonneg(name, value)[0])


def _sqrt_sum(values):
    return math.fsum(np.sqrt(values))


# ---------------------------------------------------------------------------
# input-output mutual information bounds
# ---------------------------------------------------------------------------

def b_iomi_sch_a(gamma1, iomi, iomi_conditional=None):
    """``sqrt(2) gamma1 / n * sum sqrt(I)`` with ``I(W+; Z+_i)`` and with ``I(W+; Z+_i | W-_i)``."""
    g = _nonneg_scalar("gamma1", gamma1)
    iomi = _nonneg("iomi", iomi)
    n = len(iomi)
    first = BoundReport("iomi_sch_a", math.sqrt(2.0) * g / n * _sqrt_sum(iomi),
                        {"gamma1": g, "sum_sqrt_info": _sqrt_sum(iomi), "n": n})
    if iomi_conditional is None:
        return first, inapplicable("iomi_sch_a_conditional", "conditional IOMI not supplied")
    cond = _nonneg("iomi_conditional", iomi_conditional)
    second = BoundReport("iomi_sch_a_conditional", math.sqrt(2.0) * g / n * _sqrt_sum(cond),
                         {"gamma1": g, "sum_sqrt_info": _sqrt_sum(cond), "n": n})
    return first, second


def b_iomi_uniform(beta2, iomi):
    """Uniform-stability version: ``sqrt(2) beta2 / n * sum sqrt(I(W; Z_i))``."""
    b = _nonneg_scalar("beta2", beta2)
    iomi = _nonneg("iomi", iomi)
    n = len(iomi)
    return BoundReport("iomi_uniform", math.sqrt(2.0) * b / n * _sqrt_sum(iomi),
                       {"beta2": b, "sum_sqrt_info": _sqrt_sum(iomi), "n": n})


def b_iomi_aggregate(beta2, iomi_sample, n):
    """Jensen relaxation of the uniform bound: ``sqrt(2) beta2 sqrt(I(W; S) / n)``."""
    b = _nonneg_scalar("beta2", beta2)
    i_s = _nonneg_scalar("iomi_sample", iomi_sample)
    return BoundReport("iomi_uniform_aggregate", math.sqrt(2.0) * b * math.sqrt(i_s / n),
                       {"beta2": b, "iomi_sample": i_s, "n": n})


def b_iomi_disintegrated(beta2, seed_sqrt_terms):
    """``sqrt(2) beta2 / n * sum_i E_R sqrt(I^R(W+; Z+_i))``; pass the per-row ``E_R sqrt(I^R)``."""
    b = _nonneg_scalar("beta2", beta2)
    terms = _nonneg("seed_sqrt_terms", seed_sqrt_terms)
    n = len(terms)
    return BoundReport("iomi_seed_disintegrated", math.sqrt(2.0) * b / n * math.fsum(terms),
                       {"beta2": b, "sum_seed_sqrt_info": math.fsum(terms), "n": n})


def b_iomi_fast(gamma1, gamma2, iomi):
    """Fast-rate form ``gamma1 / n * sum I + h(1) gamma2^2 / gamma1``."""
    g1 = _nonneg_scalar("gamma1", gamma1)
    g2 = _nonneg_scalar("gamma2", gamma2)
    iomi = _nonneg("iomi", iomi)
    n = len(iomi)
    if g1 == 0.0:
        return inapplicable("iomi_fast", "gamma1 = 0 (the optimized t = 1/gamma1 is undefined)")
    comp = {"gamma1": g1, "gamma2": g2, "sum_info": math.fsum(iomi), "n": n,
            "value_rounded_constant": g1 / n * math.fsum(iomi) + ROUNDED_H1 * g2**2 / g1,
            "t_is_optimal": bool(g2**2 <= g1**2 <= g1)}
    return BoundReport("iomi_fast", g1 / n * math.fsum(iomi) + H1 * g2**2 / g1, comp)


def baseline(sigma, iomi):
    """Classical individual-sample IOMI bound with a fixed sub-Gaussian constant ``sigma``."""
    s = _nonneg_scalar("sigma", sigma)
    iomi = _nonneg("iomi", iomi)
    n = len(iomi)
    return BoundReport("iomi_baseline", math.sqrt(2.0) * s / n * _sqrt_sum(iomi),
                       {"sigma": s, "sum_sqrt_info": _sqrt_sum(iomi), "n": n})


# ---------------------------------------------------------------------------
# hypothesis-conditioned CMI bounds
# ---------------------------------------------------------------------------

@dataclass
class ClassTerms:
    """One row's conditioning classes: masses, the stability sup and the disintegrated info."""

    mass: np.ndarray
    delta: np.ndarray
    info: np.ndarray
    lam: np.ndarray | None = None

    def __post_init__(self):
        self.mass = np.asarray(self.mass, dtype=np.float64)
        self.delta = _nonneg("delta", self.delta)
        self.info = _nonneg("info", self.info)
        if not (len(self.mass) == len(self.delta) == len(self.info)):
            raise ValueError("class arrays must have equal length")
        if self.lam is not None:
            self.lam = _nonneg("lambda", self.lam)

    @property
    def total_info(self):
        return math.fsum(self.mass * self.info)


def _delta_min_forms(rows, theorem_id):
    per_row, a_terms, b_terms = [], [], []
    for r in rows:
        a = math.fsum(r.mass * r.delta * np.sqrt(r.info))
        b = math.sqrt(math.fsum(r.mass * r.delta**2) * r.total_info)
        a_terms.append(a)
        b_terms.append(b)
        per_row.append(min(a, b))
    n = len(rows)
    comp = {"sum_disintegrated": math.fsum(a_terms), "sum_cauchy_schwarz": math.fsum(b_terms), "n": n}
    return BoundReport(theorem_id, math.sqrt(2.0) / n * math.fsum(per_row), comp)


def b_cmi_delta1(rows):
    """Per-row min of ``E[D1 sqrt(I^w)]`` and ``sqrt(E[D1^2] I)``, times ``sqrt(2)/n``."""
    return _delta_min_forms(rows, "cmi_delta1")


def b_cmi_sch_c(gamma3, sup_info):
    """``sqrt(2) gamma3 / n * sum sqrt(sup_w I^w)``."""
    g = _nonneg_scalar("gamma3", gamma3)
    sup_info = _nonneg("sup_info", sup_info)
    n = len(sup_info)
    return BoundReport("cmi_sch_c", math.sqrt(2.0) * g / n * _sqrt_sum(sup_info),
                       {"gamma3": g, "sum_sqrt_sup_info": _sqrt_sum(sup_info), "n": n})


def b_cmi_uniform(beta2, cmi):
    """Constant-D1 case ``sqrt(2) beta2 / n * sum sqrt(I(Zhat_i; U_i | W~_i))``; at most ``sqrt(2 ln 2) beta2``."""
    b = _nonneg_scalar("beta2", beta2)
    cmi = _nonneg("cmi", cmi)
    n = len(cmi)
    return BoundReport("cmi_uniform", math.sqrt(2.0) * b / n * _sqrt_sum(cmi),
                       {"beta2": b, "sum_sqrt_info": _sqrt_sum(cmi), "n": n,
                        "ceiling": math.sqrt(2.0 * LN2) * b})


def b_cmi_fast_delta1(rows):
    """``1/n sum E[D1 (I^w + h(1) Lambda)]``."""
    terms = []
    ceiling = []
    for r in rows:
        if r.lam is None:
            raise ValueError("the Lambda ratios are required")
        terms.append(math.fsum(r.mass * r.delta * (r.info + H1 * r.lam)))
        ceiling.append(math.fsum(r.mass * r.delta))
    n = len(rows)
    g3 = max(ceiling) if ceiling else 0.0
    return BoundReport("cmi_fast_delta1", math.fsum(terms) / n,
                       {"n": n, "gamma3_from_delta1": g3, "ceiling": (LN2 + H1) * g3})


def b_cmi_fast_uniform(beta2, gamma4, cmi):
    """``beta2 / n * sum I + h(1) gamma4^2 / beta2``."""
    b = _nonneg_scalar("beta2", beta2)
    g4 = _nonneg_scalar("gamma4", gamma4)
    cmi = _nonneg("cmi", cmi)
    n = len(cmi)
    if b == 0.0:
        return inapplicable("cmi_fast_uniform", "beta2 = 0")
    return BoundReport("cmi_fast_uniform", b / n * math.fsum(cmi) + H1 * g4**2 / b,
                       {"beta2": b, "gamma4": g4, "sum_info": math.fsum(cmi), "n": n,
                        "value_rounded_constant": b / n * math.fsum(cmi) + ROUNDED_H1 * g4**2 / b})


def b_cmi_fast(rows, beta2, gamma4, cmi):
    return b_cmi_fast_delta1(rows), b_cmi_fast_uniform(beta2, gamma4, cmi)


def b_ss_cmi_delta2(rows):
    """Instance-conditioned analogue of ``b_cmi_delta1`` with ``D2`` and ``I^{z}(W, Wbar; U)``."""
    return _delta_min_forms(rows, "ss_cmi_delta2")


# ---------------------------------------------------------------------------
# second moment
# ---------------------------------------------------------------------------

def b_second_moment(beta2, vec_cmi, n, symmetric=True):
    """``(6 beta2^2 / n)(I(E; U | W~) + ln3/2) + 4 beta2^2 + 1/n`` for a loss in ``[0, 1]``."""
    if not symmetric:
        return inapplicable("second_moment", "algorithm is not symmetric in its sample")
    b = _nonneg_scalar("beta2", beta2)
    v = _nonneg_scalar("vec_cmi", vec_cmi)
    value = 6.0 * b * b / n * (v + LOG3_HALF) + 4.0 * b * b + 1.0 / n
    rounded = 4.0 * b * b * ((1.5 * v + 0.82) / n + 1.0) + 1.0 / n
    return BoundReport("second_moment", value,
                       {"beta2": b, "vec_cmi": v, "n": n, "value_rounded_constant": rounded},
                       comparison_kind="second_moment")


def b_second_moment_strong(mass, dbar, info, gamma2, n, symmetric=True):
    """``(6/n) E[Dbar1 (I^w(E; U) + ln3/2)] + 1/n + 4 gamma2^2`` for a loss in ``[0, 1]``.

    ``mass``, ``dbar`` and ``info`` run over the classes of the full hypothesis
    matrix; ``dbar`` is the row average of the squared ``D1`` values.
    """
    if not symmetric:
        return inapplicable("second_moment_strong", "algorithm is not symmetric in its sample")
    if gamma2 is None:
        return inapplicable("second_moment_strong", "gamma2 is unavailable within budget")
    g2 = _nonneg_scalar("gamma2", gamma2)
    mass = np.asarray(mass, dtype=np.float64)
    dbar, info = _nonneg("dbar", dbar), _nonneg("info", info)
    core = math.fsum(mass * dbar * (info + LOG3_HALF))
    return BoundReport("second_moment_strong", 6.0 / n * core + 1.0 / n + 4.0 * g2 * g2,
                       {"gamma2": g2, "weighted_term": core, "n": n}, comparison_kind="second_moment")


# ---------------------------------------------------------------------------
# loss-difference bounds
# ---------------------------------------------------------------------------

def b_ld(beta2, ld_mi, ld_disintegrated_sqrt, ld_cmi):
    """Three loss-difference forms: the per-row min, the disintegrated one and the conditional one.

    ``ld_disintegrated_sqrt`` holds ``E_z sqrt(I^z(DL_i; U_i))`` per row.
    Returns ``(min_form, disintegrated, conditional, unconditional)``.
    """
    b = _nonneg_scalar("beta2", beta2)
    mi = _nonneg("ld_mi", ld_mi)
    dis = _nonneg("ld_disintegrated_sqrt", ld_disintegrated_sqrt)
    cmi = _nonneg("ld_cmi", ld_cmi)
    n = len(mi)
    c = math.sqrt(2.0) * b / n
    uncond = np.sqrt(mi)
    comp = {"beta2": b, "n": n}
    return (
        BoundReport("ld_min", c * math.fsum(np.minimum(uncond, dis)), dict(comp)),
        BoundReport("ld_disintegrated", c * math.fsum(dis), dict(comp)),
        BoundReport("ld_conditional", c * _sqrt_sum(cmi), dict(comp)),
        BoundReport("ld_unconditional", c * math.fsum(uncond), dict(comp)),
    )


# ---------------------------------------------------------------------------
# Bernstein condition
# ---------------------------------------------------------------------------

def _minimizer_losses(problem, t):
    """Loss row of the analytic minimizer on the table's instance coordinates, if known."""
    fn = problem.info.get("minimizer")
    if fn is None:
        return None
    if t.exchangeable:
        feats = np.eye(t.width + 1)
        params = fn(t.width + 1)
    else:
        feats = problem.feats
        params = fn(problem.feats.shape[1])
    return problem.loss.matrix(params, feats)[0]


def fit_bernstein(problem, kappa=1.0) -> BernsteinFit:
    """Smallest ``B`` with ``E(l(w,Z) - l(w*,Z))^2 <= B (L(w) - L(w*))^(1/kappa)`` over reachable ``w``."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    t = problem.table(SAMPLE)
    width = t.width if t.exchangeable else None
    wp = t.values["wp_id"]
    reach = np.unique(wp[t.w > 0])
    lossmat = t.lossmat
    risks = problem.population_risks(lossmat, width)
    star_loss = _minimizer_losses(problem, t)
    if star_loss is not None:
        star_risk = float(problem.population_risks(star_loss[None, :], width)[0])
        source = "analytic"
        if risks[reach].min() < star_risk - 1e-12:
            raise ValueError("the declared minimizer is beaten by a reachable hypothesis")
    else:
        j = reach[np.argmin(risks[reach])]
        star_loss, star_risk, source = lossmat[j], float(risks[j]), "reachable"
    excess = np.maximum(risks[reach] - star_risk, 0.0)
    m2 = problem.population_risks((lossmat[reach] - star_loss[None, :]) ** 2, width)
    root = excess ** (1.0 / kappa)
    B = 0.0
    for e, s in zip(root, m2):
        if e > 1e-15:
            B = max(B, s / e)
        elif s > 1e-15:
            B = math.inf
    mass = np.bincount(wp, weights=t.w, minlength=len(lossmat))[reach] / t.total_mass()
    expected = math.fsum(mass * root)
    return BernsteinFit(B, float(kappa), star_loss, expected, star_risk, source)


def b_bernstein(fit: BernsteinFit, C, iomi, excess_risk=None):
    """``C/n * sum I(W; Z_i) + 4 h(1) B / C * E[L(W) - L(w*)]`` for a loss in ``[0, C]`` and ``kappa = 1``."""
    if fit.kappa != 1:
        return inapplicable("bernstein_fast", "needs kappa = 1")
    C = float(C)
    if not C > 0:
        raise ValueError("C must be positive")
    iomi = _nonneg("iomi", iomi)
    n = len(iomi)
    excess = fit.excess if excess_risk is None else _nonneg_scalar("excess_risk", excess_risk)
    if math.isinf(fit.B):
        return inapplicable("bernstein_fast", "Bernstein condition fails: zero excess risk with positive second moment",
                            B=fit.B)
    value = C / n * math.fsum(iomi) + 4.0 * H1 * fit.B / C * excess
    return BoundReport("bernstein_fast", value,
                       {"B": fit.B, "C": C, "excess": excess, "sum_info": math.fsum(iomi), "n": n,
                        "gamma2_implied": fit.gamma2})


# ---------------------------------------------------------------------------
# VC, regularized ERM and the birthday floor
# ---------------------------------------------------------------------------

def b_vc_rhs(d_vc, n):
    """``sqrt(2 d log(e n / d) / n)``."""
    if d_vc < 1:
        raise ValueError("VC dimension must be >= 1")
    if n <= d_vc + 1:
        raise ValueError(f"needs n > d + 1 (n={n}, d={d_vc})")
    return math.sqrt(2.0 * d_vc * math.log(math.e * n / d_vc) / n)


def vc_chain(f_cmi, d_vc):
    """Compare ``1/n sum sqrt(f-CMI_i)`` with the VC right-hand side."""
    f = _nonneg("f_cmi", f_cmi)
    n = len(f)
    lhs = _sqrt_sum(f) / n
    rep = BoundReport("vc_chain", b_vc_rhs(d_vc, n), {"d_vc": d_vc, "n": n, "lhs": lhs},
                      comparison=lhs, comparison_kind="mean_sqrt_f_cmi")
    return rep


def b_rerm(cfg, hyp_cmi, n, mode="lipschitz", rho=None, emp_risk=None, radius=1.0, loss_lower=None):
    """Regularized-ERM bound from the uniform-stability rate ``2 L^2 R^2 / (lam n)``.

    ``smooth`` mode uses ``48 rho Lhat_n / (lam n)`` and needs ``lam >= 2 rho / n``
    and a nonnegative loss.
    """
    cmi = _nonneg("hyp_cmi", hyp_cmi)
    avg = math.fsum(cmi) / len(cmi)
    if mode == "lipschitz":
        beta = 2.0 * cfg.L**2 * radius**2 / (cfg.lam * n)
        return BoundReport("rerm_lipschitz", beta * (avg + H1),
                           {"beta2_rate": beta, "mean_info": avg, "n": n,
                            "value_rounded_constant": beta * (avg + ROUNDED_H1)})
    if mode != "smooth":
        raise ValueError(f"unknown mode {mode!r}")
    if rho is None or emp_risk is None:
        raise ValueError("smooth mode needs rho and the empirical risk")
    if cfg.lam < 2.0 * rho / n:
        raise ValueError(f"smooth mode needs lam >= 2 rho / n ({cfg.lam} < {2.0 * rho / n})")
    if loss_lower is not None and loss_lower < 0:
        return inapplicable("rerm_smooth", "smooth-loss rate needs a nonnegative loss")
    beta = 48.0 * rho * emp_risk / (cfg.lam * n)
    return BoundReport("rerm_smooth", beta * (avg + H1), {"beta2_rate": beta, "mean_info": avg, "n": n})


def birthday_floor(n, d):
    """``(1 - (2n-1)/d)^(2n-1)``, a floor on the chance that 2n uniform draws from d labels are distinct."""
    k = 2 * n - 1
    if d <= k:
        return 0.0
    return (1.0 - k / d) ** k


# ---------------------------------------------------------------------------
# collecting inputs and evaluating everything
# ---------------------------------------------------------------------------

@dataclass
class BoundInputs:
    n: int
    gen_error: float
    population_risk: float
    empirical_risk: float
    stability: object
    per_row: dict
    iomi_sample: float
    cmi_rows: list
    ss_rows: list
    hyp_cmi_sup: list
    seed_sqrt: list
    ld_disintegrated_sqrt: list
    vec_cmi: float | None
    vec_method: str
    vec_strong: tuple | None
    second_moment: float | None
    renorm: LossRenormalization | None
    methods: dict = field(default_factory=dict)


ROW_QUANTITIES = ("iomi_individual", "iomi_conditional", "hyp_cmi", "ss_cmi", "std_cmi",
                  "ld_mi", "ld_cmi", "e_cmi", "f_cmi")


def _full_table_terms(problem, deltas, renorm, scale):
    """``I(E; U | W~)``, and the per-class pieces of the strong second-moment bound."""
    try:
        t = problem.table(FULL)
    except BudgetExceeded:
        return None, "upper-bound", None
    n = problem.n
    est = quantity("vec_cmi", problem, disintegrated=True)
    sq = np.zeros(t.n_rows)
    for j in range(n):
        gap = np.abs(t.values["gap_hat"][j]) / scale
        sup = np.maximum(t.group_max(gap, f"Wt{j}"), 0.0)
        codes = t.classify(f"Wt{j}")[0]
        sq += sup[codes] ** 2
    dbar = np.maximum(t.group_max(sq / n, "Wtilde"), 0.0)
    return est.value, "exact", (est.class_mass, dbar, est.class_values)


def collect_inputs(problem) -> BoundInputs:
    """Exact inputs for every bound of ``evaluate_bounds``."""
    n = problem.n
    risk = gen_error_standard(problem)
    stab = stability_report(problem)
    per_row = {}
    for name in ROW_QUANTITIES:
        try:
            per_row[name] = np.array([quantity(name, problem, i).value for i in range(1, n + 1)])
        except UnsupportedQuantity:
            continue
    deltas = delta_tables(problem)
    cmi_rows, ss_rows, sup_cmi, ld_dis, seed_sqrt = [], [], [], [], []
    for i in range(1, n + 1):
        hc = quantity("hyp_cmi", problem, i, disintegrated=True)
        cmi_rows.append(ClassTerms(hc.class_mass, deltas.value1[i - 1], hc.class_values, deltas.lam_values[i - 1]))
        sup_cmi.append(hc.disintegrated_sup)
        sc = quantity("ss_cmi", problem, i, disintegrated=True)
        ss_rows.append(ClassTerms(sc.class_mass, deltas.value2[i - 1], sc.class_values))
        lc = quantity("ld_cmi", problem, i, disintegrated=True)
        ld_dis.append(math.fsum(lc.class_mass * np.sqrt(np.maximum(lc.class_values, 0.0))))
        seed_sqrt.append(seed_disintegrated_iomi(problem, i))
    iomi_s = quantity("iomi_sample", problem).value
    renorm = None
    second = None
    if problem.loss.declared_range is not None:
        renorm = LossRenormalization.unit_interval(problem.loss.declared_range)
        second = second_moment_exact(problem, scale=renorm.scale)
    scale = renorm.scale if renorm else 1.0
    vec, vec_method, strong = _full_table_terms(problem, deltas, renorm, scale)
    if vec is None:
        vec = n * LN2
        # E[Dbar1] = (1/n) sum_j E[D1_j^2] from the row tables, with I^w <= n ln 2
        dbar = math.fsum(deltas.expected_delta1_sq(i) for i in range(1, n + 1)) / n / scale**2
        strong = (np.array([1.0]), np.array([dbar]), np.array([n * LN2]))
    return BoundInputs(n, risk.gen_error, risk.expected_population, risk.expected_empirical, stab, per_row,
                       iomi_s, cmi_rows, ss_rows, sup_cmi, seed_sqrt, ld_dis, vec, vec_method, strong, second,
                       renorm, {"vec_cmi": vec_method})


def _with_gen(rep, gen):
    rep.comparison = abs(gen)
    return rep


def evaluate_bounds(problem, inputs: BoundInputs | None = None) -> list:
    """Every bound for ``problem`` as a list of ``BoundReport``."""
    q = inputs or collect_inputs(problem)
    n, gen, st = q.n, q.gen_error, q.stability
    rows = q.per_row
    out = []

    if st.gamma1 is None:
        out += [inapplicable("iomi_sch_a", "gamma1 unavailable within budget"),
                inapplicable("iomi_sch_a_conditional", "gamma1 unavailable within budget"),
                inapplicable("iomi_fast", "gamma1 unavailable within budget")]
    else:
        out += list(b_iomi_sch_a(st.gamma1, rows["iomi_individual"], rows["iomi_conditional"]))
        out.append(b_iomi_fast(st.gamma1, st.gamma2, rows["iomi_individual"]))
    out.append(b_iomi_uniform(st.beta2, rows["iomi_individual"]))
    out.append(b_iomi_aggregate(st.beta2, q.iomi_sample, n))
    out.append(b_iomi_disintegrated(st.beta2, q.seed_sqrt))

    out.append(b_cmi_delta1(q.cmi_rows))
    g3 = max(math.fsum(r.mass * r.delta) for r in q.cmi_rows)
    sch_c = b_cmi_sch_c(g3, q.hyp_cmi_sup)
    sch_c.components["gamma3_exact"] = st.gamma3
    out.append(sch_c)
    out.append(b_cmi_uniform(st.beta2, rows["hyp_cmi"]))
    out += list(b_cmi_fast(q.cmi_rows, st.beta2, st.gamma4, rows["hyp_cmi"]))
    out.append(b_ss_cmi_delta2(q.ss_rows))
    out += list(b_ld(st.beta2, rows["ld_mi"], q.ld_disintegrated_sqrt, rows["ld_cmi"]))

    rng = problem.loss.declared_range
    if rng is not None:
        lo, hi = rng
        out.append(baseline((hi - lo) / 2.0, rows["iomi_individual"]))
    else:
        out.append(inapplicable("iomi_baseline", "loss range not declared"))
    for rep in out:
        _with_gen(rep, gen)

    # bounded-loss bounds, compared on the renormalized scale
    sym = bool(getattr(problem.alg, "symmetric", True))
    if q.renorm is None:
        out += [inapplicable("second_moment", "loss range not declared"),
                inapplicable("second_moment_strong", "loss range not declared"),
                inapplicable("bernstein_fast", "loss range not declared")]
    else:
        s = q.renorm.scale
        sm = b_second_moment(st.beta2 / s, q.vec_cmi, n, sym)
        sm.method = q.vec_method
        g2 = None if st.gamma2 is None else st.gamma2 / s
        mass, dbar, info = q.vec_strong
        sms = b_second_moment_strong(mass, dbar, info, g2, n, sym)
        sms.method = q.vec_method
        for rep in (sm, sms):
            rep.comparison = q.second_moment
            rep.components["scale"] = s
        out += [sm, sms]
        fit = fit_bernstein(problem)
        # shift-only renormalization: B and the excess are shift invariant, C is the raw width
        lo, hi = problem.loss.declared_range
        C = float(hi - lo)
        bern = _with_gen(b_bernstein(fit, C, rows["iomi_individual"]), gen)
        bern.components["gamma2_implied"] = fit.gamma2
        bern.components["minimizer"] = fit.source
        out.append(bern)

    if problem.name == "regularized-erm":
        cfg = problem.alg.cfg
        out.append(_with_gen(b_rerm(cfg, rows["hyp_cmi"], n, radius=problem.info.get("radius", 1.0)), gen))
        lo = problem.loss.declared_range[0] if problem.loss.declared_range else None
        out.append(_with_gen(b_rerm(cfg, rows["hyp_cmi"], n, mode="smooth", rho=0.0,
                                    emp_risk=q.empirical_risk, loss_lower=lo), gen))

    d_vc = problem.info.get("vc_dim")
    if d_vc is not None and "f_cmi" in rows:
        if n > d_vc + 1:
            out.append(vc_chain(rows["f_cmi"], d_vc))
        else:
            out.append(inapplicable("vc_chain", f"needs n > d + 1 (n={n}, d={d_vc})"))
    return out


THEOREMS = {
    "iomi_sch_a": "sample-conditioned stability (type A) with individual IOMI",
    "iomi_sch_a_conditional": "type A with IOMI conditioned on the neighbour hypothesis",
    "iomi_uniform": "uniform stability with individual IOMI",
    "iomi_uniform_aggregate": "Jensen relaxation to the full-sample IOMI",
    "iomi_seed_disintegrated": "uniform stability with seed-disintegrated IOMI",
    "iomi_fast": "fast-rate IOMI with types A and B",
    "iomi_baseline": "classical individual IOMI with the loss range as sub-Gaussian constant",
    "cmi_delta1": "hypothesis-conditioned CMI with per-pair sup gaps",
    "cmi_sch_c": "hypothesis-conditioned CMI with type C and the sup-disintegrated CMI",
    "cmi_uniform": "hypothesis-conditioned CMI with uniform stability",
    "cmi_fast_delta1": "fast-rate CMI with per-pair sup gaps and Lambda ratios",
    "cmi_fast_uniform": "fast-rate CMI with uniform and type D stability",
    "ss_cmi_delta2": "instance-conditioned CMI with per-instance sup gaps",
    "second_moment": "second moment with uniform stability and vector CMI",
    "second_moment_strong": "second moment with disintegrated vector CMI and type B",
    "ld_min": "loss-difference MI, per-row min of the unconditional and disintegrated forms",
    "ld_disintegrated": "loss-difference MI disintegrated over the instance",
    "ld_conditional": "loss-difference CMI given the instance",
    "ld_unconditional": "loss-difference MI without conditioning",
    "bernstein_fast": "fast rate under the Bernstein condition with kappa = 1",
    "rerm_lipschitz": "regularized ERM, Lipschitz loss",
    "rerm_smooth": "regularized ERM, smooth nonnegative loss",
    "vc_chain": "prediction CMI against the VC right-hand side",
}
