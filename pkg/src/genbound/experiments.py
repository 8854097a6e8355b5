"""Experiment runner: quantities, bounds and invariant checks as CSV rows."""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import bounds as B
from .core import DEFAULT_BUDGET, MASS_TOL, BudgetExceeded
from .engine import FULL, ROW, SAMPLE
from .information import CATALOG, LN2, PER_ROW, UnsupportedQuantity, quantity
from .problems import EXAMPLES, build_problem
from .risk import gen_error_masked_data, gen_error_masked_hyp, gen_error_standard
from .stability import beta_mc, delta_tables

CSV_HEADER = ("example", "n", "index", "quantity", "value", "method", "stderr", "applicable", "exact_gen_error")
TOL = 1e-10

STABILITY_FIELDS = ("beta1", "beta2", "gamma1", "gamma2", "gamma3", "gamma4")
JOINT_QUANTITIES = ("iomi_sample", "vec_cmi", "f_cmi_joint")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    example: str
    n_list: list
    mode: str = "exact"
    mc_samples: int = 100_000
    seed: int = 0
    quantities: list | None = None
    bounds: list | None = None
    out: str | None = None
    params: dict = field(default_factory=dict)
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.example not in EXAMPLES:
            raise ConfigError(f"field 'example': unknown example {self.example!r}; choose from {', '.join(EXAMPLES)}")
        if isinstance(self.n_list, int):
            self.n_list = [self.n_list]
        if not isinstance(self.n_list, (list, tuple)) or not self.n_list:
            raise ConfigError("field 'n_list': must be a nonempty list of integers")
        if any(not isinstance(v, int) or isinstance(v, bool) or v < 1 for v in self.n_list):
            raise ConfigError(f"field 'n_list': entries must be integers >= 1, got {self.n_list!r}")
        self.n_list = sorted(set(self.n_list))
        if self.mode not in ("exact", "mc"):
            raise ConfigError(f"field 'mode': must be 'exact' or 'mc', got {self.mode!r}")
        if not isinstance(self.mc_samples, int) or (self.mode == "mc" and self.mc_samples < 100):
            raise ConfigError("field 'mc_samples': must be an integer >= 100 in mc mode")
        if not isinstance(self.seed, int) or self.seed < 0 or self.seed >= 1 << 64:
            raise ConfigError("field 'seed': must be an unsigned 64-bit integer")
        if not isinstance(self.budget, int) or self.budget < 1:
            raise ConfigError("field 'budget': must be a positive integer")
        if not isinstance(self.params, dict):
            raise ConfigError("field 'params': must be an object")
        for name in ("quantities", "bounds"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, list) or not all(isinstance(s, str) for s in v)):
                raise ConfigError(f"field {name!r}: must be a list of names")
        if self.bounds:
            unknown = sorted(set(self.bounds) - set(B.THEOREMS))
            if unknown:
                raise ConfigError(f"field 'bounds': unknown bound ids {unknown}")

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        extra = sorted(set(data) - known)
        if extra:
            raise ConfigError(f"unknown config field(s): {', '.join(extra)}")
        for req in ("example", "n_list"):
            if req not in data:
                raise ConfigError(f"field {req!r}: required")
        return cls(**data)

    @classmethod
    def from_json(cls, text, source="<config>"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(data)

    @classmethod
    def load(cls, path):
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
        return cls.from_json(text, source=str(path))

    def to_dict(self):
        return asdict(self)


@dataclass
class ReportRow:
    example: str
    n: int
    index: object
    quantity: str
    value: float | None
    method: str = "exact"
    stderr: float | None = None
    applicable: bool = True
    exact_gen_error: float | None = None

    def cells(self):
        return [self.example, str(self.n), str(self.index), self.quantity, fmt(self.value), self.method,
                fmt(self.stderr), "true" if self.applicable else "false", fmt(self.exact_gen_error)]


def fmt(v):
    if v is None:
        return ""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    out = "%.12g" % v
    return "0" if out == "-0" else out


def _wanted(selection, name):
    return selection is None or name in selection


# ---------------------------------------------------------------------------
# one value of n
# ---------------------------------------------------------------------------

def _exact_rows(cfg, n):
    problem = build_problem(cfg.example, n, cfg.params, budget=cfg.budget)
    rows = []
    add = rows.append
    q = B.collect_inputs(problem)
    gen = q.gen_error
    ex = cfg.example

    def row(index, name, value, method="exact", stderr=None, applicable=True):
        if _wanted(cfg.quantities, name):
            add(ReportRow(ex, n, index, name, value, method, stderr, applicable, gen))

    row("agg", "gen_error", gen)
    row("agg", "population_risk", q.population_risk)
    row("agg", "empirical_risk", q.empirical_risk)
    if q.second_moment is not None:
        row("agg", "second_moment_scaled", q.second_moment)
    for f in STABILITY_FIELDS:
        v = getattr(q.stability, f)
        row("agg", f, v, q.stability.methods.get(f, "exact"), applicable=v is not None)
    for name in PER_ROW:
        if name not in q.per_row:
            continue
        for i, v in enumerate(q.per_row[name], start=1):
            row(i, name, v)
    row("joint", "iomi_sample", q.iomi_sample)
    row("joint", "vec_cmi", q.vec_cmi, q.vec_method)
    if problem.alg.predicts and _wanted(cfg.quantities, "f_cmi_joint"):
        est = quantity("f_cmi_joint", problem)
        row("joint", "f_cmi_joint", est.value, est.method)
    if problem.name == "onehot-gd":
        row("agg", "birthday_floor", B.birthday_floor(n, problem.info["d"]))
    for rep in B.evaluate_bounds(problem, q):
        if _wanted(cfg.bounds, rep.theorem_id):
            add(ReportRow(ex, n, "agg", "bound:" + rep.theorem_id, rep.value, rep.method if rep.applicable else
                          "inapplicable", None, rep.applicable, gen))
    return rows


def _mc_rows(cfg, n):
    problem = build_problem(cfg.example, n, cfg.params, budget=cfg.budget)
    ex = cfg.example
    rows = []
    try:
        exact_gen = gen_error_standard(problem).gen_error
    except BudgetExceeded:
        exact_gen = None
    seed = cfg.seed

    def row(index, name, value, method, stderr=None, applicable=True):
        if _wanted(cfg.quantities, name):
            rows.append(ReportRow(ex, n, index, name, value, method, stderr, applicable, exact_gen))

    risk = gen_error_standard(problem, mode="mc", samples=cfg.mc_samples, seed=seed)
    row("agg", "gen_error", risk.gen_error, "monte-carlo", risk.stderr)
    row("agg", "population_risk", risk.expected_population, "monte-carlo")
    row("agg", "empirical_risk", risk.expected_empirical, "monte-carlo")
    try:
        from .stability import beta2_exact

        beta2, beta_method = beta2_exact(problem), "exact"
    except BudgetExceeded:
        beta2, beta_method = beta_mc(problem, cfg.mc_samples, seed), "mc-lower-bound"
    row("agg", "beta2", beta2, beta_method)
    info = {}
    for name in PER_ROW:
        if not _wanted(cfg.quantities, name) and name not in ("iomi_individual", "hyp_cmi"):
            continue
        vals = []
        for i in range(1, n + 1):
            try:
                est = quantity(name, problem, i, mode="mc", samples=cfg.mc_samples, seed=seed + i)
            except UnsupportedQuantity:
                break
            vals.append(est.value)
            row(i, name, est.value, est.method, est.stderr)
        if vals:
            info[name] = np.array(vals)
    est = quantity("iomi_sample", problem, mode="mc", samples=cfg.mc_samples, seed=seed)
    row("joint", "iomi_sample", est.value, est.method, est.stderr)

    reps = []
    if beta_method != "exact":
        reason = "stability constant is only a Monte Carlo lower bound"
        reps += [B.inapplicable("iomi_uniform", reason), B.inapplicable("cmi_uniform", reason)]
    else:
        reps += [B.b_iomi_uniform(beta2, info["iomi_individual"]), B.b_cmi_uniform(beta2, info["hyp_cmi"])]
    lo_hi = problem.loss.declared_range
    if lo_hi is not None:
        reps.append(B.baseline((lo_hi[1] - lo_hi[0]) / 2.0, info["iomi_individual"]))
    for rep in reps:
        if _wanted(cfg.bounds, rep.theorem_id):
            rows.append(ReportRow(ex, n, "agg", "bound:" + rep.theorem_id, rep.value,
                                  "plugin-mc" if rep.applicable else "inapplicable", None, rep.applicable, exact_gen))
    return rows


def _workers():
    try:
        return max(1, int(os.environ.get("GENBOUND_THREADS", "1")))
    except ValueError:
        return 1


def collect_rows(cfg: ExperimentConfig):
    fn = _exact_rows if cfg.mode == "exact" else _mc_rows
    with ThreadPoolExecutor(max_workers=_workers()) as pool:
        per_n = list(pool.map(lambda n: fn(cfg, n), cfg.n_list))
    # n_list is sorted and each block is built in a fixed order
    return [r for block in per_n for r in block]


def render_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def _write(path, text):
    if path is None or path == "-":
        return text
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return text


def run(cfg: ExperimentConfig, out=None):
    """Evaluate every selected quantity and bound; returns the CSV text (also written to ``out``)."""
    rows = collect_rows(cfg)
    return _write(out or cfg.out, render_csv(rows)), rows


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def loglog_slope(ns, values):
    """Least-squares slope of ``log(value)`` against ``log(n)``; ``None`` if any value is not positive."""
    ns = np.asarray(ns, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if len(ns) < 2 or np.any(~np.isfinite(v)) or np.any(v <= 0):
        return None
    x, y = np.log(ns), np.log(v)
    return float(np.polyfit(x, y, 1)[0])


def slopes(rows):
    series = {}
    for r in rows:
        if r.index in ("agg", "joint") and r.value is not None and r.applicable:
            series.setdefault(r.quantity, []).append((r.n, r.value))
    out = []
    for name in sorted(series):
        pts = sorted(series[name])
        if len(pts) < 2:
            continue
        out.append((name, loglog_slope([p[0] for p in pts], [p[1] for p in pts]), len(pts)))
    return out


def sweep(cfg: ExperimentConfig, out=None):
    if len(cfg.n_list) < 2:
        raise ConfigError("field 'n_list': a sweep needs at least two values of n")
    text, rows = run(cfg, out)
    fit = slopes(rows)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("example", "quantity", "slope", "n_points"))
    for name, s, k in fit:
        w.writerow((cfg.example, name, fmt(s), k))
    target = out or cfg.out
    if target and target != "-":
        _write(target + ".slopes.csv", buf.getvalue())
    return text, rows, buf.getvalue(), fit


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------

@dataclass
class InvariantResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Bundle:
    """Everything the invariant suite looks at for one problem."""

    problem: object
    inputs: object
    reports: list
    gen_forms: tuple
    deltas: object
    tables: list


def build_bundle(problem):
    q = B.collect_inputs(problem)
    reps = B.evaluate_bounds(problem, q)
    forms = (q.gen_error, gen_error_masked_data(problem), gen_error_masked_hyp(problem))
    tables = [(f"row{i}", problem.table(ROW, i - 1)) for i in range(1, problem.n + 1)]
    tables.append(("sample", problem.table(SAMPLE)))
    try:
        tables.append(("full", problem.table(FULL)))
    except BudgetExceeded:
        pass
    return Bundle(problem, q, reps, forms, delta_tables(problem), tables)


def check_invariants(bundle: Bundle):
    res = []

    def check(name, ok, detail=""):
        res.append(InvariantResult(name, bool(ok), detail))

    q, st, rows = bundle.inputs, bundle.inputs.stability, bundle.inputs.per_row
    for label, t in bundle.tables:
        total = t.total_mass()
        check(f"table_mass:{label}", abs(total - 1.0) <= MASS_TOL and np.all(t.w >= 0), f"total={total!r}")
    g = bundle.gen_forms
    check("gen_error_forms_agree", max(g) - min(g) <= TOL, f"forms={g}")
    n = q.n
    for i in range(n):
        hc, io_, sc = rows["hyp_cmi"][i], rows["iomi_individual"][i], rows["ss_cmi"][i]
        check(f"hyp_cmi_le_iomi:{i + 1}", hc <= io_ + TOL, f"{hc} vs {io_}")
        check(f"hyp_cmi_eq_ss_cmi:{i + 1}", abs(hc - sc) <= TOL, f"{hc} vs {sc}")
        chain = [rows["ld_mi"][i], rows["ld_cmi"][i], rows["e_cmi"][i]]
        names = ["ld_mi", "ld_cmi", "e_cmi"]
        if "f_cmi" in rows:
            chain.append(rows["f_cmi"][i])
            names.append("f_cmi")
        chain.append(sc)
        names.append("ss_cmi")
        ok = all(a <= b + TOL for a, b in zip(chain, chain[1:]))
        check(f"processing_chain:{i + 1}", ok, ", ".join(f"{k}={v:.12g}" for k, v in zip(names, chain)))
        check(f"iomi_le_conditional:{i + 1}", io_ <= rows["iomi_conditional"][i] + TOL,
              f"{io_} vs {rows['iomi_conditional'][i]}")
        for name in ("hyp_cmi", "ss_cmi", "std_cmi", "ld_mi", "ld_cmi", "e_cmi"):
            v = rows[name][i]
            check(f"cmi_le_log2:{name}:{i + 1}", v <= LN2 + TOL, f"{v}")
    for name in ("gamma1", "gamma2", "gamma3", "gamma4"):
        v = getattr(st, name)
        if v is not None:
            check(f"stability:{name}_le_beta2", v <= st.beta2 + 1e-12, f"{v} vs {st.beta2}")
    if st.gamma1 is not None and st.gamma2 is not None:
        check("stability:gamma2_le_gamma1", st.gamma2 <= st.gamma1 + 1e-12, f"{st.gamma2} vs {st.gamma1}")
    d = bundle.deltas
    for i in range(1, n + 1):
        check(f"delta1_mean_le_beta2:{i}", d.expected_delta1(i) <= st.beta2 + 1e-12)
        lam = d.lam_values[i - 1]
        check(f"lambda_in_unit:{i}", np.all(lam <= 1 + 1e-12) and np.all(lam >= 0), f"max={lam.max()}")
    for rep in bundle.reports:
        if rep.sound is not None:
            check(f"soundness:{rep.theorem_id}", rep.sound, f"bound={rep.value!r} vs {rep.comparison!r}")
    by_id = {r.theorem_id: r for r in bundle.reports}
    cu = by_id["cmi_uniform"]
    check("cmi_uniform_ceiling", cu.value <= cu.components["ceiling"] + 1e-12, f"{cu.value} vs {cu.components['ceiling']}")
    f8 = by_id["cmi_fast_delta1"]
    check("cmi_fast_delta1_ceiling", f8.value <= f8.components["ceiling"] + 1e-12,
          f"{f8.value} vs {f8.components['ceiling']}")
    lm, ld, lc = by_id["ld_min"], by_id["ld_disintegrated"], by_id["ld_conditional"]
    check("ld_order", lm.value <= lc.value + 1e-12 and ld.value <= lc.value + 1e-12 and lm.value <= ld.value + 1e-12,
          f"min={lm.value} disintegrated={ld.value} conditional={lc.value}")
    a1, a2 = by_id.get("iomi_sch_a"), by_id.get("iomi_sch_a_conditional")
    if a1 is not None and a1.applicable and a2.applicable:
        check("iomi_sch_a_order", a1.value <= a2.value + 1e-12)
    bern = by_id.get("bernstein_fast")
    if bern is not None and st.gamma2 is not None and "gamma2_implied" in bern.components:
        gi = bern.components["gamma2_implied"]
        check("bernstein_gamma2_dominates", gi >= st.gamma2 - 1e-12, f"{gi} vs {st.gamma2}")
    elif bern is not None and not bern.applicable and st.gamma2 is not None:
        check("bernstein_gamma2_dominates", True, "B infinite")
    return res


def verify(cfg: ExperimentConfig):
    """Run the invariant suite for every n; returns ``(all_passed, [(n, results)])``."""
    if cfg.mode != "exact":
        raise ConfigError("field 'mode': verify runs in exact mode only")
    out = []
    for n in cfg.n_list:
        problem = build_problem(cfg.example, n, cfg.params, budget=cfg.budget)
        out.append((n, check_invariants(build_bundle(problem))))
    ok = all(r.passed for _, results in out for r in results)
    return ok, out


def format_verify(cfg, results):
    lines = []
    for n, res in results:
        failed = [r for r in res if not r.passed]
        lines.append(f"{cfg.example} n={n}: {len(res) - len(failed)}/{len(res)} invariants pass")
        for r in failed:
            lines.append(f"  FAIL {r.name}: {r.detail}")
    return "\n".join(lines) + "\n"
