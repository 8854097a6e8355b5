"""End-to-end acceptance checks, one test per criterion.

Each test records a one-line PASS/FAIL verdict that the terminal summary
prints after the run.  Tolerances are pinned at module level.
"""
import functools
import itertools
import math
import time

import numpy as np

from genbound.algorithms import OneHotGDConfig, gd_onehot_closed, gd_onehot_iterative
from genbound.bounds import (
    ROW_QUANTITIES,
    b_cmi_uniform,
    b_iomi_uniform,
    b_vc_rhs,
    baseline,
    bernstein_h,
    birthday_floor,
    collect_inputs,
    evaluate_bounds,
)
from genbound.core import Sample
from genbound.experiments import loglog_slope
from genbound.information import UnsupportedQuantity, plugin_estimate, quantity
from genbound.problems import build_problem
from genbound.risk import gen_error_masked_data, gen_error_masked_hyp, gen_error_standard
from genbound.stability import beta2_exact, delta_tables
from tests.conftest import ACCEPTANCE_LINES

LN2 = math.log(2)
EQ_TOL = 1e-10
SOUND_TOL = 1e-9
CONST_TOL = 1e-12
MC_Z = 4.0

SOUNDNESS_CONFIGS = [("sign-erm", n) for n in (3, 5, 7)] + [("onehot-gd", 2), ("onehot-gd", 3),
                     ("regularized-erm", 3)] + [("threshold-erm", n) for n in (2, 3, 4, 5)]


def record(k, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@functools.lru_cache(maxsize=None)
def soundness_runs():
    """Fresh problems and every bound on each configuration, with the wall time."""
    t0 = time.perf_counter()
    out = {}
    for ex, n in SOUNDNESS_CONFIGS:
        p = build_problem(ex, n)
        q = collect_inputs(p)
        out[(ex, n)] = (p, q, evaluate_bounds(p, q))
    return out, time.perf_counter() - t0


def rademacher_oracle(n):
    return math.fsum(abs(sum(e)) for e in itertools.product((-1, 1), repeat=n)) / 2**n / n


def test_criterion_1_sign_erm_exactness():
    t0 = time.perf_counter()
    bad = []
    for n in (3, 5, 7):
        p = build_problem("sign-erm", n)
        want = rademacher_oracle(n)
        forms = (gen_error_standard(p).gen_error, gen_error_masked_data(p), gen_error_masked_hyp(p))
        if max(abs(f - want) for f in forms) > EQ_TOL:
            bad.append(f"n={n} forms {forms} vs {want}")
        if forms[0] < 1 / math.sqrt(2 * n):
            bad.append(f"n={n} gen below 1/sqrt(2n)")
        i_s = quantity("iomi_sample", p).value
        if abs(i_s - LN2) > EQ_TOL or i_s > 1.0:
            bad.append(f"n={n} I(W;S)={i_s}")
        b2 = beta2_exact(p)
        if abs(b2 - 2.0) > EQ_TOL:
            bad.append(f"n={n} beta2={b2}")
    dt = time.perf_counter() - t0
    if dt >= 5.0:
        bad.append(f"runtime {dt:.2f}s")
    ok = not bad
    record(1, ok, f"gen=(1/n)E|sum eps| to {EQ_TOL}, I(W;S)=ln2, beta2=2 at n=3,5,7 in {dt:.2f}s "
                  + "; ".join(bad))
    assert ok, bad


def test_criterion_2_soundness_sandwich():
    runs, dt = soundness_runs()
    bad = []
    for (ex, n), (_, _, reps) in runs.items():
        for r in reps:
            if r.sound is False:
                bad.append(f"{ex} n={n} {r.theorem_id} {r.value:.4g}<{r.comparison:.4g}")
    if dt >= 120.0:
        bad.append(f"runtime {dt:.1f}s")
    ok = not bad
    record(2, ok, f"every applicable bound >= |gen| - {SOUND_TOL} on {len(runs)} configs in {dt:.1f}s; "
                  f"{len(bad)} violations: " + ", ".join(bad[:6]) + (" ..." if len(bad) > 6 else ""))
    assert ok, bad


def test_criterion_3_hyp_cmi_vs_iomi():
    runs, _ = soundness_runs()
    ineq, eq = [], []
    for (ex, n), (_, q, _) in runs.items():
        rows = q.per_row
        for i in range(n):
            if rows["hyp_cmi"][i] > rows["iomi_individual"][i] + EQ_TOL:
                ineq.append(f"{ex} n={n} i={i + 1} {rows['hyp_cmi'][i]:.4f}>{rows['iomi_individual'][i]:.4f}")
            if abs(rows["hyp_cmi"][i] - rows["ss_cmi"][i]) > EQ_TOL:
                eq.append(f"{ex} n={n} i={i + 1}")
    ok = not ineq and not eq
    record(3, ok, f"hyp_cmi = ss_cmi to {EQ_TOL}: {'ok' if not eq else eq}; hyp_cmi <= iomi: "
                  f"{len(ineq)} violations " + ", ".join(ineq[:4]) + (" ..." if len(ineq) > 4 else ""))
    assert ok, (ineq, eq)


def test_criterion_4_processing_chain():
    runs, _ = soundness_runs()
    bad = []
    for (ex, n), (_, q, _) in runs.items():
        rows = q.per_row
        for i in range(n):
            chain = [rows["ld_cmi"][i], rows["e_cmi"][i]]
            if "f_cmi" in rows:
                chain.append(rows["f_cmi"][i])
            chain.append(rows["ss_cmi"][i])
            if any(a > b + EQ_TOL for a, b in zip(chain, chain[1:])):
                bad.append(f"{ex} n={n} i={i + 1} {chain}")
    has_f = sum("f_cmi" in q.per_row for _, q, _ in runs.values())
    ok = not bad
    record(4, ok, f"ld_cmi <= e_cmi [<= f_cmi] <= ss_cmi to {EQ_TOL} ({has_f} configs with f_cmi) "
                  + "; ".join(bad[:3]))
    assert ok, bad


def test_criterion_5_onehot_failure_and_rescue():
    t0 = time.perf_counter()
    bad = []
    p2 = build_problem("onehot-gd", 2)
    s2 = quantity("std_cmi", p2, 1).value
    if s2 < 0.1 * LN2:
        bad.append(f"std_cmi(n=2)={s2}")
    p3 = build_problem("onehot-gd", 3)
    mc = plugin_estimate("std_cmi", p3, 1, samples=1_000_000, seed=0)
    if mc.value - MC_Z * mc.stderr < 0.05:
        bad.append(f"std_cmi mc(n=3)={mc.value}+-{mc.stderr}")
    ns, new, base = [2, 3, 4], [], []
    for n in ns:
        p = p2 if n == 2 else p3 if n == 3 else build_problem("onehot-gd", n)
        b2 = beta2_exact(p)
        if b2 * math.sqrt(n) > 2 * math.sqrt(2) + CONST_TOL:
            bad.append(f"beta2*sqrt(n)={b2 * math.sqrt(n)} at n={n}")
        hc = [quantity("hyp_cmi", p, i).value for i in range(1, n + 1)]
        io = [quantity("iomi_individual", p, i).value for i in range(1, n + 1)]
        cu = b_cmi_uniform(b2, hc)
        if cu.value > cu.components["ceiling"] + CONST_TOL:
            bad.append(f"cmi_uniform above sqrt(2 ln2) beta2 at n={n}")
        new.append(cu.value)
        lo, hi = p.loss.declared_range
        base.append(baseline((hi - lo) / 2, io).value)
    s_new, s_base = loglog_slope(ns, new), loglog_slope(ns, base)
    if s_new > -0.35:
        bad.append(f"new slope {s_new:.3f}")
    if s_base < -0.1:
        bad.append(f"baseline slope {s_base:.3f}")
    dt = time.perf_counter() - t0
    if dt >= 180.0:
        bad.append(f"runtime {dt:.1f}s")
    ok = not bad
    record(5, ok, f"std_cmi(2)={s2:.4f}>=0.1ln2, mc std_cmi(3)={mc.value:.4f}+-{mc.stderr:.1e} (4se>=0.05), "
                  f"slopes new={s_new:.3f}<=-0.35 base={s_base:.3f}>=-0.1, {dt:.1f}s " + "; ".join(bad))
    assert ok, bad


def test_criterion_6_scaled_sign_erm():
    bad, ns, vals = [], [3, 5, 7, 9], []
    for n in ns:
        p = build_problem("sign-erm-scaled", n)
        gen = gen_error_standard(p).gen_error
        if gen < 1 / (math.sqrt(2) * n):
            bad.append(f"gen {gen} at n={n}")
        b2 = beta2_exact(p)
        io = [quantity("iomi_individual", p, i).value for i in range(1, n + 1)]
        v = b_iomi_uniform(b2, io).value
        # L = 1: the Jensen aggregate sqrt(2) beta2 sqrt(ln2 / n) with beta2 = 2 / sqrt(n)
        cap = 2 * math.sqrt(2) * math.sqrt(LN2) / n
        if v > cap + CONST_TOL:
            bad.append(f"bound {v} > {cap} at n={n}")
        vals.append(v)
    s = loglog_slope(ns, vals)
    if s > -0.8:
        bad.append(f"slope {s:.3f}")
    ok = not bad
    record(6, ok, f"gen >= 1/(sqrt2 n), iomi_uniform <= 2 sqrt(2 ln2)/n, slope {s:.3f} <= -0.8 " + "; ".join(bad))
    assert ok, bad


def test_criterion_7_constants():
    runs, _ = soundness_runs()
    bad = []
    if abs(bernstein_h(1.0) - (math.e - 2)) > CONST_TOL:
        bad.append("h(1)")
    max_lam = 0.0
    for (ex, n), (p, q, reps) in runs.items():
        d = delta_tables(p)
        max_lam = max(max_lam, max(float(np.max(v)) for v in d.lam_values))
        f8 = {r.theorem_id: r for r in reps}["cmi_fast_delta1"]
        g3 = f8.components["gamma3_from_delta1"]
        if f8.value > (LN2 + math.e - 2) * g3 + CONST_TOL:
            bad.append(f"eq8 ceiling {ex} n={n}")
    if max_lam > 1 + CONST_TOL:
        bad.append(f"Lambda max {max_lam}")
    floors = [birthday_floor(n, 2 * n * n) for n in (2, 3, 4)]
    if min(floors) < 0.1:
        bad.append(f"birthday {floors}")
    ok = not bad
    record(7, ok, f"h(1)=e-2 to {CONST_TOL}, max Lambda={max_lam:.4f}, fast-CMI <= (ln2+e-2) gamma3, "
                  f"birthday floors {[round(f, 4) for f in floors]} " + "; ".join(bad))
    assert ok, bad


def test_criterion_8_vc_chain():
    t0 = time.perf_counter()
    bad, parts = [], []
    for n in (4, 5):
        p = build_problem("threshold-erm", n)
        f = [quantity("f_cmi", p, i).value for i in range(1, n + 1)]
        lhs = math.fsum(np.sqrt(f)) / n
        rhs = b_vc_rhs(1, n)
        parts.append(f"n={n} {lhs:.4f}<={rhs:.4f}")
        if lhs > rhs:
            bad.append(f"n={n}")
    dt = time.perf_counter() - t0
    if dt >= 30.0:
        bad.append(f"runtime {dt:.1f}s")
    ok = not bad
    record(8, ok, f"threshold m=6: {', '.join(parts)} in {dt:.1f}s " + "; ".join(bad))
    assert ok, bad


def test_criterion_9_oracle_cross_checks():
    bad = []
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(1, 6))
        cfg = OneHotGDConfig(n=n, d=int(rng.integers(1, 20)), eta=float(rng.uniform(0.01, 1.5)),
                             T=int(rng.integers(0, 40)))
        cols = rng.integers(0, cfg.d, size=n)
        s = Sample([np.eye(cfg.d)[j] for j in cols])
        worst = max(worst, float(np.max(np.abs(gd_onehot_closed(cfg, s).vector - gd_onehot_iterative(cfg, s).vector))))
    if worst > EQ_TOL:
        bad.append(f"gd mismatch {worst}")

    zmax, checked = 0.0, 0
    for ex, n in (("sign-erm", 3), ("threshold-erm", 3), ("regularized-erm", 3), ("onehot-gd", 2)):
        p = build_problem(ex, n)
        for name in ROW_QUANTITIES:
            for i in range(1, n + 1):
                try:
                    exact = quantity(name, p, i).value
                except UnsupportedQuantity:
                    break
                est = plugin_estimate(name, p, i, samples=200_000, seed=7)
                z = abs(est.value - exact) / max(est.stderr, 1e-15)
                checked += 1
                zmax = max(zmax, z if abs(est.value - exact) > 1e-12 else 0.0)
                if abs(est.value - exact) > MC_Z * est.stderr + 1e-12:
                    bad.append(f"{ex} {name} i={i} z={z:.2f}")

    runs, _ = soundness_runs()
    for (ex, n), (_, q, reps) in runs.items():
        bern = {r.theorem_id: r for r in reps}["bernstein_fast"]
        gi = bern.components.get("gamma2_implied", math.inf)
        if gi < q.stability.gamma2 - CONST_TOL:
            bad.append(f"prop gamma2 {ex} n={n}")
    ok = not bad
    record(9, ok, f"gd closed=iterative max diff {worst:.1e} (1000 cases); {checked} MC estimates, "
                  f"max |z|={zmax:.2f} <= {MC_Z}; Bernstein gamma2 >= exact on {len(runs)} configs "
                  + "; ".join(bad[:4]))
    assert ok, bad
