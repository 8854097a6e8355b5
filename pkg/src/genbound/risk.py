"""Generalization error in its three equivalent supersample forms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import fsum_dot
from .engine import ROW, SAMPLE, Problem

N_BOOTSTRAP = 200


@dataclass
class RiskReport:
    expected_population: float
    expected_empirical: float
    gen_error: float
    method: str = "exact"
    samples: int = 0
    stderr: float = 0.0

    @property
    def population_risk(self):
        return self.expected_population

    @property
    def empirical_risk(self):
        return self.expected_empirical


def as_problem(problem_or_alg, loss=None, dist=None, n=None, **kw) -> Problem:
    if isinstance(problem_or_alg, Problem):
        return problem_or_alg
    if loss is None or dist is None or n is None:
        raise TypeError("pass a Problem or (alg, loss, dist, n)")
    return Problem(getattr(problem_or_alg, "name", "custom"), dist, problem_or_alg, loss, n, **kw)


def population_risk(problem: Problem, w) -> float:
    """``L_mu(w)`` for a hypothesis vector ``w``."""
    vec = np.atleast_2d(np.asarray(getattr(w, "vector", w), dtype=np.float64))
    return fsum_dot(problem.p, problem.loss.matrix(vec, problem.feats)[0])


def empirical_risk(problem: Problem, w, sample) -> float:
    """``L_S(w)`` for a hypothesis vector and a sample of instances."""
    vec = np.atleast_2d(np.asarray(getattr(w, "vector", w), dtype=np.float64))
    idx = problem.dist.indices(getattr(sample, "items", sample))
    return float(np.mean(problem.loss.matrix(vec, problem.feats)[0, idx]))


# ---------------------------------------------------------------------------
# exact evaluators
# ---------------------------------------------------------------------------

def _row_average(problem, fn):
    return math.fsum(fn(problem.table(ROW, i)) for i in range(problem.n)) / problem.n


def _standard_exact(problem):
    return _row_average(problem, lambda t: t.expect(t.values["lm_zp"] - t.values["lp_zp"]))


def _masked_data_exact(problem):
    return _row_average(problem, lambda t: t.expect(np.where(t.values["u"] == 0, 1.0, -1.0) * t.values["gap_hat"]))


def _masked_hyp_exact(problem):
    def row(t):
        sign = np.where(t.values["u"] == 0, 1.0, -1.0)
        return t.expect(sign * (t.values["Lbar"] - t.values["L"]))

    return _row_average(problem, row)


def _flipped_exact(problem):
    # superscripts swapped in every row: the neighbour trains on Z-_i's row replacement
    return _row_average(problem, lambda t: t.expect(t.values["lp_zm"] - t.values["lm_zm"]))


# ---------------------------------------------------------------------------
# Monte Carlo evaluators
# ---------------------------------------------------------------------------

def _simulate(problem, samples, seed):
    """Per-draw integrands of all three forms plus the risks of W+."""
    rng = np.random.default_rng(seed)
    n, alg = problem.n, problem.alg
    zp = rng.choice(problem.K, size=(samples, n), p=problem.p)
    zm = rng.choice(problem.K, size=(samples, n), p=problem.p)
    u = rng.integers(0, 2, size=(samples, n))
    sv = alg.seed_values[rng.choice(len(alg.seed_values), size=samples, p=alg.seed_mass)]
    lp = problem.loss.matrix  # shorthand
    params_p = alg.params(alg.statistic(zp, sv))
    lmat_p = lp(params_p, problem.feats)
    rows = np.arange(samples)
    std = np.zeros(samples)
    data = np.zeros(samples)
    hyp = np.zeros(samples)
    for j in range(n):
        zn = zp.copy()
        zn[:, j] = zm[:, j]
        lmat_m = lp(alg.params(alg.statistic(zn, sv)), problem.feats)
        sign = np.where(u[:, j] == 0, 1.0, -1.0)
        zhat = np.where(u[:, j] == 0, zp[:, j], zm[:, j])
        std += lmat_m[rows, zp[:, j]] - lmat_p[rows, zp[:, j]]
        data += sign * (lmat_m[rows, zhat] - lmat_p[rows, zhat])
        l_w = np.where(u[:, j] == 0, lmat_p[rows, zp[:, j]], lmat_m[rows, zp[:, j]])
        l_bar = np.where(u[:, j] == 0, lmat_m[rows, zp[:, j]], lmat_p[rows, zp[:, j]])
        hyp += sign * (l_bar - l_w)
    pop = lmat_p @ problem.p
    emp = lmat_p[rows[:, None], zp].mean(axis=1)
    return std / n, data / n, hyp / n, pop, emp, rng


def _boot_se(values, rng):
    n = len(values)
    reps = np.empty(N_BOOTSTRAP)
    for b in range(N_BOOTSTRAP):
        reps[b] = values[rng.integers(0, n, size=n)].mean()
    return float(np.std(reps, ddof=1))


def _mc(problem, samples, seed, which):
    if samples is None or samples < 100:
        raise ValueError("Monte Carlo mode needs samples >= 100")
    std, data, hyp, pop, emp, rng = _simulate(problem, int(samples), seed)
    vals = {"standard": std, "data": data, "hyp": hyp}[which]
    return vals, pop, emp, rng


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def gen_error_standard(problem, loss=None, dist=None, n=None, mode="exact", samples=None, seed=0) -> RiskReport:
    """Average over rows of ``E[loss(W-_i, Z+_i) - loss(W+, Z+_i)]`` plus the risks themselves."""
    problem = as_problem(problem, loss, dist, n)
    if mode == "exact":
        ts = problem.table(SAMPLE)
        pop = ts.expect(ts.values["pop_risk"])
        emp = ts.expect(ts.values["emp_risk"])
        return RiskReport(pop, emp, _standard_exact(problem), "exact")
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    vals, pop, emp, rng = _mc(problem, samples, seed, "standard")
    return RiskReport(float(pop.mean()), float(emp.mean()), float(vals.mean()), "monte-carlo",
                      int(samples), _boot_se(vals, rng))


def gen_error_masked_data(problem, loss=None, dist=None, n=None, mode="exact", samples=None, seed=0,
                          return_stderr=False):
    """Mask-for-data form ``E[(-1)^U_i (loss(W-_i, Zhat_i) - loss(W+, Zhat_i))]``."""
    problem = as_problem(problem, loss, dist, n)
    if mode == "exact":
        v, se = _masked_data_exact(problem), 0.0
    else:
        vals, _, _, rng = _mc(problem, samples, seed, "data")
        v, se = float(vals.mean()), _boot_se(vals, rng)
    return (v, se) if return_stderr else v


def gen_error_masked_hyp(problem, loss=None, dist=None, n=None, mode="exact", samples=None, seed=0,
                         return_stderr=False):
    """Mask-for-weight form ``E[(-1)^U_i (loss(Wbar_i, Z+_i) - loss(W_i, Z+_i))]``."""
    problem = as_problem(problem, loss, dist, n)
    if mode == "exact":
        v, se = _masked_hyp_exact(problem), 0.0
    else:
        vals, _, _, rng = _mc(problem, samples, seed, "hyp")
        v, se = float(vals.mean()), _boot_se(vals, rng)
    return (v, se) if return_stderr else v


def gen_error_flipped(problem) -> float:
    """The standard form with the two columns of every row swapped (exact)."""
    return _flipped_exact(as_problem(problem))


def second_moment_exact(problem, loss=None, dist=None, n=None, shift=0.0, scale=1.0) -> float:
    """``E[(L_mu(W) - L_S(W))^2]`` for the loss ``(loss + shift) / scale``."""
    problem = as_problem(problem, loss, dist, n)
    ts = problem.table(SAMPLE)
    diff = (ts.values["pop_risk"] - ts.values["emp_risk"]) / scale
    return ts.expect(diff**2)
