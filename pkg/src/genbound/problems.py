"""Ready-made problems for the five example families."""
from __future__ import annotations

import numpy as np

from .algorithms import (
    OneHotGD,
    OneHotGDConfig,
    RademacherERMConfig,
    RegularizedERM,
    RegularizedERMConfig,
    SignERM,
    ThresholdERM,
    ThresholdERMConfig,
)
from .core import DEFAULT_BUDGET, DiscreteDistribution, LinearLoss, ThresholdZeroOneLoss
from .engine import Problem

EXAMPLES = ("onehot-gd", "sign-erm", "sign-erm-scaled", "regularized-erm", "threshold-erm")

DEFAULT_RERM_SUPPORT = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0))


def onehot_problem(n, d=None, eta=None, T=None, budget=DEFAULT_BUDGET, engine="auto"):
    cfg = OneHotGDConfig(n=n, d=d, eta=eta, T=T)
    support = [np.eye(cfg.d)[j] for j in range(cfg.d)]
    dist = DiscreteDistribution(support, kind="onehot")
    loss = LinearLoss(1.0, declared_range=(-1.0, 1.0))
    # the risk -<w, mean z> over the unit ball is minimized by the normalized all-ones vector
    w_star = lambda cols: np.full((1, cols), 1.0 / np.sqrt(cfg.d))
    return Problem("onehot-gd", dist, OneHotGD(cfg), loss, n, budget=budget, engine=engine,
                   info={"d": cfg.d, "eta": cfg.eta, "T": cfg.T, "minimizer": w_star})


def sign_erm_problem(n, R0=1.0, L=1.0, scaled=False, tie_break=1, budget=DEFAULT_BUDGET, engine="auto"):
    cfg = RademacherERMConfig(R0=R0, L=L, tie_break=tie_break, scaled_variant=scaled, n=n)
    dist = DiscreteDistribution([np.array([1.0]), np.array([-1.0])], kind="two-point")
    lr = cfg.L * cfg.R0
    loss = LinearLoss(cfg.L, declared_range=(-lr, lr))
    name = "sign-erm-scaled" if scaled else "sign-erm"
    return Problem(name, dist, SignERM(cfg), loss, n, budget=budget, engine=engine,
                   info={"R0": cfg.R0, "L": cfg.L})


def regularized_erm_problem(n, lam=1.0, L=1.0, support=None, mass=None, budget=DEFAULT_BUDGET, engine="auto"):
    cfg = RegularizedERMConfig(lam=lam, L=L)
    pts = [np.asarray(z, dtype=np.float64) for z in (support or DEFAULT_RERM_SUPPORT)]
    dist = DiscreteDistribution(pts, mass=mass)
    radius = max(float(np.linalg.norm(z)) for z in pts)
    bound = cfg.L**2 * radius**2 / (2.0 * cfg.lam)
    loss = LinearLoss(cfg.L, declared_range=(-bound, bound))
    return Problem("regularized-erm", dist, RegularizedERM(cfg, dist.features(), n), loss, n,
                   budget=budget, engine=engine, info={"lam": cfg.lam, "L": cfg.L, "radius": radius})


def threshold_problem(n, m=6, true_threshold=None, budget=DEFAULT_BUDGET, engine="auto"):
    cfg = ThresholdERMConfig(m=m, true_threshold=true_threshold)
    dist = DiscreteDistribution(cfg.support(), kind="grid")
    return Problem("threshold-erm", dist, ThresholdERM(cfg), ThresholdZeroOneLoss(), n,
                   budget=budget, engine=engine, info={"m": cfg.m, "true_threshold": cfg.true_threshold, "vc_dim": 1,
                         "minimizer": lambda cols: np.array([[float(cfg.true_threshold)]])})


def build_problem(example, n, params=None, budget=DEFAULT_BUDGET, engine="auto"):
    """Problem for one of ``EXAMPLES`` with keyword overrides from ``params``."""
    params = dict(params or {})
    if example == "onehot-gd":
        return onehot_problem(n, budget=budget, engine=engine, **params)
    if example == "sign-erm":
        return sign_erm_problem(n, budget=budget, engine=engine, **params)
    if example == "sign-erm-scaled":
        return sign_erm_problem(n, scaled=True, budget=budget, engine=engine, **params)
    if example == "regularized-erm":
        return regularized_erm_problem(n, budget=budget, engine=engine, **params)
    if example == "threshold-erm":
        return threshold_problem(n, budget=budget, engine=engine, **params)
    raise ValueError(f"unknown example {example!r}; choose from {', '.join(EXAMPLES)}")
