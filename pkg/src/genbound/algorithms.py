"""Learning algorithms with exact canonical statistics.

Every algorithm works on integer support indices in bulk:
``statistic(idx, seeds)`` maps an ``(N, n)`` index matrix to an ``(N, p)``
integer statistic that determines the hypothesis exactly, and
``params(stats)`` turns statistics into real hypothesis vectors.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import (
    DiscreteDistribution,
    Hypothesis,
    LinearLoss,
    Sample,
    ThresholdZeroOneLoss,
)


class Algorithm:
    name = "algorithm"
    symmetric = True
    # equivariant under relabelling of a uniform one-hot support
    exchangeable = False
    predicts = False

    def __init__(self):
        self.seed_values = np.array([0], dtype=np.int64)
        self.seed_mass = np.array([1.0])

    @property
    def deterministic(self):
        return len(self.seed_values) == 1

    def statistic(self, idx, seeds, width=None):  # pragma: no cover - abstract
        raise NotImplementedError

    def params(self, stats):  # pragma: no cover - abstract
        raise NotImplementedError

    def predict(self, params, feats):
        raise NotImplementedError(f"{self.name} does not produce label predictions")

    def fit(self, dist: DiscreteDistribution, sample: Sample, seed=None) -> Hypothesis:
        if seed is None:
            seed = self.seed_values[0]
        idx = dist.indices(sample.items)[None, :]
        stat = np.asarray(self.statistic(idx, np.array([seed])))
        return Hypothesis(self.params(stat)[0], tuple(int(v) for v in stat[0]))


# ---------------------------------------------------------------------------
# projected GD on one-hot data
# ---------------------------------------------------------------------------

@dataclass
class OneHotGDConfig:
    n: int
    d: int | None = None
    eta: float | None = None
    T: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.d is None:
            self.d = 2 * self.n**2
        if self.eta is None:
            self.eta = 1.0 / (self.n * math.sqrt(self.n))
        if self.T is None:
            self.T = self.n**2
        if self.d < 1 or self.eta < 0 or self.T < 0:
            raise ValueError("need d >= 1, eta >= 0, T >= 0")


def onehot_closed_form(counts, n, eta, steps):
    """Closed-form GD iterate ``w_T`` from count vectors (rows of ``counts``)."""
    mu = np.asarray(counts, dtype=np.float64) / n
    norm = np.sqrt(np.einsum("ij,ij->i", mu, mu))
    scale = eta * steps
    inside = scale * norm <= 1.0
    safe = np.where(norm > 0, norm, 1.0)
    return np.where(inside[:, None], scale * mu, mu / safe[:, None])


def _onehot_counts(cfg, sample):
    vecs = np.array([np.asarray(z, dtype=np.float64).ravel() for z in sample.items])
    if vecs.ndim != 2 or vecs.shape[1] != cfg.d:
        raise ValueError(f"instances must be one-hot vectors of length {cfg.d}")
    ones = vecs == 1.0
    if not (np.all(ones.sum(axis=1) == 1) and np.all((vecs == 0.0) | ones)):
        raise ValueError("instances must be one-hot vectors")
    return _kernels.row_counts(ones.argmax(axis=1)[None, :], cfg.d)


def gd_onehot_closed(cfg: OneHotGDConfig, sample: Sample) -> Hypothesis:
    counts = _onehot_counts(cfg, sample)
    w = onehot_closed_form(counts, len(sample), cfg.eta, cfg.T)[0]
    return Hypothesis(w, tuple(int(c) for c in counts[0]))


def gd_onehot_iterative(cfg: OneHotGDConfig, sample: Sample) -> Hypothesis:
    counts = _onehot_counts(cfg, sample)
    mu = counts / float(len(sample))
    w = _kernels.projected_gd(mu, cfg.eta, cfg.T)[0]
    return Hypothesis(w, tuple(int(c) for c in counts[0]))


class OneHotGD(Algorithm):
    """GD on ``-<w, z>`` over the unit ball; the count vector is the statistic."""

    name = "onehot-gd"
    exchangeable = True

    def __init__(self, cfg: OneHotGDConfig):
        super().__init__()
        self.cfg = cfg

    def statistic(self, idx, seeds=None, width=None):
        return _kernels.row_counts(idx, self.cfg.d if width is None else width)

    def params(self, stats):
        return onehot_closed_form(stats, self.cfg.n, self.cfg.eta, self.cfg.T)

    def params_iterative(self, stats):
        return _kernels.projected_gd(np.asarray(stats) / float(self.cfg.n), self.cfg.eta, self.cfg.T)


# ---------------------------------------------------------------------------
# sign ERM on the two-point problem
# ---------------------------------------------------------------------------

@dataclass
class RademacherERMConfig:
    R0: float = 1.0
    L: float = 1.0
    tie_break: int = 1
    scaled_variant: bool = False
    n: int | None = None

    def __post_init__(self):
        if self.scaled_variant:
            if self.n is None:
                raise ValueError("the scaled variant needs n (it sets R0 = 1/sqrt(n))")
            self.R0 = 1.0 / math.sqrt(self.n)
        if self.R0 <= 0 or self.L <= 0:
            raise ValueError("R0 and L must be positive")
        if self.tie_break not in (1, -1):
            raise ValueError("tie_break must be +1 or -1")


def _epsilons(cfg, sample):
    eps = []
    for z in sample.items:
        v = np.asarray(z, dtype=np.float64).ravel()
        if v.size < 1 or np.any(v[1:] != 0) or abs(abs(v[0]) - 1.0) > 1e-12:
            raise ValueError(f"instance {z!r} is not one of +-z0/R0")
        eps.append(1 if v[0] > 0 else -1)
    return np.array(eps)


def sign_erm(cfg: RademacherERMConfig, sample: Sample) -> Hypothesis:
    """ERM for ``-L<w,z>`` over the radius-R0 ball on the support ``{+-z0/R0}``."""
    total = int(_epsilons(cfg, sample).sum())
    sign = 1 if total > 0 else -1 if total < 0 else cfg.tie_break
    return Hypothesis(np.array([sign * cfg.R0]), (sign,))


class SignERM(Algorithm):
    """Support index 0 is ``+z0/R0`` and index 1 is ``-z0/R0``; the statistic is the output sign."""

    name = "sign-erm"

    def __init__(self, cfg: RademacherERMConfig):
        super().__init__()
        self.cfg = cfg

    def statistic(self, idx, seeds=None, width=None):
        total = (1 - 2 * np.asarray(idx, dtype=np.int64)).sum(axis=1)
        sign = np.where(total > 0, 1, np.where(total < 0, -1, self.cfg.tie_break))
        return sign[:, None].astype(np.int64)

    def params(self, stats):
        return np.asarray(stats, dtype=np.float64)[:, :1] * self.cfg.R0


# ---------------------------------------------------------------------------
# Tikhonov-regularized ERM for the linear loss
# ---------------------------------------------------------------------------

@dataclass
class RegularizedERMConfig:
    lam: float = 1.0
    L: float = 1.0

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.L <= 0:
            raise ValueError("L must be positive")


def regularized_erm(cfg: RegularizedERMConfig, sample: Sample) -> Hypothesis:
    """Minimizer of ``-L<w, mean(z)> + lam ||w||^2``, i.e. ``w = L mean(z) / (2 lam)``."""
    if cfg.lam <= 0:
        raise ValueError("lambda must be positive")
    mean = np.mean([np.asarray(z, dtype=np.float64).ravel() for z in sample.items], axis=0)
    w = cfg.L * mean / (2.0 * cfg.lam)
    return Hypothesis(w, tuple(np.round(w / 1e-9).astype(np.int64).tolist()))


class RegularizedERM(Algorithm):
    """Closed-form regularized ERM; the statistic is the count vector over the support."""

    name = "regularized-erm"

    def __init__(self, cfg: RegularizedERMConfig, feats, n):
        super().__init__()
        self.cfg = cfg
        self.feats = np.asarray(feats, dtype=np.float64)
        self.n = int(n)

    def statistic(self, idx, seeds=None, width=None):
        return _kernels.row_counts(idx, len(self.feats) if width is None else width)

    def params(self, stats):
        mean = np.asarray(stats, dtype=np.float64) @ self.feats / self.n
        return self.cfg.L * mean / (2.0 * self.cfg.lam)


# ---------------------------------------------------------------------------
# threshold classifiers on a grid
# ---------------------------------------------------------------------------

@dataclass
class ThresholdERMConfig:
    m: int = 6
    true_threshold: int | None = None

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("grid size must be >= 1")
        if self.true_threshold is None:
            self.true_threshold = self.m // 2 + 1
        if not 1 <= self.true_threshold <= self.m:
            raise ValueError("true_threshold must lie in 1..m")

    def support(self):
        return [(x, int(x >= self.true_threshold)) for x in range(1, self.m + 1)]


def threshold_erm(cfg: ThresholdERMConfig, sample: Sample) -> Hypothesis:
    """Threshold at the smallest positively labelled point (``m + 1`` when none)."""
    pairs = [(int(x), int(y)) for x, y in sample.items]
    pos = [x for x, y in pairs if y == 1]
    neg = [x for x, y in pairs if y == 0]
    if pos and neg and max(neg) >= min(pos):
        raise ValueError("sample is not realizable by a threshold")
    t = min(pos) if pos else cfg.m + 1
    return Hypothesis(np.array([float(t)]), (t,))


class ThresholdERM(Algorithm):
    """Support index j is the point ``x = j + 1`` with its realizable label."""

    name = "threshold-erm"
    predicts = True

    def __init__(self, cfg: ThresholdERMConfig):
        super().__init__()
        self.cfg = cfg

    def statistic(self, idx, seeds=None, width=None):
        x = np.asarray(idx, dtype=np.int64) + 1
        x = np.where(x >= self.cfg.true_threshold, x, self.cfg.m + 1)
        return x.min(axis=1)[:, None]

    def params(self, stats):
        return np.asarray(stats, dtype=np.float64)[:, :1]

    def predict(self, params, feats):
        return (np.asarray(feats)[None, :, 0] >= np.asarray(params)[:, :1]).astype(np.int64)


# ---------------------------------------------------------------------------
# generic wrapper, handy for toy algorithms
# ---------------------------------------------------------------------------

class FunctionAlgorithm(Algorithm):
    """Wrap ``stat_fn(idx, seeds) -> (N, p) ints`` as an algorithm.

    ``params_fn`` maps statistics to vectors (defaults to the statistic cast
    to float).  ``seed_values`` / ``seed_mass`` give the randomness law.
    """

    def __init__(self, stat_fn, params_fn=None, seed_values=(0,), seed_mass=None,
                 symmetric=True, name="function"):
        super().__init__()
        self.stat_fn = stat_fn
        self.params_fn = params_fn
        self.seed_values = np.asarray(seed_values, dtype=np.int64)
        if seed_mass is None:
            seed_mass = np.full(len(self.seed_values), 1.0 / len(self.seed_values))
        self.seed_mass = np.asarray(seed_mass, dtype=np.float64)
        if abs(self.seed_mass.sum() - 1.0) > 1e-12:
            raise ValueError("seed masses must sum to 1")
        self.symmetric = symmetric
        self.name = name

    def statistic(self, idx, seeds, width=None):
        out = np.asarray(self.stat_fn(np.asarray(idx), np.asarray(seeds)), dtype=np.int64)
        return out.reshape(len(idx), -1)

    def params(self, stats):
        if self.params_fn is None:
            return np.asarray(stats, dtype=np.float64)
        return np.asarray(self.params_fn(np.asarray(stats)), dtype=np.float64)


def constant_algorithm(value=0):
    return FunctionAlgorithm(lambda idx, seeds: np.full((len(idx), 1), value), name="constant")


__all__ = [
    "Algorithm",
    "FunctionAlgorithm",
    "LinearLoss",
    "OneHotGD",
    "OneHotGDConfig",
    "RademacherERMConfig",
    "RegularizedERM",
    "RegularizedERMConfig",
    "SignERM",
    "ThresholdERM",
    "ThresholdERMConfig",
    "ThresholdZeroOneLoss",
    "constant_algorithm",
    "gd_onehot_closed",
    "gd_onehot_iterative",
    "onehot_closed_form",
    "regularized_erm",
    "sign_erm",
    "threshold_erm",
]
