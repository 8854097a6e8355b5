"""Data spaces, distributions, losses and the supersample constructions.

Instances live on a finite support; internally every instance is handled by
its integer index into ``DiscreteDistribution.support``.  Row indices ``i``
in the public functions are 1-based, matching the usual ``i = 1..n``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Iterator, Sequence

import numpy as np

MASS_TOL = 1e-12
DEFAULT_BUDGET = 10**8
# largest table ever materialized, independent of the user budget
MAX_TABLE_ROWS = 1 << 22
QUANT_STEP = 1e-9


class BudgetExceeded(RuntimeError):
    """Raised when an exact enumeration would exceed its outcome budget."""

    def __init__(self, what, required, budget):
        self.what = what
        self.required = int(required)
        self.budget = int(budget)
        super().__init__(f"{what}: exact enumeration needs {self.required} outcomes, budget is {self.budget}")


def canonical_key(value):
    """Hashable canonical encoding of an instance or hypothesis value."""
    if isinstance(value, np.ndarray):
        return tuple(value.ravel().tolist())
    if isinstance(value, (list, tuple)):
        return tuple(canonical_key(v) for v in value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def quantize(values, step=QUANT_STEP):
    """Map reals onto an integer grid so equal-up-to-rounding values hash alike."""
    return np.round(np.asarray(values, dtype=np.float64) / step).astype(np.int64)


# ---------------------------------------------------------------------------
# distributions and protocol objects
# ---------------------------------------------------------------------------

class DiscreteDistribution:
    """Finite distribution over opaque instances.

    Parameters
    ----------
    support : sequence of instances (numbers, tuples or numpy vectors)
    mass : probabilities, same length as ``support``; ``None`` means uniform
    """

    def __init__(self, support: Sequence[Any], mass=None, kind: str = "generic"):
        self.support = list(support)
        k = len(self.support)
        if k == 0:
            raise ValueError("support must be nonempty")
        if mass is None:
            mass = np.full(k, 1.0 / k)
        mass = np.asarray(mass, dtype=np.float64)
        if mass.shape != (k,):
            raise ValueError("mass must have one entry per support point")
        if np.any(mass < 0):
            raise ValueError("masses must be nonnegative")
        if abs(math.fsum(mass) - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {math.fsum(mass)!r}, not 1")
        keys = [canonical_key(z) for z in self.support]
        if len(set(keys)) != k:
            raise ValueError("support values must be distinct")
        self.mass = mass
        self.kind = kind
        self._index = {key: j for j, key in enumerate(keys)}

    def __len__(self):
        return len(self.support)

    @property
    def is_uniform(self):
        return bool(np.all(self.mass == self.mass[0]))

    def index_of(self, instance) -> int:
        try:
            return self._index[canonical_key(instance)]
        except KeyError:
            raise ValueError(f"instance {instance!r} is not in the support") from None

    def indices(self, instances) -> np.ndarray:
        return np.array([self.index_of(z) for z in instances], dtype=np.int64)

    def features(self) -> np.ndarray:
        """Support as a float matrix (one row per instance)."""
        return np.array([np.atleast_1d(np.asarray(z, dtype=np.float64)) for z in self.support])

    def sample(self, rng, size):
        return rng.choice(len(self.support), size=size, p=self.mass)

    def __repr__(self):
        return f"DiscreteDistribution(|support|={len(self)}, kind={self.kind!r})"


@dataclass(frozen=True)
class Sample:
    items: tuple

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        if len(self.items) < 1:
            raise ValueError("a sample needs at least one instance")

    def __len__(self):
        return len(self.items)

    def __getitem__(self, j):
        return self.items[j]

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return canonical_key(list(self.items)) == canonical_key(list(other.items))

    def __hash__(self):
        return hash(canonical_key(list(self.items)))


@dataclass(frozen=True)
class Supersample:
    """n rows of (plus, minus) instances."""

    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(r) for r in self.rows)
        if len(rows) < 1 or any(len(r) != 2 for r in rows):
            raise ValueError("a supersample is a nonempty list of pairs")
        object.__setattr__(self, "rows", rows)

    def __len__(self):
        return len(self.rows)

    @property
    def plus(self) -> Sample:
        return Sample([r[0] for r in self.rows])

    @property
    def minus(self) -> Sample:
        return Sample([r[1] for r in self.rows])


@dataclass(frozen=True)
class Mask:
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("mask bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __len__(self):
        return len(self.bits)

    @property
    def complement(self):
        return Mask([1 - b for b in self.bits])


@dataclass(frozen=True)
class EvaluationSet:
    items: tuple


@dataclass
class Hypothesis:
    """A learned hypothesis: real parameters plus an exact canonical statistic."""

    vector: np.ndarray
    statistic: tuple

    def key(self):
        return self.statistic

    def __eq__(self, other):
        if not isinstance(other, Hypothesis):
            return NotImplemented
        return self.statistic == other.statistic

    def __hash__(self):
        return hash(self.statistic)


@dataclass
class NeighborhoodMatrix:
    """The n x 2 hypothesis matrix; every row shares ``w_plus``."""

    w_plus: Hypothesis
    w_minus: list

    def __len__(self):
        return len(self.w_minus)

    def row(self, i):
        """Row ``i`` (1-based) as the pair (w_plus, w_minus_i)."""
        if not 1 <= i <= len(self.w_minus):
            raise IndexError(f"row {i} out of range 1..{len(self.w_minus)}")
        return self.w_plus, self.w_minus[i - 1]

    @property
    def rows(self):
        return [(self.w_plus, w) for w in self.w_minus]


class LossFunction:
    """Loss with a vectorized evaluator.

    Subclasses implement ``matrix(params, feats)`` returning the loss of every
    hypothesis (rows of ``params``) at every instance (rows of ``feats``).
    """

    declared_range: tuple | None = None
    name = "loss"

    def matrix(self, params, feats):  # pragma: no cover - abstract
        raise NotImplementedError

    def pointwise(self, params, feats):
        """Loss of hypothesis ``params[r]`` at instance ``feats[r]`` for every row ``r``."""
        params = np.atleast_2d(np.asarray(params, dtype=np.float64))
        feats = np.atleast_2d(np.asarray(feats, dtype=np.float64))
        return np.array([self.matrix(params[r:r + 1], feats[r:r + 1])[0, 0] for r in range(len(params))])

    def eval(self, w, z) -> float:
        params = np.atleast_2d(np.asarray(getattr(w, "vector", w), dtype=np.float64))
        feats = np.atleast_2d(np.asarray(z, dtype=np.float64))
        return float(self.matrix(params, feats)[0, 0])

    __call__ = eval


class LinearLoss(LossFunction):
    """Signed linear loss ``-L <w, z>``."""

    def __init__(self, lipschitz=1.0, declared_range=None):
        self.L = float(lipschitz)
        self.declared_range = declared_range
        self.name = "linear"

    def matrix(self, params, feats):
        return -self.L * (np.asarray(params, dtype=np.float64) @ np.asarray(feats, dtype=np.float64).T)

    def pointwise(self, params, feats):
        return -self.L * np.einsum("ij,ij->i", np.atleast_2d(params), np.atleast_2d(feats))


class ThresholdZeroOneLoss(LossFunction):
    """0-1 loss of the classifier ``x -> 1[x >= t]`` on labelled points ``(x, y)``."""

    declared_range = (0.0, 1.0)
    name = "zero-one"

    def matrix(self, params, feats):
        t = np.asarray(params, dtype=np.float64)[:, :1]
        feats = np.asarray(feats, dtype=np.float64)
        pred = (feats[None, :, 0] >= t).astype(np.float64)
        return (pred != feats[None, :, 1]).astype(np.float64)

    def pointwise(self, params, feats):
        params = np.atleast_2d(np.asarray(params, dtype=np.float64))
        feats = np.atleast_2d(np.asarray(feats, dtype=np.float64))
        return ((feats[:, 0] >= params[:, 0]).astype(np.float64) != feats[:, 1]).astype(np.float64)


# ---------------------------------------------------------------------------
# enumeration and the neighbor / mask constructions
# ---------------------------------------------------------------------------

def check_budget(what, required, budget=DEFAULT_BUDGET):
    if required > budget:
        raise BudgetExceeded(what, required, budget)


def enumerate_outcomes(dist: DiscreteDistribution, count: int, budget=DEFAULT_BUDGET) -> Iterator[tuple]:
    """Yield ``(tuple_of_instances, mass)`` for every element of support^count."""
    k = len(dist)
    check_budget(f"enumerate_outcomes(count={count})", k**count, budget)
    for combo in itertools.product(range(k), repeat=count):
        m = 1.0
        for j in combo:
            m *= dist.mass[j]
        yield tuple(dist.support[j] for j in combo), m


def product_grid(k, m):
    """All ``k**m`` index tuples as an ``(k**m, m)`` array, last column fastest."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((k,) * m).reshape(m, -1).T.astype(np.int64)


def neighbor_sample(z_plus: Sample, z_minus_i, i: int) -> Sample:
    """Replace the ``i``-th (1-based) instance of ``z_plus`` by ``z_minus_i``."""
    n = len(z_plus)
    if not 1 <= i <= n:
        raise IndexError(f"index {i} out of range 1..{n}")
    items = list(z_plus.items)
    items[i - 1] = z_minus_i
    return Sample(items)


def apply_mask(ss: Supersample, mask: Mask) -> EvaluationSet:
    """Pick ``Z~_{i, U_i}`` from every row."""
    if len(ss) != len(mask):
        raise ValueError(f"mask length {len(mask)} does not match supersample length {len(ss)}")
    return EvaluationSet(tuple(row[b] for row, b in zip(ss.rows, mask.bits)))


def build_hypothesis_matrix(alg, dist: DiscreteDistribution, ss: Supersample, seed=None) -> NeighborhoodMatrix:
    """Train on the plus column and on each of its n neighbors with one shared seed."""
    if seed is None:
        seed = alg.seed_values[0]
    plus = ss.plus
    w_plus = alg.fit(dist, plus, seed)
    w_minus = [alg.fit(dist, neighbor_sample(plus, ss.rows[i][1], i + 1), seed) for i in range(len(ss))]
    return NeighborhoodMatrix(w_plus, w_minus)


def fsum_dot(weights, values) -> float:
    """Order-independent weighted sum (exactly rounded)."""
    return math.fsum(np.asarray(weights, dtype=np.float64) * np.asarray(values, dtype=np.float64))
