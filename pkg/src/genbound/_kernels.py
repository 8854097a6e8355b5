"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` version and a pure-numpy
version with identical semantics.  The numba path is used when numba
imports cleanly and ``GENBOUND_DISABLE_NUMBA`` is unset (or ``0``).
Both paths are importable directly as ``<name>_numpy`` / ``<name>_numba``
so tests and the benchmark can compare them.
"""
import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False


def _numba_requested():
    flag = os.environ.get("GENBOUND_DISABLE_NUMBA", "0").strip().lower()
    return flag in ("", "0", "false", "no")


USE_NUMBA = HAVE_NUMBA and _numba_requested()
BACKEND = "numba" if USE_NUMBA else "numpy"


def _njit(func):
    if HAVE_NUMBA:
        return numba.njit(cache=True)(func)
    return func


# ---------------------------------------------------------------------------
# count vectors
# ---------------------------------------------------------------------------

def row_counts_numpy(samples, width):
    """Histogram each row of an integer matrix into ``width`` bins."""
    samples = np.asarray(samples, dtype=np.int64)
    n_rows = samples.shape[0]
    out = np.zeros((n_rows, width), dtype=np.int64)
    rows = np.repeat(np.arange(n_rows), samples.shape[1])
    np.add.at(out, (rows, samples.ravel()), 1)
    return out


@_njit
def _row_counts_nb(samples, width):
    n_rows, n_cols = samples.shape
    out = np.zeros((n_rows, width), dtype=np.int64)
    for r in range(n_rows):
        for c in range(n_cols):
            out[r, samples[r, c]] += 1
    return out


def row_counts_numba(samples, width):
    return _row_counts_nb(np.ascontiguousarray(samples, dtype=np.int64), int(width))


# ---------------------------------------------------------------------------
# projected gradient ascent on <w, mu> over the unit ball
# ---------------------------------------------------------------------------

def projected_gd_numpy(mu, eta, steps):
    """Run ``w <- P(w + eta * mu)`` from ``w = 0`` for each row of ``mu``."""
    mu = np.asarray(mu, dtype=np.float64)
    w = np.zeros_like(mu)
    for _ in range(int(steps)):
        w = w + eta * mu
        norms = np.sqrt(np.einsum("ij,ij->i", w, w))
        scale = np.where(norms > 1.0, 1.0 / np.where(norms > 0, norms, 1.0), 1.0)
        w = w * scale[:, None]
    return w


@_njit
def _projected_gd_nb(mu, eta, steps):
    n_rows, dim = mu.shape
    out = np.zeros((n_rows, dim))
    w = np.zeros(dim)
    for r in range(n_rows):
        for j in range(dim):
            w[j] = 0.0
        for _ in range(steps):
            sq = 0.0
            for j in range(dim):
                w[j] += eta * mu[r, j]
                sq += w[j] * w[j]
            norm = np.sqrt(sq)
            if norm > 1.0:
                for j in range(dim):
                    w[j] /= norm
        for j in range(dim):
            out[r, j] = w[j]
    return out


def projected_gd_numba(mu, eta, steps):
    return _projected_gd_nb(np.ascontiguousarray(mu, dtype=np.float64), float(eta), int(steps))


# ---------------------------------------------------------------------------
# weighted entropies of coded variables
# ---------------------------------------------------------------------------

def coded_entropies_numpy(codes, sizes, weights):
    """Entropy (nats) of each coded variable under row weights.

    ``codes`` is an ``(m, N)`` int matrix whose row ``v`` labels the value of
    variable ``v`` in ``0..sizes[v]-1``.  Weights need not be normalized.
    """
    codes = np.asarray(codes, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.float64)
    total = weights.sum()
    out = np.empty(codes.shape[0])
    for v in range(codes.shape[0]):
        mass = np.bincount(codes[v], weights=weights, minlength=int(sizes[v])) / total
        mass = mass[mass > 0]
        out[v] = -np.sum(mass * np.log(mass))
    return out


@_njit
def _coded_entropies_nb(codes, sizes, weights):
    m, n_rows = codes.shape
    total = 0.0
    for r in range(n_rows):
        total += weights[r]
    out = np.empty(m)
    for v in range(m):
        mass = np.zeros(sizes[v])
        for r in range(n_rows):
            mass[codes[v, r]] += weights[r]
        h = 0.0
        for c in range(sizes[v]):
            if mass[c] > 0.0:
                p = mass[c] / total
                h -= p * np.log(p)
        out[v] = h
    return out


def coded_entropies_numba(codes, sizes, weights):
    return _coded_entropies_nb(
        np.ascontiguousarray(codes, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64),
        np.ascontiguousarray(weights, dtype=np.float64),
    )


if USE_NUMBA:
    row_counts = row_counts_numba
    projected_gd = projected_gd_numba
    coded_entropies = coded_entropies_numba
else:
    row_counts = row_counts_numpy
    projected_gd = projected_gd_numpy
    coded_entropies = coded_entropies_numpy


def bootstrap_coded_entropies(codes, sizes, n_resamples, rng):
    """Entropies of coded variables under ``n_resamples`` bootstrap draws.

    Each resample draws N row indices with replacement and re-weights the
    plug-in masses by their multiplicities; returns ``(n_resamples, m)``.
    The resampling stream comes from ``rng`` so both backends agree exactly.
    """
    codes = np.asarray(codes, dtype=np.int64)
    n_rows = codes.shape[1]
    out = np.empty((n_resamples, codes.shape[0]))
    for b in range(n_resamples):
        idx = rng.integers(0, n_rows, size=n_rows)
        mult = np.bincount(idx, minlength=n_rows).astype(np.float64)
        out[b] = coded_entropies(codes, sizes, mult)
    return out
