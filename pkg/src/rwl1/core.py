"""Random ensembles, measurements, best s-term approximation and RIC estimation.

Matrices and vectors are plain float64 numpy arrays; indices are 0-based.
Every generator is a pure function of its sizes and a 64-bit seed.
"""

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Optional

import numpy as np

from .exceptions import CombinatorialBudgetExceeded, DimensionMismatch
from .validation import (check_matrix, check_nonnegative, check_positive_int,
                         check_seed, check_vector)

SIGNAL_DISTRIBUTIONS = ("gaussian", "bernoulli")


@dataclass(frozen=True)
class SparseSignal:
    """Sparse vector in R^dim stored as (support, values)."""

    dim: int
    support: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        support = np.asarray(self.support, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if support.shape != values.shape or support.ndim != 1:
            raise DimensionMismatch("support and values must be 1-D of equal length")
        if support.size > self.dim:
            raise ValueError("support larger than dimension")
        if support.size and (support[0] < 0 or support[-1] >= self.dim
                             or np.any(np.diff(support) <= 0)):
            raise ValueError("support must be strictly increasing indices in [0, dim)")
        if np.any(values == 0):
            raise ValueError("sparse signal values must be nonzero")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "values", values)

    @property
    def sparsity(self):
        return int(self.support.size)

    def to_dense(self):
        x = np.zeros(self.dim)
        x[self.support] = self.values
        return x


@dataclass(frozen=True)
class MeasurementInstance:
    """Noisy measurements u of an unknown signal, with tolerance epsilon.

    ``truth`` and ``noise`` are optional and only used for scoring. The
    constructor does not reject ``||noise|| > epsilon``; see
    :attr:`noise_within_epsilon`.
    """

    phi: np.ndarray
    u: np.ndarray
    epsilon: float
    truth: Optional[np.ndarray] = None
    noise: Optional[np.ndarray] = None

    def __post_init__(self):
        phi = check_matrix(self.phi)
        m, d = phi.shape
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "u", check_vector(self.u, m, name="u"))
        object.__setattr__(self, "epsilon", check_nonnegative(self.epsilon, "epsilon"))
        if self.truth is not None:
            object.__setattr__(self, "truth", check_vector(self.truth, d, name="truth"))
        if self.noise is not None:
            object.__setattr__(self, "noise", check_vector(self.noise, m, name="noise"))

    @property
    def shape(self):
        return self.phi.shape

    @property
    def noise_within_epsilon(self):
        if self.noise is None:
            return None
        return bool(np.linalg.norm(self.noise) <= self.epsilon)

    @classmethod
    def from_truth(cls, phi, x, e, epsilon):
        """Build u = phi @ x + e and keep x, e as ground truth."""
        return cls(phi=phi, u=measure(phi, x, e), epsilon=epsilon, truth=x, noise=e)


@dataclass(frozen=True)
class RipEstimate:
    s: int
    delta: float
    exact: bool
    n_subsets: int


def _rng(seed):
    return np.random.default_rng(check_seed(seed))


def generate_gaussian_matrix(m, d, seed):
    """m x d matrix with i.i.d. N(0, 1/m) entries."""
    m = check_positive_int(m, "m")
    d = check_positive_int(d, "d")
    return _rng(seed).standard_normal((m, d)) / np.sqrt(m)


def generate_bernoulli_matrix(m, d, seed):
    """m x d matrix with i.i.d. entries uniform on {+1/sqrt(m), -1/sqrt(m)}."""
    m = check_positive_int(m, "m")
    d = check_positive_int(d, "d")
    signs = _rng(seed).integers(0, 2, size=(m, d), dtype=np.int8) * 2 - 1
    return signs / np.sqrt(m)


def generate_matrix(kind, m, d, seed):
    if kind == "gaussian":
        return generate_gaussian_matrix(m, d, seed)
    if kind == "bernoulli":
        return generate_bernoulli_matrix(m, d, seed)
    raise ValueError(f"unknown matrix distribution {kind!r}")


def generate_sparse_signal(d, s, dist, seed):
    """s-sparse signal with uniformly random support.

    Values are standard Gaussian (``dist="gaussian"``) or uniform on
    {-1, +1} (``dist="bernoulli"``).
    """
    d = check_positive_int(d, "d")
    s = check_positive_int(s, "s")
    if s > d:
        raise ValueError(f"sparsity s={s} exceeds dimension d={d}")
    if dist not in SIGNAL_DISTRIBUTIONS:
        raise ValueError(f"unknown signal distribution {dist!r}")
    rng = _rng(seed)
    support = np.sort(rng.choice(d, size=s, replace=False))
    if dist == "gaussian":
        values = rng.standard_normal(s)
        # a draw of exactly 0.0 would break the nonzero invariant
        while np.any(values == 0):
            zero = values == 0
            values[zero] = rng.standard_normal(int(zero.sum()))
    else:
        values = (rng.integers(0, 2, size=s) * 2 - 1).astype(np.float64)
    return SparseSignal(d, support, values)


def generate_noise(m, sigma, seed):
    """Length-m vector of i.i.d. N(0, sigma^2) entries."""
    m = check_positive_int(m, "m")
    sigma = check_nonnegative(sigma, "sigma")
    return sigma * _rng(seed).standard_normal(m)


def noise_level(sigma, m):
    """Noise tolerance epsilon with epsilon^2 = sigma^2 (m + 2 sqrt(2m))."""
    sigma = check_nonnegative(sigma, "sigma")
    m = check_positive_int(m, "m")
    return sigma * np.sqrt(m + 2.0 * np.sqrt(2.0 * m))


def measure(phi, x, e):
    """Return u = phi @ x + e."""
    phi = check_matrix(phi)
    m, d = phi.shape
    x = check_vector(x, d, name="x")
    e = check_vector(e, m, name="e")
    return phi @ x + e


def best_s_term(x, s):
    """Keep the s largest-magnitude entries of x and zero the rest.

    Ties in magnitude are resolved in favour of the smaller index.
    """
    x = check_vector(x, name="x")
    if isinstance(s, bool) or s < 0 or s > x.size:
        raise ValueError(f"s must lie in [0, {x.size}], got {s!r}")
    out = np.zeros_like(x)
    if s == 0:
        return out
    # stable sort on -|x| keeps ascending index order among ties
    keep = np.argsort(-np.abs(x), kind="stable")[:s]
    out[keep] = x[keep]
    return out


def tail(x, s):
    """x - best_s_term(x, s)."""
    x = check_vector(x, name="x")
    return x - best_s_term(x, s)


def estimate_ric(phi, s, budget=1_000_000, chunk=4096):
    """Restricted isometry constant of order s by exhaustive enumeration.

    Computes max over all s-column submatrices of
    ``max(sigma_max^2 - 1, 1 - sigma_min^2)`` from the eigenvalues of
    the s x s Gram matrices.

    Raises
    ------
    CombinatorialBudgetExceeded
        If C(d, s) exceeds `budget`.
    """
    phi = check_matrix(phi)
    d = phi.shape[1]
    s = check_positive_int(s, "s")
    if s > d:
        raise ValueError(f"s={s} exceeds number of columns {d}")
    n_subsets = comb(d, s)
    if n_subsets > budget:
        raise CombinatorialBudgetExceeded(
            f"C({d}, {s}) = {n_subsets} subsets exceeds budget {budget}")

    gram = phi.T @ phi
    delta = 0.0
    subsets = combinations(range(d), s)
    while True:
        block = np.array([t for _, t in zip(range(chunk), subsets)], dtype=np.intp)
        if block.size == 0:
            break
        sub = gram[block[:, :, None], block[:, None, :]]
        eig = np.linalg.eigvalsh(sub)
        delta = max(delta, float(np.max(eig[:, -1] - 1.0)),
                    float(np.max(1.0 - eig[:, 0])))
    return RipEstimate(s=s, delta=max(delta, 0.0), exact=True, n_subsets=n_subsets)


# CSV interchange: one matrix row per line, no header; vectors are one column.

def read_matrix_csv(path):
    arr = np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
    return check_matrix(arr)


def read_vector_csv(path):
    arr = np.loadtxt(path, delimiter=",", ndmin=1, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[1] != 1:
        raise DimensionMismatch(f"{path}: expected a single column, got {arr.shape[1]}")
    return check_vector(arr.reshape(-1))


def write_matrix_csv(path, phi):
    np.savetxt(path, np.atleast_2d(np.asarray(phi, dtype=np.float64)),
               delimiter=",", fmt="%.17g")


def write_vector_csv(path, v):
    np.savetxt(path, np.asarray(v, dtype=np.float64).reshape(-1, 1),
               delimiter=",", fmt="%.17g")
