"""Closed-form error-bound constants for standard and reweighted l1 recovery.

All functions take the restricted isometry constant ``delta`` of order 2s
and require ``0 <= delta < sqrt(2) - 1`` so that ``rho < 1``. Two forms of
``alpha`` appear in the literature for the reweighted bound; ``sqrt``
(``2 sqrt(1+delta) / sqrt(1-delta)``) is the default and ``linear``
(``2 sqrt(1+delta) / (1-delta)``) is available for comparison.
"""

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .core import best_s_term
from .exceptions import (DeltaOutOfRange, MuConditionViolated, NoAdmissibleDelta,
                         PreconditionViolated)
from .validation import check_vector

DELTA_MAX = math.sqrt(2.0) - 1.0
ALPHA_FORMS = ("sqrt", "linear")


@dataclass(frozen=True)
class TheoryConstants:
    delta: float
    rho: float
    alpha: float
    C: float
    Cprime: float
    Cdoubleprime: float


@dataclass
class RecursionTrace:
    mu: float
    epsilon: float
    delta: float
    E: List[float]
    L_exact: float
    L_simple: float
    iterations_to_threshold: Optional[int] = None


@dataclass(frozen=True)
class SingleIterationBound:
    A: float
    a: float
    b: float
    mu: float
    s: int
    C1: float
    C2: float
    D1: float
    D2: float


@dataclass(frozen=True)
class ArbitrarySignalBounds:
    epsilon0: float
    bound_half_tail: float
    bound_s_tail: float
    mu: float
    mu_condition: bool


def _check_delta(delta):
    if not 0.0 <= delta < DELTA_MAX:
        raise DeltaOutOfRange(
            f"delta={delta!r} must satisfy 0 <= delta < sqrt(2)-1 = {DELTA_MAX:.6f}")
    return float(delta)


def rho_of(delta):
    """sqrt(2) delta / (1 - delta); defined for any delta < 1."""
    return math.sqrt(2.0) * delta / (1.0 - delta)


def alpha_of(delta, alpha_form="sqrt"):
    if alpha_form == "sqrt":
        return 2.0 * math.sqrt(1.0 + delta) / math.sqrt(1.0 - delta)
    if alpha_form == "linear":
        return 2.0 * math.sqrt(1.0 + delta) / (1.0 - delta)
    raise ValueError(f"alpha_form must be one of {ALPHA_FORMS}")


def constants_from_delta(delta, alpha_form="sqrt"):
    delta = _check_delta(delta)
    rho = rho_of(delta)
    alpha = alpha_of(delta, alpha_form)
    return TheoryConstants(
        delta=delta,
        rho=rho,
        alpha=alpha,
        C=2.0 * alpha / (1.0 - rho),
        Cprime=2.0 * (1.0 + rho) / (1.0 - rho),
        Cdoubleprime=2.0 * alpha / (1.0 + rho),
    )


def l1_error_bound(delta, epsilon, x, s, alpha_form="sqrt"):
    """C eps + C' ||x - x_s||_1 / sqrt(s) for plain l1 recovery."""
    k = constants_from_delta(delta, alpha_form)
    x = check_vector(x, name="x")
    tail_l1 = float(np.sum(np.abs(x - best_s_term(x, s))))
    return k.C * epsilon + k.Cprime * tail_l1 / math.sqrt(s)


def mu_threshold(epsilon, delta, alpha_form="sqrt"):
    """Smallest admissible mu: 4 alpha eps / (1 - rho)."""
    k = constants_from_delta(delta, alpha_form)
    return 4.0 * k.alpha * epsilon / (1.0 - k.rho)


def mu_condition(mu, epsilon, delta, alpha_form="sqrt"):
    return bool(mu >= mu_threshold(epsilon, delta, alpha_form))


def _require_mu(mu, epsilon, delta, alpha_form):
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    if not mu > 0:
        raise ValueError("mu must be positive")
    if not mu_condition(mu, epsilon, delta, alpha_form):
        raise MuConditionViolated(
            f"mu={mu} < 4 alpha eps / (1 - rho) = {mu_threshold(epsilon, delta, alpha_form):.6g}")


def recursion_step(E, mu, epsilon, k):
    """One step of the error recursion: (1 + r) alpha eps / (1 - rho r), r = E / (mu - E)."""
    r = E / (mu - E)
    return (1.0 + r) * k.alpha * epsilon / (1.0 - k.rho * r)


def limit_L(mu, epsilon, delta, alpha_form="sqrt"):
    """Return (L_exact, L_simple), the limit of the recursion and its simple upper bound."""
    _require_mu(mu, epsilon, delta, alpha_form)
    k = constants_from_delta(delta, alpha_form)
    if epsilon == 0:
        return 0.0, 0.0
    ae = k.alpha * epsilon
    radicand = 1.0 - 4.0 * ae / mu - 4.0 * ae * k.rho / mu
    # at the admissibility boundary the radicand is rho^2 >= 0 up to round-off
    radicand = max(radicand, 0.0)
    L_exact = 2.0 * ae / (1.0 + math.sqrt(radicand))
    L_simple = 2.0 * ae / (1.0 + k.rho)
    return L_exact, L_simple


def recursion_E(mu, epsilon, delta, K, alpha_form="sqrt"):
    """Iterate the per-iteration error bound E(1), ..., E(K)."""
    _require_mu(mu, epsilon, delta, alpha_form)
    if int(K) < 1:
        raise ValueError("K must be positive")
    k = constants_from_delta(delta, alpha_form)
    E = [2.0 * k.alpha * epsilon / (1.0 - k.rho)]
    for _ in range(int(K) - 1):
        E.append(recursion_step(E[-1], mu, epsilon, k))
    L_exact, L_simple = limit_L(mu, epsilon, delta, alpha_form)
    return RecursionTrace(mu, epsilon, delta, E, L_exact, L_simple)


def iterations_to_threshold(mu, epsilon, delta, rel_tol=1e-3, max_iter=1_000_000,
                            alpha_form="sqrt"):
    """Smallest k with E(k) <= (1 + rel_tol) L_exact."""
    _require_mu(mu, epsilon, delta, alpha_form)
    k = constants_from_delta(delta, alpha_form)
    L_exact, _ = limit_L(mu, epsilon, delta, alpha_form)
    target = (1.0 + rel_tol) * L_exact
    E = 2.0 * k.alpha * epsilon / (1.0 - k.rho)
    for it in range(1, max_iter + 1):
        if E <= target:
            return it
        E = recursion_step(E, mu, epsilon, k)
    raise RuntimeError(f"recursion did not reach threshold within {max_iter} steps")


def best_delta_bound(mu_over_eps, grid_step=1e-4, alpha_form="sqrt"):
    """Largest grid delta whose mu-condition holds at ratio mu/eps, and C''(delta).

    Returns
    -------
    (delta_star, bound_coefficient)
    """
    if mu_over_eps < mu_threshold(1.0, 0.0, alpha_form):
        raise NoAdmissibleDelta(
            f"mu/eps={mu_over_eps} is below 8, the requirement at delta=0")
    n = int(math.ceil(DELTA_MAX / grid_step))
    grid = np.arange(n) * grid_step
    grid = grid[grid < DELTA_MAX]
    rho = math.sqrt(2.0) * grid / (1.0 - grid)
    if alpha_form == "sqrt":
        alpha = 2.0 * np.sqrt(1.0 + grid) / np.sqrt(1.0 - grid)
    else:
        alpha = 2.0 * np.sqrt(1.0 + grid) / (1.0 - grid)
    admissible = np.flatnonzero(4.0 * alpha / (1.0 - rho) <= mu_over_eps)
    i = admissible[-1]
    return float(grid[i]), float(2.0 * alpha[i] / (1.0 + rho[i]))


def single_iteration_bound(A, a, b, mu, s, delta, epsilon, tail_l1, alpha_form="sqrt"):
    """Error bound after one weighted solve with weights built from a nearby vector.

    Returns ``(D1 * eps + D2 * tail_l1 / a, SingleIterationBound)``.
    """
    k = constants_from_delta(delta, alpha_form)
    if not a > 0:
        raise PreconditionViolated("a must be positive")
    if mu < A:
        raise PreconditionViolated(f"requires mu >= A (mu={mu}, A={A})")
    C1 = (A + a + b) / (mu - A + a)
    if k.rho * C1 >= 1.0:
        raise PreconditionViolated(f"requires rho*C1 < 1, got {k.rho * C1:.6g}")
    C2 = 2.0 * (A + a + b) / math.sqrt(s)
    D1 = (1.0 + C1) * k.alpha / (1.0 - k.rho * C1)
    D2 = C2 + (1.0 + C1) * k.rho * C2 / (1.0 - k.rho * C1)
    bound = D1 * epsilon + D2 * tail_l1 / a
    return bound, SingleIterationBound(A, a, b, mu, int(s), C1, C2, D1, D2)


def arbitrary_signal_bounds(delta, epsilon, x, s, alpha_form="sqrt"):
    """Error bounds for reweighted recovery of a compressible signal.

    The half-sparsity tail uses ``ceil(s / 2)`` terms when s is odd.
    """
    k = constants_from_delta(delta, alpha_form)
    x = check_vector(x, name="x")
    xs = best_s_term(x, s)
    tail_s = x - xs
    tail_half = x - best_s_term(x, (s + 1) // 2)
    root_s = math.sqrt(s)
    tail_s_l1 = float(np.sum(np.abs(tail_s)))
    epsilon0 = 1.2 * (float(np.linalg.norm(tail_s)) + tail_s_l1 / root_s) + epsilon
    factor = k.alpha / (1.0 + k.rho)
    bound_half = 4.1 * factor * (float(np.sum(np.abs(tail_half))) / root_s + epsilon)
    bound_s = 2.4 * factor * (float(np.linalg.norm(tail_s)) + tail_s_l1 / root_s + epsilon)
    nonzero = np.abs(xs[xs != 0])
    mu = float(nonzero.min()) if nonzero.size else 0.0
    holds = bool(mu > 0 and mu >= 4.0 * k.alpha * epsilon0 / (1.0 - k.rho))
    return ArbitrarySignalBounds(epsilon0, bound_half, bound_s, mu, holds)


def unrecoverable_energy(x, s, epsilon):
    """eps + ||x - x_s||_1 / sqrt(s)."""
    x = check_vector(x, name="x")
    return epsilon + float(np.sum(np.abs(x - best_s_term(x, s)))) / math.sqrt(s)
