"""q-Tsallis entropy and the FTRL simplex update built on it.

The update solves

    p = argmin_{p in simplex}  eta * <L, p> + psi_q(p),
    psi_q(p) = (1 - sum_i p(i)^q) / (1 - q),      q in (0, 1),

whose KKT conditions give p(i) = [q / ((1-q) (eta L(i) + lam))]^(1/(1-q))
with a scalar multiplier lam > -eta * min L fixed by sum_i p(i) = 1. The
solver shifts L so its minimum is zero (the update is invariant to constant
shifts), brackets lam, bisects the bracket down to 1e-13, then polishes with
a few Newton steps. All coordinates of the result are strictly positive.
"""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceFailure, DomainError, NonFiniteInput

# 1/(1-q) blows up as q -> 1; refuse q beyond this point.
Q_MAX = 1.0 - 1e-6

_BISECT_WIDTH = 1e-13
_NEWTON_STEPS = 3
_MAX_EXPANSIONS = 200
_MAX_BISECTIONS = 400


def tsallis_entropy(p, q: float) -> float:
    """psi_q(p) = (1 - sum p(i)^q) / (1 - q). Zero at any point mass."""
    if not (0.0 < q < 1.0):
        raise DomainError(f"q must lie in (0,1), got {q}")
    p = np.asarray(p, dtype=np.float64)
    if not np.all(np.isfinite(p)):
        raise NonFiniteInput("entropy input contains NaN or infinity")
    return float((1.0 - np.power(p, q).sum()) / (1.0 - q))


def solve_ftrl(cum_loss, q: float, eta: float):
    """FTRL update returning (p, lam) with lam the simplex multiplier.

    lam satisfies eta*L(i) - (q/(1-q)) p(i)^(q-1) + lam = 0 for every i, up
    to the solver tolerance; ftrl_update is the p-only convenience wrapper.
    """
    if not (0.0 < q <= Q_MAX):
        raise DomainError(f"q must lie in (0, {Q_MAX}], got {q}")
    if not (np.isfinite(eta) and eta > 0.0):
        raise DomainError(f"eta must be positive and finite, got {eta}")
    L = np.asarray(cum_loss, dtype=np.float64)
    if L.ndim != 1 or L.size < 1:
        raise DomainError(f"cumulative loss must be a nonempty vector, got shape {L.shape}")
    if not np.all(np.isfinite(L)):
        raise NonFiniteInput("cumulative loss contains NaN or infinity")

    K = L.size
    shift = float(L.min())
    c0 = q / (1.0 - q)
    if K == 1:
        return np.array([1.0]), c0 - eta * float(L[0])

    w = 1.0 / (1.0 - q)
    d = eta * (L - shift)  # nonnegative, min exactly 0

    if d.max() == 0.0:
        # All losses equal: the minimizer is exactly uniform.
        return np.full(K, 1.0 / K), c0 * K ** (1.0 - q) - eta * shift

    a = np.empty(K)
    b = np.empty(K)

    def simplex_sum(lam: float) -> float:
        # sum_i (c0 / (d_i + lam))^w; the ratio form keeps the power from
        # overflowing when w is huge (q near 1), since lam >= c0 on the
        # bracket and the base stays <= 1 there. np.add.reduce is ndarray.sum
        # minus the dispatch overhead; this runs ~50x per update.
        np.add(d, lam, out=a)
        np.divide(c0, a, out=b)
        np.power(b, w, out=b)
        return float(np.add.reduce(b))

    # The coordinate with d=0 contributes exactly 1 at lam = c0, so the sum
    # is >= 1 there; grow the upper edge geometrically until it drops below 1.
    lo = c0
    hi = 2.0 * c0
    for _ in range(_MAX_EXPANSIONS):
        if simplex_sum(hi) < 1.0:
            break
        lo = hi
        hi *= 2.0
    else:
        raise ConvergenceFailure("bracket expansion failed to cross the simplex sum")

    for _ in range(_MAX_BISECTIONS):
        if hi - lo <= _BISECT_WIDTH:
            break
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # ran out of representable midpoints
            break
        if simplex_sum(mid) >= 1.0:
            lo = mid
        else:
            hi = mid
    else:
        raise ConvergenceFailure("bisection failed to reach the target width")

    lam = 0.5 * (lo + hi)
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(_NEWTON_STEPS):
            np.add(d, lam, out=a)
            np.divide(c0, a, out=b)
            np.power(b, w, out=b)
            s = float(np.add.reduce(b))
            np.divide(b, a, out=b)
            ds = -w * float(np.add.reduce(b))
            if ds == 0.0 or not np.isfinite(ds):
                break
            cand = lam - (s - 1.0) / ds
            if np.isfinite(cand) and cand > 0.0:
                lam = cand

    np.add(d, lam, out=a)
    np.divide(c0, a, out=b)
    p = np.power(b, w)
    total = float(p.sum())
    if not np.isfinite(total) or total <= 0.0:
        raise ConvergenceFailure("solver produced a non-normalizable iterate")
    p /= total
    return p, lam - eta * shift


def ftrl_update(cum_loss, q: float, eta: float) -> np.ndarray:
    """Distribution minimizing eta*<L,p> + psi_q(p) over the simplex."""
    p, _ = solve_ftrl(cum_loss, q, eta)
    return p


def kkt_residual(cum_loss, q: float, eta: float, p, lam: float) -> float:
    """max_i |eta L(i) - (q/(1-q)) p(i)^(q-1) + lam| for a claimed solution."""
    L = np.asarray(cum_loss, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    grad = eta * L - (q / (1.0 - q)) * np.power(p, q - 1.0) + lam
    return float(np.max(np.abs(grad)))
