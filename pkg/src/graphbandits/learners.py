"""Tuned q-Tsallis FTRL learners and the doubling meta-learner.

tune() reproduces the closed-form parameter choices:

    q = 1/2 * (1 + ln(K/a) / (sqrt(ln(K/a)^2 + 4) + 2))            in [1/2, 1)

with a the independence-number guess, and

    self_loops   eta = sqrt(2 q K^(1-q) / (T (1-q) a^q))
    general      eta = sqrt(2 q K^(1-q) / (T (1-q) a^q)) / 3
    doubling_r   eta = sqrt(2 q K^(1-q) / (11 T (1-q) a^q)),  a = 2^r.

The doubling meta-learner never receives an independence number: it watches
the observable quantity B(q) = sum_{i with self-loop} p(i)^(2-q) / P(i)
(at most alpha^q by the variance certificate), accumulates B(q_r)^(1/q_r)
within the current epoch, and restarts with the next (q_r, eta_r) when the
running average crosses 2^(r+1). Restarts are capped by construction at
floor(log2 K) since the average can never exceed K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputs
from .estimators import RoundObservation, estimate_basic, estimate_shifted
from .ftrl import ftrl_update
from .graphs import FeedbackGraph, check_distribution

TUNING_VARIANTS = ("self_loops", "general", "doubling_r")


@dataclass(frozen=True)
class TsallisParams:
    q: float
    eta: float


def tune(K: int, alpha_guess: float, T: int, variant: str = "self_loops") -> TsallisParams:
    """Closed-form (q, eta) for horizon T, K actions, independence guess alpha."""
    if variant not in TUNING_VARIANTS:
        raise InvalidInputs(f"variant must be one of {TUNING_VARIANTS}, got {variant!r}")
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise InvalidInputs(f"K must be a positive integer, got {K}")
    if not isinstance(T, (int, np.integer)) or T < 1:
        raise InvalidInputs(f"T must be a positive integer, got {T}")
    alpha = float(alpha_guess)
    if not (1.0 <= alpha <= K):
        raise InvalidInputs(f"alpha_guess must lie in [1, K], got {alpha_guess}")
    ratio = math.log(K / alpha)
    q = 0.5 * (1.0 + ratio / (math.sqrt(ratio * ratio + 4.0) + 2.0))
    scale = 11.0 if variant == "doubling_r" else 1.0
    eta = math.sqrt(2.0 * q * K ** (1.0 - q) / (scale * T * (1.0 - q) * alpha**q))
    if variant == "general":
        eta /= 3.0
    return TsallisParams(q, eta)


def variance_quantity(g: FeedbackGraph, p, q: float) -> float:
    """B(q) = sum over self-looped i of p(i)^(2-q) / P(i); 0 if none exist.

    This is the variance proxy the doubling learner monitors; the variance
    certificate bounds it by alpha(G)^q.
    """
    if not (0.0 < q < 1.0):
        raise InvalidInputs(f"q must lie in (0,1), got {q}")
    p = check_distribution(p, g.K)
    looped = g.self_loops
    if not looped.any():
        return 0.0
    P = g.neighborhood_sums(p)
    pl = p[looped]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = pl ** (2.0 - q) / P[looped]
    return float(np.where(pl > 0.0, terms, 0.0).sum())


_ESTIMATORS = {"basic": estimate_basic, "shifted": estimate_shifted}


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


class QTsallisFTRL:
    """FTRL over the q-Tsallis regularizer with importance-weighted estimates.

    Starts uniform. Each round: sample an action from p by inverse CDF on the
    learner's own PRNG stream, then feed the round's observation to update();
    it adds the loss estimate to the cumulative vector and re-solves for p.
    """

    def __init__(self, K: int, q: float, eta: float, estimator: str = "basic", rng=None):
        if K < 1:
            raise InvalidInputs(f"K must be >= 1, got {K}")
        if estimator not in _ESTIMATORS:
            raise InvalidInputs(f"estimator must be one of {sorted(_ESTIMATORS)}, got {estimator!r}")
        if not (eta > 0.0 and math.isfinite(eta)):
            raise InvalidInputs(f"eta must be positive and finite, got {eta}")
        self.K = K
        self.q = q
        self.eta = eta
        self.estimator_kind = estimator
        self._estimate = _ESTIMATORS[estimator]
        self.rng = _as_rng(rng)
        self.cum_loss = np.zeros(K)
        self.p = np.full(K, 1.0 / K)
        self.t = 0

    def select_action(self) -> int:
        u = self.rng.random()
        idx = int(np.searchsorted(np.cumsum(self.p), u, side="right"))
        return min(idx, self.K - 1)

    def update(self, obs: RoundObservation) -> np.ndarray:
        est = self._estimate(obs, self.p)
        self.cum_loss += est
        self.p = ftrl_update(self.cum_loss, self.q, self.eta)
        self.t += 1
        return self.p


class UniformPolicy:
    """Plays uniformly at random and ignores all feedback."""

    q = None

    def __init__(self, K: int, rng=None):
        if K < 1:
            raise InvalidInputs(f"K must be >= 1, got {K}")
        self.K = K
        self.rng = _as_rng(rng)
        self.p = np.full(K, 1.0 / K)

    def select_action(self) -> int:
        return int(self.rng.integers(self.K))

    def update(self, obs: RoundObservation) -> np.ndarray:
        return self.p


@dataclass
class Epoch:
    r: int
    q: float
    eta: float
    start_t: int  # first round (1-based) played under these parameters


class DoublingQFTRL:
    """Horizon-aware doubling wrapper: no independence number needed.

    Runs QTsallisFTRL with the shifted estimator and the doubling_r tuning,
    doubling the alpha guess (r <- r+1, fresh uniform inner learner) whenever
    the epoch's average of B(q_r)^(1/q_r) exceeds 2^(r+1).
    """

    def __init__(self, K: int, T: int, rng=None):
        if K < 1:
            raise InvalidInputs(f"K must be >= 1, got {K}")
        if not isinstance(T, (int, np.integer)) or T < 1:
            raise InvalidInputs(f"horizon T must be a positive integer, got {T}")
        self.K = K
        self.T = int(T)
        self.rng = _as_rng(rng)
        self.r_max = int(K).bit_length() - 1  # floor(log2 K)
        self.r = 0
        self.t = 0
        self._acc = 0.0
        self.params = tune(K, 1.0, self.T, "doubling_r")
        self._inner = QTsallisFTRL(K, self.params.q, self.params.eta, "shifted", self.rng)
        self.epochs = [Epoch(0, self.params.q, self.params.eta, 1)]
        self.last_variance = 0.0

    @property
    def q(self) -> float:
        return self.params.q

    @property
    def eta(self) -> float:
        return self.params.eta

    @property
    def p(self) -> np.ndarray:
        return self._inner.p

    @property
    def restarts(self) -> int:
        return self.r

    def select_action(self) -> int:
        return self._inner.select_action()

    def update(self, obs: RoundObservation) -> np.ndarray:
        q_r = self.params.q
        p_used = self._inner.p
        self._inner.update(obs)
        self.t += 1
        B = variance_quantity(obs.graph, p_used, q_r)
        self.last_variance = B
        self._acc += B ** (1.0 / q_r)
        if self._acc / self.T > 2.0 ** (self.r + 1):
            if self.r + 1 > self.r_max:
                raise RuntimeError("doubling exceeded floor(log2 K) epochs; unreachable by design")
            self.r += 1
            self._acc = 0.0
            self.params = tune(self.K, 2.0**self.r, self.T, "doubling_r")
            self._inner = QTsallisFTRL(self.K, self.params.q, self.params.eta, "shifted", self.rng)
            self.epochs.append(Epoch(self.r, self.params.q, self.params.eta, self.t + 1))
        return self._inner.p
