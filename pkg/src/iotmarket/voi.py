"""Value of information for finite Bayesian decision problems.

A decision maker holds a prior over states, may observe a signal drawn
through a noisy channel, and picks the action with the highest expected
payoff.  The value of a signal ``y`` at state ``x`` is the payoff of the
action chosen after seeing ``y`` minus the payoff of the action chosen on
the prior alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

PROB_TOL = 1e-12
# Expected payoffs this close (relative) count as tied, so rounding noise in
# a posterior cannot flip the lowest-index tie-break.
TIE_TOL = 1e-14


class DecisionError(ValueError):
    pass


class ImpossibleObservation(DecisionError):
    """Observation with zero probability under the prior and channel."""


def _labels(given, n, prefix):
    if given is None:
        return tuple(f"{prefix}{i}" for i in range(n))
    given = tuple(str(g) for g in given)
    if len(given) != n:
        raise DecisionError(f"expected {n} {prefix} labels, got {len(given)}")
    if len(set(given)) != n:
        raise DecisionError(f"duplicate {prefix} labels: {given}")
    return given


def _check_channel(channel, n_states: int) -> np.ndarray:
    channel = np.array(channel, dtype=float)
    if channel.ndim != 2 or channel.shape[0] != n_states:
        raise DecisionError(f"channel must have one row per state ({n_states})")
    if not np.all(np.isfinite(channel)) or np.any(channel < 0):
        raise DecisionError("channel entries must be finite and nonnegative")
    if np.any(np.abs(channel.sum(axis=1) - 1.0) > PROB_TOL):
        raise DecisionError("each channel row must sum to 1")
    channel.setflags(write=False)
    return channel


@dataclass(frozen=True, eq=False)
class DecisionProblem:
    """Finite decision problem with an optional observation channel.

    Attributes:
        prior: probability of each state, shape (n_states,).
        payoff: payoff[x, a] for state x and action a.
        channel: channel[x, y] = P(y | x); None for a problem still waiting
            for an information source.
        states, actions, observations: labels; default to ``x0, a0, y0, ...``.
    """

    prior: np.ndarray
    payoff: np.ndarray
    channel: Optional[np.ndarray] = None
    states: Optional[tuple] = None
    actions: Optional[tuple] = None
    observations: Optional[tuple] = None

    def __post_init__(self):
        prior = np.array(self.prior, dtype=float)
        payoff = np.array(self.payoff, dtype=float)
        if prior.ndim != 1 or prior.size == 0:
            raise DecisionError("prior must be a nonempty vector")
        if not np.all(np.isfinite(prior)) or np.any(prior < 0):
            raise DecisionError("prior entries must be finite and nonnegative")
        if abs(prior.sum() - 1.0) > PROB_TOL:
            raise DecisionError(f"prior must sum to 1, sums to {prior.sum()!r}")
        if payoff.ndim != 2 or payoff.shape[0] != prior.size or payoff.shape[1] == 0:
            raise DecisionError("payoff must be a states x actions matrix")
        if not np.all(np.isfinite(payoff)):
            raise DecisionError("payoff entries must be finite")
        prior.setflags(write=False)
        payoff.setflags(write=False)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "payoff", payoff)
        object.__setattr__(self, "states", _labels(self.states, prior.size, "x"))
        object.__setattr__(self, "actions", _labels(self.actions, payoff.shape[1], "a"))
        if self.channel is not None:
            channel = _check_channel(self.channel, prior.size)
            object.__setattr__(self, "channel", channel)
            object.__setattr__(
                self, "observations", _labels(self.observations, channel.shape[1], "y")
            )
        else:
            object.__setattr__(self, "observations", None)

    def with_channel(self, channel, observations=None) -> "DecisionProblem":
        return DecisionProblem(
            self.prior, self.payoff, channel, self.states, self.actions, observations
        )

    def shifted(self, constant: float) -> "DecisionProblem":
        """Same problem with ``constant`` added to every payoff."""
        return DecisionProblem(
            self.prior, self.payoff + constant, self.channel,
            self.states, self.actions, self.observations,
        )

    def _require_channel(self) -> np.ndarray:
        if self.channel is None:
            raise DecisionError("problem has no observation channel")
        return self.channel

    def _state(self, x) -> int:
        return x if isinstance(x, (int, np.integer)) else self.states.index(x)

    def _obs(self, y) -> int:
        return y if isinstance(y, (int, np.integer)) else self.observations.index(y)

    def observation_probs(self) -> np.ndarray:
        """Marginal probability of each observation."""
        return self.prior @ self._require_channel()


@dataclass(frozen=True)
class VoiReport:
    prior_action: int
    posterior_actions: dict  # observation index -> action index
    pointwise: np.ndarray  # v(x, y); zero-probability observations left at 0
    expected_value: float
    cost: float
    gain: float


def posterior(problem: DecisionProblem, y) -> np.ndarray:
    """State distribution after observing ``y`` (label or index)."""
    channel = problem._require_channel()
    k = problem._obs(y)
    joint = problem.prior * channel[:, k]
    total = joint.sum()
    if total <= 0:
        raise ImpossibleObservation(f"observation {y!r} has zero probability")
    return joint / total


def optimal_action(problem: DecisionProblem, belief) -> int:
    """Index of the action maximising expected payoff under ``belief``.

    Ties go to the lowest index.
    """
    belief = np.asarray(belief, dtype=float)
    if belief.shape != problem.prior.shape or abs(belief.sum() - 1.0) > PROB_TOL:
        raise DecisionError("belief must be a distribution over the problem's states")
    values = belief @ problem.payoff
    best = values.max()
    return int(np.flatnonzero(values >= best - TIE_TOL * max(1.0, abs(best)))[0])


def value_pointwise(problem: DecisionProblem, x, y) -> float:
    """Payoff at state ``x`` of acting on ``y`` minus acting on the prior alone."""
    a0 = optimal_action(problem, problem.prior)
    ay = optimal_action(problem, posterior(problem, y))
    i = problem._state(x)
    return float(problem.payoff[i, ay] - problem.payoff[i, a0])


def expected_voi(problem: DecisionProblem, cost: float = 0.0) -> VoiReport:
    """Expected value of the problem's channel, averaged over states and signals."""
    channel = problem._require_channel()
    a0 = optimal_action(problem, problem.prior)
    py = problem.observation_probs()
    n_states, n_obs = channel.shape
    pointwise = np.zeros((n_states, n_obs))
    actions = {}
    for k in range(n_obs):
        if py[k] <= 0:
            continue
        ay = optimal_action(problem, posterior(problem, k))
        actions[k] = ay
        pointwise[:, k] = problem.payoff[:, ay] - problem.payoff[:, a0]
    value = float(np.sum(problem.prior[:, None] * channel * pointwise))
    return VoiReport(a0, actions, pointwise, value, float(cost), value - float(cost))


def information_gain(problem: DecisionProblem, cost: float) -> float:
    """Expected value of information minus the cost of acquiring it."""
    if cost < 0:
        raise DecisionError("cost must be nonnegative")
    return expected_voi(problem).expected_value - cost


def perfect_information_value(problem: DecisionProblem) -> float:
    """Upper bound on expected VoI: knowing the state exactly before acting."""
    informed = float(problem.prior @ problem.payoff.max(axis=1))
    uninformed = float((problem.prior @ problem.payoff).max())
    return informed - uninformed


def select_source(
    problem: DecisionProblem, sources: Sequence[tuple]
) -> tuple[int, float]:
    """Pick the (channel, cost) source with the largest information gain.

    Returns ``(index, gain)``; ties go to the lowest index.
    """
    if not sources:
        raise DecisionError("need at least one information source")
    gains = [information_gain(problem.with_channel(ch), cost) for ch, cost in sources]
    best = int(np.argmax(gains))
    return best, gains[best]
