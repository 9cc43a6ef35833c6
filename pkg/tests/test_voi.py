import itertools

import numpy as np
import pytest

from iotmarket.voi import (
    DecisionError,
    DecisionProblem,
    ImpossibleObservation,
    expected_voi,
    information_gain,
    optimal_action,
    perfect_information_value,
    posterior,
    select_source,
    value_pointwise,
)

# states: 0 = no event, 1 = event; actions: 0 = ignore, 1 = act
PAYOFF = [[0.0, -0.5], [-1.0, 1.0]]
NOISY = [[0.9, 0.1], [0.2, 0.8]]
IDENTITY = [[1.0, 0.0], [0.0, 1.0]]
BLIND = [[0.3, 0.7], [0.3, 0.7]]


def binary(channel=NOISY):
    return DecisionProblem([0.5, 0.5], PAYOFF, channel)


def enumerate_voi(prior, payoff, channel):
    """Oracle: brute-force the best observation-to-action policy."""
    prior, payoff, channel = (np.asarray(a, dtype=float) for a in (prior, payoff, channel))
    n_obs, n_act = channel.shape[1], payoff.shape[1]
    no_info = max(prior @ payoff[:, a] for a in range(n_act))
    best = -np.inf
    for policy in itertools.product(range(n_act), repeat=n_obs):
        value = sum(
            prior[x] * channel[x, y] * payoff[x, policy[y]]
            for x in range(len(prior)) for y in range(n_obs)
        )
        best = max(best, value)
    return best - no_info


def random_problem(rng, max_states=4, max_actions=4, max_obs=4):
    n_x, n_a, n_y = rng.integers(1, max_states + 1), rng.integers(1, max_actions + 1), rng.integers(1, max_obs + 1)
    prior = rng.dirichlet(np.ones(n_x))
    channel = rng.dirichlet(np.ones(n_y), size=n_x)
    payoff = rng.normal(size=(n_x, n_a))
    return DecisionProblem(prior, payoff, channel)


class TestValidation:
    def test_prior(self):
        with pytest.raises(DecisionError):
            DecisionProblem([0.5, 0.6], PAYOFF, NOISY)
        with pytest.raises(DecisionError):
            DecisionProblem([1.5, -0.5], PAYOFF, NOISY)

    def test_channel_rows(self):
        with pytest.raises(DecisionError):
            DecisionProblem([0.5, 0.5], PAYOFF, [[0.9, 0.2], [0.2, 0.8]])
        with pytest.raises(DecisionError):
            DecisionProblem([0.5, 0.5], PAYOFF, [[1.0]])

    def test_payoff(self):
        with pytest.raises(DecisionError):
            DecisionProblem([0.5, 0.5], [[0.0, np.inf], [0.0, 1.0]], NOISY)
        with pytest.raises(DecisionError):
            DecisionProblem([0.5, 0.5], [[0.0, 1.0]], NOISY)

    def test_labels(self):
        p = DecisionProblem([0.5, 0.5], PAYOFF, NOISY, ("quiet", "event"), ("ignore", "act"), ("silent", "alarm"))
        assert posterior(p, "alarm")[1] == pytest.approx(8 / 9, abs=1e-15)
        assert value_pointwise(p, "event", "silent") == -2.0
        with pytest.raises(DecisionError):
            DecisionProblem([0.5, 0.5], PAYOFF, NOISY, ("a", "a"))

    def test_missing_channel(self):
        p = DecisionProblem([0.5, 0.5], PAYOFF)
        with pytest.raises(DecisionError):
            expected_voi(p)


class TestPosterior:
    def test_identity_channel(self):
        p = DecisionProblem([1 / 3] * 3, np.zeros((3, 1)), np.eye(3))
        for k in range(3):
            np.testing.assert_array_equal(posterior(p, k), np.eye(3)[k])

    def test_binary(self):
        assert posterior(binary(), 1)[1] == pytest.approx(8 / 9, abs=1e-15)
        assert posterior(binary(), 0)[1] == pytest.approx(2 / 11, abs=1e-15)

    def test_impossible(self):
        p = DecisionProblem([1.0, 0.0], PAYOFF, IDENTITY)
        with pytest.raises(ImpossibleObservation):
            posterior(p, 1)

    def test_normalised(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            p = random_problem(rng)
            for k in range(p.channel.shape[1]):
                if p.observation_probs()[k] > 0:
                    assert abs(posterior(p, k).sum() - 1) <= 1e-12


class TestOptimalAction:
    def test_tie_goes_first(self):
        p = DecisionProblem([0.5, 0.5], [[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
        assert optimal_action(p, [0.5, 0.5]) == 0

    def test_binary(self):
        p = binary()
        assert optimal_action(p, [0.5, 0.5]) == 1
        assert optimal_action(p, [9 / 11, 2 / 11]) == 0


class TestValue:
    def test_uninformative_pointwise(self):
        p = binary(BLIND)
        for x, y in itertools.product(range(2), range(2)):
            assert value_pointwise(p, x, y) == 0.0

    def test_binary_pointwise(self):
        p = binary()
        assert value_pointwise(p, 1, 0) == -2.0
        assert value_pointwise(p, 0, 0) == 0.5
        assert value_pointwise(p, 1, 1) == 0.0

    def test_expected_binary(self):
        rep = expected_voi(binary())
        assert rep.expected_value == pytest.approx(0.025, abs=1e-12)
        assert rep.expected_value == pytest.approx(enumerate_voi([0.5, 0.5], PAYOFF, NOISY), abs=1e-12)
        assert rep.prior_action == 1
        assert rep.posterior_actions == {0: 0, 1: 1}
        np.testing.assert_array_equal(rep.pointwise, [[0.5, 0.0], [-2.0, 0.0]])

    def test_expected_identity(self):
        assert expected_voi(binary(IDENTITY)).expected_value == pytest.approx(0.25, abs=1e-12)

    def test_expected_uninformative(self):
        assert expected_voi(binary(BLIND)).expected_value == 0.0

    def test_matches_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            p = random_problem(rng, 3, 3, 3)
            got = expected_voi(p).expected_value
            assert got == pytest.approx(enumerate_voi(p.prior, p.payoff, p.channel), abs=1e-12)


class TestProperties:
    def test_nonnegative(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            assert expected_voi(random_problem(rng)).expected_value >= -1e-12

    def test_perfect_information_bound(self):
        rng = np.random.default_rng(8)
        for _ in range(300):
            p = random_problem(rng)
            bound = perfect_information_value(p)
            assert expected_voi(p).expected_value <= bound + 1e-12
            n = len(p.prior)
            assert expected_voi(p.with_channel(np.eye(n))).expected_value == pytest.approx(bound, abs=1e-12)

    def test_payoff_shift(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            p = random_problem(rng)
            c = rng.uniform(-50, 50)
            a, b = expected_voi(p), expected_voi(p.shifted(c))
            assert a.prior_action == b.prior_action
            assert a.posterior_actions == b.posterior_actions
            assert b.expected_value == pytest.approx(a.expected_value, abs=1e-9)

    def test_garbling_never_helps(self):
        rng = np.random.default_rng(10)
        for _ in range(300):
            p = random_problem(rng)
            n_y = p.channel.shape[1]
            garble = rng.dirichlet(np.ones(rng.integers(1, 5)), size=n_y)
            degraded = p.with_channel(p.channel @ garble)
            assert expected_voi(degraded).expected_value <= expected_voi(p).expected_value + 1e-12


class TestGainAndSelection:
    def test_gain(self):
        p = binary()
        assert information_gain(p, 0.0) == expected_voi(p).expected_value
        assert information_gain(p, 0.01) == pytest.approx(0.015, abs=1e-12)
        assert information_gain(p, 0.1) == pytest.approx(-0.075, abs=1e-12)
        rep = expected_voi(p, 0.01)
        assert rep.gain == rep.expected_value - 0.01
        with pytest.raises(DecisionError):
            information_gain(p, -1.0)

    def test_select_cheaper_duplicate(self):
        base = DecisionProblem([0.5, 0.5], PAYOFF)
        assert select_source(base, [(NOISY, 0.02), (NOISY, 0.01)])[0] == 1

    def test_select_noisy_over_expensive_perfect(self):
        base = DecisionProblem([0.5, 0.5], PAYOFF)
        idx, gain = select_source(base, [(NOISY, 0.0), (IDENTITY, 0.3)])
        assert idx == 0 and gain == pytest.approx(0.025, abs=1e-12)
        assert information_gain(base.with_channel(IDENTITY), 0.3) == pytest.approx(-0.05, abs=1e-12)

    def test_select_informative_over_blind(self):
        base = DecisionProblem([0.5, 0.5], PAYOFF)
        assert select_source(base, [(BLIND, 0.0), (NOISY, 0.0)]) == (1, pytest.approx(0.025, abs=1e-12))

    def test_common_cost_shift_keeps_choice(self):
        base = DecisionProblem([0.5, 0.5], PAYOFF)
        sources = [(NOISY, 0.0), (IDENTITY, 0.3), (BLIND, 0.05)]
        idx, gain = select_source(base, sources)
        idx2, gain2 = select_source(base, [(ch, c + 0.07) for ch, c in sources])
        assert idx2 == idx and gain2 == pytest.approx(gain - 0.07, abs=1e-15)

    def test_empty(self):
        with pytest.raises(DecisionError):
            select_source(DecisionProblem([1.0], [[0.0]]), [])
