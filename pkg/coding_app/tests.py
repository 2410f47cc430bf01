import itertools
import math

import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st

from channel_app import channels
from channel_app.exceptions import OutOfRange
from coding_app import bounds, coding, hypothesis_testing, metaconverse, rounding
from coding_app.api.serializers import (
    BoundReportSerializer,
    CodeSerializer,
    DistributionSerializer,
    LPSolutionSerializer,
    SweepRowSerializer,
)
from coding_app.exceptions import (
    DegenerateDistribution,
    EmptySet,
    EnumerationCapExceeded,
    IndexOutOfRange,
    InvalidBox,
    InvalidDistribution,
    InvalidSolution,
    KExceedsInputAlphabet,
    StochasticityViolation,
)

TOL = 1e-7


def random_channels(count, seed, max_size=7, min_size=2):
    """
    `count` seeded random channels with both alphabets in [min_size, max_size].
    """
    rng = np.random.default_rng(seed)
    for index in range(count):
        x_size = int(rng.integers(min_size, max_size + 1))
        y_size = int(rng.integers(min_size, max_size + 1))
        yield channels.random_channel(x_size, y_size, seed=seed * 10_000 + index)


def mixed_point(rng, x_size, k):
    """
    A random p in [0, 1]^X with sum k: a convex mix of the uniform point and
    the indicator of a random k-subset.
    """
    indicator = np.zeros(x_size)
    indicator[rng.choice(x_size, size=k, replace=False)] = 1.0
    weight = rng.uniform()
    return (1 - weight) * np.full(x_size, k / x_size) + weight * indicator


class FValueTestCase(SimpleTestCase):
    """
    Test suite for f_W, I_inf and ML codes.
    """

    def test_examples(self):
        """
        Identity gives 2, the BSC column maxima give 1.8 and a tightness singleton covers 1.
        """
        self.assertEqual(coding.f_value(channels.validate(np.eye(2)), {0, 1}), 2.0)
        self.assertAlmostEqual(coding.f_value(channels.make_bsc(0.1), [0, 1]), 1.8, places=12)
        tightness = channels.make_tightness(2, 2)
        for x in range(4):
            self.assertAlmostEqual(coding.f_value(tightness, [x]), 1.0, places=12)

    def test_empty_set_and_range(self):
        """
        The empty set is worth 0; inputs outside X are rejected.
        """
        channel = channels.make_bsc(0.2)
        self.assertEqual(coding.f_value(channel, []), 0.0)
        with self.assertRaises(IndexOutOfRange):
            coding.f_value(channel, [2])

    def test_i_infinity(self):
        """
        I_inf is 1 bit for the 2x2 identity, 2 bits for the 4x4 one, 0 on singletons.
        """
        self.assertAlmostEqual(coding.i_infinity(channels.validate(np.eye(2)), [0, 1]), 1.0)
        self.assertAlmostEqual(coding.i_infinity(channels.validate(np.eye(4)), range(4)), 2.0)
        self.assertAlmostEqual(coding.i_infinity(channels.make_bsc(0.3), [1]), 0.0)
        with self.assertRaises(EmptySet):
            coding.i_infinity(channels.make_bsc(0.3), [])

    def test_ml_decoder_prefers_smallest_message(self):
        """
        On a channel whose rows are equal, every output decodes to message 0.
        """
        channel = channels.validate([[0.5, 0.5], [0.5, 0.5]])
        code = coding.ml_code(channel, (1, 0), 2)
        self.assertEqual(code.decoder, (0, 0))

    def test_ml_code_rejects_duplicates(self):
        """
        Codewords must be distinct and no more numerous than the messages.
        """
        channel = channels.make_bsc(0.1)
        with self.assertRaises(IndexOutOfRange):
            coding.ml_code(channel, (0, 0), 2)
        with self.assertRaises(IndexOutOfRange):
            coding.ml_code(channel, (0, 1), 1)


class ExactAndGreedyTestCase(SimpleTestCase):
    """
    Test suite for exact search and the greedy algorithm.
    """

    def test_bsc(self):
        """
        S(BSC(0.1), 2) = 0.9 by exact search and by greedy.
        """
        channel = channels.make_bsc(0.1)
        value, code = coding.exact_opt(channel, 2)
        self.assertAlmostEqual(value, 0.9, places=12)
        self.assertEqual(code.codewords, (0, 1))
        self.assertAlmostEqual(coding.greedy(channel, 2)[0], 0.9, places=12)

    def test_tightness(self):
        """
        Tightness k = t = 2: S = 5/6, and greedy gains are 1 then 2/3.
        """
        channel = channels.make_tightness(2, 2)
        value, _ = coding.exact_opt(channel, 2)
        self.assertAlmostEqual(value, 5 / 6, delta=1e-9)
        greedy_value, _, trace = coding.greedy(channel, 2)
        self.assertAlmostEqual(greedy_value, 5 / 6, delta=1e-9)
        np.testing.assert_allclose(trace.gains, [1.0, 2 / 3])
        self.assertEqual(trace.chain[0], ())
        self.assertEqual([len(s) for s in trace.chain], [0, 1, 2])

    def test_full_alphabet_and_large_k(self):
        """
        k = |X| uses every input; k > |X| reuses the first codeword without gaining anything.
        """
        channel = channels.random_channel(3, 4, seed=5)
        value, code = coding.exact_opt(channel, 3)
        self.assertAlmostEqual(value, coding.f_value(channel, range(3)) / 3, places=12)
        value, code = coding.exact_opt(channel, 5)
        self.assertEqual(code.size, 3)
        self.assertAlmostEqual(value, coding.f_value(channel, range(3)) / 5, places=12)
        self.assertEqual(code.encoder_matrix(3)[4].argmax(), code.codewords[0])

    def test_lexicographic_tie_break(self):
        """
        With all inputs equivalent, the optimum returned is {0, 1}.
        """
        channel = channels.validate(np.full((4, 2), 0.5))
        self.assertEqual(coding.exact_opt(channel, 2)[1].codewords, (0, 1))

    def test_enumeration_cap(self):
        """
        C(|X|, k) above the cap is refused.
        """
        channel = channels.random_channel(10, 3, seed=1)
        with self.assertRaises(EnumerationCapExceeded):
            coding.exact_opt(channel, 5, enumeration_cap=100)

    def test_sandwich_and_guarantee(self):
        """
        1/k <= S^greedy <= S <= 1 and S^greedy >= (1 - (1 - 1/k)^k) S on random channels.
        """
        for channel in random_channels(60, seed=2):
            for k in range(1, min(4, channel.x_size) + 1):
                exact, _ = coding.exact_opt(channel, k)
                greedy_value, _, _ = coding.greedy(channel, k)
                self.assertGreaterEqual(greedy_value, 1 / k - TOL)
                self.assertLessEqual(greedy_value, exact + TOL)
                self.assertLessEqual(exact, 1 + TOL)
                self.assertGreaterEqual(greedy_value, (1 - (1 - 1 / k) ** k) * exact - TOL)

    def test_lazy_matches_naive(self):
        """
        Lazy and naive greedy return identical chains on 200 random channels.
        """
        for channel in random_channels(200, seed=3, max_size=9):
            k = channel.x_size
            _, _, naive = coding.greedy(channel, k)
            _, _, lazy = coding.greedy(channel, k, lazy=True)
            self.assertEqual(naive.chain, lazy.chain)
            self.assertTrue(all(a >= b for a, b in zip(naive.gains, naive.gains[1:])))


class PairTestCase(SimpleTestCase):
    """
    Test suite for explicit encoder/decoder pairs.
    """

    def test_identity_pair(self):
        """
        Identity encoder and decoder on the identity channel succeed surely.
        """
        channel = channels.validate(np.eye(2))
        self.assertAlmostEqual(coding.evaluate_pair(channel, np.eye(2), np.eye(2)), 1.0)

    def test_guessing_decoder(self):
        """
        A decoder ignoring y succeeds with probability 1/k.
        """
        channel = channels.random_channel(3, 4, seed=8)
        e = np.eye(3)
        d = np.full((4, 3), 1 / 3)
        self.assertAlmostEqual(coding.evaluate_pair(channel, e, d), 1 / 3, places=12)

    def test_code_round_trip(self):
        """
        The pair induced by a code is worth f_W(S)/k.
        """
        for channel in random_channels(30, seed=4):
            k = min(3, channel.x_size)
            _, code = coding.exact_opt(channel, k)
            value = coding.evaluate_pair(channel, code.encoder_matrix(channel.x_size), code.decoder_matrix())
            self.assertAlmostEqual(value, coding.f_value(channel, code.codewords) / k, delta=1e-12)
            self.assertAlmostEqual(coding.success_probability(channel, code), value, delta=1e-12)

    def test_converse_reduction(self):
        """
        A random stochastic pair never beats the deterministic code derived from it.
        """
        rng = np.random.default_rng(12)
        for channel in random_channels(30, seed=5):
            k = int(rng.integers(1, 5))
            e = rng.dirichlet(np.ones(channel.x_size), size=k)
            d = rng.dirichlet(np.ones(k), size=channel.y_size)
            code = coding.code_from_pair(channel, e, d)
            self.assertGreaterEqual(
                coding.success_probability(channel, code), coding.evaluate_pair(channel, e, d) - 1e-12
            )

    def test_non_stochastic_rejected(self):
        """
        Encoder rows must sum to 1.
        """
        channel = channels.make_bsc(0.1)
        with self.assertRaises(StochasticityViolation):
            coding.evaluate_pair(channel, [[0.5, 0.4], [0, 1]], np.eye(2))


class SubmodularityTestCase(SimpleTestCase):
    """
    Test suite for monotonicity and submodularity of f_W.
    """

    def test_thousand_instances(self):
        """
        1000 random (W, S ⊆ T, x ∉ T): no violation beyond 1e-12.
        """
        rng = np.random.default_rng(21)
        for instance in range(1000):
            x_size = int(rng.integers(2, 8))
            channel = channels.random_channel(x_size, int(rng.integers(1, 8)), seed=instance)
            x = int(rng.integers(x_size))
            others = [z for z in range(x_size) if z != x]
            big = [z for z in others if rng.random() < 0.6]
            small = [z for z in big if rng.random() < 0.5]
            f = lambda subset: coding.f_value(channel, subset)
            self.assertGreaterEqual(f(big + [x]), f(big) - 1e-12)
            self.assertGreaterEqual(f(small + [x]) - f(small), f(big + [x]) - f(big) - 1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        x_size=st.integers(min_value=1, max_value=6),
        y_size=st.integers(min_value=1, max_value=6),
    )
    def test_value_range(self, seed, x_size, y_size):
        """
        For nonempty S, f_W(S) lies in [1, min(|S|, |Y|)].
        """
        channel = channels.random_channel(x_size, y_size, seed=seed)
        rng = np.random.default_rng(seed)
        subset = list(rng.choice(x_size, size=int(rng.integers(1, x_size + 1)), replace=False))
        value = coding.f_value(channel, subset)
        self.assertGreaterEqual(value, 1 - 1e-12)
        self.assertLessEqual(value, min(len(subset), y_size) + 1e-12)


class NSValueTestCase(SimpleTestCase):
    """
    Test suite for the non-signaling LP.
    """

    def test_examples(self):
        """
        Tightness 2x2 and the identity reach 1; the BSC reaches 0.9.
        """
        self.assertAlmostEqual(metaconverse.ns_value(channels.make_tightness(2, 2), 2).value, 1.0, delta=TOL)
        self.assertAlmostEqual(metaconverse.ns_value(channels.make_bsc(0.1), 2).value, 0.9, delta=TOL)
        self.assertAlmostEqual(metaconverse.ns_value(channels.validate(np.eye(3)), 3).value, 1.0, delta=TOL)

    def test_k_outside_alphabet(self):
        """
        k = 0 and k > |X| are refused.
        """
        with self.assertRaises(KExceedsInputAlphabet):
            metaconverse.ns_value(channels.make_bsc(0.1), 3)
        with self.assertRaises(KExceedsInputAlphabet):
            metaconverse.ns_value(channels.make_bsc(0.1), 0)

    def test_solution_invariants(self):
        """
        LP optima satisfy 0 <= r <= p <= 1, column sums <= 1 and sum p = k.
        """
        for channel in random_channels(30, seed=6):
            for k in range(1, min(4, channel.x_size) + 1):
                solution = metaconverse.ns_value(channel, k)
                solution.check()
                self.assertAlmostEqual(
                    solution.value, (channel.w * solution.r).sum() / k, delta=1e-12
                )

    def test_relaxation_and_monotone_program(self):
        """
        S^NS(W, k) >= S(W, k) and k S^NS(W, k) is non-decreasing in k.
        """
        for channel in random_channels(30, seed=7):
            previous = 0.0
            for k in range(1, channel.x_size + 1):
                value = metaconverse.ns_value(channel, k).value
                self.assertGreaterEqual(value, coding.exact_opt(channel, k)[0] - TOL)
                self.assertGreaterEqual(k * value, previous - TOL)
                previous = k * value

    def test_fractional_optimum(self):
        """
        (1/k) f_W(p) at the LP's p equals S^NS(W, k).
        """
        for channel in random_channels(20, seed=8):
            k = min(2, channel.x_size)
            solution = metaconverse.ns_value(channel, k)
            self.assertAlmostEqual(
                metaconverse.f_fractional(channel, solution.p) / k, solution.value, delta=TOL
            )


class FractionalTestCase(SimpleTestCase):
    """
    Test suite for the fractional extension f_W(p).
    """

    def test_examples(self):
        """
        Zero p gives 0; uniform 1/2 on tightness 2x2 gives k = 2.
        """
        tightness = channels.make_tightness(2, 2)
        self.assertEqual(metaconverse.f_fractional(tightness, np.zeros(4)), 0.0)
        self.assertAlmostEqual(metaconverse.f_fractional(tightness, np.full(4, 0.5)), 2.0, places=12)

    def test_agrees_on_indicators(self):
        """
        f_W on 0/1 vectors matches f_W on sets for 200 random (W, S).
        """
        rng = np.random.default_rng(31)
        for channel in random_channels(200, seed=9, min_size=1):
            mask = rng.random(channel.x_size) < 0.5
            self.assertAlmostEqual(
                metaconverse.f_fractional(channel, mask.astype(float)),
                coding.f_value(channel, np.flatnonzero(mask)),
                delta=1e-12,
            )

    def test_assignment_feasible(self):
        """
        The optimal r respects r <= p and column sums <= 1.
        """
        rng = np.random.default_rng(32)
        for channel in random_channels(50, seed=10):
            p = rng.uniform(size=channel.x_size)
            r = metaconverse.fractional_assignment(channel, p)
            self.assertTrue(np.all(r <= p[:, None] + 1e-12))
            self.assertTrue(np.all(r.sum(axis=0) <= 1 + 1e-12))

    def test_out_of_range(self):
        """
        Entries outside [0, 1] are refused.
        """
        with self.assertRaises(OutOfRange):
            metaconverse.f_fractional(channels.make_bsc(0.1), [1.5, 0.0])


class BoxTestCase(SimpleTestCase):
    """
    Test suite for the conversions between LP solutions and non-signaling boxes.
    """

    def test_identity_entries(self):
        """
        r = I, p = (1, 1), k = 2: P(0,0|0,0) = P(0,1|0,1) = 1/2.
        """
        channel = channels.validate(np.eye(2))
        solution = metaconverse.LPSolution(r=np.eye(2), p=np.ones(2), value=1.0, k=2)
        box = metaconverse.box_from_lp(solution, channel).check()
        self.assertAlmostEqual(box.probs[0, 0, 0, 0], 0.5)
        self.assertAlmostEqual(box.probs[0, 1, 0, 1], 0.5)
        self.assertAlmostEqual(box.success_probability(channel), 1.0)
        round_trip = metaconverse.lp_from_box(box, channel, 2)
        self.assertAlmostEqual(round_trip.value, 1.0, delta=1e-9)

    def test_column_completion_warns_when_value_moves(self):
        """
        r = 0 on BSC(0.1) completes to value 0.1 with the channel and 0.5 in index
        order, both with a warning; the LP optimum completes silently.
        """
        channel = channels.make_bsc(0.1)
        empty = metaconverse.LPSolution(r=np.zeros((2, 2)), p=np.ones(2), value=0.0, k=2)
        with self.assertLogs('coding_app.metaconverse', level='WARNING'):
            box = metaconverse.box_from_lp(empty, channel).check()
        self.assertAlmostEqual(box.success_probability(channel), 0.1, places=12)
        with self.assertLogs('coding_app.metaconverse', level='WARNING'):
            box = metaconverse.box_from_lp(empty).check()
        self.assertAlmostEqual(box.success_probability(channel), 0.5, places=12)
        with self.assertNoLogs('coding_app.metaconverse', level='WARNING'):
            metaconverse.box_from_lp(metaconverse.ns_value(channel, 2), channel)

    def test_lp_optima(self):
        """
        Boxes built from LP optima are non-signaling and keep the value, both ways.
        """
        for channel in random_channels(60, seed=11):
            for k in range(1, min(4, channel.x_size) + 1):
                solution = metaconverse.ns_value(channel, k)
                box = metaconverse.box_from_lp(solution, channel).check(tolerance=1e-9)
                self.assertAlmostEqual(box.success_probability(channel), solution.value, delta=1e-9)
                back = metaconverse.lp_from_box(box, channel, k)
                self.assertAlmostEqual(back.value, solution.value, delta=1e-9)

    def test_complete_columns_keeps_optimal_value(self):
        """
        Completing the columns of an optimum fills only zero-probability entries.
        """
        channel = channels.validate([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.5, 0.0, 0.5]])
        solution = metaconverse.ns_value(channel, 2)
        completed = metaconverse.complete_columns(channel, solution)
        np.testing.assert_allclose(completed.r.sum(axis=0), 1.0)
        self.assertAlmostEqual(completed.value, solution.value, delta=1e-12)

    def test_code_box(self):
        """
        A code's deterministic box is worth f_W(S)/k, and so is its LP point.
        """
        channel = channels.random_channel(4, 5, seed=3)
        _, code = coding.exact_opt(channel, 2)
        box = metaconverse.box_from_code(channel, code).check()
        expected = coding.f_value(channel, code.codewords) / 2
        self.assertAlmostEqual(box.success_probability(channel), expected, places=12)
        self.assertAlmostEqual(metaconverse.lp_from_box(box, channel, 2).value, expected, places=12)

    def test_clipping(self):
        """
        Two messages on one codeword give p_0 = 2, which is clipped to 1 and rebalanced.
        """
        channel = channels.validate(np.eye(2))
        code = coding.ml_code(channel, (0,), 2)
        solution = metaconverse.lp_from_box(metaconverse.box_from_code(channel, code), channel, 2)
        np.testing.assert_allclose(solution.p, [1.0, 1.0])
        self.assertAlmostEqual(solution.value, 0.5)

    def test_signaling_box_rejected(self):
        """
        A box whose sender output copies y is not non-signaling.
        """
        probs = np.zeros((2, 1, 1, 2))
        probs[0, 0, 0, 0] = probs[1, 0, 0, 1] = 1.0
        box = metaconverse.NSBox(probs=probs, marginal_a=np.array([[0.5], [0.5]]), marginal_b=np.ones((1, 2)))
        with self.assertRaises(InvalidBox):
            box.check()

    def test_invalid_solution(self):
        """
        r above p cannot be turned into a box.
        """
        solution = metaconverse.LPSolution(r=np.ones((2, 2)), p=np.array([0.5, 0.5]), value=1.0, k=1)
        with self.assertRaises(InvalidSolution):
            metaconverse.box_from_lp(solution)

    def test_verify_box(self):
        """
        The LP optimum's box passes all three checks on random channels.
        """
        for channel in random_channels(20, seed=18, max_size=5):
            for k in range(1, min(3, channel.x_size) + 1):
                checks = bounds.verify_box(channel, k)
                self.assertEqual(
                    [check.name for check in checks], ['non_signaling', 'box_value', 'round_trip_value']
                )
                self.assertTrue(all(check.passed for check in checks), checks)


class BetaTestCase(SimpleTestCase):
    """
    Test suite for beta_alpha(P, Q).
    """

    def test_examples(self):
        """
        Equal hypotheses give alpha; disjoint supports give 0; (0.9, 0.1) vs uniform at 0.9 gives 0.5.
        """
        for alpha in (0.0, 0.25, 0.5, 1.0):
            self.assertAlmostEqual(hypothesis_testing.beta([0.3, 0.7], [0.3, 0.7], alpha)[0], alpha, places=12)
        self.assertAlmostEqual(hypothesis_testing.beta([1, 0], [0, 1], 0.5)[0], 0.0, places=12)
        value, test = hypothesis_testing.beta([0.9, 0.1], [0.5, 0.5], 0.9)
        self.assertAlmostEqual(value, 0.5, places=12)
        np.testing.assert_allclose(test, [1.0, 0.0], atol=1e-12)

    def test_zero_value_is_unsigned(self):
        """
        A zero beta is reported as 0.0, never -0.0.
        """
        value, _ = hypothesis_testing.beta([1, 0], [0, 1], 0.5)
        self.assertEqual(math.copysign(1.0, value), 1.0)
        value, _ = hypothesis_testing.neyman_pearson([1, 0], [0, 1], 0.5)
        self.assertEqual(math.copysign(1.0, value), 1.0)
        mu = np.full(2, 0.5)
        for method in hypothesis_testing.METHODS:
            value, _ = hypothesis_testing.max_nu_beta(channels.validate(np.eye(2)), 2, mu, method=method)
            self.assertEqual(math.copysign(1.0, value), 1.0)

    def test_alpha_one_accepts_support(self):
        """
        At alpha = 1, beta is the Q-mass of P's support.
        """
        p, q = [0.5, 0.5, 0.0], [0.2, 0.3, 0.5]
        self.assertAlmostEqual(hypothesis_testing.beta(p, q, 1.0)[0], 0.5, places=12)
        self.assertAlmostEqual(hypothesis_testing.neyman_pearson(p, q, 1.0)[0], 0.5, places=12)

    def test_lp_matches_threshold(self):
        """
        LP and Neyman-Pearson agree on 200 random triples; beta is monotone in alpha.
        """
        rng = np.random.default_rng(41)
        for _ in range(200):
            size = int(rng.integers(1, 7))
            p = rng.dirichlet(np.ones(size))
            q = rng.dirichlet(np.ones(size))
            alpha = float(rng.uniform())
            lp_value, _ = hypothesis_testing.beta(p, q, alpha)
            np_value, test = hypothesis_testing.neyman_pearson(p, q, alpha)
            self.assertAlmostEqual(lp_value, np_value, delta=1e-9)
            self.assertGreaterEqual(p @ test, alpha - 1e-9)
            hypothesis_testing.HypothesisInstance(p=p, q=q, alpha=alpha, test=test, beta=np_value).check()
            self.assertLessEqual(hypothesis_testing.neyman_pearson(p, q, alpha / 2)[0], np_value + 1e-12)

    @settings(max_examples=50, deadline=None)
    @given(alpha=st.floats(min_value=0.0, max_value=1.0), seed=st.integers(min_value=0, max_value=10_000))
    def test_threshold_range(self, alpha, seed):
        """
        beta is 0 at alpha = 0 and never above 1.
        """
        rng = np.random.default_rng(seed)
        p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
        self.assertEqual(hypothesis_testing.neyman_pearson(p, q, 0.0)[0], 0.0)
        self.assertLessEqual(hypothesis_testing.neyman_pearson(p, q, alpha)[0], 1.0 + 1e-12)

    def test_invalid_distribution(self):
        """
        Distributions must be nonnegative and sum to 1.
        """
        with self.assertRaises(InvalidDistribution):
            hypothesis_testing.beta([0.5, 0.6], [0.5, 0.5], 0.5)
        with self.assertRaises(InvalidDistribution):
            hypothesis_testing.beta([1.0], [0.5, 0.5], 0.5)
        with self.assertRaises(OutOfRange):
            hypothesis_testing.beta([1.0], [1.0], 1.5)


class ChannelTestTestCase(SimpleTestCase):
    """
    Test suite for the min-max beta form of the non-signaling value.
    """

    def test_max_nu_beta_examples(self):
        """
        Uniform mu gives 0 on the identity and tightness channels, 0.1 on BSC(0.1).
        """
        cases = [
            (channels.validate(np.eye(2)), 0.0),
            (channels.make_bsc(0.1), 0.1),
            (channels.make_tightness(2, 2), 0.0),
        ]
        for channel, expected in cases:
            mu = np.full(channel.x_size, 1 / channel.x_size)
            for method in hypothesis_testing.METHODS:
                value, test = hypothesis_testing.max_nu_beta(channel, 2, mu, method=method)
                self.assertAlmostEqual(value, expected, delta=1e-9)
                self.assertGreaterEqual(test.slack().min(), -1e-9)

    def test_methods_agree(self):
        """
        The per-output threshold solution matches the full LP.
        """
        rng = np.random.default_rng(51)
        for channel in random_channels(30, seed=12):
            k = int(rng.integers(1, min(4, channel.x_size) + 1))
            mu = rng.dirichlet(np.ones(channel.x_size))
            lp_value, _ = hypothesis_testing.max_nu_beta(channel, k, mu, method='lp')
            threshold_value, _ = hypothesis_testing.max_nu_beta(channel, k, mu, method='threshold')
            self.assertAlmostEqual(lp_value, threshold_value, delta=1e-9)

    def test_test_from_lp(self):
        """
        The identity optimum gives T = 1 - I with value 0; r = 0 gives T = 1 with value 1.
        """
        channel = channels.validate(np.eye(2))
        solution = metaconverse.LPSolution(r=np.eye(2), p=np.ones(2), value=1.0, k=2)
        test = hypothesis_testing.test_from_lp(solution, channel)
        np.testing.assert_allclose(test.test, 1 - np.eye(2))
        self.assertAlmostEqual(test.value, 0.0)
        empty = metaconverse.LPSolution(r=np.zeros((2, 2)), p=np.ones(2), value=0.0, k=2)
        test = hypothesis_testing.test_from_lp(empty, channel)
        np.testing.assert_allclose(test.test, 1.0)
        self.assertAlmostEqual(test.value, 1.0)

    def test_bsc_and_back(self):
        """
        The BSC optimum gives a test worth 0.1, and converting back gives 0.9.
        """
        channel = channels.make_bsc(0.1)
        solution = metaconverse.ns_value(channel, 2)
        test = hypothesis_testing.test_from_lp(solution, channel)
        self.assertAlmostEqual(test.value, 0.1, delta=1e-9)
        self.assertGreaterEqual(test.slack().min(), -1e-9)
        self.assertAlmostEqual(hypothesis_testing.lp_from_test(test, channel).value, 0.9, delta=1e-9)

    def test_zero_mass_inputs(self):
        """
        Inputs with p_x = 0 get T(x, .) = 1.
        """
        channel = channels.validate([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        solution = metaconverse.LPSolution(r=np.eye(3, 2), p=np.array([1.0, 1.0, 0.0]), value=1.0, k=2)
        test = hypothesis_testing.test_from_lp(solution, channel)
        np.testing.assert_allclose(test.test[2], 1.0)

    def test_min_max_examples(self):
        """
        Identity and BSC(0.1) pass with min-max values 0 and 0.1.
        """
        report = hypothesis_testing.verify_appendix_b(channels.validate(np.eye(2)), 2)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.at_lp_mu, 0.0, delta=1e-9)
        report = hypothesis_testing.verify_appendix_b(channels.make_bsc(0.1), 2)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.at_lp_mu, 0.1, delta=1e-6)

    def test_min_max_random(self):
        """
        50 random 4x4 channels with k in {2, 3}: the min-max equals 1 - S^NS within 1e-6.
        """
        for index in range(50):
            channel = channels.random_channel(4, 4, seed=700 + index)
            for k in (2, 3):
                report = hypothesis_testing.verify_appendix_b(channel, k, seed=index)
                self.assertTrue(report.optimum_matches, (index, k, report))
                self.assertTrue(report.samples_dominate, (index, k, report))

    def test_k_outside_alphabet(self):
        """
        k > |X| is refused.
        """
        with self.assertRaises(KExceedsInputAlphabet):
            hypothesis_testing.max_nu_beta(channels.make_bsc(0.1), 3, [0.5, 0.5])


class RoundingTestCase(SimpleTestCase):
    """
    Test suite for randomised rounding.
    """

    def setUp(self):
        self.identity = channels.validate(np.eye(2))
        self.identity_solution = metaconverse.LPSolution(r=np.eye(2), p=np.ones(2), value=1.0, k=2)

    def test_identity(self):
        """
        One draw on the identity covers one output: expectation 1, every sample worth 1.
        """
        self.assertAlmostEqual(
            rounding.exact_expected_value(self.identity, self.identity_solution, 1), 1.0, places=12
        )
        code = rounding.sample_code(self.identity, self.identity_solution, 1, seed=0)
        self.assertEqual(code.size, 1)
        self.assertEqual(coding.f_value(self.identity, code.codewords), 1.0)
        report = rounding.monte_carlo(self.identity, self.identity_solution, 1, trials=100, seed=3)
        self.assertEqual(report.mc_mean, 1.0)
        self.assertEqual(report.mc_stddev, 0.0)

    def test_sampling_is_deterministic(self):
        """
        The same seed gives the same code.
        """
        channel = channels.make_tightness(2, 2)
        solution = metaconverse.ns_value(channel, 2)
        first = rounding.sample_code(channel, solution, 2, seed=17)
        self.assertEqual(first, rounding.sample_code(channel, solution, 2, seed=17))
        self.assertLessEqual(first.size, 2)
        self.assertEqual(first.k, 2)

    def test_single_trial(self):
        """
        With one trial the mean is the value of the code sampled from the same seed.
        """
        channel = channels.random_channel(5, 5, seed=2)
        solution = metaconverse.ns_value(channel, 3)
        code = rounding.sample_code(channel, solution, 3, seed=9)
        report = rounding.monte_carlo(channel, solution, 3, trials=1, seed=9)
        self.assertAlmostEqual(report.mc_mean, coding.success_probability(channel, code), places=12)
        self.assertEqual(report.mc_stddev, 0.0)

    def test_bsc_bound(self):
        """
        BSC(0.1), k = l = 2: the expectation is at least 0.75 * 0.9.
        """
        channel = channels.make_bsc(0.1)
        solution = metaconverse.ns_value(channel, 2)
        self.assertGreaterEqual(rounding.exact_expected_value(channel, solution, 2), 0.675 - 1e-9)

    def test_never_samples_zero_mass(self):
        """
        Inputs with p_x = 0 never appear in a sampled code.
        """
        channel = channels.validate([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
        solution = metaconverse.LPSolution(r=np.eye(3, 2), p=np.array([1.0, 1.0, 0.0]), value=1.0, k=2)
        for seed in range(50):
            self.assertNotIn(2, rounding.sample_code(channel, solution, 3, seed=seed).codewords)

    def test_expectation_grows_with_samples(self):
        """
        l * E[f_W(S)] / l is non-decreasing in l.
        """
        for channel in random_channels(20, seed=13):
            solution = metaconverse.ns_value(channel, min(2, channel.x_size))
            totals = [l * rounding.exact_expected_value(channel, solution, l) for l in range(1, 8)]
            self.assertTrue(all(b >= a - 1e-12 for a, b in zip(totals, totals[1:])))

    def test_monte_carlo_agrees(self):
        """
        On the 200 bound-chain channels, for every k, l <= 4, 10^4 trials with a
        fixed seed land within 4 standard errors of the exact expectation.
        """
        for channel in random_channels(200, seed=14):
            sizes = range(1, min(4, channel.x_size) + 1)
            for k in sizes:
                solution = metaconverse.ns_value(channel, k)
                for l in sizes:
                    report = rounding.monte_carlo(channel, solution, l, trials=10_000, seed=0)
                    self.assertTrue(report.consistent(), report)
                    self.assertGreaterEqual(report.exact_expectation, report.bound - 1e-9)

    def test_negative_seed(self):
        """
        A negative seed samples reproducibly in every seeded routine.
        """
        channel = channels.random_channel(4, 4, seed=3)
        solution = metaconverse.ns_value(channel, 2)
        self.assertEqual(
            rounding.sample_code(channel, solution, 2, seed=-5).codewords,
            rounding.sample_code(channel, solution, 2, seed=-5).codewords,
        )
        report = rounding.monte_carlo(channel, solution, 2, trials=100, seed=-5)
        self.assertEqual(report.seed, -5)
        self.assertEqual(report.mc_mean, rounding.monte_carlo(channel, solution, 2, trials=100, seed=-5).mc_mean)
        self.assertTrue(hypothesis_testing.verify_appendix_b(channel, 2, samples=3, seed=-5).passed)

    def test_degenerate_distribution(self):
        """
        p summing away from k is refused.
        """
        solution = metaconverse.LPSolution(r=np.zeros((2, 2)), p=np.array([0.5, 0.5]), value=0.0, k=2)
        with self.assertRaises(DegenerateDistribution):
            rounding.sample_code(self.identity, solution, 1, seed=0)


class RatioTestCase(SimpleTestCase):
    """
    Test suite for the approximation ratio and its lower bounds.
    """

    def test_examples(self):
        """
        ratio(1, 1) = 1, ratio(2, 2) = 3/4, ratio(4, 2) = 7/8.
        """
        self.assertAlmostEqual(bounds.ratio(1, 1), 1.0, places=15)
        self.assertAlmostEqual(bounds.ratio(2, 2), 0.75, places=15)
        self.assertAlmostEqual(bounds.ratio(4, 2), 0.875, places=15)

    def test_lower_bound_grid(self):
        """
        ratio >= exponential form >= 1 - l/(2k) for 1 <= l <= k <= 64.
        """
        for k in range(1, 65):
            for l in range(1, k + 1):
                exp_form, expansion = bounds.ratio_lower_bounds(k, l)
                self.assertGreaterEqual(bounds.ratio(k, l), exp_form - 1e-12)
                self.assertGreaterEqual(exp_form, expansion - 1e-12)

    def test_limits(self):
        """
        ratio(k, k) tends to 1 - 1/e; the t = 2 expansion bound is 3/4.
        """
        self.assertAlmostEqual(bounds.ratio(1000, 1000), 1 - math.exp(-1), delta=1e-3)
        self.assertAlmostEqual(bounds.ratio_lower_bounds(1000, 1000)[0], 1 - math.exp(-1), places=12)
        self.assertAlmostEqual(bounds.ratio_lower_bounds(4, 2)[1], 0.75)
        self.assertAlmostEqual(bounds.ratio(10**9, 1), 1.0, places=9)

    @given(k=st.integers(min_value=1, max_value=10**7), l=st.integers(min_value=1, max_value=10**4))
    def test_range(self, k, l):
        """
        ratio lies in (0, 1].
        """
        value = bounds.ratio(k, l)
        self.assertGreater(value, 0.0)
        self.assertLessEqual(value, 1.0 + 1e-15)

    def test_invalid(self):
        """
        Nonpositive arguments are refused.
        """
        with self.assertRaises(OutOfRange):
            bounds.ratio(0, 1)
        with self.assertRaises(OutOfRange):
            bounds.ratio_lower_bounds(1, 0)


class ChainTestCase(SimpleTestCase):
    """
    Test suite for the bound chain on random channels.
    """

    def test_examples(self):
        """
        Tightness 2x2 and the identity with k = l = 2 pass every check.
        """
        report = bounds.verify_theorem3(channels.make_tightness(2, 2), 2, 2)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(report.s_exact, 5 / 6, delta=1e-9)
        self.assertEqual({check.name for check in report.checks}, set(bounds.GUARANTEE_CHECKS))
        self.assertTrue(bounds.verify_chain(channels.validate(np.eye(2)), 2, 2).passed)

    def test_residuals_reproduce(self):
        """
        Each residual is recomputed from its stored sides.
        """
        report = bounds.verify_chain(channels.random_channel(5, 4, seed=1), 3, 2)
        for check in report.checks:
            self.assertAlmostEqual(abs(check.lhs - check.rhs), abs(check.residual), delta=1e-12)

    def test_two_hundred_channels(self):
        """
        ratio(k, l) S^NS(W, k) <= S^greedy(W, l) <= S(W, l) <= S^NS(W, l) <= 1 with 1/l <= S(W, l);
        the rounding expectation meets the bound; boxes from every optimum are valid.
        """
        for channel in random_channels(200, seed=14):
            sizes = range(1, min(4, channel.x_size) + 1)
            ns = {k: metaconverse.ns_value(channel, k) for k in sizes}
            exact = {l: coding.exact_opt(channel, l)[0] for l in sizes}
            greedy = {l: coding.greedy(channel, l, lazy=True)[0] for l in sizes}
            for k, l in itertools.product(sizes, sizes):
                bound = bounds.ratio(k, l) * ns[k].value
                self.assertGreaterEqual(greedy[l], bound - TOL)
                self.assertGreaterEqual(exact[l], greedy[l] - TOL)
                self.assertGreaterEqual(ns[l].value, exact[l] - TOL)
                self.assertLessEqual(ns[l].value, 1 + TOL)
                self.assertGreaterEqual(exact[l], 1 / l - TOL)
                self.assertGreaterEqual(rounding.exact_expected_value(channel, ns[k], l), bound - 1e-9)
            for k in sizes:
                box = metaconverse.box_from_lp(ns[k], channel).check(tolerance=1e-9)
                self.assertAlmostEqual(box.success_probability(channel), ns[k].value, delta=1e-9)

    def test_centered(self):
        """
        The centered inequality has nonnegative residual for k in {2, 3, 4}; for k = 2 the factor is 1/2.
        """
        for channel in random_channels(200, seed=14):
            for k in range(2, min(4, channel.x_size) + 1):
                check = bounds.verify_centered(channel, k)
                self.assertTrue(check.passed, check)
        check = bounds.verify_centered(channels.validate(np.eye(3)), 3)
        self.assertAlmostEqual(check.lhs, 2 / 3, delta=TOL)
        self.assertTrue(check.passed)
        bsc = channels.make_bsc(0.1)
        check = bounds.verify_centered(bsc, 2)
        self.assertAlmostEqual(check.rhs, 0.5 * (0.9 - 0.5), delta=TOL)

    def test_induction(self):
        """
        Each greedy step closes at least a 1/k fraction of the gap to k S^NS.
        """
        for channel in random_channels(40, seed=15):
            for k in range(1, min(4, channel.x_size) + 1):
                self.assertTrue(all(check.passed for check in bounds.verify_induction(channel, k)))


class MarginalGainTestCase(SimpleTestCase):
    """
    Test suite for the fractional marginal-gain inequality.
    """

    def test_random_triples(self):
        """
        500 random (W, S, p) with sum p = k: residual >= -1e-7.
        """
        rng = np.random.default_rng(61)
        for channel in random_channels(500, seed=16, min_size=1):
            k = int(rng.integers(1, channel.x_size + 1))
            p = mixed_point(rng, channel.x_size, k)
            subset = [int(x) for x in np.flatnonzero(rng.random(channel.x_size) < 0.4)]
            check = bounds.verify_lemma4(channel, subset, p)
            self.assertGreaterEqual(check.residual, -TOL)

    def test_single_message(self):
        """
        For k = 1 and S empty the inequality is f_W(p) <= max_x f_W({x}) = 1.
        """
        channel = channels.random_channel(4, 3, seed=2)
        check = bounds.verify_lemma4(channel, [], np.array([0.25, 0.25, 0.25, 0.25]))
        self.assertAlmostEqual(check.rhs, 1.0, places=12)
        self.assertTrue(check.passed)

    def test_tightness_greedy_prefix(self):
        """
        Uniform p on tightness 2x2 against the first greedy input passes.
        """
        channel = channels.make_tightness(2, 2)
        _, _, trace = coding.greedy(channel, 2)
        check = bounds.verify_lemma4(channel, trace.chain[1], np.full(4, 0.5))
        self.assertTrue(check.passed)
        self.assertAlmostEqual(check.lhs, 2.0, places=12)
        self.assertAlmostEqual(check.rhs, 1.0 + 2 * 2 / 3, places=12)

    def test_non_integral_total(self):
        """
        p must sum to a positive integer.
        """
        with self.assertRaises(OutOfRange):
            bounds.verify_lemma4(channels.make_bsc(0.1), [0], [0.5, 0.2])

    def test_every_greedy_prefix(self):
        """
        Without a subset the check runs once per greedy prefix S_0 .. S_{k-1}.
        """
        for channel in random_channels(30, seed=17):
            k = min(3, channel.x_size)
            checks = bounds.verify_lemma4_greedy(channel, k)
            self.assertEqual([check.name for check in checks], [f'lemma4_prefix_{j}' for j in range(k)])
            self.assertTrue(all(check.passed for check in checks))


class TightnessTestCase(SimpleTestCase):
    """
    Test suite for the tightness family.
    """

    def test_k2_t2(self):
        """
        S = 5/6 and S^NS = 1 for k = t = 2.
        """
        channel = channels.make_tightness(2, 2)
        self.assertAlmostEqual(coding.exact_opt(channel, 2)[0], 5 / 6, delta=1e-9)
        self.assertAlmostEqual(metaconverse.ns_value(channel, 2).value, 1.0, delta=TOL)
        self.assertAlmostEqual(bounds.tightness_closed_form(2, 2, 2), 5 / 6, places=12)

    def test_full_coverage(self):
        """
        l = n covers every output, giving k/n.
        """
        self.assertAlmostEqual(bounds.tightness_closed_form(2, 3, 6), 2 / 6, places=12)
        with self.assertRaises(OutOfRange):
            bounds.tightness_closed_form(2, 2, 5)

    def test_gap_decreases_toward_ratio(self):
        """
        k = l = 2, t = 2..5: closed form equals exact search, S^NS = 1 is certified,
        and the gap decreases toward 3/4.
        """
        gaps = []
        for t in (2, 3, 4, 5):
            gap = bounds.tightness_gap(2, t, 2)
            exact, _ = coding.exact_opt(channels.make_tightness(2, t), 2)
            self.assertAlmostEqual(gap.closed_form, exact, delta=1e-9)
            self.assertAlmostEqual(gap.ns_value, 1.0, delta=1e-9)
            self.assertGreater(gap.gap, gap.ratio)
            gaps.append(gap.gap)
        self.assertTrue(all(b < a for a, b in zip(gaps, gaps[1:])))

    def test_closed_form_matches_exact(self):
        """
        The closed form matches exact search for several (k, t, l).
        """
        for k, t, l in [(2, 3, 1), (2, 3, 3), (3, 2, 2), (3, 2, 4), (4, 2, 3)]:
            exact, _ = coding.exact_opt(channels.make_tightness(k, t), l)
            self.assertAlmostEqual(bounds.tightness_closed_form(k, t, l), exact, delta=1e-9)

    def test_analytic_point_is_optimal(self):
        """
        Where the LP is solved outright it agrees with the analytic point.
        """
        for k, t in [(2, 2), (2, 3), (3, 2)]:
            channel, point = metaconverse.tightness_point(k, t)
            self.assertAlmostEqual(point.value, 1.0, places=12)
            self.assertAlmostEqual(metaconverse.ns_value(channel, k).value, 1.0, delta=TOL)


class SweepTestCase(SimpleTestCase):
    """
    Test suite for sweep rows.
    """

    def test_identity(self):
        """
        Both curves are 1 on the 2x2 identity.
        """
        rows = bounds.sweep(channels.validate(np.eye(2)))
        self.assertEqual([row.l for row in rows], [1, 2])
        for row in rows:
            self.assertAlmostEqual(row.s_value, 1.0)
            self.assertAlmostEqual(row.s_ns, 1.0, delta=TOL)
            self.assertEqual(row.method, 'exact')

    def test_tightness_and_monotone(self):
        """
        Tightness 2x2 has S^NS(2) = 1, and l S^NS(W, l) is non-decreasing.
        """
        rows = bounds.sweep(channels.make_tightness(2, 2), 1, 4)
        self.assertAlmostEqual(rows[1].s_ns, 1.0, delta=TOL)
        totals = [row.l * row.s_ns for row in rows]
        self.assertTrue(all(b >= a - TOL for a, b in zip(totals, totals[1:])))

    def test_greedy_substitution(self):
        """
        Rows beyond the enumeration cap fall back to greedy and say so.
        """
        rows = bounds.sweep(channels.random_channel(6, 4, seed=3), 1, 3, enumeration_cap=15)
        self.assertEqual([row.method for row in rows], ['exact', 'exact', 'greedy'])
        self.assertEqual(rows[2].s_method, 'S_greedy')

    def test_range_checked(self):
        """
        l beyond |X| is refused.
        """
        with self.assertRaises(OutOfRange):
            bounds.sweep(channels.make_bsc(0.1), 1, 3)


class SerializerTestCase(SimpleTestCase):
    """
    Test suite for the JSON formats of results.
    """

    def test_code(self):
        """
        Codes serialise as k, codewords and decoder.
        """
        _, code = coding.exact_opt(channels.make_bsc(0.1), 2)
        self.assertEqual(dict(CodeSerializer(code).data), {'k': 2, 'codewords': [0, 1], 'decoder': [0, 1]})

    def test_lp_solution_round_trip(self):
        """
        A serialised LP solution loads back to the same values.
        """
        solution = metaconverse.ns_value(channels.make_bsc(0.1), 2)
        data = LPSolutionSerializer(solution).data
        serializer = LPSolutionSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        loaded = serializer.save()
        np.testing.assert_allclose(loaded.r, solution.r)
        self.assertEqual(loaded.k, 2)

    def test_invalid_lp_solution(self):
        """
        r above p does not validate.
        """
        data = {'k': 1, 'value': 1.0, 'p': [0.5, 0.5], 'r': [[1.0], [0.0]]}
        self.assertFalse(LPSolutionSerializer(data=data).is_valid())

    def test_distribution(self):
        """
        Distributions must sum to 1.
        """
        self.assertTrue(DistributionSerializer(data={'probs': [0.25, 0.75]}).is_valid())
        self.assertFalse(DistributionSerializer(data={'probs': [0.25, 0.5]}).is_valid())

    def test_reports(self):
        """
        Bound reports list every check; sweep rows carry the CSV columns.
        """
        report = bounds.verify_theorem3(channels.make_bsc(0.1), 2, 2)
        data = BoundReportSerializer(report).data
        self.assertTrue(data['passed'])
        self.assertEqual(len(data['checks']), 4)
        row = SweepRowSerializer(bounds.sweep(channels.make_bsc(0.1))[0]).data
        self.assertEqual(list(row), ['l', 's_method', 's_value', 's_ns', 'method'])
