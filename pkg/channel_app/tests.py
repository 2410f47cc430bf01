import itertools
import json
import tempfile
from math import comb
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from channel_app import channels
from channel_app.api.utils import channel_to_json, inputs_digest, load_channel, load_set_system
from channel_app.exceptions import (
    InputError,
    InvalidSetSystem,
    MalformedMatrix,
    NegativeEntry,
    OutOfRange,
    RowSumViolation,
    SizeCapExceeded,
)
from coding_app.coding import f_value


class ValidateTestCase(SimpleTestCase):
    """
    Test suite for building channels from raw matrices.
    """

    def test_identity(self):
        """
        The 2x2 identity is a channel with both alphabets of size 2.
        """
        channel = channels.validate([[1, 0], [0, 1]])
        self.assertEqual((channel.x_size, channel.y_size), (2, 2))
        np.testing.assert_array_equal(channel.w, np.eye(2))

    def test_row_sum_violation(self):
        """
        A row summing to 1.1 is rejected with the offending row index.
        """
        with self.assertRaises(RowSumViolation) as ctx:
            channels.validate([[0.5, 0.6]])
        self.assertEqual(ctx.exception.x, 0)

    def test_negative_entry(self):
        """
        Negative probabilities are rejected even when the row sums to 1.
        """
        with self.assertRaises(NegativeEntry):
            channels.validate([[1.5, -0.5]])

    def test_near_stochastic_rows_are_renormalised(self):
        """
        Rows within 1e-9 of stochastic come back summing to 1.
        """
        channel = channels.validate([[0.5, 0.5 + 5e-10], [0.25, 0.75]])
        self.assertAlmostEqual(channel.w[0].sum(), 1.0, places=15)

    def test_renormalisation_logging(self):
        """
        A visible row-sum correction logs a warning; rounding noise only logs at debug.
        """
        with self.assertLogs('channel_app.channels', level='WARNING') as logs:
            channels.validate([[0.5, 0.5 + 5e-10], [0.25, 0.75]])
        self.assertIn('renormalising 1 rows', logs.output[0])
        with self.assertNoLogs('channel_app.channels', level='WARNING'):
            channels.validate([[0.1, 0.2, 0.7 + 1e-16]])

    def test_ragged_and_empty_matrices(self):
        """
        Non-rectangular and empty inputs are malformed.
        """
        with self.assertRaises(MalformedMatrix):
            channels.validate([[1.0], [0.5, 0.5]])
        with self.assertRaises(MalformedMatrix):
            channels.validate([])

    def test_channel_is_immutable(self):
        """
        The probability matrix of a built channel cannot be written to.
        """
        channel = channels.make_bsc(0.1)
        with self.assertRaises(ValueError):
            channel.w[0, 0] = 0.5


class FamiliesTestCase(SimpleTestCase):
    """
    Test suite for the analytic channel families.
    """

    def test_bsc(self):
        """
        BSC rows are [1-p, p] and [p, 1-p]; p outside [0, 1] is rejected.
        """
        np.testing.assert_allclose(channels.make_bsc(0.1).w, [[0.9, 0.1], [0.1, 0.9]])
        np.testing.assert_array_equal(channels.make_bsc(0).w, np.eye(2))
        np.testing.assert_allclose(channels.make_bsc(0.5).w, np.full((2, 2), 0.5))
        with self.assertRaises(OutOfRange):
            channels.make_bsc(1.5)

    def test_erasure(self):
        """
        Erasure rows put 1 - eps on the sent bit and eps on the erasure symbol.
        """
        np.testing.assert_allclose(channels.make_erasure(0).w, [[1, 0, 0], [0, 1, 0]])
        np.testing.assert_allclose(channels.make_erasure(1).w, [[0, 0, 1], [0, 0, 1]])
        np.testing.assert_allclose(channels.make_erasure(0.5).w, [[0.5, 0, 0.5], [0, 0.5, 0.5]])
        with self.assertRaises(OutOfRange):
            channels.make_erasure(-0.1)

    def test_tightness_k2_t2(self):
        """
        k = t = 2 gives a 4x6 channel whose nonzero entries are 1/3, three per row.
        """
        channel = channels.make_tightness(2, 2)
        self.assertEqual((channel.x_size, channel.y_size), (4, 6))
        nonzero = channel.w[channel.w > 0]
        np.testing.assert_allclose(nonzero, 1 / 3)
        np.testing.assert_array_equal((channel.w > 0).sum(axis=1), [3, 3, 3, 3])

    def test_tightness_trivial(self):
        """
        k = t = 1 is the 1x1 channel [[1]].
        """
        np.testing.assert_array_equal(channels.make_tightness(1, 1).w, [[1.0]])

    def test_tightness_row_and_column_counts(self):
        """
        Every column has t nonzero entries and every row C(n-1, t-1).
        """
        for k, t in [(2, 3), (3, 2), (2, 4), (4, 2)]:
            channel = channels.make_tightness(k, t)
            n = k * t
            np.testing.assert_array_equal((channel.w > 0).sum(axis=0), t)
            np.testing.assert_array_equal((channel.w > 0).sum(axis=1), comb(n - 1, t - 1))

    def test_tightness_outputs_are_lexicographic(self):
        """
        The output alphabet enumerates t-subsets in lexicographic order.
        """
        self.assertEqual(
            channels.tightness_outputs(2, 2),
            [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        )

    def test_tightness_size_cap(self):
        """
        n = kt above the cap is refused; the cap can be raised per call.
        """
        with self.assertRaises(SizeCapExceeded):
            channels.make_tightness(5, 4)
        self.assertEqual(channels.make_tightness(5, 1, size_cap=5).x_size, 5)


class SetSystemTestCase(SimpleTestCase):
    """
    Test suite for the max-k-coverage reduction.
    """

    def test_two_sets(self):
        """
        T_a = {0, 1}, T_b = {1, 2} with d = 2 gives rows of 1/2 on each set.
        """
        system = channels.SetSystem(ground_size=3, sets=((0, 1), (1, 2)), uniform_size=2)
        np.testing.assert_allclose(
            channels.from_set_system(system).w, [[0.5, 0.5, 0], [0, 0.5, 0.5]]
        )

    def test_single_singleton(self):
        """
        One singleton set gives a single row with all mass on that element.
        """
        system = channels.SetSystem(ground_size=3, sets=((0,),), uniform_size=1)
        np.testing.assert_array_equal(channels.from_set_system(system).w, [[1, 0, 0]])

    def test_invalid_systems(self):
        """
        Sets of the wrong size or with out-of-range elements are rejected.
        """
        with self.assertRaises(InvalidSetSystem):
            channels.SetSystem(ground_size=3, sets=((0, 1), (2,)), uniform_size=2)
        with self.assertRaises(InvalidSetSystem):
            channels.SetSystem(ground_size=3, sets=((0, 3),), uniform_size=2)

    def test_coverage_identity(self):
        """
        For 100 random uniform set systems and 50 random S each,
        d * f_W(S) equals |∪_{x in S} T_x| to 1e-12.
        """
        rng = np.random.default_rng(9)
        for instance in range(100):
            ground = int(rng.integers(1, 13))
            d = int(rng.integers(1, min(4, ground) + 1))
            count = int(rng.integers(1, 9))
            system = channels.random_set_system(ground, count, d, seed=instance)
            channel = channels.from_set_system(system)
            for _ in range(50):
                mask = rng.random(count) < 0.5
                subset = [int(x) for x in np.flatnonzero(mask)]
                self.assertAlmostEqual(
                    d * f_value(channel, subset), system.union_size(subset), delta=1e-12
                )


class TensorAndRandomTestCase(SimpleTestCase):
    """
    Test suite for tensor powers and seeded random channels.
    """

    def test_tensor_power_one_is_identity_map(self):
        """
        The first tensor power is the channel itself.
        """
        channel = channels.make_bsc(0.2)
        self.assertIs(channels.tensor_power(channel, 1), channel)

    def test_bsc_square(self):
        """
        BSC(0.1)^2 is 4x4 with corner 0.81 and follows the product structure.
        """
        square = channels.tensor_power(channels.make_bsc(0.1), 2)
        self.assertEqual((square.x_size, square.y_size), (4, 4))
        self.assertAlmostEqual(square.w[0, 0], 0.81)
        # x = (0, 1), y = (1, 1)
        self.assertAlmostEqual(square.w[1, 3], 0.1 * 0.9)

    def test_identity_square(self):
        """
        The identity stays the identity under tensor powers.
        """
        identity = channels.validate(np.eye(2))
        np.testing.assert_array_equal(channels.tensor_power(identity, 2).w, np.eye(4))

    def test_tensor_rows_stay_stochastic(self):
        """
        Rows of a tensor power of a random channel sum to 1 within 1e-9.
        """
        power = channels.tensor_power(channels.random_channel(3, 2, seed=4), 3)
        np.testing.assert_allclose(power.w.sum(axis=1), 1.0, atol=1e-9)

    def test_tensor_size_cap(self):
        """
        Powers whose |X|^n |Y|^n exceeds the cap are refused.
        """
        with self.assertRaises(SizeCapExceeded):
            channels.tensor_power(channels.make_bsc(0.1), 3, size_cap=63)

    def test_random_channel_is_deterministic(self):
        """
        Equal seeds give bit-identical channels; the result is a valid channel.
        """
        first = channels.random_channel(4, 5, seed=17)
        second = channels.random_channel(4, 5, seed=17)
        np.testing.assert_array_equal(first.w, second.w)
        channels.validate(first.w)
        self.assertFalse(np.array_equal(first.w, channels.random_channel(4, 5, seed=18).w))

    def test_negative_seed(self):
        """
        Negative seeds are accepted and reproducible; non-integers are out of range.
        """
        first = channels.random_channel(2, 3, seed=-1)
        again = channels.random_channel(2, 3, seed=-1)
        np.testing.assert_array_equal(first.w, again.w)
        self.assertFalse(np.array_equal(first.w, channels.random_channel(2, 3, seed=1).w))
        system = channels.random_set_system(5, 3, 2, seed=-7)
        self.assertEqual(len(system.sets), 3)
        with self.assertRaises(OutOfRange):
            channels.seeded_rng(1.5)
        with self.assertRaises(OutOfRange):
            channels.seeded_rng(None)

    def test_random_single_row(self):
        """
        A single-input random channel is one row summing to 1.
        """
        channel = channels.random_channel(1, 6, seed=0)
        self.assertAlmostEqual(channel.w.sum(), 1.0)


class ChannelFileTestCase(SimpleTestCase):
    """
    Test suite for the channel and set-system JSON formats.
    """

    def setUp(self):
        """
        Creates a scratch directory for files.
        """
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def write(self, name, document):
        path = self.dir / name
        path.write_text(json.dumps(document))
        return path

    def test_channel_file_round_trip(self):
        """
        A channel written as JSON loads back to the same matrix and name.
        """
        channel = channels.make_erasure(0.25)
        path = self.write('ch.json', channel_to_json(channel))
        loaded, raw = load_channel(path)
        np.testing.assert_array_equal(loaded.w, channel.w)
        self.assertEqual(loaded.name, 'erasure(0.25)')
        self.assertEqual(raw, path.read_bytes())

    def test_channel_file_shape_mismatch(self):
        """
        Declared sizes that disagree with the rows are an input error.
        """
        path = self.write('bad.json', {"x": 2, "y": 2, "rows": [[1, 0]]})
        with self.assertRaises(InputError):
            load_channel(path)

    def test_channel_file_not_stochastic(self):
        """
        A non-stochastic matrix in a file is an input error.
        """
        path = self.write('bad.json', {"x": 1, "y": 2, "rows": [[0.5, 0.6]]})
        with self.assertRaises(InputError):
            load_channel(path)

    def test_invalid_json(self):
        """
        Unparseable files and missing files are input errors.
        """
        path = self.dir / 'broken.json'
        path.write_text('{"x": ')
        with self.assertRaises(InputError):
            load_channel(path)
        with self.assertRaises(InputError):
            load_channel(self.dir / 'missing.json')

    def test_set_system_file(self):
        """
        The set-system format loads into a validated SetSystem.
        """
        path = self.write('sets.json', {"ground": 4, "d": 2, "sets": [[0, 1], [2, 3]]})
        system, _ = load_set_system(path)
        self.assertEqual(system.sets, ((0, 1), (2, 3)))
        self.assertEqual(system.union_size([0, 1]), 4)

    def test_digest_depends_on_content_and_params(self):
        """
        The inputs digest changes with the file bytes and with the parameters.
        """
        base = inputs_digest({"k": 2}, b'abc')
        self.assertEqual(base, inputs_digest({"k": 2}, b'abc'))
        self.assertNotEqual(base, inputs_digest({"k": 3}, b'abc'))
        self.assertNotEqual(base, inputs_digest({"k": 2}, b'abd'))

    def test_all_subsets_of_small_system(self):
        """
        Exhaustively over all subsets of a fixed system, d * f_W equals the union size.
        """
        system = channels.SetSystem(ground_size=5, sets=((0, 1), (1, 2), (3, 4)), uniform_size=2)
        channel = channels.from_set_system(system)
        for size in range(4):
            for subset in itertools.combinations(range(3), size):
                self.assertAlmostEqual(2 * f_value(channel, subset), system.union_size(subset))
