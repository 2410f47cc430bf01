import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from cli_app.runner import run


class CommandTestCase(SimpleTestCase):
    """
    Base for the command tests: a scratch directory and a tightness channel
    (k = 2, t = 2) generated into it.
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.channel_path = self.path('tightness.json')
        result = run(['generate', '--family', 'tightness', '--k', '2', '--t', '2', '-o', self.channel_path])
        self.assertEqual(result.exit_code, 0, result.output)

    def path(self, name):
        return str(Path(self.tmp.name) / name)

    def write(self, name, document):
        path = self.path(name)
        Path(path).write_text(json.dumps(document))
        return path


class GenerateTestCase(CommandTestCase):
    """
    Test suite for the generate command.
    """

    def test_tightness_file(self):
        """
        The written file is the tightness channel with four inputs and six outputs.
        """
        document = json.loads(Path(self.channel_path).read_text())
        self.assertEqual((document['x'], document['y']), (4, 6))

    def test_envelope(self):
        """
        stdout carries the envelope with the generated channel as payload.
        """
        result = run(['generate', '--family', 'bsc', '--p', '0.1'])
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.command, 'generate')
        self.assertEqual(len(result.inputs_digest), 64)
        self.assertEqual(result.payload['channel']['rows'], [[0.9, 0.1], [0.1, 0.9]])

    def test_random_uses_seed(self):
        """
        The same seed gives the same channel; another seed a different one.
        """
        argv = ['generate', '--family', 'random', '--x-size', '3', '--y-size', '4']
        first = run(argv + ['--seed', '5'])
        again = run(argv + ['--seed', '5'])
        other = run(argv + ['--seed', '6'])
        self.assertEqual(first.output, again.output)
        self.assertNotEqual(first.payload['channel'], other.payload['channel'])

    def test_missing_family_parameter(self):
        """
        A family without its parameter is an input error.
        """
        result = run(['generate', '--family', 'erasure'])
        self.assertEqual(result.exit_code, 1)

    def test_tensor_of_file(self):
        """
        tensor --n 2 squares both alphabet sizes.
        """
        bsc_path = self.path('bsc.json')
        run(['generate', '--family', 'bsc', '--p', '0.2', '-o', bsc_path])
        result = run(['generate', '--family', 'tensor', '--channel', bsc_path, '--n', '2'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual((result.payload['channel']['x'], result.payload['channel']['y']), (4, 4))


class ComputeTestCase(CommandTestCase):
    """
    Test suite for the compute command.
    """

    def test_exact(self):
        """
        S(W, 2) of the tightness channel is 5/6.
        """
        result = run(['compute', '--channel', self.channel_path, '--k', '2', '--method', 'exact'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(result.payload['value'], 5 / 6, delta=1e-9)

    def test_ns_lp(self):
        """
        S^NS(W, 2) of the tightness channel is 1, with the box on request.
        """
        result = run(['compute', '--channel', self.channel_path, '--k', '2', '--method', 'ns-lp', '--dump-box'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(result.payload['value'], 1.0, delta=1e-7)
        self.assertEqual(result.payload['solution']['k'], 2)
        self.assertIn('box', result.payload)

    def test_greedy_trace(self):
        """
        The greedy trace starts from the empty set and has one gain per step.
        """
        result = run(['compute', '--channel', self.channel_path, '--k', '2', '--method', 'greedy', '--lazy'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(result.payload['trace']['chain'][0], [])
        self.assertEqual(len(result.payload['trace']['gains']), 2)

    def test_mc_rounding(self):
        """
        The report echoes the seed and trial count, and the sampled code has l codewords.
        """
        argv = ['compute', '--channel', self.channel_path, '--k', '2', '--method', 'mc-rounding',
                '--trials', '200', '--seed', '3']
        result = run(argv)
        self.assertEqual(result.exit_code, 0, result.output)
        report = result.payload['report']
        self.assertEqual((report['seed'], report['mc_trials'], report['l']), (3, 200, 2))
        self.assertLessEqual(report['exact_expectation'], report['ns_value'] + 1e-9)
        self.assertEqual(len(result.payload['code']['codewords']), 2)
        self.assertEqual(run(argv).output, result.output)

    def test_channel_beta(self):
        """
        The min-max beta at mu = p/k equals 1 - S^NS(W, k).
        """
        result = run(['compute', '--channel', self.channel_path, '--k', '2', '--method', 'beta'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(result.payload['value'], result.payload['one_minus_ns'], delta=1e-6)

    def test_distribution_beta(self):
        """
        beta_0.9 of P = (0.9, 0.1) against Q = (0.1, 0.9) is 0.1 by both methods.
        """
        p_path = self.write('p.json', {'probs': [0.9, 0.1]})
        q_path = self.write('q.json', {'probs': [0.1, 0.9]})
        result = run(['compute', '--method', 'beta', '--dist-p', p_path, '--dist-q', q_path, '--alpha', '0.9'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(result.payload['value'], 0.1, delta=1e-9)
        self.assertAlmostEqual(result.payload['threshold_value'], 0.1, delta=1e-9)

    def test_distribution_beta_needs_alpha(self):
        """
        --dist-p without --alpha is an input error.
        """
        p_path = self.write('p.json', {'probs': [0.5, 0.5]})
        result = run(['compute', '--method', 'beta', '--dist-p', p_path, '--dist-q', p_path])
        self.assertEqual(result.exit_code, 1)

    def test_k_exceeds_alphabet(self):
        """
        k larger than |X| is rejected with exit code 1.
        """
        result = run(['compute', '--channel', self.channel_path, '--k', '5', '--method', 'ns-lp'])
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(result.output, '')


class VerifyTestCase(CommandTestCase):
    """
    Test suite for the verify command.
    """

    def test_default_check_passes(self):
        """
        The default check passes on the tightness channel.
        """
        result = run(['verify', '--channel', self.channel_path, '--k', '2', '--l', '2'])
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertTrue(result.payload['passed'])
        names = [check['name'] for check in result.payload['report']['checks']]
        self.assertEqual(names, ['greedy_vs_ns', 'exact_vs_ns', 'rounding_vs_ns', 'exact_le_ns'])

    def test_other_checks(self):
        """
        Every other check passes on the tightness channel as well.
        """
        for check in ('chain', 'centered', 'lemma4', 'induction', 'appendix-b', 'nsbox'):
            with self.subTest(check=check):
                result = run(['verify', '--channel', self.channel_path, '--k', '2', '--check', check])
                self.assertEqual(result.exit_code, 0, result.output)
                self.assertTrue(result.payload['passed'])

    def test_lemma4_subset(self):
        """
        An explicit --subset gives a single check; a malformed one is an input error.
        """
        result = run(['verify', '--channel', self.channel_path, '--k', '2', '--check', 'lemma4', '--subset', '0,1'])
        self.assertEqual(len(result.payload['report']['checks']), 1)
        result = run(['verify', '--channel', self.channel_path, '--k', '2', '--check', 'lemma4', '--subset', 'a'])
        self.assertEqual(result.exit_code, 1)

    def test_failed_check_exits_two(self):
        """
        A failing check still prints its report, then exits 2.
        """
        result = run(['verify', '--channel', self.channel_path, '--k', '2', '--check', 'nsbox', '--tol', '-1'])
        self.assertEqual(result.exit_code, 2)
        self.assertFalse(result.payload['passed'])


class SweepTestCase(CommandTestCase):
    """
    Test suite for the sweep command.
    """

    def test_csv(self):
        """
        CSV output is the bare table, one row per l.
        """
        result = run(['sweep', '--channel', self.channel_path, '--format', 'csv'])
        self.assertEqual(result.exit_code, 0, result.output)
        lines = result.output.strip().splitlines()
        self.assertEqual(lines[0], 'l,s_method,s_value,s_ns,method')
        self.assertEqual(len(lines), 5)
        self.assertTrue(all(line.endswith(',exact') for line in lines[1:]))
        self.assertIsNone(result.payload)

    def test_json_range(self):
        """
        --l-from and --l-to bound the rows.
        """
        result = run(['sweep', '--channel', self.channel_path, '--l-from', '2', '--l-to', '3'])
        self.assertEqual([row['l'] for row in result.payload['rows']], [2, 3])


class EnvelopeTestCase(CommandTestCase):
    """
    Test suite for exit codes and reproducibility shared by every command.
    """

    def test_byte_identical_repeats(self):
        """
        Identical argv and files give identical stdout.
        """
        argv = ['verify', '--channel', self.channel_path, '--k', '2', '--check', 'appendix-b']
        self.assertEqual(run(argv).output, run(argv).output)

    def test_digest_tracks_parameters(self):
        """
        Changing a parameter changes the inputs digest.
        """
        base = ['compute', '--channel', self.channel_path, '--method', 'exact']
        self.assertNotEqual(run(base + ['--k', '1']).inputs_digest, run(base + ['--k', '2']).inputs_digest)

    def test_usage_error(self):
        """
        Unknown choices and missing required flags exit 1.
        """
        self.assertEqual(run(['compute', '--channel', self.channel_path, '--k', '2', '--method', 'nope']).exit_code, 1)
        self.assertEqual(run(['verify', '--channel', self.channel_path]).exit_code, 1)
        self.assertEqual(run([]).exit_code, 1)

    def test_missing_file(self):
        """
        A channel file that does not exist exits 1 without output.
        """
        result = run(['compute', '--channel', self.path('missing.json'), '--k', '1'])
        self.assertEqual(result.exit_code, 1)
        self.assertEqual(result.output, '')

    def test_invalid_channel_file(self):
        """
        A file whose rows do not sum to 1 is re-validated and rejected.
        """
        path = self.write('bad.json', {'x': 1, 'y': 2, 'rows': [[0.5, 0.6]]})
        self.assertEqual(run(['compute', '--channel', path, '--k', '1']).exit_code, 1)

    def test_seed_only_moves_sampling_paths(self):
        """
        --seed changes nothing, digest included, outside mc-rounding and random generation.
        """
        for argv in (
            ['compute', '--channel', self.channel_path, '--k', '2', '--method', 'exact'],
            ['compute', '--channel', self.channel_path, '--k', '2', '--method', 'ns-lp'],
            ['generate', '--family', 'bsc', '--p', '0.1'],
        ):
            with self.subTest(argv=argv):
                self.assertEqual(run(argv + ['--seed', '0']).output, run(argv + ['--seed', '7']).output)
        sampled = ['compute', '--channel', self.channel_path, '--k', '2', '--method', 'mc-rounding', '--trials', '200']
        first, other = run(sampled + ['--seed', '0']), run(sampled + ['--seed', '7'])
        self.assertNotEqual(first.payload, other.payload)
        self.assertNotEqual(first.inputs_digest, other.inputs_digest)

    def test_negative_seed(self):
        """
        A negative seed is a valid integer seed.
        """
        argv = ['generate', '--family', 'random', '--x-size', '2', '--y-size', '3', '--seed', '-1']
        result = run(argv)
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(run(argv).output, result.output)
