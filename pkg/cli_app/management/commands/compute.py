from channel_app.api.utils import deserialize, read_json_file
from cli_app.management.base import OneshotCommand, Outcome
from coding_app import coding, hypothesis_testing, metaconverse, rounding
from coding_app.api.serializers import (
    ChannelTestSerializer,
    CodeSerializer,
    DistributionSerializer,
    HypothesisInstanceSerializer,
    LPSolutionSerializer,
    NSBoxSerializer,
    RoundingReportSerializer,
)

METHODS = ('exact', 'greedy', 'ns-lp', 'mc-rounding', 'beta')

# Only mc-rounding draws random numbers
SAMPLING_OPTIONS = ('seed', 'trials')


class Command(OneshotCommand):
    help = 'Compute S, S^greedy, S^NS, a randomised rounding run or beta for a channel.'

    def add_arguments(self, parser):
        self.add_channel_argument(parser, required=False)
        self.add_k_argument(parser, required=False)
        parser.add_argument('--method', choices=METHODS, default='exact')
        parser.add_argument('--l', type=int, help='samples per code (mc-rounding, default k)')
        parser.add_argument('--trials', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--lazy', action='store_true', help='lazy greedy evaluation')
        parser.add_argument('--dump-box', action='store_true', help='include the non-signaling box (ns-lp)')
        parser.add_argument('--enum-cap', type=int, default=None)
        parser.add_argument('--dist-p', help='distribution file for P (beta)')
        parser.add_argument('--dist-q', help='distribution file for Q (beta)')
        parser.add_argument('--alpha', type=float, help='significance level (beta)')

    def compute(self, options):
        blobs = []
        method = options['method']
        if method == 'beta' and options['dist_p']:
            return self.distribution_beta(options, blobs)

        channel = self.load_channel(options, blobs)
        self.require(options, 'k')
        k = options['k']
        payload = {'method': method, 'k': k}

        if method == 'exact':
            value, code = coding.exact_opt(channel, k, enumeration_cap=options['enum_cap'])
            payload.update(value=value, code=CodeSerializer(code).data)
        elif method == 'greedy':
            value, code, trace = coding.greedy(channel, k, lazy=options['lazy'])
            payload.update(
                value=value,
                code=CodeSerializer(code).data,
                trace={'chain': [list(s) for s in trace.chain], 'gains': list(trace.gains)},
            )
        elif method == 'ns-lp':
            solution = metaconverse.ns_value(channel, k)
            payload.update(value=solution.value, solution=LPSolutionSerializer(solution).data)
            if options['dump_box']:
                payload['box'] = NSBoxSerializer(metaconverse.box_from_lp(solution, channel)).data
        elif method == 'mc-rounding':
            l = options['l'] or k
            seed = self.setting(options, 'seed', 'DEFAULT_SEED')
            trials = self.setting(options, 'trials', 'DEFAULT_TRIALS')
            solution = metaconverse.ns_value(channel, k)
            report = rounding.monte_carlo(channel, solution, l, trials=trials, seed=seed)
            code = rounding.sample_code(channel, solution, l, seed=seed)
            payload.update(
                value=report.mc_mean,
                report=RoundingReportSerializer(report).data,
                code=CodeSerializer(code).data,
            )
        else:
            solution = metaconverse.ns_value(channel, k)
            value, test = hypothesis_testing.max_nu_beta(channel, k, solution.p / k)
            payload.update(value=value, one_minus_ns=1.0 - solution.value, test=ChannelTestSerializer(test).data)
        unused = () if method == 'mc-rounding' else SAMPLING_OPTIONS
        return Outcome(payload=payload, blobs=blobs, unused=unused)

    def distribution_beta(self, options, blobs):
        """
        beta_alpha(P, Q) for two distribution files, by LP and by the threshold test.
        """
        self.require(options, 'dist_q', 'alpha')
        loaded = []
        for name in ('dist_p', 'dist_q'):
            data, raw = read_json_file(options[name])
            blobs.append(raw)
            loaded.append(deserialize(DistributionSerializer, data, label=f'distribution file {options[name]}'))
        p, q = loaded
        value, test = hypothesis_testing.beta(p, q, options['alpha'])
        threshold_value, _ = hypothesis_testing.neyman_pearson(p, q, options['alpha'])
        instance = hypothesis_testing.HypothesisInstance(p=p, q=q, alpha=options['alpha'], test=test, beta=value)
        payload = {
            'method': 'beta',
            'value': value,
            'threshold_value': threshold_value,
            'instance': HypothesisInstanceSerializer(instance.check()).data,
        }
        return Outcome(payload=payload, blobs=blobs, unused=SAMPLING_OPTIONS)
