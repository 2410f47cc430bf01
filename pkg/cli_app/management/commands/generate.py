from channel_app import channels
from channel_app.api.utils import channel_to_json, load_set_system, write_json_file
from cli_app.management.base import OneshotCommand, Outcome

FAMILIES = ('bsc', 'erasure', 'tightness', 'coverage', 'tensor', 'random')


class Command(OneshotCommand):
    help = 'Generate a channel file from one of the analytic or random families.'

    def add_arguments(self, parser):
        parser.add_argument('--family', required=True, choices=FAMILIES)
        parser.add_argument('--p', type=float, help='crossover probability (bsc)')
        parser.add_argument('--eps', type=float, help='erasure probability (erasure)')
        parser.add_argument('--k', type=int, help='messages (tightness)')
        parser.add_argument('--t', type=int, help='subset size (tightness)')
        self.add_channel_argument(parser, required=False)
        parser.add_argument('--n', type=int, help='number of channel uses (tensor)')
        parser.add_argument('--x-size', type=int, help='inputs (random) or sets (coverage)')
        parser.add_argument('--y-size', type=int, help='outputs (random) or ground set size (coverage)')
        parser.add_argument('--d', type=int, help='set size (coverage)')
        parser.add_argument('--set-system', help='set system JSON file (coverage)')
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--size-cap', type=int, default=None)
        parser.add_argument('-o', '--output', help='write the channel file here')

    def compute(self, options):
        blobs = []
        family = options['family']
        seed = self.setting(options, 'seed', 'DEFAULT_SEED')
        seeded = False

        if family == 'bsc':
            self.require(options, 'p')
            channel = channels.make_bsc(options['p'])
        elif family == 'erasure':
            self.require(options, 'eps')
            channel = channels.make_erasure(options['eps'])
        elif family == 'tightness':
            self.require(options, 'k', 't')
            channel = channels.make_tightness(options['k'], options['t'], size_cap=options['size_cap'])
        elif family == 'tensor':
            self.require(options, 'n')
            base = self.load_channel(options, blobs)
            channel = channels.tensor_power(base, options['n'], size_cap=options['size_cap'])
        elif family == 'random':
            self.require(options, 'x_size', 'y_size')
            channel = channels.random_channel(options['x_size'], options['y_size'], seed=seed)
            seeded = True
        else:  # coverage
            if options['set_system']:
                system, raw = load_set_system(options['set_system'])
                blobs.append(raw)
            else:
                self.require(options, 'x_size', 'y_size', 'd')
                system = channels.random_set_system(options['y_size'], options['x_size'], options['d'], seed=seed)
                seeded = True
            channel = channels.from_set_system(system)

        document = channel_to_json(channel)
        if options['output']:
            write_json_file(document, options['output'])
        return Outcome(
            payload={'family': family, 'channel': document},
            blobs=blobs,
            unused=() if seeded else ('seed',),
        )
