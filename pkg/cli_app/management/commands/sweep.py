from cli_app.management.base import OneshotCommand, Outcome
from coding_app import bounds
from coding_app.api.serializers import SweepRowSerializer

COLUMNS = ('l', 's_method', 's_value', 's_ns', 'method')


class Command(OneshotCommand):
    help = 'Tabulate S(W, l) (or S^greedy beyond the enumeration cap) and S^NS(W, l) over a range of l.'

    def add_arguments(self, parser):
        self.add_channel_argument(parser)
        parser.add_argument('--l-from', type=int, default=1)
        parser.add_argument('--l-to', type=int, default=None, help='default |X|')
        parser.add_argument('--enum-cap', type=int, default=None)
        parser.add_argument('--format', choices=('json', 'csv'), default='json')

    def compute(self, options):
        blobs = []
        channel = self.load_channel(options, blobs)
        rows = bounds.sweep(
            channel, options['l_from'], options['l_to'], enumeration_cap=options['enum_cap']
        )
        data = SweepRowSerializer(rows, many=True).data
        return Outcome(payload={'rows': data}, blobs=blobs, table=data, columns=COLUMNS)
