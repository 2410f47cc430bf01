import csv
import io
import logging
from dataclasses import dataclass, field

from django.core.management.base import BaseCommand, CommandError

from channel_app.api.utils import dumps, inputs_digest, load_channel
from channel_app.conf import oneshot_setting
from channel_app.exceptions import InputError, OneshotError

logger = logging.getLogger(__name__)

# Options every Django command carries; they never enter the inputs digest
DJANGO_OPTIONS = frozenset({
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color',
    'skip_checks', 'stdout', 'stderr',
})


@dataclass
class Outcome:
    """
    What a command produced: the JSON payload, the file contents it read (for
    the digest) and whether every requested check passed. `table` holds the
    rows for CSV output; `unused` names options this run ignored, which stay
    out of the digest.
    """
    payload: dict
    blobs: list = field(default_factory=list)
    passed: bool = True
    table: list = None
    columns: tuple = ()
    unused: tuple = ()


class OneshotCommand(BaseCommand):
    """
    Base class for the oneshot commands.

    Subclasses implement `compute(options)` returning an Outcome. Library
    errors become CommandError with exit code 1 (input) or 2 (numerical);
    failed checks print the report and exit 2.
    """
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        """
        Usage errors exit with code 1 rather than argparse's 2.
        """
        parser = super().create_parser(prog_name, subcommand, **kwargs)

        def error(message):
            if parser.called_from_command_line:
                parser.print_usage(self.stderr)
                parser.exit(1, f"{parser.prog}: error: {message}\n")
            raise CommandError(f"Error: {message}", returncode=1)

        parser.error = error
        return parser

    def add_channel_argument(self, parser, required=True):
        parser.add_argument('--channel', required=required, help='channel JSON file')

    def add_k_argument(self, parser, required=True):
        parser.add_argument('--k', type=int, required=required, help='number of messages')

    def load_channel(self, options, blobs):
        if not options.get('channel'):
            raise InputError("--channel is required")
        channel, raw = load_channel(options['channel'])
        blobs.append(raw)
        return channel

    @staticmethod
    def require(options, *names):
        """
        Raises InputError naming the first missing option.
        """
        for name in names:
            if options.get(name) is None:
                raise InputError(f"--{name.replace('_', '-')} is required here")

    @staticmethod
    def setting(options, name, key):
        return oneshot_setting(key, options.get(name))

    def compute(self, options):
        raise NotImplementedError('subclasses of OneshotCommand must provide a compute() method')

    def render(self, outcome, options):
        """
        The JSON envelope, or the bare table when CSV output was requested.
        """
        if options.get('format') == 'csv' and outcome.table is not None:
            return self.render_csv(outcome)
        skipped = DJANGO_OPTIONS.union(outcome.unused)
        params = {name: value for name, value in options.items() if name not in skipped}
        return dumps({
            'command': self.command_name,
            'inputs_digest': inputs_digest(params, *outcome.blobs),
            'payload': outcome.payload,
        })

    @staticmethod
    def render_csv(outcome):
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=outcome.columns, extrasaction='ignore', lineterminator='\n')
        writer.writeheader()
        writer.writerows(outcome.table)
        return buffer.getvalue().rstrip('\n')

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def handle(self, *args, **options):
        logger.info("%s started", self.command_name)
        try:
            outcome = self.compute(options)
        except OneshotError as exc:
            logger.error("%s failed: %s", self.command_name, exc)
            raise CommandError(str(exc), returncode=exc.exit_code) from exc

        self.stdout.write(self.render(outcome, options))
        if not outcome.passed:
            raise CommandError(f"{self.command_name}: a requested check failed", returncode=2)
        logger.info("%s finished", self.command_name)
