import io
import json
import logging
from dataclasses import dataclass

from django.core.management import call_command
from django.core.management.base import CommandError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CommandResult:
    """
    One command run: the envelope fields (None for CSV output or on failure
    before anything was printed), the exit code and the raw stdout.
    """
    command: str
    inputs_digest: str
    payload: dict
    exit_code: int
    output: str


def run(argv):
    """
    Runs `argv` (command name first) in-process, the way manage.py would,
    and returns its CommandResult instead of exiting.
    """
    if not argv:
        return CommandResult(command=None, inputs_digest=None, payload=None, exit_code=1, output='')

    name, *rest = argv
    stdout = io.StringIO()
    exit_code = 0
    try:
        call_command(name, *rest, stdout=stdout, stderr=io.StringIO())
    except CommandError as exc:
        exit_code = exc.returncode
        logger.info("%s exited with %s: %s", name, exit_code, exc)

    output = stdout.getvalue()
    envelope = {}
    if output.lstrip().startswith('{'):
        try:
            envelope = json.loads(output)
        except json.JSONDecodeError:
            logger.warning("%s printed output that is not JSON", name)
    return CommandResult(
        command=envelope.get('command', name),
        inputs_digest=envelope.get('inputs_digest'),
        payload=envelope.get('payload'),
        exit_code=exit_code,
        output=output,
    )
