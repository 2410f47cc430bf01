#!/usr/bin/env python
"""Command-line entry point: generators, solvers, verifiers and sweeps."""
import os
import sys


def main():
    """Run a oneshot management command (generate, compute, verify, sweep)."""
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    try:
        from django.core.management import execute_from_command_line
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Install the packages listed in "
            "requirements.txt into the active environment first."
        ) from exc
    execute_from_command_line(sys.argv)


if __name__ == '__main__':
    main()
