"""Command line: ``python -m autovocab <subcommand> [flags]``.

Subcommands are Django management commands; this module maps their hyphenated
names, sets Django up and turns failures into exit statuses (1 usage, 2 data).
"""
from __future__ import annotations

import logging
import os
import sys
from typing import Optional, Sequence, TextIO

SUBCOMMANDS = {
    'gen-scene': 'gen_scene',
    'caption-points': 'caption_points',
    'tags': 'tags',
    'segment': 'segment',
    'tpss': 'tpss',
    'map': 'map_vocabulary',
    'eval': 'evaluate',
    'train-smap': 'train_smap',
    'export-ply': 'export_ply',
}

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

logger = logging.getLogger(__name__)


def usage() -> str:
    names = ' | '.join(SUBCOMMANDS)
    return f'usage: python -m autovocab <subcommand> [flags]\n  subcommands: {names}\n'


def setup() -> None:
    os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'config.settings')
    import django
    django.setup()


def run(argv: Sequence[str], stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(argv)
    if not argv or argv[0] in ('-h', '--help'):
        stderr.write(usage())
        return EXIT_USAGE if not argv else EXIT_OK
    name = SUBCOMMANDS.get(argv[0])
    if name is None:
        stderr.write(f'usage_error: unknown subcommand {argv[0]!r}\n')
        stderr.write(usage())
        return EXIT_USAGE

    setup()
    from django.core.management import call_command
    from django.core.management.base import CommandError

    from .exceptions import PipelineError

    try:
        call_command(name, *argv[1:], stdout=stdout, stderr=stderr)
    except CommandError as exc:
        stderr.write(f'usage_error: {exc}\n')
        return EXIT_USAGE
    except PipelineError as exc:
        stderr.write(f'{exc}\n')
        return exc.exit_code
    except OSError as exc:
        stderr.write(f'io_error: {exc}\n')
        return EXIT_DATA
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))
