# core/management/base.py - shared plumbing for the jensenlab management commands

import logging
import sys
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from core.exceptions import JensenError, PreconditionError
from core.serializers import parse_instance_document, render_json, report_document
from core.tolerance import INADMISSIBLE, VIOLATED, Tolerance

logger = logging.getLogger(__name__)

EXIT_VIOLATED = 1
EXIT_INVALID = 2


class JensenCommand(BaseCommand):
    """
    Exit codes: 0 verified, 1 inequality violated, 2 invalid input or an
    instance the theorem does not admit. Subclasses implement run().
    """

    def add_arguments(self, parser):
        parser.add_argument('--tol-abs', type=float, default=None,
                            help='Absolute slack tolerance (default: settings JENSEN TOLERANCE ATOL)')
        parser.add_argument('--tol-rel', type=float, default=None,
                            help='Relative slack tolerance (default: settings JENSEN TOLERANCE RTOL)')
        parser.add_argument('--format', choices=('text', 'json'), default='text',
                            help='Output format (default: text)')

    def handle(self, *args, **options):
        self.output_format = options.get('format') or 'text'
        try:
            self.run(**options)
        except PreconditionError as exc:
            self.emit(report_document(self.command_name, INADMISSIBLE, {'violations': exc.violations,
                                                                        'message': str(exc)}),
                      [(self.style.ERROR, f'✗ inadmissible: {exc}')])
            raise CommandError(str(exc), returncode=EXIT_INVALID)
        except JensenError as exc:
            raise CommandError(str(exc), returncode=EXIT_INVALID)

    def run(self, **options):
        raise NotImplementedError

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def tolerance(self, options) -> Tolerance:
        default = Tolerance.default()
        atol = options.get('tol_abs')
        rtol = options.get('tol_rel')
        tol = Tolerance(
            atol=default.atol if atol is None else atol,
            rtol=default.rtol if rtol is None else rtol,
        )
        if tol.atol < 0 or tol.rtol < 0:
            raise CommandError(f"tolerances must be >= 0, got {tol.as_dict()}", returncode=EXIT_INVALID)
        return tol

    def load_instance(self, path):
        """Read an InstanceFile from a path ('-' reads stdin)."""
        try:
            text = sys.stdin.read() if path == '-' else Path(path).read_text()
        except OSError as exc:
            raise CommandError(f"cannot read {path}: {exc.strerror}", returncode=EXIT_INVALID)
        try:
            return parse_instance_document(text)
        except JensenError as exc:
            raise CommandError(f"{path}: {exc}", returncode=EXIT_INVALID)

    def emit(self, document, lines):
        """JSON document on stdout, or the styled text lines."""
        if self.output_format == 'json':
            self.stdout.write(render_json(document))
            return
        for style, text in lines:
            self.stdout.write(style(text) if style else text)

    def conclude(self, verdict, message):
        if verdict == VIOLATED:
            logger.warning(f"{self.command_name}: {message}")
            raise CommandError(message, returncode=EXIT_VIOLATED)

    def report_lines(self, report):
        """Text rendering shared by BoundReport and RefinementTerms."""
        style = self.style.SUCCESS if report.verified else self.style.ERROR
        lines = [(self.style.MIGRATE_HEADING, f'{report.theorem}')]
        if hasattr(report, 'gap'):
            lines.append((None, f'   {report.gap.name} = {report.gap.value!r}'))
            lines.extend((None, f'   + {t.name} = {t.value!r}') for t in report.terms)
            lines.append((None, f'   slack = {report.slack!r}'))
        else:
            lines.extend((None, f'   {t.name} = {t.value!r}') for t in report.terms)
            lines.append((None, f'   slacks = {list(report.slacks)!r}'))
        lines.extend((self.style.WARNING, f'   ⓘ {note}') for note in report.notes)
        marker = '✓' if report.verified else '✗'
        lines.append((style, f'   {marker} {report.verdict}'))
        return lines
