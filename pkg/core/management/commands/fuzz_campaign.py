# core/management/commands/fuzz_campaign.py

import time

from django.core.management.base import CommandError

from core.exceptions import InputError
from core.management.base import EXIT_INVALID, JensenCommand
from core.oracle import WEIGHT_MODES, FuzzConfig, equality_witness_suite, run_campaign
from core.serializers import CampaignSummarySerializer, report_document
from core.tolerance import VERIFIED, VIOLATED


class Command(JensenCommand):
    help = 'Run a seeded random campaign over the selected bounds and refinements'

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, default=None, help='Campaign seed (default: settings JENSEN FUZZ SEED)')
        parser.add_argument('--trials', type=int, default=None, help='Number of trials (default: settings)')
        parser.add_argument('--theorems', default='thm1',
                            help='Comma-separated tags: thm1..thm9, eq32 (default: thm1)')
        parser.add_argument('--mode', default=WEIGHT_MODES[0], help=f"Weight mode: {', '.join(WEIGHT_MODES)}")
        parser.add_argument('--n-min', type=int, default=None, help='Smallest n (default: settings)')
        parser.add_argument('--n-max', type=int, default=None, help='Largest n (default: settings)')
        parser.add_argument('--functions', default=None, help='Comma-separated catalog entries (default: all)')
        parser.add_argument('--workers', type=int, default=None, help='Worker threads (default: settings)')
        parser.add_argument('--witnesses', action='store_true',
                            help='Also run the equality-witness suite for f = x^2, phi = d^2')
        super().add_arguments(parser)

    def run(self, **options):
        start_time = time.time()
        tol = self.tolerance(options)
        try:
            cfg = FuzzConfig.from_settings(
                seed=options['seed'],
                trials=options['trials'],
                n_min=options['n_min'],
                n_max=options['n_max'],
                weight_mode=options['mode'],
                functions=tuple(name.strip() for name in options['functions'].split(',')) if options['functions'] else None,
                tolerance=tol,
            )
            summary = run_campaign(cfg, options['theorems'].split(','), workers=options['workers'])
        except InputError as exc:
            raise CommandError(str(exc), returncode=EXIT_INVALID)

        payload = {'summary': CampaignSummarySerializer(summary).data}
        passed = summary.passed
        if options['witnesses']:
            witnesses = equality_witness_suite(tol=tol)
            payload['witnesses'] = {
                'residuals': witnesses.residuals,
                'slacks': witnesses.slacks,
                'checks': witnesses.checks,
                'passed': witnesses.passed,
            }
            passed = passed and witnesses.passed
        verdict = VERIFIED if passed else VIOLATED

        elapsed = time.time() - start_time
        lines = [
            (self.style.SUCCESS, '=' * 60),
            (self.style.SUCCESS, f'Campaign seed={cfg.seed} trials={summary.trials} mode={cfg.weight_mode}'),
            (self.style.SUCCESS, '=' * 60),
        ]
        for check, stats in summary.stats.items():
            lines.append((None, f'   • {check}: {stats.count} checked, min slack/scale {stats.min_normalized:.3e}, '
                                f'median {stats.median_normalized:.3e}'))
        for tag, count in summary.skipped.items():
            if count:
                lines.append((self.style.WARNING, f'   ⓘ {tag}: {count} trial(s) inadmissible'))
        for violation in summary.violations[:10]:
            lines.append((self.style.ERROR, f'   ✗ {violation.check} at index {violation.index}: '
                                            f'slack {violation.slack!r} (scale {violation.scale!r})'))
        if options['witnesses']:
            for name, ok in payload['witnesses']['checks'].items():
                lines.append((self.style.SUCCESS if ok else self.style.ERROR, f'   {"✓" if ok else "✗"} {name}'))
        lines.append((self.style.SUCCESS if passed else self.style.ERROR,
                      f'{"✓" if passed else "✗"} {len(summary.violations)} violation(s) in {elapsed:.1f}s'))

        self.emit(report_document(self.command_name, verdict, payload, seed=cfg.seed, tolerance=tol), lines)
        self.conclude(verdict, f"{len(summary.violations)} violation(s) in campaign seed={cfg.seed}")
