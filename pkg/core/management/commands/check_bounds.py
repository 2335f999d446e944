# core/management/commands/check_bounds.py

from dataclasses import replace

import numpy as np
from django.core.management.base import CommandError

from core.classic_bounds import theorem1_bounds, two_point_bounds
from core.management.base import EXIT_INVALID, JensenCommand
from core.refined_bounds import theorem2_bounds, theorem4_endpoint_bound, theorem6_uniform_q_bounds
from core.serializers import BoundReportSerializer, report_document

THEOREMS = ('1', '2', '4', '5', '6')


def _two_point(inst, tol):
    if inst.n != 2:
        raise CommandError(f"theorem 5 needs a two-point instance, got n = {inst.n}", returncode=EXIT_INVALID)
    r = inst.rearrangement()
    a, b = r.x_sorted
    return two_point_bounds(inst.f, a, b, r.p_bar[0], tol)


BOUNDS = {
    '1': theorem1_bounds,
    '2': theorem2_bounds,
    '4': lambda inst, tol: theorem4_endpoint_bound(inst.f, inst.interval.a, inst.interval.b, inst.x, inst.p, tol),
    '5': _two_point,
    '6': lambda inst, tol: theorem6_uniform_q_bounds(inst.f, inst.x, inst.p, tol),
}


class Command(JensenCommand):
    help = 'Check a two-sided bound on J(p): ratio sandwich (1), prefix ratios (2), endpoints (4), two points (5), uniform q (6)'

    def add_arguments(self, parser):
        parser.add_argument('file', help="Instance file (JSON); '-' reads stdin")
        parser.add_argument('--theorem', default='1', help=f"One of {', '.join(THEOREMS)} (default: 1)")
        super().add_arguments(parser)

    def run(self, **options):
        theorem = str(options['theorem']).removeprefix('thm')
        if theorem not in BOUNDS:
            raise CommandError(f"unknown theorem '{options['theorem']}', expected one of {', '.join(THEOREMS)}",
                               returncode=EXIT_INVALID)
        inst = self.load_instance(options['file'])
        tol = self.tolerance(options)
        report = BOUNDS[theorem](inst, tol)
        if theorem == '6' and not np.allclose(inst.q.array, 1.0 / inst.n):
            report = replace(report, notes=report.notes + ('q from the file is ignored',))

        document = report_document(self.command_name, report.verdict,
                                   {'report': BoundReportSerializer(report).data}, instance=inst, tolerance=tol)
        self.emit(document, self.report_lines(report))
        self.conclude(report.verdict, f"{report.theorem} violated: worst slack {report.worst_slack!r}")
