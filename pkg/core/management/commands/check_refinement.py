# core/management/commands/check_refinement.py

from django.core.management.base import CommandError

from core.management.base import EXIT_INVALID, JensenCommand
from core.serializers import RefinementReportSerializer, report_document
from core.tolerance import VERIFIED, VIOLATED
from core.uniform_convex import (
    eq32_lower_bound,
    sy_chain_bound,
    thm7_lower_refinement,
    thm7_n2_specials,
    thm7_upper_refinement,
    thm8_merged_bound,
    thm9_relabelled,
)

THEOREMS = ('3', '7', '8', '9', 'eq32')


class Command(JensenCommand):
    help = 'Check a uniform-convexity refinement: chained (3), ratio (7), merged (8), two-point (9), pointwise (eq32)'

    def add_arguments(self, parser):
        parser.add_argument('file', help="Instance file (JSON) with a phi entry; '-' reads stdin")
        parser.add_argument('--theorem', default='7', help=f"One of {', '.join(THEOREMS)} (default: 7)")
        parser.add_argument('--no-certify', action='store_true',
                            help='Skip the grid certification of (f, phi)')
        parser.add_argument('--rearrange', action='store_true',
                            help='Sort the points (with their weights) before the merged bound')
        super().add_arguments(parser)

    def run(self, **options):
        theorem = str(options['theorem']).removeprefix('thm')
        if theorem not in THEOREMS:
            raise CommandError(f"unknown theorem '{options['theorem']}', expected one of {', '.join(THEOREMS)}",
                               returncode=EXIT_INVALID)
        inst = self.load_instance(options['file'])
        if inst.phi is None:
            raise CommandError("refinements need a 'phi' entry in the instance file", returncode=EXIT_INVALID)
        tol = self.tolerance(options)
        certify = not options['no_certify']
        reports = self._reports(theorem, inst, tol, certify, options['rearrange'])

        verdict = VERIFIED if all(r.verified for r in reports) else VIOLATED
        document = report_document(
            self.command_name,
            verdict,
            {'reports': RefinementReportSerializer(reports, many=True).data, 'certified': certify},
            instance=inst,
            tolerance=tol,
        )
        lines = []
        for report in reports:
            lines.extend(self.report_lines(report))
        self.emit(document, lines)
        worst = min(r.slack for r in reports)
        self.conclude(verdict, f"refinement violated: worst slack {worst!r}")

    def _reports(self, theorem, inst, tol, certify, rearrange):
        if theorem == 'eq32':
            return [eq32_lower_bound(inst, tol, certify)]
        if theorem == '3':
            return [sy_chain_bound(inst, tol, certify)]
        if theorem == '7':
            reports = [
                thm7_lower_refinement(inst, tol, certify),
                thm7_upper_refinement(inst, tol, certify),
                thm7_upper_refinement(inst, tol, certify, normalized=True),
            ]
            if inst.n == 2:
                specials = thm7_n2_specials(inst.f, inst.phi, inst.x[0], inst.x[1], inst.p[0], inst.q[0],
                                            tol, certify)
                reports.extend([specials.lower, specials.upper, specials.lower_half, specials.upper_half])
            return reports
        if theorem == '8':
            return [thm8_merged_bound(inst.rearranged() if rearrange else inst, tol, certify)]
        if inst.n != 2:
            raise CommandError(f"theorem 9 needs a two-point instance, got n = {inst.n}", returncode=EXIT_INVALID)
        r = inst.rearrangement()
        a, b = r.x_sorted
        return [thm9_relabelled(inst.f, inst.phi, a, b, r.p_bar[0], r.q_bar[0], tol, certify)]
