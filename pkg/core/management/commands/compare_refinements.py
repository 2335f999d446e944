# core/management/commands/compare_refinements.py

import numpy as np

from core.management.base import JensenCommand
from core.oracle import tightness_ranking
from core.serializers import ComparatorSerializer, TightnessRankingSerializer, report_document
from core.tolerance import VERIFIED
from core.uniform_convex import refinement_comparator_n2


class Command(JensenCommand):
    help = 'Rank the lower bounds on J(p) implied by each applicable refinement'

    def add_arguments(self, parser):
        parser.add_argument('file', help="Instance file (JSON) with a phi entry; '-' reads stdin")
        parser.add_argument('--no-certify', action='store_true', help='Skip the grid certification of (f, phi)')
        super().add_arguments(parser)

    def run(self, **options):
        inst = self.load_instance(options['file'])
        tol = self.tolerance(options)
        ranking = tightness_ranking(inst, tol, certify=not options['no_certify'])
        payload = {'ranking': TightnessRankingSerializer(ranking).data}

        lines = [(self.style.MIGRATE_HEADING, f'J(p) = {ranking.gap!r}')]
        for position, entry in enumerate(ranking.ranked, start=1):
            style = self.style.SUCCESS if entry.name in ranking.tightest else None
            lines.append((style, f'   {position}. {entry.name}: {entry.lower_bound!r} (refinement {entry.refinement!r})'))
        for name, reason in ranking.skipped.items():
            lines.append((self.style.WARNING, f'   ⓘ {name} skipped: {reason}'))

        if inst.n == 2 and inst.phi is not None and np.allclose(inst.q.array, 0.5):
            r = inst.rearrangement()
            p1 = r.p_bar[0]
            a, b = r.x_sorted
            if p1 > 0.5:
                p1 = r.p_bar[1]
            if p1 > 0.0:
                comparison = refinement_comparator_n2(inst.f, inst.phi, a, b, p1, tol)
                payload['two_point'] = ComparatorSerializer(comparison).data
                lines.append((None, f'   pointwise {comparison.rhs_pointwise!r} vs two-point '
                                    f'{comparison.rhs_two_point!r}: {comparison.stronger}'))

        self.emit(report_document(self.command_name, VERIFIED, payload, instance=inst, tolerance=tol), lines)
