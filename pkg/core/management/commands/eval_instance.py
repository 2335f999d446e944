# core/management/commands/eval_instance.py

from core.classic_bounds import ratio_extremes
from core.functional import THM2, barycenter, jensen_functional, validate_instance
from core.management.base import JensenCommand
from core.refined_bounds import prefix_suffix_ratios
from core.serializers import report_document
from core.tolerance import VERIFIED


class Command(JensenCommand):
    help = 'Evaluate J(p), J(q), the barycenters and the ratio summaries of an instance file'

    def add_arguments(self, parser):
        parser.add_argument('file', help="Instance file (JSON); '-' reads stdin")
        super().add_arguments(parser)

    def run(self, **options):
        inst = self.load_instance(options['file'])
        tol = self.tolerance(options)
        payload = {
            'J(p)': jensen_functional(inst.f, inst.x, inst.p),
            'J(q)': jensen_functional(inst.f, inst.x, inst.q),
            'xbar_p': barycenter(inst.x, inst.p),
            'xbar_q': barycenter(inst.x, inst.q),
        }
        lines = [(self.style.MIGRATE_HEADING, f'{inst.f.label} on [{inst.interval.a!r}, {inst.interval.b!r}], n = {inst.n}')]
        lines.extend((None, f'   {key} = {value!r}') for key, value in payload.items())

        if inst.q.strictly_positive:
            ratios = ratio_extremes(inst.p, inst.q)
            payload['ratios'] = {'m': ratios.m, 'M': ratios.M,
                                 'argmin': list(ratios.argmin), 'argmax': list(ratios.argmax)}
            lines.append((None, f'   m = {ratios.m!r}, M = {ratios.M!r}'))

        if validate_instance(inst, THM2).admissible:
            summary = prefix_suffix_ratios(inst.rearrangement())
            payload['prefix_suffix'] = {
                'prefix': list(summary.prefix),
                'suffix': list(summary.suffix),
                'm_star': summary.m_star,
                'M_star': summary.M_star,
            }
            lines.append((None, f'   m* = {summary.m_star!r}, M* = {summary.M_star!r}'))

        self.emit(report_document(self.command_name, VERIFIED, payload, instance=inst, tolerance=tol), lines)
