# core/management/commands/certify_modulus.py

from django.core.management.base import CommandError

from core.catalog import ModulusSpec, preset
from core.exceptions import InputError
from core.management.base import EXIT_INVALID, JensenCommand
from core.serializers import CertificateSerializer, report_document
from core.tolerance import VERIFIED, VIOLATED
from core.uniform_convex import (
    CertGrid,
    certify_uniform_convexity,
    estimate_modulus_coefficient,
    gradient_inequality_check,
)


class Command(JensenCommand):
    help = 'Certify a uniform-convexity modulus on a grid and/or estimate its best power-type coefficient'

    def add_arguments(self, parser):
        parser.add_argument('file', nargs='?', help="Instance file (JSON); '-' reads stdin")
        parser.add_argument('--preset', help='Catalog entry to use instead of a file')
        parser.add_argument('--grid', nargs=3, type=int, metavar=('X', 'Y', 'T'),
                            help='Grid points per axis (default: settings JENSEN CERT_GRID)')
        parser.add_argument('--exponent', type=float,
                            help='Estimate the largest coefficient c with phi(d) = c*d^exponent')
        parser.add_argument('--coefficient', type=float,
                            help='Certify phi(d) = coefficient*d^exponent instead of the file/catalog modulus')
        parser.add_argument('--gradient', action='store_true',
                            help='Also check the first-order (gradient) form of the inequality')
        super().add_arguments(parser)

    def run(self, **options):
        f, interval, phi = self._target(options)
        tol = self.tolerance(options)
        grid = CertGrid(*options['grid']) if options['grid'] else CertGrid.default()

        if options['coefficient'] is not None:
            phi = ModulusSpec(options['coefficient'], options['exponent'] or 2.0)

        payload = {'function': f.as_dict(), 'interval': interval.as_list(), 'grid': list(grid.as_tuple())}
        lines = [(self.style.MIGRATE_HEADING, f'{f.label} on [{interval.a!r}, {interval.b!r}], grid {grid.as_tuple()}')]
        verdict = VERIFIED

        if options['exponent'] is not None:
            c = estimate_modulus_coefficient(f, options['exponent'], interval, grid)
            payload['estimate'] = {'exponent': options['exponent'], 'coefficient': c}
            lines.append((None, f'   estimated c = {c!r} for d^{options["exponent"]:g}'))

        certificates = []
        if phi is not None:
            certificates.append(certify_uniform_convexity(f, phi, interval, grid, tol))
            if options['gradient']:
                certificates.append(gradient_inequality_check(f, phi, interval, grid, tol))
        elif options['exponent'] is None:
            raise CommandError("nothing to do: give a modulus (file, catalog or --coefficient) or --exponent",
                               returncode=EXIT_INVALID)

        for certificate in certificates:
            style = self.style.SUCCESS if certificate.passed else self.style.ERROR
            marker = '✓' if certificate.passed else '✗'
            lines.append((style, f'   {marker} {certificate.kind} {certificate.modulus}: '
                                 f'worst slack {certificate.worst_slack!r} at {certificate.worst_at}'))
            if not certificate.passed:
                verdict = VIOLATED
        payload['certificates'] = CertificateSerializer(certificates, many=True).data

        self.emit(report_document(self.command_name, verdict, payload, tolerance=tol), lines)
        self.conclude(verdict, f"{f.label}: modulus not certified on the grid")

    def _target(self, options):
        if options['preset'] and options['file']:
            raise CommandError("give either a file or --preset, not both", returncode=EXIT_INVALID)
        if options['preset']:
            try:
                entry = preset(options['preset'])
            except InputError as exc:
                raise CommandError(str(exc), returncode=EXIT_INVALID)
            return entry.function, entry.interval, entry.modulus
        if not options['file']:
            raise CommandError("give an instance file or --preset", returncode=EXIT_INVALID)
        inst = self.load_instance(options['file'])
        return inst.f, inst.interval, inst.phi
