import json
import shutil
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

SQUARE = {'kind': 'square'}
D2 = {'coefficient': 1.0, 'exponent': 2.0}


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmpdir = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.tmpdir)

    def write(self, document, name='instance.json'):
        path = self.tmpdir / name
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return str(path)

    def call(self, name, *args):
        out = StringIO()
        call_command(name, *args, '--format', 'json', stdout=out)
        return json.loads(out.getvalue())

    def assertExits(self, code, name, *args):
        with self.assertRaises(CommandError) as ctx:
            call_command(name, *args, '--format', 'json', stdout=StringIO())
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class EvalInstanceCommandTests(CommandTestCase):
    def test_two_point_instance(self):
        path = self.write({'x': [0, 1], 'p': [0.2, 0.8], 'f': SQUARE, 'interval': [0, 1]})
        document = self.call('eval_instance', path)
        self.assertEqual(document['tool'], 'jensenlab')
        self.assertEqual(document['command'], 'eval_instance')
        self.assertAlmostEqual(document['J(p)'], 0.16)
        self.assertAlmostEqual(document['J(q)'], 0.25)
        self.assertAlmostEqual(document['ratios']['m'], 0.4)
        self.assertAlmostEqual(document['ratios']['M'], 1.6)

    def test_weights_default_to_uniform(self):
        path = self.write({'x': [0, 1, 2], 'f': SQUARE, 'interval': [0, 2]})
        document = self.call('eval_instance', path)
        self.assertAlmostEqual(document['J(p)'], 2.0 / 3.0)
        self.assertEqual(document['instance']['p'], document['instance']['q'])

    def test_weights_must_sum_to_one(self):
        path = self.write({'x': [0, 1], 'p': [0.2, 0.7], 'f': SQUARE, 'interval': [0, 1]})
        error = self.assertExits(2, 'eval_instance', path)
        self.assertIn('p', str(error))

    def test_unknown_key(self):
        path = self.write({'x': [0, 1], 'f': SQUARE, 'interval': [0, 1], 'weights': [0.5, 0.5]})
        error = self.assertExits(2, 'eval_instance', path)
        self.assertIn('weights', str(error))

    def test_malformed_json(self):
        path = self.write('{"x": [0, 1],\n "f": }')
        error = self.assertExits(2, 'eval_instance', path)
        self.assertIn('line 2', str(error))

    def test_missing_file(self):
        self.assertExits(2, 'eval_instance', str(self.tmpdir / 'absent.json'))


class CheckBoundsCommandTests(CommandTestCase):
    def test_ratio_sandwich(self):
        path = self.write({'x': [0, 1, 2], 'p': [0.4, 0.1, 0.5], 'f': SQUARE, 'interval': [0, 2]})
        document = self.call('check_bounds', path, '--theorem', '1')
        self.assertEqual(document['verdict'], 'verified')
        report = document['report']
        self.assertEqual(report['theorem'], 'thm1')
        self.assertAlmostEqual(report['terms'][1]['value'], 0.89)

    def test_prefix_ratios(self):
        path = self.write({'x': [0, 1, 2], 'p': [0.4, 0.1, 0.5], 'f': SQUARE, 'interval': [0, 2]})
        document = self.call('check_bounds', path, '--theorem', 'thm2')
        self.assertAlmostEqual(document['report']['extras']['m_star'], 0.75)
        self.assertAlmostEqual(document['report']['extras']['M_star'], 1.5)

    def test_inadmissible_instance(self):
        path = self.write({'x': [0, 1, 2], 'p': [0.5, 0.5, 0.0], 'q': [1.0, 0.0, 0.0],
                           'f': SQUARE, 'interval': [0, 2]})
        out = StringIO()
        with self.assertRaises(CommandError) as ctx:
            call_command('check_bounds', path, '--theorem', '2', '--format', 'json', stdout=out)
        self.assertEqual(ctx.exception.returncode, 2)
        document = json.loads(out.getvalue())
        self.assertEqual(document['verdict'], 'inadmissible')
        self.assertTrue(document['violations'])

    def test_unknown_theorem(self):
        path = self.write({'x': [0, 1], 'f': SQUARE, 'interval': [0, 1]})
        self.assertExits(2, 'check_bounds', path, '--theorem', '9')

    def test_two_point_form_needs_two_points(self):
        path = self.write({'x': [0, 1, 2], 'f': SQUARE, 'interval': [0, 2]})
        self.assertExits(2, 'check_bounds', path, '--theorem', '5')


class CheckRefinementCommandTests(CommandTestCase):
    def instance(self, phi=D2, **overrides):
        document = {'x': [0, 1], 'p': [0.2, 0.8], 'q': [0.5, 0.5], 'f': SQUARE, 'interval': [0, 1]}
        if phi is not None:
            document['phi'] = phi
        document.update(overrides)
        return self.write(document)

    def test_ratio_refinements(self):
        document = self.call('check_refinement', self.instance())
        self.assertEqual(document['verdict'], 'verified')
        theorems = [report['theorem'] for report in document['reports']]
        self.assertEqual(theorems[:3], ['thm7_lower', 'thm7_upper', 'thm7_upper_normalized'])
        self.assertEqual(len(theorems), 7)
        self.assertTrue(document['certified'])

    def test_merged_bound(self):
        document = self.call('check_refinement', self.instance(), '--theorem', '8')
        report = document['reports'][0]
        self.assertAlmostEqual(report['gap']['value'], 0.06)
        self.assertAlmostEqual(report['total'], 0.06)

    def test_modulus_required(self):
        self.assertExits(2, 'check_refinement', self.instance(phi=None))

    def test_uncertified_modulus_refused(self):
        self.assertExits(2, 'check_refinement', self.instance(phi={'coefficient': 2.0}), '--theorem', 'eq32')

    def test_skipping_certification_reports_the_violation(self):
        path = self.instance(phi={'coefficient': 2.0}, p=[0.3, 0.7])
        self.assertExits(1, 'check_refinement', path, '--theorem', 'eq32', '--no-certify')

    def test_two_point_refinement(self):
        path = self.instance(p=[0.25, 0.75])
        document = self.call('check_refinement', path, '--theorem', '9')
        report = document['reports'][0]
        self.assertAlmostEqual(report['total'], 0.0625)
        self.assertTrue(report['extras']['at_best_p1'])


class CertifyModulusCommandTests(CommandTestCase):
    def test_catalog_entry(self):
        document = self.call('certify_modulus', '--preset', 'square', '--gradient')
        self.assertEqual(document['verdict'], 'verified')
        self.assertEqual([c['kind'] for c in document['certificates']], ['uniform_convexity', 'gradient'])

    def test_estimate(self):
        document = self.call('certify_modulus', '--preset', 'exp', '--exponent', '2', '--grid', '16', '16', '9')
        coefficient = document['estimate']['coefficient']
        self.assertGreaterEqual(coefficient, 0.5 - 1e-9)
        self.assertLessEqual(coefficient, 1.0)

    def test_coefficient_too_large(self):
        self.assertExits(1, 'certify_modulus', '--preset', 'square', '--coefficient', '2')

    def test_from_file(self):
        path = self.write({'x': [0, 1], 'f': SQUARE, 'phi': D2, 'interval': [-1, 2]})
        document = self.call('certify_modulus', path)
        self.assertTrue(document['certificates'][0]['passed'])

    def test_nothing_to_certify(self):
        self.assertExits(2, 'certify_modulus')
        self.assertExits(2, 'certify_modulus', '--preset', 'cosh')


class FuzzCampaignCommandTests(CommandTestCase):
    def test_small_campaign(self):
        document = self.call('fuzz_campaign', '--seed', '3', '--trials', '40', '--theorems', 'thm1,thm7',
                             '--workers', '1')
        self.assertEqual(document['verdict'], 'verified')
        self.assertEqual(document['seed'], 3)
        self.assertEqual(document['summary']['trials'], 40)
        self.assertEqual(document['summary']['violations'], [])

    def test_json_is_byte_identical_across_runs_and_workers(self):
        outputs = []
        for workers in ('1', '4', '4'):
            out = StringIO()
            call_command('fuzz_campaign', '--seed', '5', '--trials', '60', '--theorems', 'thm1,thm2,thm7,thm9',
                         '--workers', workers, '--format', 'json', stdout=out)
            outputs.append(out.getvalue())
        self.assertEqual(outputs[0], outputs[1])
        self.assertEqual(outputs[1], outputs[2])

    def test_unknown_tag(self):
        self.assertExits(2, 'fuzz_campaign', '--trials', '5', '--theorems', 'thm10')

    def test_unknown_mode(self):
        self.assertExits(2, 'fuzz_campaign', '--trials', '5', '--mode', 'gaussian')

    def test_negative_tolerance(self):
        self.assertExits(2, 'fuzz_campaign', '--trials', '5', '--tol-abs', '-1')


class CompareRefinementsCommandTests(CommandTestCase):
    def test_square_ties(self):
        path = self.write({'x': [0, 1], 'p': [0.25, 0.75], 'q': [0.5, 0.5], 'f': SQUARE, 'phi': D2,
                           'interval': [0, 1]})
        document = self.call('compare_refinements', path)
        self.assertEqual(document['two_point']['stronger'], 'tie')
        self.assertIn('thm9', document['ranking']['tightest'])
        self.assertAlmostEqual(document['ranking']['gap'], 0.1875)
