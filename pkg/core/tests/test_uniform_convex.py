from django.test import SimpleTestCase

from core.catalog import ABS_POWER, EXP, SQUARE, FunctionSpec, Interval, ModulusSpec, preset
from core.exceptions import CertificationError, InputError, PreconditionError
from core.functional import Instance, WeightVector
from core.tolerance import VIOLATED
from core.uniform_convex import (
    CertGrid,
    certify_uniform_convexity,
    eq32_lower_bound,
    estimate_modulus_coefficient,
    gradient_inequality_check,
    refinement_comparator_n2,
    require_certified,
    sy_chain_bound,
    thm7_lower_refinement,
    thm7_n2_specials,
    thm7_upper_refinement,
    thm8_merged_bound,
    thm9_coefficient_scan,
    thm9_relabelled,
    thm9_two_point,
)

SQ = FunctionSpec(SQUARE)
D2 = ModulusSpec(1.0, 2.0)
D4_8 = ModulusSpec(0.125, 4.0)
SMALL_GRID = CertGrid(24, 24, 9)


class ShiftedModulus(ModulusSpec):
    """c d^r + 1: positive at 0."""

    def value(self, d):
        return super().value(d) + 1.0


def square_instance(x, p, q=None, phi=D2):
    return Instance.build(x, p, q, f=SQ, phi=phi)


class CertificationTests(SimpleTestCase):
    def test_square_identity_passes(self):
        certificate = certify_uniform_convexity(SQ, D2, Interval(-1.0, 2.0))
        self.assertTrue(certificate.passed)
        self.assertAlmostEqual(certificate.worst_slack, 0.0, places=12)
        self.assertEqual(certificate.grid, (64, 64, 17))

    def test_coefficient_too_large_fails(self):
        certificate = certify_uniform_convexity(SQ, ModulusSpec(2.0), Interval(0.0, 1.0), SMALL_GRID)
        self.assertFalse(certificate.passed)
        self.assertLess(certificate.worst_slack, 0.0)
        self.assertNotEqual(certificate.worst_at[0], certificate.worst_at[1])

    def test_coefficient_just_above_one_fails_for_square(self):
        certificate = certify_uniform_convexity(SQ, ModulusSpec(1.0 + 1e-6), Interval(0.0, 1.0))
        self.assertFalse(certificate.passed)
        self.assertAlmostEqual(certificate.worst_slack, -2.5e-7, places=12)
        self.assertEqual(certificate.worst_at[2], 0.5)
        with self.assertRaises(CertificationError):
            require_certified(SQ, ModulusSpec(1.0 + 1e-6), Interval(0.0, 1.0))

    def test_modulus_must_vanish_at_zero(self):
        with self.assertRaisesMessage(PreconditionError, "modulus is not monotone"):
            require_certified(SQ, ShiftedModulus(1.0), Interval(0.0, 1.0))
        with self.assertRaises(PreconditionError):
            eq32_lower_bound(square_instance((0.0, 1.0), (0.3, 0.7), phi=ShiftedModulus(1.0)), certify=False)
        with self.assertRaises(PreconditionError):
            thm9_two_point(SQ, ShiftedModulus(1.0), 0.0, 1.0, 0.25, 0.5, certify=False)

    def test_tiny_modulus_is_plain_convexity(self):
        for name in ('exp', 'xlogx', 'power3', 'power1.5', 'abs_power4'):
            entry = preset(name)
            with self.subTest(name=name):
                self.assertTrue(certify_uniform_convexity(entry.function, ModulusSpec(1e-9), entry.interval,
                                                          SMALL_GRID).passed)

    def test_known_moduli_pass(self):
        for name in ('square', 'exp', 'xlogx', 'power3', 'power1.5', 'abs_power4'):
            entry = preset(name)
            with self.subTest(name=name):
                self.assertTrue(certify_uniform_convexity(entry.function, entry.modulus, entry.interval).passed)

    def test_passing_coefficient_passes_when_smaller(self):
        entry = preset('exp')
        for factor in (1.0, 0.5, 0.1):
            with self.subTest(factor=factor):
                self.assertTrue(certify_uniform_convexity(entry.function, entry.modulus.scaled(factor),
                                                          entry.interval, SMALL_GRID).passed)

    def test_grid_validation(self):
        with self.assertRaises(InputError):
            CertGrid(2, 10, 9)
        with self.assertRaises(InputError):
            CertGrid(10, 10, 8)


class EstimateModulusTests(SimpleTestCase):
    def test_square(self):
        self.assertAlmostEqual(estimate_modulus_coefficient(SQ, 2.0, Interval(-1.0, 2.0)), 1.0, delta=1e-9)

    def test_exp_on_unit_interval(self):
        c = estimate_modulus_coefficient(FunctionSpec(EXP), 2.0, Interval(0.0, 1.0))
        self.assertGreaterEqual(c, 0.5 - 1e-9)
        self.assertLessEqual(c, 1.0)

    def test_absolute_power_four(self):
        c = estimate_modulus_coefficient(FunctionSpec(ABS_POWER, 4.0), 4.0, Interval(-1.0, 1.0))
        self.assertGreaterEqual(c, 0.125 - 1e-6)

    def test_estimate_certifies(self):
        interval = Interval(0.0, 1.0)
        c = estimate_modulus_coefficient(FunctionSpec(EXP), 2.0, interval, SMALL_GRID)
        self.assertTrue(certify_uniform_convexity(FunctionSpec(EXP), ModulusSpec(c), interval, SMALL_GRID).passed)

    def test_exponent_below_two(self):
        with self.assertRaises(InputError):
            estimate_modulus_coefficient(SQ, 1.5, Interval(0.0, 1.0))


class GradientInequalityTests(SimpleTestCase):
    def test_square_is_an_identity(self):
        certificate = gradient_inequality_check(SQ, D2, Interval(-1.0, 2.0))
        self.assertTrue(certificate.passed)
        self.assertAlmostEqual(certificate.worst_slack, 0.0, places=12)

    def test_exp_with_known_modulus(self):
        entry = preset('exp')
        self.assertTrue(gradient_inequality_check(entry.function, entry.modulus, entry.interval).passed)

    def test_tiny_modulus(self):
        entry = preset('power3')
        self.assertTrue(gradient_inequality_check(entry.function, ModulusSpec(1e-9), entry.interval).passed)


class PointwiseLowerBoundTests(SimpleTestCase):
    def test_square_identity(self):
        terms = eq32_lower_bound(square_instance((0.0, 0.5, 2.0), (0.2, 0.3, 0.5)))
        self.assertAlmostEqual(terms.slack, 0.0, places=12)
        self.assertTrue(terms.verified)

    def test_point_mass(self):
        terms = eq32_lower_bound(square_instance((0.0, 1.0), (1.0, 0.0)))
        self.assertEqual(terms.gap.value, 0.0)
        self.assertEqual(terms.total, 0.0)

    def test_uncertified_pair_refused(self):
        with self.assertRaises(CertificationError):
            eq32_lower_bound(square_instance((0.0, 1.0), (0.3, 0.7), phi=ModulusSpec(2.0)))

    def test_skipping_certification_exposes_the_violation(self):
        terms = eq32_lower_bound(square_instance((0.0, 1.0), (0.3, 0.7), phi=ModulusSpec(2.0)), certify=False)
        self.assertEqual(terms.verdict, VIOLATED)

    def test_missing_modulus(self):
        with self.assertRaises(PreconditionError):
            eq32_lower_bound(Instance.build((0.0, 1.0), (0.3, 0.7), f=SQ))

    def test_negative_weights(self):
        with self.assertRaises(PreconditionError):
            eq32_lower_bound(square_instance((0.0, 1.0, 2.0), (0.5, -0.1, 0.6)))


class ChainedLowerBoundTests(SimpleTestCase):
    def test_two_points_are_tight(self):
        terms = sy_chain_bound(square_instance((0.0, 1.0), (0.3, 0.7)))
        self.assertAlmostEqual(terms.gap.value, 0.21)
        self.assertAlmostEqual(terms.total, 0.21)
        self.assertAlmostEqual(terms.slack, 0.0, places=12)

    def test_three_points_are_strict(self):
        terms = sy_chain_bound(square_instance((0.0, 1.0, 2.0), WeightVector.uniform(3)))
        self.assertAlmostEqual(terms.gap.value, 2.0 / 3.0)
        self.assertAlmostEqual(terms.total, 2.0 / 9.0)
        self.assertTrue(terms.verified)

    def test_order_of_points_is_irrelevant(self):
        sorted_terms = sy_chain_bound(square_instance((0.0, 1.0, 2.0), (0.2, 0.3, 0.5)))
        shuffled = sy_chain_bound(square_instance((2.0, 0.0, 1.0), (0.5, 0.2, 0.3)))
        self.assertAlmostEqual(sorted_terms.total, shuffled.total, places=14)

    def test_point_mass(self):
        terms = sy_chain_bound(square_instance((0.0, 1.0, 2.0), (0.0, 1.0, 0.0)))
        self.assertEqual(terms.total, 0.0)
        self.assertAlmostEqual(terms.gap.value, 0.0, places=14)


class Theorem7Tests(SimpleTestCase):
    def setUp(self):
        self.inst = square_instance((0.0, 1.0), (0.2, 0.8), (0.5, 0.5))

    def test_ratio_refinements_need_a_modulus(self):
        bare = self.inst.with_modulus(None)
        for refinement in (thm7_lower_refinement, thm7_upper_refinement):
            with self.subTest(refinement=refinement.__name__):
                with self.assertRaisesMessage(PreconditionError, "modulus phi is required"):
                    refinement(bare, certify=False)

    def test_lower_example(self):
        terms = thm7_lower_refinement(self.inst)
        self.assertAlmostEqual(terms.gap.value, 0.06)
        self.assertAlmostEqual(terms.term('m*phi(|xq-xp|)'), 0.036)
        self.assertAlmostEqual(terms.term('sum (p_i-m*q_i)*phi(|x_i-xp|)'), 0.024)
        self.assertAlmostEqual(terms.slack, 0.0, places=12)

    def test_upper_example_both_scalings(self):
        normalized = thm7_upper_refinement(self.inst, normalized=True)
        self.assertAlmostEqual(normalized.gap.value, 0.15)
        self.assertAlmostEqual(normalized.total, 0.15)
        scaled = thm7_upper_refinement(self.inst)
        self.assertAlmostEqual(scaled.gap.value, 0.24)
        self.assertAlmostEqual(scaled.term('sum (M*q_i-p_i)*phi(|x_i-xq|)'), 0.15)
        self.assertAlmostEqual(scaled.term('phi(|xq-xp|)'), 0.09)
        self.assertAlmostEqual(scaled.extras['normalized_slack'], 0.0, places=12)

    def test_equal_weights(self):
        inst = square_instance((0.0, 1.0, 2.0), (0.2, 0.3, 0.5), (0.2, 0.3, 0.5))
        for terms in (thm7_lower_refinement(inst), thm7_upper_refinement(inst)):
            self.assertAlmostEqual(terms.gap.value, 0.0, places=14)
            self.assertAlmostEqual(terms.total, 0.0, places=14)

    def test_scaling_the_modulus_scales_the_terms(self):
        inst = Instance.build((0.1, 0.4, 0.9), (0.5, 0.2, 0.3), (0.2, 0.3, 0.5),
                              f=FunctionSpec(EXP), phi=ModulusSpec(0.5))
        full = thm7_lower_refinement(inst)
        half = thm7_lower_refinement(inst.with_modulus(ModulusSpec(0.25)))
        for a, b in zip(full.terms, half.terms):
            self.assertAlmostEqual(b.value, 0.5 * a.value, places=14)
        self.assertTrue(full.verified and half.verified)


class TwoPointSpecialsTests(SimpleTestCase):
    def test_half_q_forms(self):
        specials = thm7_n2_specials(SQ, D2, 0.0, 1.0, 0.25, 0.5)
        self.assertAlmostEqual(specials.lower_half.gap.value, 1.0 / 16.0)
        self.assertAlmostEqual(specials.lower_half.total, 1.0 / 16.0)
        self.assertAlmostEqual(specials.upper_half.gap.value, 3.0 / 16.0)
        self.assertAlmostEqual(specials.upper_half.total, 3.0 / 16.0)

    def test_agree_with_general_refinements(self):
        specials = thm7_n2_specials(FunctionSpec(EXP), ModulusSpec(0.5), 0.2, 0.9, 0.3, 0.6)
        inst = Instance.build((0.2, 0.9), (0.3, 0.7), (0.6, 0.4), f=FunctionSpec(EXP), phi=ModulusSpec(0.5))
        for special, general in ((specials.lower, thm7_lower_refinement(inst)),
                                 (specials.upper, thm7_upper_refinement(inst))):
            self.assertAlmostEqual(special.gap.value, general.gap.value, delta=1e-12)
            for a, b in zip(special.terms, general.terms):
                self.assertAlmostEqual(a.value, b.value, delta=1e-12)

    def test_roles_swapped(self):
        specials = thm7_n2_specials(SQ, D2, 0.0, 1.0, 0.8, 0.5)
        self.assertTrue(specials.swapped)
        self.assertTrue(specials.swapped_half)
        self.assertTrue(specials.lower.notes)
        self.assertTrue(specials.lower.verified and specials.upper.verified)

    def test_equal_weights(self):
        specials = thm7_n2_specials(SQ, D2, 0.0, 1.0, 0.5, 0.5)
        for terms in (specials.lower, specials.upper, specials.lower_half, specials.upper_half):
            self.assertAlmostEqual(terms.gap.value, 0.0, places=14)
            self.assertAlmostEqual(terms.total, 0.0, places=14)


class Theorem8Tests(SimpleTestCase):
    def test_two_point_equality(self):
        terms = thm8_merged_bound(square_instance((0.0, 1.0), (0.2, 0.8), (0.5, 0.5)))
        self.assertEqual(terms.extras['k'], 1)
        for actual, expected in zip(terms.extras['y'], (0.0, 0.5, 1.0)):
            self.assertAlmostEqual(actual, expected)
        for actual, expected in zip(terms.extras['d'], (0.0, 0.4, 0.6)):
            self.assertAlmostEqual(actual, expected)
        self.assertAlmostEqual(terms.gap.value, 0.06)
        self.assertAlmostEqual(terms.slack, 0.0, places=12)

    def test_three_point_witness(self):
        terms = thm8_merged_bound(square_instance((0.0, 1.0, 2.0), (0.4, 0.1, 0.5)))
        for actual, expected in zip(terms.extras['y'], (0.0, 1.0, 1.0, 2.0)):
            self.assertAlmostEqual(actual, expected)
        for actual, expected in zip(terms.extras['d'], (0.3, 0.3, 0.0, 0.4)):
            self.assertAlmostEqual(actual, expected)
        self.assertAlmostEqual(terms.gap.value, 0.69)
        self.assertAlmostEqual(terms.total, 0.09)
        self.assertAlmostEqual(terms.extras['sum_d'], 1.0, delta=1e-12)
        self.assertGreater(terms.slack, 0.5)

    def test_merged_tuple_is_nondecreasing(self):
        terms = thm8_merged_bound(square_instance((0.0, 0.3, 1.2, 2.0), (0.1, 0.4, 0.2, 0.3), (0.3, 0.2, 0.4, 0.1)))
        y = terms.extras['y']
        self.assertTrue(all(a <= b for a, b in zip(y, y[1:])))
        self.assertTrue(all(d >= -1e-12 for d in terms.extras['d']))
        self.assertTrue(terms.verified)

    def test_equal_weights(self):
        terms = thm8_merged_bound(square_instance((0.0, 1.0, 2.0), (0.2, 0.3, 0.5), (0.2, 0.3, 0.5)))
        self.assertAlmostEqual(terms.total, 0.0, places=14)
        self.assertAlmostEqual(terms.gap.value, 0.0, places=14)

    def test_needs_sorted_points(self):
        with self.assertRaises(PreconditionError):
            thm8_merged_bound(square_instance((1.0, 0.0), (0.2, 0.8)))


class Theorem9Tests(SimpleTestCase):
    def test_quarter_weight_with_half_q(self):
        terms = thm9_two_point(SQ, D2, 0.0, 1.0, 0.25, 0.5)
        self.assertAlmostEqual(terms.gap.value, 0.0625)
        self.assertAlmostEqual(terms.total, 0.0625)
        self.assertAlmostEqual(terms.extras['half_q_term'], 0.0625)
        self.assertAlmostEqual(terms.extras['best_term'], 0.0625)
        self.assertTrue(terms.extras['at_best_p1'])

    def test_equal_weights(self):
        terms = thm9_two_point(SQ, D2, 0.0, 1.0, 0.3, 0.3)
        self.assertAlmostEqual(terms.total, 0.0, places=14)
        self.assertAlmostEqual(terms.gap.value, 0.0, places=14)

    def test_ordering_violated(self):
        with self.assertRaises(PreconditionError):
            thm9_two_point(SQ, D2, 0.0, 1.0, 0.8, 0.5)

    def test_relabelled_mirrors_the_points(self):
        terms = thm9_relabelled(SQ, D2, 0.0, 1.0, 0.75, 0.5)
        self.assertAlmostEqual(terms.gap.value, 0.0625)
        self.assertAlmostEqual(terms.total, 0.0625)
        self.assertAlmostEqual(terms.extras['m'], 0.5)
        self.assertEqual(terms.notes, ("points relabelled so that p1/q1 <= p2/q2",))
        self.assertTrue(terms.verified)

    def test_relabelled_keeps_an_ordered_pair(self):
        terms = thm9_relabelled(SQ, D2, 0.0, 1.0, 0.25, 0.5)
        self.assertEqual(terms.notes, ())
        self.assertAlmostEqual(terms.total, 0.0625)

    def test_coefficient_maximizer(self):
        p1, value = thm9_coefficient_scan()
        self.assertAlmostEqual(p1, 0.25, places=9)
        self.assertAlmostEqual(value, 0.25, places=9)


class ComparatorTests(SimpleTestCase):
    def test_quadratic_modulus_ties(self):
        report = refinement_comparator_n2(SQ, D2, 0.0, 1.0, 0.25)
        self.assertAlmostEqual(report.rhs_pointwise, 1.0 / 16.0)
        self.assertAlmostEqual(report.rhs_two_point, 1.0 / 16.0)
        self.assertEqual(report.stronger, 'tie')

    def test_quartic_modulus_prefers_two_point(self):
        report = refinement_comparator_n2(FunctionSpec(ABS_POWER, 4.0), D4_8, 0.0, 1.0, 0.25)
        self.assertAlmostEqual(report.rhs_pointwise, 1.0 / 2048.0)
        self.assertAlmostEqual(report.rhs_two_point, 1.0 / 512.0)
        self.assertEqual(report.stronger, 'two_point')
        self.assertTrue(report.phi_over_square_increasing)

    def test_equal_weights(self):
        report = refinement_comparator_n2(SQ, D2, 0.0, 1.0, 0.5)
        self.assertEqual(report.rhs_pointwise, 0.0)
        self.assertEqual(report.rhs_two_point, 0.0)
        self.assertEqual(report.stronger, 'tie')
