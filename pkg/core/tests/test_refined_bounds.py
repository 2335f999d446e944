from django.test import SimpleTestCase

from core.catalog import SQUARE, FunctionSpec
from core.exceptions import PreconditionError
from core.functional import Instance, WeightVector, increasing_rearrangement
from core.refined_bounds import (
    prefix_suffix_ratios,
    remark1_refinement,
    theorem2_bounds,
    theorem4_endpoint_bound,
    theorem6_uniform_q_bounds,
)

SQ = FunctionSpec(SQUARE)
X3 = (0.0, 1.0, 2.0)
P3 = (0.4, 0.1, 0.5)


class PrefixSuffixRatioTests(SimpleTestCase):
    def test_three_point_example(self):
        summary = prefix_suffix_ratios(increasing_rearrangement(X3, P3, WeightVector.uniform(3)))
        for actual, expected in zip(summary.prefix, (1.2, 0.75, 1.0)):
            self.assertAlmostEqual(actual, expected)
        for actual, expected in zip(summary.suffix, (1.0, 0.9, 1.5)):
            self.assertAlmostEqual(actual, expected)
        self.assertAlmostEqual(summary.m_star, 0.75)
        self.assertAlmostEqual(summary.M_star, 1.5)

    def test_ends_are_exactly_one(self):
        summary = prefix_suffix_ratios(increasing_rearrangement(
            (0.3, 0.1, 0.9, 0.5), (0.1, 0.2, 0.3, 0.4), (0.3, 0.3, 0.2, 0.2)))
        self.assertEqual(summary.prefix[-1], 1.0)
        self.assertEqual(summary.suffix[0], 1.0)
        self.assertLessEqual(summary.m_star, 1.0)
        self.assertGreaterEqual(summary.M_star, 1.0)

    def test_identity(self):
        summary = prefix_suffix_ratios(increasing_rearrangement(X3, P3, P3))
        self.assertAlmostEqual(summary.m_star, 1.0)
        self.assertAlmostEqual(summary.M_star, 1.0)

    def test_two_points_match_pointwise_extremes(self):
        summary = prefix_suffix_ratios(increasing_rearrangement((0.0, 1.0), (0.2, 0.8), (0.5, 0.5)))
        self.assertAlmostEqual(summary.m_star, 0.4)
        self.assertAlmostEqual(summary.M_star, 1.6)
        self.assertEqual(summary.m_star_at, (('prefix', 0),))
        self.assertEqual(summary.M_star_at, (('suffix', 1),))

    def test_q_prefix_sum_reaching_one(self):
        with self.assertRaises(PreconditionError):
            prefix_suffix_ratios(increasing_rearrangement(X3, P3, (1.0, 0.0, 0.0)))


class Theorem2BoundsTests(SimpleTestCase):
    def test_worked_example(self):
        report = theorem2_bounds(Instance.build(X3, P3, f=SQ))
        self.assertAlmostEqual(report.term('J(p)'), 0.89)
        self.assertAlmostEqual(report.term('M_star*J(q)'), 1.0)
        self.assertAlmostEqual(report.term('m_star*J(q)'), 0.5)
        self.assertTrue(report.verified)

    def test_signed_weights(self):
        report = theorem2_bounds(Instance.build(X3, (0.5, -0.1, 0.6), f=SQ))
        self.assertAlmostEqual(report.term('J(p)'), 1.09)
        self.assertAlmostEqual(report.extras['m_star'], 0.6)
        self.assertAlmostEqual(report.extras['M_star'], 1.8)
        self.assertTrue(report.verified)

    def test_signed_weights_are_sorted_first(self):
        shuffled = theorem2_bounds(Instance.build((2.0, 0.0, 1.0), (0.6, 0.5, -0.1), f=SQ))
        self.assertAlmostEqual(shuffled.term('J(p)'), 1.09)
        self.assertTrue(shuffled.verified)

    def test_prefix_sum_violation(self):
        with self.assertRaises(PreconditionError) as ctx:
            theorem2_bounds(Instance.build((0.0, 1.0), (1.2, -0.2), f=SQ))
        self.assertIn("prefix sum 1.2", ctx.exception.violations[0])

    def test_equal_weights_noted(self):
        report = theorem2_bounds(Instance.build(X3, P3, P3, f=SQ))
        self.assertTrue(report.notes)
        self.assertTrue(report.verified)


class Remark1Tests(SimpleTestCase):
    def test_interior_minimum_is_refined(self):
        check = remark1_refinement(Instance.build(X3, P3, f=SQ))
        self.assertAlmostEqual(check.m, 0.3)
        self.assertTrue(check.refined_below)
        self.assertTrue(check.min_interior_only)
        self.assertFalse(check.refined_above)
        self.assertFalse(check.max_interior_only)


class Theorem4Tests(SimpleTestCase):
    def test_extended_configuration(self):
        report = theorem4_endpoint_bound(SQ, 0.0, 2.0, (0.5, 1.5), (0.5, 0.5))
        self.assertAlmostEqual(report.term('J(p)'), 0.25)
        self.assertAlmostEqual(report.extras['HH'], 1.0)
        self.assertAlmostEqual(report.extras['M_star'], 2.0)
        self.assertAlmostEqual(report.extras['2*HH'], 2.0)
        self.assertEqual(report.term('zero'), 0.0)
        self.assertTrue(report.verified)

    def test_point_outside_interval(self):
        with self.assertRaises(PreconditionError):
            theorem4_endpoint_bound(SQ, 0.0, 1.0, (0.5, 1.5), (0.5, 0.5))

    def test_signed_prefix_outside_unit_interval(self):
        with self.assertRaisesMessage(PreconditionError, "inadmissible for the endpoint bound"):
            theorem4_endpoint_bound(SQ, 0.0, 2.0, (0.5, 1.5), (-0.2, 1.2))

    def test_admissible_signed_weights(self):
        report = theorem4_endpoint_bound(SQ, 0.0, 2.0, (0.5, 1.0, 1.5), (0.5, -0.1, 0.6))
        self.assertTrue(report.verified)


class Theorem6Tests(SimpleTestCase):
    def test_worked_chain(self):
        report = theorem6_uniform_q_bounds(SQ, X3, P3)
        expected = (1.0, 1.0, 0.89, 0.5, 0.2)
        self.assertEqual(len(report.terms), 5)
        for term, value in zip(report.terms, expected):
            with self.subTest(term=term.name):
                self.assertAlmostEqual(term.value, value)
        self.assertTrue(report.verified)
        self.assertFalse(report.extras['M_star_strict'])
        self.assertTrue(report.extras['m_star_strict'])
        self.assertTrue(any('max p_i' in note for note in report.notes))

    def test_signed_weights_keep_inner_chain(self):
        report = theorem6_uniform_q_bounds(SQ, X3, (0.5, -0.1, 0.6))
        self.assertEqual(len(report.terms), 3)
        self.assertTrue(report.verified)

    def test_signed_prefix_outside_unit_interval(self):
        with self.assertRaises(PreconditionError) as raised:
            theorem6_uniform_q_bounds(SQ, X3, (-0.3, 0.8, 0.5))
        self.assertIn("inadmissible for the uniform-q bounds", str(raised.exception))
        self.assertEqual(len(raised.exception.violations), 1)
        self.assertIn("prefix sum -0.3 of p", raised.exception.violations[0])
