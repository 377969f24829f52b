from unittest import TestCase

import numpy as np

from parabolic.dynamics.rational import RationalMap, RationalMapError, DegenerateFiberError, BudgetExceededError, \
    INFINITY, is_infinity
from parabolic.examples import REGISTRY


class TestRationalMapConstruction(TestCase):
    def test_degree_below_two_is_rejected(self):
        with self.assertRaises(RationalMapError):
            RationalMap([0, 1], [1])

    def test_zero_denominator_is_rejected(self):
        with self.assertRaises(RationalMapError):
            RationalMap([0, 0, 1], [0])

    def test_common_root_is_rejected(self):
        # (z^2 - 1) / (z - 1)
        with self.assertRaises(RationalMapError):
            RationalMap([-1, 0, 1], [-1, 1])

    def test_leading_coefficient_is_normalized(self):
        fmap = RationalMap([0, 0, 2], [4])
        np.testing.assert_allclose(fmap.numerator, [0, 0, 1])
        np.testing.assert_allclose(fmap.denominator, [2])
        self.assertEqual(2, fmap.degree)
        self.assertTrue(fmap.is_polynomial)

    def test_fingerprint_identifies_the_normalized_map(self):
        self.assertEqual(RationalMap([0, 0, 1], [1]).fingerprint(), RationalMap([0, 0, 3], [3]).fingerprint())
        self.assertNotEqual(REGISTRY['square'].build().fingerprint(), REGISTRY['cheb'].build().fingerprint())


class TestEvaluation(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()
        self.quad = REGISTRY['quad_parabolic'].build()
        self.blaschke = REGISTRY['blaschke_parabolic'].build()

    def test_evaluate_scalar_and_array(self):
        self.assertAlmostEqual(4.0, self.square.evaluate(2.0).real)
        np.testing.assert_allclose(self.square.evaluate(np.array([1j, 2, -3])), [-1, 4, 9])

    def test_infinity_is_handled_in_the_chart(self):
        self.assertTrue(is_infinity(self.square.evaluate(INFINITY)))
        self.assertAlmostEqual(3.0, abs(self.blaschke.evaluate(INFINITY)))
        self.assertAlmostEqual(3.0, abs(self.blaschke.evaluate(1e9)), places=6)

    def test_parabolic_fixed_points(self):
        self.assertAlmostEqual(0.5, abs(self.quad.evaluate(0.5)))
        self.assertAlmostEqual(1.0, abs(self.quad.derivative(0.5)))
        self.assertAlmostEqual(1.0, abs(self.blaschke.evaluate(1.0)))
        self.assertAlmostEqual(1.0, abs(self.blaschke.derivative(1.0)))

    def test_second_derivative(self):
        self.assertAlmostEqual(2.0, self.quad.second_derivative(0.3).real)

    def test_derivative_at_infinity_raises(self):
        with self.assertRaises(RationalMapError):
            self.square.derivative(INFINITY)

    def test_orbit_columns_are_iterates(self):
        orbit = self.quad.orbit(np.array([0.1, 0.2j]), 4)
        self.assertEqual((2, 4), orbit.shape)
        np.testing.assert_allclose(self.quad.evaluate(orbit[:, 2]), orbit[:, 3])
        np.testing.assert_allclose(self.quad.iterate_point(orbit[:, 0], 3), orbit[:, 3])

    def test_iterate_composes(self):
        second = self.quad.iterate(2)
        self.assertEqual(4, second.degree)
        z = np.array([0.1 + 0.2j, -0.4, 0.7j])
        np.testing.assert_allclose(second.evaluate(z), self.quad.iterate_point(z, 2), atol=1e-12)

    def test_iterate_budget(self):
        with self.assertRaises(BudgetExceededError):
            self.square.iterate(13)


class TestCriticalPoints(TestCase):
    def test_square_has_zero_and_infinity(self):
        critical = REGISTRY['square'].build().critical_points()
        self.assertEqual(2, len(critical))
        self.assertAlmostEqual(0.0, abs(critical[0]))
        self.assertTrue(is_infinity(critical[-1]))

    def test_blaschke_critical_points(self):
        critical = REGISTRY['blaschke_parabolic'].build().critical_points()
        self.assertEqual(2, len(critical))
        self.assertAlmostEqual(0.0, abs(critical[0]), places=8)
        self.assertTrue(is_infinity(critical[1]))


class TestPreimages(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()

    def test_preimages_are_ordered(self):
        np.testing.assert_allclose(self.square.preimages(4.0), [-2, 2], atol=1e-12)

    def test_preimages_map_back(self):
        fmap = REGISTRY['blaschke_parabolic'].build()
        w = np.array([0.3 + 0.1j, -2j, 5.0])
        roots = fmap.preimages_batch(w)
        self.assertEqual((3, 2), roots.shape)
        np.testing.assert_allclose(fmap.evaluate(roots), np.repeat(w[:, None], 2, axis=1), atol=1e-9)

    def test_polynomial_fiber_of_infinity_is_degenerate(self):
        self.assertTrue(self.square.is_degenerate_fiber(INFINITY))
        with self.assertRaises(DegenerateFiberError):
            self.square.preimages(INFINITY)

    def test_solve_fibers_does_not_raise(self):
        roots, degenerate = self.square.solve_fibers(np.array([1.0, INFINITY]))
        self.assertEqual([False, True], degenerate.tolist())
        self.assertTrue(np.all(np.isnan(roots[1])))

    def test_preimage_tree_levels(self):
        tree = self.square.preimage_tree(1.0, 4)
        self.assertEqual([1, 2, 4, 8, 16], [len(level) for level in tree.levels])
        np.testing.assert_allclose(np.abs(self.square.iterate_point(tree.leaves, 4) - 1), 0, atol=1e-9)

    def test_preimage_tree_parent_links(self):
        tree = self.square.preimage_tree(-1.0, 3)
        for i, z in enumerate(tree.levels[3]):
            parent = tree.levels[2][tree.parent_index(3, i)]
            self.assertAlmostEqual(0.0, abs(self.square.evaluate(z) - parent), places=9)

    def test_preimage_tree_orbits(self):
        tree = self.square.preimage_tree(1j, 3)
        orbits = tree.orbits()
        self.assertEqual((8, 3), orbits.shape)
        np.testing.assert_allclose(self.square.evaluate(orbits[:, 0]), orbits[:, 1], atol=1e-9)
        np.testing.assert_allclose(self.square.evaluate(orbits[:, 2]), np.full(8, 1j), atol=1e-9)
        self.assertEqual('101', tree.branch_code(5))

    def test_preimage_tree_budget(self):
        with self.assertRaises(BudgetExceededError):
            self.square.preimage_tree(1.0, 5, budget=16)
