from unittest import TestCase

import numpy as np

from parabolic.dynamics.julia import sample_inverse_iteration
from parabolic.dynamics.periodic import NotParabolicError, omega
from parabolic.examples import REGISTRY
from parabolic.thermo.metric import MetricError, MilnorMetric, SingularDensityError, calibrate, choose_M, \
    postcritical_truncation, verify_expansion


class TestPostcriticalTruncation(TestCase):
    def test_square(self):
        points = postcritical_truncation(REGISTRY['square'].build(), 5)
        np.testing.assert_allclose(points, [0.0])

    def test_quad_orbit_with_omega(self):
        points = postcritical_truncation(REGISTRY['quad_parabolic'].build(), 5, [0.5])
        self.assertEqual(6, len(points))
        self.assertAlmostEqual(0.25, points[0].real)
        self.assertAlmostEqual(0.5, points[-1].real)
        self.assertTrue(np.all(np.diff(points.real) > 0))

    def test_length_must_be_positive(self):
        with self.assertRaises(ValueError):
            postcritical_truncation(REGISTRY['square'].build(), 0)


class TestMilnorMetric(TestCase):
    def setUp(self) -> None:
        self.metric = MilnorMetric(0.1, 3.0, np.array([0j]), np.array([0.5 + 0j]))

    def test_density_plateau_and_surrogate(self):
        self.assertEqual(3.0, self.metric.density(0.52))
        self.assertAlmostEqual(1.0, self.metric.density(-1.0))
        np.testing.assert_allclose(self.metric.density(np.array([2j, 0.45])), [0.5, 3.0])

    def test_singular_density(self):
        with self.assertRaises(SingularDensityError):
            self.metric.density(0.0)

    def test_local_distance(self):
        self.assertEqual(0.0, self.metric.local_distance(0.5, 0.5))
        self.assertAlmostEqual(0.05 * 3.0, self.metric.local_distance(0.5, 0.55))
        self.assertAlmostEqual(0.05 / 2.025, self.metric.local_distance(2.0, 2.05))
        with self.assertRaises(MetricError):
            self.metric.local_distance(0.0 + 1j, 0.5 + 1j)

    def test_path_length(self):
        lengths = self.metric.path_length(np.array([0.5, 2.0]), np.array([0.55, 3.0]))
        self.assertAlmostEqual(0.15, lengths[0])
        self.assertAlmostEqual(np.log(1.5), lengths[1], places=3)
        self.assertEqual(0.0, self.metric.path_length(2j, 2j)[0])

    def test_derivative_norm_of_square(self):
        square = REGISTRY['square'].build()
        metric = MilnorMetric(0.2, 1.0, np.array([0j]), np.array([], dtype=complex))
        z = np.array([0.7 + 0.2j, -1.5, 3j])
        np.testing.assert_allclose(metric.derivative_norm(square, z), 2.0)


class TestExpansion(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()
        self.sample = sample_inverse_iteration(self.square, 1.0, 5000, seed=0, walkers=4)
        self.metric = MilnorMetric(0.2, 1.0, np.array([0j]), np.array([], dtype=complex))

    def test_square_expands_uniformly(self):
        report = verify_expansion(self.metric, self.square, self.sample.points)
        self.assertTrue(report.passed)
        self.assertAlmostEqual(2.0, report.r_min_on_K, places=6)
        self.assertAlmostEqual(2.0, report.global_min, places=6)
        self.assertEqual(len(self.sample.points), report.k_count)

    def test_sparse_sample_is_rejected(self):
        with self.assertRaises(MetricError):
            verify_expansion(self.metric, self.square, self.sample.points[:50])

    def test_calibrate_without_omega(self):
        report = calibrate(self.square, omega(self.square, 2), self.sample.points, 10)
        self.assertEqual(1.0, report.metric.M)
        self.assertFalse(report.M_flagged)
        self.assertTrue(report.passed)
        self.assertTrue(any('not parabolic' in note for note in report.notes))


class TestChooseM(TestCase):
    def test_quad_plateau_constant(self):
        quad = REGISTRY['quad_parabolic'].build()
        postcritical = postcritical_truncation(quad, 20, [0.5])
        M, flagged = choose_M(quad, 0.05, [0.5], 2.0, postcritical)
        self.assertFalse(flagged)
        self.assertAlmostEqual(2.0 / np.min(np.abs(-0.5 - postcritical)) + 1.0, M)

    def test_empty_omega_raises(self):
        square = REGISTRY['square'].build()
        with self.assertRaises(NotParabolicError):
            choose_M(square, 0.05, [], 2.0, np.array([0j]))

    def test_calibrate_parabolic_blaschke(self):
        fmap = REGISTRY['blaschke_parabolic'].build()
        sample = sample_inverse_iteration(fmap, 1.0, 20000, seed=0, walkers=8)
        report = calibrate(fmap, omega(fmap, 1), sample.points, 20)
        self.assertIn(report.metric.alpha, (0.2, 0.1, 0.05, 0.02, 0.01))
        self.assertGreater(report.metric.M, 1.0)
        self.assertFalse(report.M_flagged)
        self.assertGreater(len(report.alphas_tried), 0)
