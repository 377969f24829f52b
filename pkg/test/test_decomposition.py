from unittest import TestCase

import numpy as np

from parabolic.dynamics.julia import sample_inverse_iteration
from parabolic.examples import REGISTRY
from parabolic.thermo.decomposition import DecompositionParams, OrbitSegment, backward_windows, bad_pattern, \
    decompose, distance_mode, good_pattern, harvest_segments, in_D_alpha, in_bad, in_good, lambda_indicator, \
    lambda_pattern, random_segments, split_pattern, split_pattern_exhaustive
from parabolic.thermo.metric import MilnorMetric


class TestLambda(TestCase):
    def test_closed_ball_is_excluded(self):
        points = np.array([0.25, 0.3, 0.1j, -1.0])
        np.testing.assert_array_equal([0, 1, 0, 1], lambda_pattern(points, [0j], 0.125))

    def test_empty_omega_is_all_ones(self):
        np.testing.assert_array_equal([1, 1], lambda_pattern(np.array([0j, 1j]), [], 0.1))

    def test_indicator(self):
        self.assertEqual(0, lambda_indicator(0.5, [0.5], 0.05))
        self.assertEqual(1, lambda_indicator(0.7, [0.5], 0.05))

    def test_metric_distance_shrinks_the_excluded_ball(self):
        # plateau 4 on B(0, 0.1), density 1 elsewhere: 0.15 is 0.45 away in psi-length
        metric = MilnorMetric(0.1, 4.0, np.array([], dtype=complex), np.array([0j]))
        self.assertEqual(0, lambda_indicator(0.15, [0j], 0.1))
        self.assertEqual(1, lambda_indicator(0.15, [0j], 0.1, metric))
        self.assertEqual(0, lambda_indicator(0.04, [0j], 0.1, metric))

    def test_metric_distance_grows_the_excluded_ball(self):
        metric = MilnorMetric(0.1, 0.5, np.array([], dtype=complex), np.array([0j]))
        points = np.array([0.22, 0.22j, 0.5])
        np.testing.assert_array_equal([1, 1, 1], lambda_pattern(points, [0j], 0.1))
        np.testing.assert_array_equal([0, 0, 1], lambda_pattern(points, [0j], 0.1, metric))

    def test_distance_mode_is_recorded(self):
        metric = MilnorMetric(0.1, 2.0, np.array([], dtype=complex), np.array([0j]))
        self.assertEqual('euclidean', DecompositionParams(0.1, 0.5, np.array([0j])).distance)
        self.assertEqual('milnor', DecompositionParams(0.1, 0.5, np.array([0j]), metric).distance)
        self.assertEqual('euclidean', distance_mode(None))


class TestPatterns(TestCase):
    def test_good_pattern(self):
        self.assertTrue(good_pattern([1, 1, 0, 1], 0.5))
        self.assertTrue(good_pattern([0, 1], 0.5))
        self.assertFalse(good_pattern([1, 0], 0.5))
        self.assertFalse(good_pattern([1, 1, 0, 0, 0, 1], 0.5))

    def test_bad_pattern(self):
        self.assertTrue(bad_pattern([0, 0, 1], 0.5))
        self.assertFalse(bad_pattern([0, 1], 0.5))

    def test_split(self):
        split = split_pattern([1, 1, 1, 0, 0], 0.5)
        self.assertEqual((2, 3), (split.g, split.s))
        self.assertEqual('(2, 3) 11100', str(split))

    def test_extremes(self):
        self.assertEqual((6, 0), tuple(split_pattern([1] * 6, 0.5)[:2]))
        self.assertEqual((0, 6), tuple(split_pattern([0] * 6, 0.5)[:2]))
        self.assertEqual((1, 0), tuple(split_pattern([1], 1.0)[:2]))

    def test_split_pieces_are_good_and_bad(self):
        rng = np.random.default_rng(11)
        for _ in range(300):
            pattern = rng.integers(0, 2, size=int(rng.integers(1, 30)))
            eta = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
            g, s, _ = split_pattern(pattern, eta)
            self.assertEqual(len(pattern), g + s)
            if g:
                self.assertTrue(good_pattern(pattern[:g], eta), msg=pattern)

            if s:
                self.assertTrue(bad_pattern(pattern[g:], eta), msg=pattern)

    def test_matches_exhaustive_scan(self):
        rng = np.random.default_rng(0)
        for _ in range(2000):
            pattern = rng.integers(0, 2, size=int(rng.integers(1, 41)))
            fast = split_pattern(pattern, 0.5)
            slow = split_pattern_exhaustive(pattern, 0.5)
            self.assertEqual((slow.g, slow.s), (fast.g, fast.s), msg=pattern.tolist())


class TestSegments(TestCase):
    def setUp(self) -> None:
        self.quad = REGISTRY['quad_parabolic'].build()
        self.params = DecompositionParams(0.05, 0.5, np.array([0.5 + 0j]))

    def test_forward_segment(self):
        segment = OrbitSegment.forward(self.quad, 0.1j, 4)
        self.assertEqual(4, segment.length)
        self.assertEqual(0.1j, segment.start)
        self.assertTrue(segment.is_consistent(self.quad))
        self.assertAlmostEqual(0.0, abs(self.quad.iterate_point(0.1j, 3) - segment.end))

    def test_segment_length(self):
        with self.assertRaises(ValueError):
            OrbitSegment.forward(self.quad, 0.0, 0)

        with self.assertRaises(ValueError):
            OrbitSegment.from_points([])

    def test_inconsistent_points(self):
        segment = OrbitSegment.from_points([0.0, 1.0])
        self.assertFalse(segment.is_consistent(self.quad))
        self.assertAlmostEqual(0.75, segment.step_defect(self.quad))

    def test_decompose_segment(self):
        # 0.5 sits on Omega, -1 and 1.25 are far from it
        segment = OrbitSegment.from_points([-1.0, 0.5, 0.5, 0.5])
        split = decompose(segment, self.params)
        self.assertEqual((0, 4), (split.g, split.s))
        self.assertTrue(in_bad(segment, self.params))
        self.assertFalse(in_good(segment, self.params))
        self.assertFalse(in_D_alpha(segment, self.params.omega_points, self.params.alpha))

        reverse = OrbitSegment.from_points([0.5, -1.0, 1.25, -1.0])
        self.assertTrue(in_good(reverse, self.params))
        self.assertTrue(in_D_alpha(reverse, self.params.omega_points, self.params.alpha))


class TestSampleSegments(TestCase):
    def setUp(self) -> None:
        self.fmap = REGISTRY['blaschke_parabolic'].build()
        self.sample = sample_inverse_iteration(self.fmap, 1.0, 2000, seed=0, walkers=4)
        self.params = DecompositionParams(0.05, 0.5, np.array([1.0 + 0j]))

    def test_backward_windows_are_forward_orbits(self):
        windows = list(backward_windows(self.sample, 6, stride=50))
        self.assertGreater(len(windows), 0)
        for segment in windows:
            self.assertEqual(6, segment.length)
            self.assertTrue(segment.is_consistent(self.fmap), msg=str(segment.start))

    def test_harvest_good_segments(self):
        found = harvest_segments(self.sample, self.params, 10, 5, require_end_in_e=True)
        self.assertLessEqual(len(found), 5)
        for segment in found:
            self.assertTrue(in_good(segment, self.params))
            self.assertTrue(in_D_alpha(segment, self.params.omega_points, self.params.alpha))

    def test_random_segments_are_deterministic(self):
        first = random_segments(self.sample, range(1, 11), 20, seed=4, params=self.params)
        second = random_segments(self.sample, range(1, 11), 20, seed=4, params=self.params)
        self.assertEqual(20, len(first))
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.points, b.points)
            self.assertTrue(in_D_alpha(a, self.params.omega_points, self.params.alpha))

    def test_sample_without_orbits(self):
        with self.assertRaises(ValueError):
            random_segments(self.sample._replace(orbits=None), [3], 1)
