import math
from unittest import TestCase

import numpy as np

from parabolic.dynamics.julia import box_counting_dimension, sample_inverse_iteration
from parabolic.dynamics.periodic import a_omega, omega
from parabolic.examples import REGISTRY
from parabolic.thermo.potential import ConstantPotential, GeometricPotential
from parabolic.thermo.pressure import Constraint, OracleConfig, SeparatedOracle, TreeOracle, UlamOracle, \
    PeriodicOracle, bowen_root, equilibrium_approx, equilibrium_diagnostics, estimate_pressure, omega_seeds, \
    pressure_periodic, pressure_separated, pressure_tree


class TestCrossOracle(TestCase):
    def test_tree_and_periodic_agree_at_depth_ten(self):
        for name, example in sorted(REGISTRY.items()):
            fmap = example.build()
            for t in (0.0, 0.5):
                potential = GeometricPotential(fmap, t)
                tree = pressure_tree(fmap, potential, None, 10, mode='ratio').value
                periodic = pressure_periodic(fmap, potential, 10, mode='ratio').value
                self.assertLess(abs(tree - periodic), 0.05, msg=f'{name} t={t}')

    def test_square_periodic_sum_is_exact(self):
        square = REGISTRY['square'].build()
        estimate = pressure_periodic(square, GeometricPotential(square, 0.5), 10)
        self.assertAlmostEqual(math.log(1023) / 10 - 0.5 * math.log(2), estimate.value, places=9)


class TestShiftCovariance(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()

    def assertShiftCovariant(self, oracle, potential):
        base = oracle.estimate(potential).value
        shifted = oracle.estimate(potential.shifted(0.3)).value
        self.assertAlmostEqual(base + 0.3, shifted, delta=1e-9, msg=oracle.method)

    def test_every_oracle(self):
        potential = GeometricPotential(self.square, 0.5)
        sample = sample_inverse_iteration(self.square, 1.0, 20000, seed=0, walkers=8)
        self.assertShiftCovariant(TreeOracle(self.square, 8), potential)
        self.assertShiftCovariant(PeriodicOracle(self.square, 6), potential)
        self.assertShiftCovariant(UlamOracle(self.square, sample.points, resolution=64), potential)
        # equal weights keep the greedy order of the separated oracle stable under the shift
        self.assertShiftCovariant(SeparatedOracle(self.square, 6, 0.05), ConstantPotential(-0.2))


class TestPhaseTransition(TestCase):
    def setUp(self) -> None:
        self.blaschke = REGISTRY['blaschke_parabolic'].build()
        self.omega_set = omega(self.blaschke, 1)

    def test_tail_is_flat(self):
        for t in (1.2, 1.5, 2.0):
            estimate = estimate_pressure(self.blaschke, GeometricPotential(self.blaschke, t), OracleConfig(),
                                         omega_set=self.omega_set)
            self.assertGreaterEqual(estimate.value, -0.01, msg=t)
            self.assertLessEqual(estimate.value, 0.05, msg=t)
            self.assertIsNotNone(estimate.diagnostics.floor)

    def test_floor_can_be_switched_off(self):
        config = OracleConfig(floor=False)
        estimate = estimate_pressure(self.blaschke, GeometricPotential(self.blaschke, 2.0), config,
                                     omega_set=self.omega_set)
        self.assertIsNone(estimate.diagnostics.floor)
        self.assertFalse(estimate.diagnostics.floor_applied)


class TestBowenRoot(TestCase):
    def test_blaschke_root_is_one(self):
        fmap = REGISTRY['blaschke_parabolic'].build()
        root = bowen_root(fmap, OracleConfig(), omega_set=omega(fmap, 1))
        self.assertAlmostEqual(1.0, root.h, delta=0.03)

    def test_quad_root_matches_box_counting(self):
        fmap = REGISTRY['quad_parabolic'].build()
        root = bowen_root(fmap, OracleConfig(), omega_set=omega(fmap, 1))
        self.assertGreater(root.h, 1.0)
        self.assertLess(root.h, 1.3)

        sample = sample_inverse_iteration(fmap, 0.5, 20000, seed=0, walkers=8)
        self.assertLess(abs(root.h - box_counting_dimension(sample).dimension), 0.1)


class TestSuffixCollapse(TestCase):
    def setUp(self) -> None:
        self.quad = REGISTRY['quad_parabolic'].build()
        self.omega_set = omega(self.quad, 1)

    def test_omega_seeds(self):
        seeds = omega_seeds(self.quad, self.omega_set.points, depth=3)
        self.assertEqual(1 + 2 + 4 + 8, len(seeds))
        self.assertTrue(np.any(np.abs(seeds + 0.5) < 1e-9))

    def test_bad_segments_carry_no_pressure(self):
        potential = GeometricPotential(self.quad, 2.0)
        for eta in (0.2, 0.5, 0.8):
            constraint = Constraint('bad', 0.05, eta, tuple(self.omega_set.points))
            estimate = pressure_separated(self.quad, potential, 12, 0.05, constraint, mode='ratio')
            self.assertTrue(np.isfinite(estimate.value), msg=eta)
            self.assertLessEqual(estimate.value, 0.05, msg=eta)
            self.assertTrue(any('preimages of Omega' in note for note in estimate.diagnostics.notes))


class TestEquilibrium(TestCase):
    def test_blaschke_half(self):
        fmap = REGISTRY['blaschke_parabolic'].build()
        omega_set = omega(fmap, 1)
        potential = GeometricPotential(fmap, 0.5)
        pressure = estimate_pressure(fmap, potential, OracleConfig(), omega_set=omega_set).value
        measure = equilibrium_approx(fmap, potential, 12)
        report = equilibrium_diagnostics(fmap, potential, measure, omega_set, 0.2 / 4, pressure)
        self.assertTrue(report.entropy_positive)
        self.assertGreater(report.entropy_estimate, 0.0)
        self.assertLess(report.omega_mass, 0.5)
        self.assertLess(abs(a_omega(omega_set, potential)), 1e-9)
