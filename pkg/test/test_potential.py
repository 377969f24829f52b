import math
import os
from tempfile import mktemp
from unittest import TestCase

import numpy as np

from parabolic.dynamics.julia import sample_inverse_iteration
from parabolic.examples import REGISTRY
from parabolic.thermo.potential import CombinationPotential, ConstantPotential, GeometricPotential, HolderData, \
    IteratePotential, NearCriticalError, PotentialError, TablePotential, birkhoff_sum, birkhoff_sums, \
    geometric_holder, parse_potential


class TestGeometricPotential(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()

    def test_scalar_value(self):
        phi = GeometricPotential(self.square, 1.0)
        self.assertIsInstance(phi(1.0), float)
        self.assertAlmostEqual(-math.log(2), phi(1.0))
        self.assertAlmostEqual(-0.5 * math.log(4), GeometricPotential(self.square, 0.5)(2.0))

    def test_array_shape_is_kept(self):
        z = np.exp(1j * np.linspace(0, 1, 6)).reshape(2, 3)
        values = GeometricPotential(self.square, 2.0).evaluate(z)
        self.assertEqual((2, 3), values.shape)
        np.testing.assert_allclose(values, -2 * math.log(2))

    def test_near_critical_raises(self):
        with self.assertRaises(NearCriticalError) as ctx:
            GeometricPotential(self.square, 1.0).evaluate(np.array([1.0, 0.0]))

        self.assertEqual(1, ctx.exception.index)

    def test_zero_t_is_zero_potential(self):
        phi = GeometricPotential(REGISTRY['blaschke_parabolic'].build(), 0.0)
        np.testing.assert_allclose(phi.evaluate(np.array([0.3j, -1.0])), 0.0)


class TestCombinations(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()
        self.phi = GeometricPotential(self.square, 1.0)

    def test_shifted(self):
        z = np.exp(1j * np.array([0.1, 2.0]))
        np.testing.assert_allclose(self.phi.shifted(0.3).evaluate(z), self.phi.evaluate(z) + 0.3)
        np.testing.assert_allclose((self.phi + 0.3).evaluate(z), self.phi.evaluate(z) + 0.3)

    def test_sum_of_potentials(self):
        total = self.phi + ConstantPotential(1.0)
        self.assertIsInstance(total, CombinationPotential)
        self.assertAlmostEqual(1 - math.log(2), total(1.0))

    def test_holder_data_combines(self):
        combination = CombinationPotential([(2.0, ConstantPotential(1.0)),
                                            (-1.0, GeometricPotential(self.square, 1.0, holder=HolderData(3.0, 0.5)))])
        self.assertEqual(HolderData(3.0, 0.5), combination.holder)
        self.assertIsNone(CombinationPotential([(1.0, self.phi)]).holder)

    def test_empty_combination_raises(self):
        with self.assertRaises(PotentialError):
            CombinationPotential([])


class TestParsePotential(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()

    def test_spec_round_trip(self):
        for spec in ('geometric:t=0.5', 'const:c=0.3', 'mix:0.5*geometric:t=1+0.5*const:c=0'):
            self.assertEqual(spec, parse_potential(spec, self.square).spec(), msg=spec)

    def test_mix_evaluates(self):
        phi = parse_potential('mix:0.5*geometric:t=1+0.5*const:c=2', self.square)
        self.assertAlmostEqual(-0.5 * math.log(2) + 1.0, phi(1.0))

    def test_declared_holder(self):
        phi = parse_potential('geometric:t=1,K=3,a=0.5', self.square)
        self.assertEqual(HolderData(3.0, 0.5), phi.holder)

    def test_malformed_specs(self):
        for spec in ('geometric', 'foo:x=1', 'geometric:t', 'geometric:s=1', 'const:c=abc',
                     'geometric:t=1,metric=hyperbolic'):
            with self.assertRaises(PotentialError, msg=spec):
                parse_potential(spec, self.square)

    def test_milnor_needs_a_metric(self):
        with self.assertRaises(PotentialError):
            parse_potential('geometric:t=1,metric=milnor', self.square)


class TestTablePotential(TestCase):
    def setUp(self) -> None:
        self.table_file = mktemp(suffix='.csv', prefix='unittest-')
        with open(self.table_file, 'w') as f:
            f.write('# re,im,value\n1,0,0.5\n-1,0,-0.5\n0,1,2\n')

    def tearDown(self) -> None:
        if os.path.exists(self.table_file):
            os.unlink(self.table_file)

    def test_nearest_neighbour_lookup(self):
        phi = TablePotential.load(self.table_file)
        self.assertAlmostEqual(0.5, phi(0.9 + 0.1j))
        np.testing.assert_allclose(phi.evaluate(np.array([-1.2, 0.1 + 0.8j])), [-0.5, 2.0])
        self.assertEqual(f'table:file={self.table_file}', phi.spec())

    def test_parse_table_spec(self):
        phi = parse_potential(f'table:file={self.table_file},K=1', REGISTRY['square'].build())
        self.assertEqual(HolderData(1.0, 1.0), phi.holder)

    def test_missing_file(self):
        with self.assertRaises(PotentialError):
            TablePotential.load(self.table_file + '.missing')

    def test_mismatched_table(self):
        with self.assertRaises(PotentialError):
            TablePotential([1j, 2j], [0.0])


class TestBirkhoffSums(TestCase):
    def setUp(self) -> None:
        self.square = REGISTRY['square'].build()
        self.phi = GeometricPotential(self.square, 1.0)

    def test_fixed_point_sum(self):
        result = birkhoff_sum(self.square, self.phi, 1.0, 5)
        self.assertEqual(5, result.length)
        self.assertAlmostEqual(-5 * math.log(2), result.value)

    def test_batch_matches_scalar(self):
        z = np.exp(1j * np.array([0.4, 1.3, 2.9]))
        batch = birkhoff_sums(self.square, ConstantPotential(0.25), z, 4)
        np.testing.assert_allclose(batch, 1.0)

    def test_length_must_be_positive(self):
        with self.assertRaises(ValueError):
            birkhoff_sum(self.square, self.phi, 1.0, 0)

    def test_near_critical_orbit_reports_step(self):
        quad = REGISTRY['quad_parabolic'].build()
        # 0.5j maps onto the critical point 0
        with self.assertRaises(NearCriticalError) as ctx:
            birkhoff_sum(quad, GeometricPotential(quad, 1.0), 0.5j, 3)

        self.assertEqual(1, ctx.exception.index)

    def test_iterate_potential(self):
        phi_3 = IteratePotential(self.square, self.phi, 3)
        self.assertAlmostEqual(-3 * math.log(2), phi_3(1.0))
        self.assertEqual('iterate:k=3,geometric:t=1', phi_3.spec())

    def test_geometric_holder_on_the_circle(self):
        sample = sample_inverse_iteration(self.square, 1.0, 500, seed=0)
        holder = geometric_holder(self.square, 2.0, sample.points)
        self.assertAlmostEqual(2.0, holder.K, places=6)
        self.assertEqual(1.0, holder.exponent)
