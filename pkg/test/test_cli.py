import copy
import io
import json
import os
import shutil
from contextlib import redirect_stdout
from tempfile import mkdtemp, mktemp
from unittest import TestCase

import numpy as np

from parabolic.__main__ import DEFAULTS, bowen_ladder, bowen_params, build_parser, curve_root, load_settings, main, \
    resolve, t_grid
from parabolic.thermo.metric import MilnorMetric
from parabolic.thermo.pressure import CurveRow

G_SMALL_CONFIG = {
    'numerics': {'omega_scope': 2},
    'julia': {'walkers': 4},
    'decomposition': {'segments': 40, 'max_length': 8},
    'pressure': {'n': 8, 'periodic_n': 5, 't_max': 1.0, 't_step': 0.5},
    'spec': {'families': 2, 'family_size': 2, 'max_length': 3, 'n_max': 8},
}


class TestCommandLine(TestCase):
    def setUp(self) -> None:
        self.out = mkdtemp(prefix='unittest-')
        self.config_file = os.path.join(self.out, 'config.json')
        with open(self.config_file, 'w') as f:
            json.dump(G_SMALL_CONFIG, f)

    def tearDown(self) -> None:
        shutil.rmtree(self.out, ignore_errors=True)

    def run_cli(self, *argv: str):
        stdout = io.StringIO()
        with redirect_stdout(stdout):
            code = main([*argv, '--config', self.config_file, '--out', self.out])

        return code, json.loads(stdout.getvalue())

    def read_report(self, name: str) -> dict:
        with open(os.path.join(self.out, f'{name}.json')) as f:
            return json.load(f)

    def test_missing_source_is_a_usage_error(self):
        code, body = self.run_cli('analyze')
        self.assertEqual(1, code)
        self.assertEqual(1, body['exit_code'])
        self.assertIn('--example', body['message'])

    def test_unknown_command(self):
        stdout = io.StringIO()
        with redirect_stdout(stdout):
            self.assertEqual(1, main(['transmogrify']))

        self.assertEqual('_UsageError', json.loads(stdout.getvalue())['error'])

    def test_missing_config_file(self):
        stdout = io.StringIO()
        with redirect_stdout(stdout):
            code = main(['gap-check', '--example', 'square', '--config', self.config_file + '.missing'])

        self.assertEqual(1, code)

    def test_missing_map_file(self):
        code, body = self.run_cli('gap-check', '--map', os.path.join(self.out, 'nowhere.json'))
        self.assertEqual(1, code)
        self.assertEqual('MapFormatError', body['error'])

    def test_invalid_eta(self):
        code, body = self.run_cli('decompose', '--example', 'square', '--eta', '1.5')
        self.assertEqual(1, code)
        self.assertIn('eta', body['message'])

    def test_gap_check_needs_a_parabolic_map(self):
        code, body = self.run_cli('gap-check', '--example', 'square')
        self.assertEqual(2, code)
        self.assertEqual('PreconditionError', body['error'])

    def test_gap_check_on_quad(self):
        code, body = self.run_cli('gap-check', '--example', 'quad_parabolic', '--potential', 'geometric:t=0.5')
        self.assertEqual(0, code)
        self.assertLess(abs(body['report']['A']), 1e-9)
        self.assertEqual(body, self.read_report('gap_check'))

    def test_decompose_matches_exhaustive_oracle(self):
        code, body = self.run_cli('decompose', '--example', 'quad_parabolic', '--count', '800')
        self.assertEqual(0, code)
        self.assertEqual(40, body['segments'])
        self.assertEqual(0, body['oracle_mismatches'])
        self.assertEqual(0, body['good_outside_D'])

        with open(os.path.join(self.out, 'decompose.csv')) as f:
            lines = f.read().splitlines()

        self.assertTrue(lines[0].startswith('# parabolic '))
        self.assertEqual('index,n,g,s,re,im,good,in_D,pattern', lines[1])
        self.assertEqual(42, len(lines))

    def test_analyze_flags_critical_point_on_julia(self):
        code, body = self.run_cli('analyze', '--example', 'cheb', '--count', '4000')
        self.assertEqual(2, code)
        self.assertEqual('PreconditionError', body['error'])

        report = self.read_report('analyze')
        self.assertFalse(report['preconditions']['clearance_ok'])
        self.assertEqual([], report['omega']['points'])
        self.assertIsNone(report['calibration'])

    def test_pressure_curve_on_square(self):
        code, body = self.run_cli('pressure-curve', '--example', 'square', '--oracle', 'tree')
        self.assertEqual(0, code)
        self.assertEqual([0.0, 0.5, 1.0], [row['t'] for row in body['rows']])
        self.assertAlmostEqual(0.0, body['rows'][-1]['p_tree'], places=6)
        self.assertTrue(os.path.exists(os.path.join(self.out, 'pressure_curve.csv')))

    def test_equilibrium_on_square(self):
        code, body = self.run_cli('equilibrium', '--example', 'square', '--potential', 'geometric:t=1', '--n', '6')
        self.assertEqual(0, code)
        self.assertEqual(64, body['atoms'])
        self.assertTrue(body['entropy_positive'])

    def test_selftest(self):
        code, body = self.run_cli('selftest')
        self.assertEqual(0, code)
        self.assertTrue(body['passed'])
        self.assertTrue(all(check['passed'] for check in body['checks']))

    def test_spec_epsilon_above_half_alpha(self):
        code, body = self.run_cli('verify-spec', '--example', 'quad_parabolic', '--epsilon', '0.2')
        self.assertEqual(1, code)
        self.assertIn('alpha/2', body['message'])

    def test_reruns_are_byte_identical(self):
        outputs = []
        for _ in range(2):
            self.run_cli('decompose', '--example', 'quad_parabolic', '--count', '800', '--seed', '3')
            with open(os.path.join(self.out, 'decompose.json'), 'rb') as f, \
                    open(os.path.join(self.out, 'decompose.csv'), 'rb') as g:
                outputs.append((f.read(), g.read()))

        self.assertEqual(outputs[0], outputs[1])


class TestResolve(TestCase):
    def setUp(self) -> None:
        self.settings = copy.deepcopy(DEFAULTS)

    def test_defaults(self):
        run = resolve(build_parser().parse_args(['gap-check', '--example', 'square']), self.settings)
        self.assertEqual('square', run.source)
        self.assertEqual('tree', run.oracle)
        self.assertEqual(0.05, run.epsilon)

    def test_spec_commands_use_the_spec_epsilon(self):
        run = resolve(build_parser().parse_args(['verify-spec', '--example', 'square']), self.settings)
        self.assertEqual(self.settings['spec']['epsilon'], run.epsilon)

    def test_spec_defaults_respect_half_alpha(self):
        for command in ('verify-spec', 'verify-bowen'):
            run = resolve(build_parser().parse_args([command, '--example', 'quad_parabolic']), self.settings)
            run.validate()
            self.assertLessEqual(run.epsilon, run.alpha / 2, msg=command)

    def test_spec_epsilon_above_half_alpha_is_rejected(self):
        args = build_parser().parse_args(['verify-bowen', '--example', 'quad_parabolic', '--epsilon', '0.15'])
        with self.assertRaises(ValueError):
            resolve(args, self.settings).validate()

    def test_bowen_ladder(self):
        self.assertEqual([0.2, 0.1], bowen_ladder([0.2, 0.1, 0.05, 0.02], 0.2, 0.05))
        self.assertEqual([0.1], bowen_ladder([0.2, 0.05], 0.1, 0.1))
        self.assertEqual([0.1], bowen_ladder([0.2, 0.1, 0.05], 0.1, 0.05))

    def test_bowen_params_use_the_calibrated_metric(self):
        run = resolve(build_parser().parse_args(['verify-bowen', '--example', 'quad_parabolic']), self.settings)
        omega_points = np.array([0.5 + 0j])
        metric = MilnorMetric(0.1, 3.0, np.array([0j]), omega_points, 1.2)
        params = bowen_params(run, metric, omega_points)
        self.assertEqual(0.2, run.alpha)
        self.assertEqual(0.1, params.alpha)
        self.assertEqual(run.eta, params.eta)
        self.assertIs(metric, params.metric)
        self.assertEqual('milnor', params.distance)

    def test_t_grid(self):
        args = build_parser().parse_args(['pressure-curve', '--example', 'square', '--t-min', '0.5', '--t-max', '1.1',
                                          '--t-step', '0.2'])
        self.assertEqual([0.5, 0.7, 0.9, 1.1], t_grid(resolve(args, self.settings)))

    def test_settings_overlay(self):
        config_file = mktemp(suffix='.json', prefix='unittest-')
        try:
            with open(config_file, 'w') as f:
                json.dump({'pressure': {'n': 9}, 'extra': {'key': 1}}, f)

            settings = load_settings(config_file)
        finally:
            os.unlink(config_file)

        self.assertEqual(9, settings['pressure']['n'])
        self.assertEqual('last', settings['pressure']['extrapolation'])
        self.assertEqual({'key': 1}, settings['extra'])
        self.assertEqual(14, DEFAULTS['pressure']['n'])

        with self.assertRaises(OSError):
            load_settings(config_file)

    def test_curve_root_interpolates(self):
        rows = [CurveRow(0.0, 1.0, 0.0, 0.0, 8, 0.0), CurveRow(1.0, 0.1, 0.0, 0.0, 8, 0.0),
                CurveRow(2.0, -0.8, 0.0, 0.0, 8, 0.0)]
        self.assertAlmostEqual(1.0 + 0.05 / 0.9, curve_root(rows, 0.05))
        self.assertIsNone(curve_root(rows[:2], 0.05))
