import json
import os
import shutil
from tempfile import mkdtemp
from typing import NamedTuple
from unittest import TestCase

import numpy as np
from lxml import etree

from parabolic import __version__
from parabolic.report import SVG_NS, dumps, jsonable, plot_pressure_curve, write_csv, write_json
from parabolic.thermo.pressure import CurveRow


class Sample(NamedTuple):
    name: str
    value: float
    point: complex


class TestJsonable(TestCase):
    def test_scalars(self):
        self.assertEqual([1.5, -2.0], jsonable(1.5 - 2j))
        self.assertIsNone(jsonable(float('nan')))
        self.assertIsNone(jsonable(np.inf))
        self.assertIs(True, jsonable(np.bool_(True)))
        self.assertEqual(3, jsonable(np.int64(3)))

    def test_containers(self):
        self.assertEqual({'name': 'a', 'value': None, 'point': [0.0, 1.0]}, jsonable(Sample('a', float('nan'), 1j)))
        self.assertEqual([[1.0, 0.0], [0.0, -1.0]], jsonable(np.array([1, -1j])))
        self.assertEqual({'3': [1, 2]}, jsonable({3: (1, 2)}))

    def test_dumps_is_stable(self):
        text = dumps({'b': 1, 'a': float('inf')})
        self.assertEqual('{\n  "a": null,\n  "b": 1\n}\n', text)


class TestArtifacts(TestCase):
    def setUp(self) -> None:
        self.out = mkdtemp(prefix='unittest-')

    def tearDown(self) -> None:
        shutil.rmtree(self.out, ignore_errors=True)

    def test_json_in_new_directory(self):
        path = write_json(os.path.join(self.out, 'nested', 'report.json'), {'z': 2j})
        with open(path) as f:
            self.assertEqual({'z': [0.0, 2.0]}, json.load(f))

    def test_csv_with_config_line(self):
        path = write_csv(os.path.join(self.out, 'table.csv'), ('t', 'p', 'ok'),
                         [(0.0, 0.693147180559945, True), (1.0, float('nan'), False)], {'seed': 0})
        with open(path) as f:
            lines = f.read().splitlines()

        self.assertEqual(f'# parabolic {__version__} config {{"seed": 0}}', lines[0])
        self.assertEqual(['t,p,ok', '0,0.69314718056,1', '1,,0'], lines[1:])

    def test_csv_without_config(self):
        path = write_csv(os.path.join(self.out, 'plain.csv'), ('a',), [(1,)])
        with open(path) as f:
            self.assertEqual('a\n1\n', f.read())

    def test_svg_carries_the_config(self):
        rows = [CurveRow(t, (1 - t) * np.log(2), float('nan'), float('nan'), 8, 0.0) for t in (0.0, 0.5, 1.0, 1.5)]
        first = plot_pressure_curve(os.path.join(self.out, 'a.svg'), rows, {'seed': 0}, np.log(2), 1.0)
        second = plot_pressure_curve(os.path.join(self.out, 'b.svg'), rows, {'seed': 0}, np.log(2), 1.0)

        root = etree.parse(first).getroot()
        metadata = root.find(f'{{{SVG_NS}}}metadata[@id="parabolic-run"]')
        self.assertIsNotNone(metadata)
        self.assertEqual({'version': __version__, 'config': {'seed': 0}}, json.loads(metadata.text))

        with open(first, 'rb') as f, open(second, 'rb') as g:
            self.assertEqual(f.read(), g.read())
