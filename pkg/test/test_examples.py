import json
import os
from tempfile import mktemp
from unittest import TestCase

from parabolic.examples import REGISTRY, MapFormatError, load_map, parse_map


class TestRegistry(TestCase):
    def test_every_example_builds(self):
        for name, example in REGISTRY.items():
            fmap = example.build()
            self.assertEqual(2, fmap.degree, msg=name)
            self.assertEqual(name, example.name)
            self.assertIsNotNone(example.z0)

    def test_str(self):
        self.assertEqual('square: z^2, J is the unit circle', str(REGISTRY['square']))


class TestParseMap(TestCase):
    def test_complex_coefficients(self):
        example = parse_map({'numerator': [[0, 1], 0, 1], 'denominator': [1], 'z0': [0.5, 0.5]}, 'c=i')
        self.assertEqual('c=i', example.name)
        self.assertEqual([1j, 0j, 1 + 0j], example.numerator)
        self.assertEqual(0.5 + 0.5j, example.z0)
        self.assertAlmostEqual(0.0, abs(example.build().evaluate(0.0) - 1j))

    def test_malformed_documents(self):
        documents = (
            [1, 2],
            {'numerator': [0, 0, 1]},
            {'numerator': [0, [1, 2, 3]], 'denominator': [1]},
            {'numerator': [0, True], 'denominator': [1]},
            {'numerator': ['1'], 'denominator': [1]},
            {'numerator': 3, 'denominator': [1]},
        )
        for doc in documents:
            with self.assertRaises(MapFormatError, msg=repr(doc)):
                parse_map(doc)

    def test_degenerate_map(self):
        with self.assertRaises(MapFormatError):
            parse_map({'numerator': [0, 1], 'denominator': [0, 1]}).build()


class TestLoadMap(TestCase):
    def setUp(self) -> None:
        self.map_file = mktemp(suffix='.json', prefix='unittest-')

    def tearDown(self) -> None:
        if os.path.exists(self.map_file):
            os.unlink(self.map_file)

    def test_registry_name(self):
        self.assertIs(REGISTRY['cheb'], load_map('cheb'))

    def test_map_file(self):
        with open(self.map_file, 'w') as f:
            json.dump({'numerator': [0.25, 0, 1], 'denominator': [1], 'z0': 0.5, 'name': 'cauliflower'}, f)

        example = load_map(self.map_file)
        self.assertEqual('cauliflower', example.name)
        self.assertEqual(REGISTRY['quad_parabolic'].build().fingerprint(), example.build().fingerprint())

    def test_missing_file(self):
        with self.assertRaises(MapFormatError):
            load_map(self.map_file)

    def test_broken_json(self):
        with open(self.map_file, 'w') as f:
            f.write('{"numerator": [')

        with self.assertRaises(MapFormatError):
            load_map(self.map_file)
