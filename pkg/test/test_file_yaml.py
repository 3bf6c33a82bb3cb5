import os
import tempfile
import unittest
from unittest import mock

from collapselib.data import unit
from collapselib.file import yaml


class TestFileYaml(unittest.TestCase):
    def test_plain(self):
        document = yaml.load('alpha_sq: 0.9\nn: 916\nduration: 1e-4\n')

        self.assertEqual(document, {'alpha_sq': 0.9, 'n': 916, 'duration': '1e-4'})

    def test_quantity(self):
        document = yaml.load('duration: !quantity 1 day\nalpha_loc: !quantity 1e14 m**-2\n')

        self.assertIsInstance(document['duration'], unit.Quantity)
        self.assertAlmostEqual(document['duration'].m_as('s'), 86400.0, 9)
        self.assertAlmostEqual(document['alpha_loc'].m_as('cm**-2') / 1e10, 1.0, 12)

    def test_quantity_error(self):
        with self.assertRaises(yaml.QuantityTagError):
            yaml.load('duration: !quantity ten furlongz\n')

    def test_env(self):
        with mock.patch.dict(os.environ, {'COLLAPSE_TEST_SEED': '42'}):
            document = yaml.load('seed: !env COLLAPSE_TEST_SEED\nother: !env COLLAPSE_TEST_MISSING 7\n'
                                 'none: !env COLLAPSE_TEST_MISSING\n')

        self.assertEqual(document, {'seed': '42', 'other': '7', 'none': None})

    def test_env_required(self):
        with mock.patch.dict(os.environ, {'COLLAPSE_TEST_SEED': '42'}):
            self.assertEqual(yaml.load('seed: !envreq COLLAPSE_TEST_SEED\n'), {'seed': '42'})

        with mock.patch.dict(os.environ, {}, clear=True):
            with self.assertRaises(yaml.EnvironmentTagError):
                yaml.load('seed: !envreq COLLAPSE_TEST_SEED\n')

    def test_include(self):
        with tempfile.TemporaryDirectory() as root:
            with open(os.path.join(root, 'marbles.yaml'), 'w') as f:
                f.write('alpha_sq: 0.999\np: 0.4\n')

            with open(os.path.join(root, 'run.yaml'), 'w') as f:
                f.write('criteria: !include marbles.yaml\n')

            with open(os.path.join(root, 'run.yaml')) as f:
                document = yaml.load(f)

        self.assertEqual(document, {'criteria': {'alpha_sq': 0.999, 'p': 0.4}})

    def test_include_missing(self):
        with tempfile.TemporaryDirectory() as root:
            path = os.path.join(root, 'run.yaml')

            with open(path, 'w') as f:
                f.write('criteria: !include missing.yaml\n')

            with open(path) as f:
                with self.assertRaises(yaml.IncludeTagError):
                    yaml.load(f)

    def test_include_from_string(self):
        with self.assertRaises(yaml.IncludeTagError):
            yaml.load('criteria: !include marbles.yaml\n')

    def test_include_restricted(self):
        with tempfile.TemporaryDirectory() as root, tempfile.TemporaryDirectory() as allowed:
            with open(os.path.join(root, 'marbles.yaml'), 'w') as f:
                f.write('p: 0.4\n')

            path = os.path.join(root, 'run.yaml')

            with open(path, 'w') as f:
                f.write('criteria: !include marbles.yaml\n')

            with open(path) as f:
                with self.assertRaises(yaml.IncludeTagError):
                    yaml.load(f, include_paths=[allowed])

    def test_include_path_not_directory(self):
        with self.assertRaises(yaml.ExtendedError):
            yaml.load('p: 0.4\n', include_paths=['/nonexistent/collapselib'])


if __name__ == '__main__':
    unittest.main()
