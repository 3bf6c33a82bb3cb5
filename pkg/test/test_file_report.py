import contextlib
import io
import json
import os
import tempfile
import unittest

import numpy as np

from collapselib.file import report
from collapselib.numeric.logprob import LogValue


class TestFileReport(unittest.TestCase):
    def test_format_float(self):
        self.assertEqual(report.format_float(0.1), '0.10000000000000001')
        self.assertEqual(float(report.format_float(1 / 3)), 1 / 3)

    def test_log_columns(self):
        self.assertEqual(report.log_columns('tail', LogValue.zero()), {'tail_sign': 0, 'tail_log10_mag': ''})

        columns = report.log_columns('mass', LogValue.from_real(-1000.0))

        self.assertEqual(columns['mass_sign'], -1)
        self.assertAlmostEqual(columns['mass_log10_mag'], 3.0, 14)

    def test_json_sorted(self):
        a = report.dumps_json({'b': 1, 'a': {'d': 2, 'c': 3}})
        b = report.dumps_json({'a': {'c': 3, 'd': 2}, 'b': 1})

        self.assertEqual(a, b)
        self.assertTrue(a.endswith('\n'))
        self.assertLess(a.index('"a"'), a.index('"b"'))

    def test_json_types(self):
        content = report.dumps_json({
            'value': LogValue.from_real(100.0),
            'count': np.int64(3),
            'rate': np.float64(0.5),
            'flag': np.bool_(True),
            'histogram': np.array([1, 2, 3])
        })

        decoded = json.loads(content)

        self.assertEqual(decoded['value']['sign'], 1)
        self.assertAlmostEqual(decoded['value']['log10_mag'], 2.0, 14)
        self.assertEqual(decoded['count'], 3)
        self.assertEqual(decoded['rate'], 0.5)
        self.assertIs(decoded['flag'], True)
        self.assertEqual(decoded['histogram'], [1, 2, 3])

        with self.assertRaises(TypeError):
            report.dumps_json({'x': object()})

    def test_csv(self):
        content = report.dumps_csv(('n', 'holds', 'value', 'missing', 'label'),
                                   [(1, True, 0.5, None, 'in'), (np.int64(2), np.bool_(False), 0.1, None, 'out')])

        self.assertEqual(content, 'n,holds,value,missing,label\n'
                                  '1,true,0.5,,in\n'
                                  '2,false,0.10000000000000001,,out\n')

    def test_csv_row_length(self):
        with self.assertRaises(ValueError):
            report.dumps_csv(('a', 'b'), [(1,)])

    def test_write_file(self):
        with tempfile.TemporaryDirectory() as root:
            path = os.path.join(root, 'nested', 'report.json')

            report.write('{}\n', path)

            with open(path, encoding='utf-8') as f:
                self.assertEqual(f.read(), '{}\n')

    def test_write_stdout(self):
        buffer = io.StringIO()

        with contextlib.redirect_stdout(buffer):
            report.write('k,count\n')

        self.assertEqual(buffer.getvalue(), 'k,count\n')


if __name__ == '__main__':
    unittest.main()
