import unittest

import numpy as np

from collapselib.util import iterate, random


class TestUtilRandom(unittest.TestCase):
    def test_generator_repeatable(self):
        a = random.generator(42).random(8)
        b = random.generator(42).random(8)

        self.assertTrue(np.array_equal(a, b))
        self.assertFalse(np.array_equal(a, random.generator(43).random(8)))

    def test_substream_repeatable(self):
        a = random.substream(7, 3).integers(0, 2 ** 32, 16)
        b = random.substream(7, 3).integers(0, 2 ** 32, 16)

        self.assertTrue(np.array_equal(a, b))

    def test_substream_independent(self):
        draws = [tuple(random.substream(7, index).integers(0, 2 ** 32, 4)) for index in range(64)]

        self.assertEqual(len(set(draws)), 64)
        self.assertNotEqual(draws[0], tuple(random.generator(7).integers(0, 2 ** 32, 4)))

    def test_seed_range(self):
        random.generator(2 ** 64 - 1)

        with self.assertRaises(ValueError):
            random.generator(2 ** 64)

        with self.assertRaises(ValueError):
            random.generator(-1)

        with self.assertRaises(ValueError):
            random.substream(0, -1)

    def test_iterate_chunk(self):
        self.assertEqual(list(iterate.iterate_chunk(10, 4)), [(0, 0, 4), (1, 4, 4), (2, 8, 2)])
        self.assertEqual(list(iterate.iterate_chunk(4, 4)), [(0, 0, 4)])
        self.assertEqual(list(iterate.iterate_chunk(0, 4)), [])

        with self.assertRaises(ValueError):
            list(iterate.iterate_chunk(10, 0))

    def test_chunks_cover_trials(self):
        for total, size in ((1, 1), (1000, 7), (4096, 4096), (100000, 4096)):
            with self.subTest(total=total, size=size):
                chunks = list(iterate.iterate_chunk(total, size))

                self.assertEqual(sum(count for _, _, count in chunks), total)
                self.assertEqual([start for _, start, _ in chunks], list(range(0, total, size)))


if __name__ == '__main__':
    unittest.main()
