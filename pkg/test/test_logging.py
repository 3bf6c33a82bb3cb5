import io
import logging as std_logging
import unittest

from collapselib import logging
from collapselib.logging import classes
from collapselib.logging.handlers.console import ColoramaStreamHandler


class _Runner(classes.Logged):
    pass


class TestLogging(unittest.TestCase):
    def test_levels(self):
        self.assertLess(logging.META, logging.TRACE)
        self.assertLess(logging.TRACE, logging.EVENT)
        self.assertLess(logging.EVENT, logging.DEBUG)
        self.assertEqual(logging.NAME_TO_LEVEL['EVENT'], logging.EVENT)
        self.assertEqual(std_logging.getLevelName(logging.EVENT), 'EVENT')

    def test_logger_class(self):
        self.assertIsInstance(logging.get_logger('collapselib.test'), logging.ExtendedLogger)

    def test_context(self):
        logger = logging.get_logger('collapselib.test.context')

        with self.assertLogs(logger, logging.EVENT) as cm:
            logger.event('hit', seed=7, trial=3)
            logger.info('plain')

        self.assertEqual(cm.records[0].levelname, 'EVENT')
        self.assertEqual((cm.records[0].seed, cm.records[0].trial), (7, 3))
        self.assertIsNone(cm.records[1].seed)

    def test_console_handler(self):
        stream = io.StringIO()
        handler = ColoramaStreamHandler(stream)
        handler.setFormatter(std_logging.Formatter('%(levelname)s %(message)s'))

        logger = logging.get_logger('collapselib.test.console')
        logger.propagate = False
        logger.setLevel(logging.EVENT)
        logger.addHandler(handler)
        self.addCleanup(logger.removeHandler, handler)

        logger.event('localization', seed=42, trial=9)
        logger.warning('balanced marble')

        lines = stream.getvalue().splitlines()

        self.assertFalse(handler.is_tty)
        self.assertEqual(lines[0], 'EVENT localization [seed=42, trial=9]')
        self.assertEqual(lines[1], 'WARNING balanced marble')

    def test_logged(self):
        runner = _Runner('unit')

        self.assertEqual(runner.logger().name, '_Runner:unit')
        self.assertEqual(_Runner.class_logger().name, '_Runner:cls')

        with self.assertLogs(runner.logger(), logging.DEBUG) as cm:
            with runner.timed('block'):
                pass

        self.assertEqual(len(cm.records), 2)
        self.assertTrue(cm.records[0].getMessage().startswith('Start block'))
        self.assertTrue(cm.records[1].getMessage().startswith('Complete block'))


if __name__ == '__main__':
    unittest.main()
