"""
Tests for package logging setup.
"""

import logging

import pytest

from coxplasso.config.settings import LoggingConfig
from coxplasso.utils.logging import (
    PACKAGE_LOGGER,
    ColoredFormatter,
    configure_logging,
    get_logger,
    set_log_level,
    setup_logger,
)


@pytest.fixture
def package_logger():
    """The package logger, restored after the test."""
    logger = logging.getLogger(PACKAGE_LOGGER)
    handlers, level = list(logger.handlers), logger.level
    yield logger
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        if handler not in handlers:
            handler.close()
    for handler in handlers:
        logger.addHandler(handler)
    logger.setLevel(level)


class TestGetLogger:

    def test_module_loggers_propagate_to_package(self):
        logger = get_logger('coxplasso.models.solver')
        assert logger.handlers == []
        assert logger.propagate is True
        assert logger.parent.name in ('coxplasso.models', PACKAGE_LOGGER)

    def test_outside_logger_gets_handler(self):
        logger = get_logger('bench_script_test')
        assert len(logger.handlers) == 1
        assert logger.propagate is False

    def test_setup_is_idempotent(self):
        first = setup_logger('bench_script_twice')
        second = setup_logger('bench_script_twice')
        assert first is second
        assert len(second.handlers) == 1


class TestLevels:

    def test_set_log_level_is_inherited(self, package_logger):
        set_log_level('debug')
        assert get_logger('coxplasso.data.dataset').getEffectiveLevel() == logging.DEBUG
        set_log_level('ERROR')
        assert get_logger('coxplasso.data.dataset').getEffectiveLevel() == logging.ERROR


class TestConfigureLogging:

    def test_silent_config_installs_null_handler(self, package_logger):
        configure_logging(LoggingConfig(console_output=False, file_output=False))
        assert len(package_logger.handlers) == 1
        assert isinstance(package_logger.handlers[0], logging.NullHandler)

    def test_file_output_writes_module_records(self, package_logger, tmp_path):
        configure_logging(LoggingConfig(log_dir=str(tmp_path), log_level='INFO',
                                        console_output=False, file_output=True))
        get_logger('coxplasso.models.path').info("path fit started")
        for handler in package_logger.handlers:
            handler.flush()

        content = (tmp_path / 'coxplasso.log').read_text()
        assert 'coxplasso.models.path - INFO - path fit started' in content

    def test_reconfigure_does_not_duplicate(self, package_logger):
        config = LoggingConfig(console_output=True, file_output=False)
        configure_logging(config)
        configure_logging(config)
        assert len(package_logger.handlers) == 1


class TestColoredFormatter:

    def test_plain_when_not_a_terminal(self):
        formatter = ColoredFormatter()
        formatter.use_color = False
        record = logging.LogRecord('coxplasso', logging.WARNING, __file__, 1, 'msg', None, None)
        assert '\033[' not in formatter.format(record)

    def test_color_does_not_leak_into_record(self):
        formatter = ColoredFormatter()
        formatter.use_color = True
        record = logging.LogRecord('coxplasso', logging.ERROR, __file__, 1, 'msg', None, None)
        assert '\033[31mERROR' in formatter.format(record)
        assert record.levelname == 'ERROR'
