import os
import sys
import string
import logging
import datetime
import traceback
from collections import OrderedDict as odict


LOGGER = logging.getLogger(__name__)

FILE_FORMAT = '%(asctime)s %(name)s %(levelname)s %(message)s'


class ColorFormatter(logging.Formatter):
    """Colors audit check results in console log entries.

    """

    COLORS = odict([
        ('PASSED', '0;32'),
        ('FAILED', '0;31'),
        ('SKIPPED', '0;33')
    ])

    def format(self, record):
        formatted = super(ColorFormatter, self).format(record)

        for result, color in self.COLORS.items():
            formatted = formatted.replace(f' {result}', f' \033[{color}m{result}\033[0m')

        return formatted


def log_filename(prefix, now=None):
    """Returns `prefix-<date>.log` with the date made file name safe.

    """

    if now is None:
        now = datetime.datetime.now()

    allowed = string.digits + string.ascii_letters + '._'
    date = ''.join([char if char in allowed else '_' for char in str(now)])

    return f'{prefix}-{date}.log'


def configure_logging(filename=None,
                      console_log_level=None,
                      file_log_level=None):
    """Send log entries to the console, and to `filename-<date>.log` if
    `filename` is given. Missing parent directories of the log file are
    created.

    The console log level is ``INFO`` and the file log level ``DEBUG``
    unless given.

    """

    root_logger = logging.getLogger()
    root_logger.setLevel(logging.DEBUG)

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(ColorFormatter())
    console_handler.setLevel(console_log_level or logging.INFO)
    root_logger.addHandler(console_handler)

    if not filename:
        return

    filename = log_filename(filename)
    dirname = os.path.dirname(filename)

    if dirname:
        os.makedirs(dirname, exist_ok=True)

    file_handler = logging.FileHandler(filename, 'w')
    file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
    file_handler.setLevel(file_log_level or logging.DEBUG)
    root_logger.addHandler(file_handler)
    LOGGER.debug('Logging to %s.', filename)


def log_lines(text, logger=None):
    """Log each line of given text at info level.

    """

    logger = logger or LOGGER

    for line in text.splitlines():
        logger.info(line)


def log_traceback(logger=None):
    logger = logger or LOGGER

    for entry in traceback.format_exception(*sys.exc_info()):
        for line in entry.splitlines():
            logger.error(line.rstrip())


def trim_docstring(docstring):
    """Strip the common indentation of all lines but the first, as for
    check descriptions in audit summaries.

    """

    if not docstring or not docstring.strip():
        return ''

    lines = docstring.strip().expandtabs().splitlines()
    indents = [len(line) - len(line.lstrip())
               for line in lines[1:]
               if line.strip()]
    indent = min(indents) if indents else 0

    return '\n'.join([lines[0].strip()] + [line[indent:].rstrip() for line in lines[1:]])
