import time
import logging
import threading

from irsentropy.audit import Check


LOGGER = logging.getLogger(__name__)


class NamedCheck(Check):
    """Named check counting its runs.

    """

    count = 0

    def __init__(self, name, work_time=0.0):
        super(NamedCheck, self).__init__()
        self.name = "check_" + name
        self.work_time = work_time

    def run(self):
        NamedCheck.count += 1
        time.sleep(self.work_time)
        LOGGER.debug("Named check(%s) run from thread %s.",
                     self.name,
                     threading.current_thread())

        self.assert_true(True)
        self.assert_equal(False, False)
        self.assert_less_equal(1, 1)


class NotExecutedCheck(Check):
    """A check that should never be run.

    """

    count = 0

    def __init__(self, name):
        super(NotExecutedCheck, self).__init__()
        self.name = "not_executed_" + name

    def run(self):
        NotExecutedCheck.count += 1
