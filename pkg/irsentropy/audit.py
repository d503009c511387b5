"""Graph audits run by a sequencer. Checks grouped in lists are executed
in serial and checks grouped in tuples in parallel, one thread per
branch.

"""

import time
import logging
import datetime
import platform
import threading
import traceback
from collections import OrderedDict as odict

from humanfriendly import format_timespan

from .errors import Error
from .gluing import GluedGraph
from .gluing import audit_self_normalizing
from .logs import log_lines
from .logs import log_traceback
from .logs import trim_docstring
from .schreier import schreier_violations


LOGGER = logging.getLogger(__name__)

_RUN_HEADER_FMT = '''
Name: {name}
Date: {date}
Node: {node}\
'''

_CHECK_HEADER_FMT = '''
---------------------------------------------------------------

Name: {name}
Description:

{description}

'''

_CHECK_FOOTER_FMT = '''
{name}: {result} in {duration}\
'''

_SUMMARY_FMT = '''
---------------------- Audit summary begin ---------------------

{summary}

Execution time: {execution_time}
Result: {result}

----------------------- Audit summary end ----------------------
'''


class AuditFailedError(Error):
    pass


class AuditSkippedError(Error):
    pass


class Check(object):
    """Base class of a check executed by the sequencer.

    """

    PASSED = "PASSED"
    FAILED = "FAILED"
    SKIPPED = "SKIPPED"

    def __init__(self, name=None):
        if name is not None:
            self.name = name
        else:
            self.name = type(self).__name__

        self.result = None
        self.message = None
        self.sequencer = None
        self.execution_time = None

    def setup(self):
        pass

    def teardown(self):
        pass

    def run(self):
        """The check logic. The check fails if any exception is raised,
        otherwise it passes.

        """

        pass

    def _fail(self, text):
        filename, line, _, _ = traceback.extract_stack()[-3]

        raise AuditFailedError(f'{filename}:{line}: {text}')

    def assert_equal(self, first, second):
        if first != second:
            self._fail(f'{first!r} is not equal to {second!r}')

    def assert_true(self, condition):
        if not condition:
            self._fail(f'{condition} is not true')

    def assert_false(self, condition):
        if condition:
            self._fail(f'{condition} is not false')

    def assert_less_equal(self, first, second):
        if first > second:
            self._fail(f'{first!r} is not less than or equal to {second!r}')


class Result(object):

    def __init__(self, passed=0, failed=0, skipped=0, total=0):
        self.passed = passed
        self.failed = failed
        self.skipped = skipped
        self.total = total

    def __iter__(self):
        yield self.passed
        yield self.failed
        yield self.skipped

    def __str__(self):
        details = []

        if self.passed > 0:
            details.append(f'{self.passed} passed')

        if self.failed > 0:
            details.append(f'{self.failed} failed')

        if self.skipped > 0:
            details.append(f'{self.skipped} skipped')

        details.append(f'{self.total} total')

        if self.failed > 0:
            result = Check.FAILED
        else:
            result = Check.PASSED

        return f"{result} ({', '.join(details)})"


def _flatten(checks):
    """Yield the checks of given nested lists and tuples in order.

    """

    if isinstance(checks, Check):
        yield checks
    elif isinstance(checks, (list, tuple)):
        for check in checks:
            yield from _flatten(check)
    else:
        raise ValueError(f'bad type {type(checks)}')


class Sequencer(object):

    def __init__(self, name, force_serial_execution=False):
        self.name = name
        self.checks = None
        self.execution_time = 0.0
        self.force_serial_execution = force_serial_execution
        self.continue_on_failure = True
        self.run_failed = False

    def run(self, *checks, **kwargs):
        """Run given check(s). Checks in lists are executed in serial and
        checks in tuples in parallel, on any nesting level.

        """

        if self.checks is None:
            log_lines(_RUN_HEADER_FMT.format(name=self.name,
                                             date=datetime.datetime.now(),
                                             node=platform.node()),
                      LOGGER)
            self.checks = []

        self.continue_on_failure = kwargs.get('continue_on_failure', True)
        self.run_failed = False
        self.checks += list(checks)

        start_time = time.time()
        thread = _CheckThread(list(checks), self)
        thread.start()
        thread.join()
        self.execution_time += (time.time() - start_time)

        return self.summary_count()

    def summary_count(self):
        result = Result()

        for check in _flatten(self.checks or []):
            if check.result == Check.PASSED:
                result.passed += 1
            elif check.result == Check.FAILED:
                result.failed += 1
            else:
                result.skipped += 1

            result.total += 1

        return result

    def summary_check(self, check, indent):
        if check.result:
            result = check.result
        else:
            result = Check.SKIPPED

        if check.message is None:
            message = ''
        else:
            message = f' ({check.message})'

        if check.execution_time is None:
            duration = ''
        else:
            duration = f' in {format_timespan(check.execution_time)}'

        return f"{' ' * indent}{check.name}: {result}{duration}{message}"

    def summary(self):
        """Compile the audit summary and return it as a string.

        """

        def recursivly(checks, indent):
            if isinstance(checks, Check):
                return self.summary_check(checks, indent)

            if isinstance(checks, list):
                begin, end = '[', ']'
            else:
                begin, end = '(', ')'

            return '\n'.join([' ' * indent + begin,
                              ',\n'.join([recursivly(check, indent + 4)
                                          for check in checks]),
                              ' ' * indent + end])

        return _SUMMARY_FMT.format(
            summary=recursivly(self.checks or [], 0),
            execution_time=format_timespan(self.execution_time),
            result=self.summary_count())

    def summary_json_check(self, check):
        if check.result:
            result = check.result
            execution_time = format_timespan(check.execution_time)
        else:
            result = Check.SKIPPED
            execution_time = None

        summary = odict([
            ('name', check.name),
            ('description', trim_docstring(check.__doc__).splitlines()),
            ('result', result),
            ('execution_time', execution_time)
        ])

        if check.message is not None:
            summary['message'] = check.message

        return summary

    def summary_json(self):
        return odict([
            ('name', self.name),
            ('date', str(datetime.datetime.now())),
            ('node', platform.node()),
            ('checks', [self.summary_json_check(check)
                        for check in _flatten(self.checks or [])])
        ])

    def report(self):
        log_lines(self.summary(), LOGGER)


class _CheckThread(threading.Thread):

    def __init__(self, checks, sequencer):
        super(_CheckThread, self).__init__()
        self.checks = checks
        self.sequencer = sequencer
        self.result = None

    def run(self):
        self.result = Check.FAILED

        try:
            self.run_checks(self.checks)
            self.result = Check.PASSED
        except AuditSkippedError:
            self.result = Check.SKIPPED
        except Exception:
            pass

    def run_check_normal(self, check):
        if not self.sequencer.continue_on_failure and self.sequencer.run_failed:
            raise AuditSkippedError('Check skipped by failure.')

        check.setup()

        try:
            check.run()
        finally:
            check.teardown()

    def run_check(self, check):
        description = '\n'.join(['    ' + line
                                 for line in trim_docstring(check.__doc__).splitlines()])
        log_lines(_CHECK_HEADER_FMT.format(name=check.name, description=description),
                  LOGGER)
        check.sequencer = self.sequencer
        result = Check.FAILED
        message = None
        start_time = time.time()

        try:
            try:
                self.run_check_normal(check)
            except AuditSkippedError as e:
                LOGGER.info("check skipped: %s", e)
                result = Check.SKIPPED
                message = str(e)
                raise
            except BaseException as e:
                self.sequencer.run_failed = True
                log_traceback(LOGGER)
                message = str(e)
                raise

            result = Check.PASSED
        finally:
            execution_time = time.time() - start_time
            log_lines(_CHECK_FOOTER_FMT.format(name=check.name,
                                               result=result,
                                               duration=format_timespan(execution_time)),
                      LOGGER)
            check.result = result
            check.message = message
            check.execution_time = execution_time

    def run_sequential_checks(self, checks):
        previous_failed = False

        for check in checks:
            if previous_failed:
                previous_failed = False

                if isinstance(check, list):
                    continue

            thread = _CheckThread(check, self.sequencer)
            thread.start()
            thread.join()

            if thread.result == Check.FAILED:
                previous_failed = True
                self.result = thread.result

    def run_parallel_checks(self, checks):
        children = []

        for check in checks:
            thread = _CheckThread(check, self.sequencer)
            thread.start()
            children.append(thread)

        for child in children:
            child.join()

        for child in children:
            if child.result == Check.FAILED:
                raise AuditFailedError("At least one of the parallel checks failed.")

    def run_checks(self, checks):
        if isinstance(checks, Check):
            self.run_check(checks)
        elif isinstance(checks, list):
            self.run_sequential_checks(checks)
        elif isinstance(checks, tuple):
            if self.sequencer.force_serial_execution:
                self.run_sequential_checks(checks)
            else:
                self.run_parallel_checks(checks)


def tree_ball_size(rank, n):
    """Number of reduced words of length at most `n`.

    """

    if n == 0:
        return 1

    if rank == 1:
        return 2 * n + 1

    degree = 2 * rank

    return 1 + degree * ((degree - 1) ** n - 1) // (degree - 2)


class TreeLikeCheck(Check):
    """The graph is tree-like to depth n, or not if expected is false.

    """

    def __init__(self, graph, n, expected=True):
        super(TreeLikeCheck, self).__init__(
            f'TreeLike{n}' if expected else f'NotTreeLike{n}')
        self.graph = graph
        self.n = n
        self.expected = expected

    def run(self):
        self.assert_equal(self.graph.is_tree_like(self.n), self.expected)


class BallSizeCheck(Check):
    """The ball of radius n at the root has as many vertices as the ball
    of the free group.

    """

    def __init__(self, graph, n):
        super(BallSizeCheck, self).__init__()
        self.graph = graph
        self.n = n

    def run(self):
        self.assert_equal(len(self.graph.ball(self.graph.root, self.n)),
                          tree_ball_size(self.graph.rank, self.n))


class SchreierBijectivityCheck(Check):
    """Stepping forth and back along random labeled edges returns to the
    start vertex.

    """

    def __init__(self, graph, pairs, seed, max_length=None):
        super(SchreierBijectivityCheck, self).__init__()
        self.graph = graph
        self.pairs = pairs
        self.seed = seed
        self.max_length = max_length

    def run(self):
        max_length = self.max_length

        if max_length is None:
            max_length = 3 * (self.graph.known_tree_depth() or 4)

        self.assert_equal(schreier_violations(self.graph,
                                              self.pairs,
                                              self.seed,
                                              max_length),
                          0)


class SelfNormalizingCheck(Check):
    """No sampled re-rooting has the ball fingerprint of the root.

    """

    def __init__(self, graph, samples, seed, radius=None):
        super(SelfNormalizingCheck, self).__init__()
        self.graph = graph
        self.samples = samples
        self.seed = seed
        self.radius = radius

    def setup(self):
        if not isinstance(self.graph, GluedGraph):
            raise AuditSkippedError('not a glued graph')

    def run(self):
        report = audit_self_normalizing(self.graph,
                                        self.samples,
                                        self.seed,
                                        self.radius)
        self.assert_equal(report.equal_to_root, 0)


class LeafCountCheck(Check):
    """A glued graph of depth n has 4 3^(n - 1) leaves, half of them
    carrying copies of the marked graph.

    """

    def __init__(self, graph):
        super(LeafCountCheck, self).__init__()
        self.graph = graph

    def setup(self):
        if not isinstance(self.graph, GluedGraph):
            raise AuditSkippedError('not a glued graph')

    def run(self):
        leaves = self.graph.leaves()
        copies = [leaf for leaf in leaves if self.graph.leaf_kind(leaf) == 'copy']
        self.assert_equal(len(leaves), 4 * 3 ** (self.graph.n - 1))
        self.assert_equal(2 * len(copies), len(leaves))


def graph_audit_checks(graph, n, pairs=10000, samples=20, seed=0):
    """The standard audit of a graph claimed tree-like to depth `n`.

    """

    return [
        TreeLikeCheck(graph, n),
        TreeLikeCheck(graph, n + 1, expected=False),
        (
            SchreierBijectivityCheck(graph, pairs, seed),
            BallSizeCheck(graph, n),
            SelfNormalizingCheck(graph, samples, seed),
            LeafCountCheck(graph)
        )
    ]
