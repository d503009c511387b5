import hashlib
import logging
import threading

from .logs import log_traceback


LOGGER = logging.getLogger(__name__)


def derive_seed(seed, *keys):
    """Returns numpy seed material for the work item identified by `keys`.
    Non-integer keys are hashed.

    """

    material = [int(seed)]

    for key in keys:
        if isinstance(key, int) and key >= 0:
            material.append(key)
        else:
            digest = hashlib.blake2b(repr(key).encode('utf-8'), digest_size=8)
            material.append(int.from_bytes(digest.digest(), 'little'))

    return material


class _WorkerThread(threading.Thread):

    def __init__(self, function, items, indices, results):
        super(_WorkerThread, self).__init__()
        self.function = function
        self.items = items
        self.indices = indices
        self.results = results
        self.error = None

    def run(self):
        try:
            for index in self.indices:
                self.results[index] = self.function(self.items[index])
        except Exception as e:
            log_traceback(LOGGER)
            self.error = e


def run_parallel(function, items, parallel=1):
    """Call `function` on each item in up to `parallel` threads. Results
    are returned in item order. The first error raised by a worker is
    raised again in the caller.

    """

    items = list(items)

    if parallel <= 1 or len(items) <= 1:
        return [function(item) for item in items]

    results = [None] * len(items)
    count = min(parallel, len(items))
    children = []

    for offset in range(count):
        thread = _WorkerThread(function,
                               items,
                               range(offset, len(items), count),
                               results)
        thread.start()
        children.append(thread)

    for child in children:
        child.join()

    for child in children:
        if child.error is not None:
            raise child.error

    return results
