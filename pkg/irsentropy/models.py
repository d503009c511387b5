"""Model graphs N_s and Z_s, Cayley graphs of nilpotent quotients of the
free group and walk based escape estimates.

"""

import re
import math
import time
import logging
from collections import namedtuple

import numpy as np
from humanfriendly import format_timespan

from .errors import ConstructionError
from .errors import ContractViolationError
from .errors import QuotientOverflowError
from .freegroup import Generator
from .parallel import derive_seed
from .parallel import run_parallel
from .schreier import SchreierGraph


LOGGER = logging.getLogger(__name__)

INT64_LIMIT = 2 ** 63


ProbabilityEstimate = namedtuple('ProbabilityEstimate',
                                 ['value', 'stderr', 'trials'])


def binomial_estimate(successes, trials):
    if trials == 0:
        return ProbabilityEstimate(0.0, 0.0, 0)

    value = successes / trials

    return ProbabilityEstimate(value,
                               math.sqrt(value * (1.0 - value) / trials),
                               trials)


def _checked(value):
    if abs(value) >= INT64_LIMIT:
        raise QuotientOverflowError(value)

    return value


def _running_sum_bounds(start, images):
    """Per coordinate bounds on the absolute running sums of the rows of
    `images` from `start`. Raises QuotientOverflowError if a bound
    reaches the int64 limit.

    """

    bounds = (np.abs(np.asarray(start, dtype=np.float64))
              + np.abs(images.astype(np.float64)).sum(axis=0))

    for bound in bounds:
        _checked(int(bound))

    return bounds


class AbelianCharacter(object):
    """The homomorphism to the integers sending `s` to -1 and its inverse
    to 1. All other generators are sent to 0.

    """

    def __init__(self, s):
        if isinstance(s, str):
            s = Generator.parse(s)

        self.s = s

    def evaluate(self, g):
        value = 0
        letter = self.s.letter
        inverse = self.s.inverse.letter

        for x in g.text:
            if x == letter:
                value -= 1
            elif x == inverse:
                value += 1

        return value


def char_eval(s, g):
    return AbelianCharacter(s).evaluate(g)


class NilpotentQuotient(object):
    """Base class of quotients of the free group given by an evaluation
    homomorphism. Elements are tuples of integers.

    """

    name = None
    rank = 2
    identity = None

    def generator_image(self, s):
        raise NotImplementedError()

    def mul(self, x, y):
        raise NotImplementedError()

    def inv(self, x):
        raise NotImplementedError()

    def evaluate(self, g):
        value = self.identity

        for s in g.letters:
            value = self.mul(value, self.generator_image(s))

        return value

    def displacement_lower_bound(self, x):
        """A lower bound on the word length of `x`.

        """

        raise NotImplementedError()

    def trajectory_array(self, start, images):
        """Positions after each of the given step images, as an array of
        shape (len(images) + 1, dimension).

        """

        raise NotImplementedError()


class HeisenbergQuotient(NilpotentQuotient):
    """The integer Heisenberg group. (a, b, c) is the upper triangular
    matrix with a and b above the diagonal and c in the corner.

    """

    name = 'heisenberg'
    rank = 2
    identity = (0, 0, 0)

    _IMAGES = {
        Generator(0, False): (1, 0, 0),
        Generator(0, True): (-1, 0, 0),
        Generator(1, False): (0, 1, 0),
        Generator(1, True): (0, -1, 0)
    }

    def generator_image(self, s):
        try:
            return self._IMAGES[s]
        except KeyError:
            raise ContractViolationError(f"'{s}' is not a rank 2 generator")

    def mul(self, x, y):
        return (_checked(x[0] + y[0]),
                _checked(x[1] + y[1]),
                _checked(x[2] + y[2] + x[0] * y[1]))

    def inv(self, x):
        return (-x[0], -x[1], _checked(-x[2] + x[0] * x[1]))

    def displacement_lower_bound(self, x):
        return abs(x[0]) + abs(x[1])

    def trajectory_array(self, start, images):
        images = np.asarray(images, dtype=np.int64).reshape(-1, 3)
        a_bound, _, c_bound = _running_sum_bounds(start, images)
        _checked(int(c_bound + a_bound * np.abs(images[:, 1].astype(np.float64)).sum()))
        a = np.concatenate([[start[0]], start[0] + np.cumsum(images[:, 0])])
        b = np.concatenate([[start[1]], start[1] + np.cumsum(images[:, 1])])
        c = np.concatenate(
            [[start[2]],
             start[2] + np.cumsum(images[:, 2] + a[:-1] * images[:, 1])])

        return np.stack([a, b, c], axis=1)


class AbelianQuotient(NilpotentQuotient):
    """The free abelian group Z^dimension, the generator with index i < dimension
    mapping to the i-th unit vector and all other generators to zero.

    """

    def __init__(self, dimension, rank=None):
        if dimension < 0:
            raise ConstructionError(f'bad dimension {dimension}')

        if rank is None:
            rank = max(dimension, 2)

        self.dimension = dimension
        self.rank = rank
        self.name = f'abelian:{dimension}'
        self.identity = (0, ) * dimension

    def generator_image(self, s):
        if s.index >= self.rank:
            raise ContractViolationError(f"'{s}' is not a rank {self.rank} generator")

        image = [0] * self.dimension

        if s.index < self.dimension:
            image[s.index] = -1 if s.inverted else 1

        return tuple(image)

    def mul(self, x, y):
        return tuple(_checked(u + v) for u, v in zip(x, y))

    def inv(self, x):
        return tuple(-u for u in x)

    def displacement_lower_bound(self, x):
        return sum(abs(u) for u in x)

    def trajectory_array(self, start, images):
        images = np.asarray(images, dtype=np.int64).reshape(-1, self.dimension)
        _running_sum_bounds(start, images)
        positions = np.cumsum(np.concatenate([np.asarray([start], dtype=np.int64),
                                              images]),
                              axis=0)

        return positions


def heisenberg_eval(g):
    return HeisenbergQuotient().evaluate(g)


def quotient_by_name(name, rank=None):
    """Returns the quotient named ``heisenberg`` or ``abelian:<dimension>``.

    """

    if name == 'heisenberg':
        if rank not in [None, 2]:
            raise ConstructionError('the Heisenberg quotient needs rank 2')

        return HeisenbergQuotient()

    mo = re.match(r'^abelian:(\d+)$', name)

    if mo:
        return AbelianQuotient(int(mo.group(1)), rank)

    raise ConstructionError(f"unknown quotient '{name}'")


class QuotientCayleyGraph(SchreierGraph):
    """The Cayley graph of a quotient, vertices are quotient elements.

    """

    def __init__(self, quotient):
        self.quotient = quotient
        self.rank = quotient.rank
        self.root = quotient.identity
        self._word_images = {}

    def step(self, v, s):
        return self.quotient.mul(v, self.quotient.generator_image(s))

    def word_image(self, w):
        try:
            return self._word_images[w]
        except KeyError:
            image = self.quotient.evaluate(w)
            self._word_images[w] = image

            return image

    def act(self, v, w):
        return self.quotient.mul(v, self.word_image(w))

    def depth_lower_bound(self, v):
        return self.quotient.displacement_lower_bound(v)

    def first_visit(self, start, steps, target):
        if len(self.root) == 0:
            return 1 if steps else None

        images = [self.word_image(w) for w in steps]
        positions = self.trajectory_array(start, images)
        hits = np.flatnonzero(np.all(positions[1:] == np.asarray(target), axis=1))

        if len(hits) == 0:
            return None

        return int(hits[0]) + 1

    def trajectory_array(self, start, images):
        return self.quotient.trajectory_array(start, images)


def quotient_cayley_graph(quotient):
    return QuotientCayleyGraph(quotient)


class LineGraph(SchreierGraph):
    """Z_s: vertices are the integers, the s-edges go from x + 1 to x and
    all other labels are loops.

    """

    def __init__(self, s, rank=2):
        if isinstance(s, str):
            s = Generator.parse(s)

        self.s = s
        self.rank = rank
        self.root = 0

    def step(self, v, s):
        if s == self.s:
            return v - 1
        elif s == self.s.inverse:
            return v + 1
        else:
            return v

    def distance_to_root(self, v, max_radius=None):
        return abs(v)

    def depth_lower_bound(self, v):
        return abs(v)

    def shadow_contains(self, v, u, radius=None):
        if v == 0 or u == v:
            return True

        return u * v > 0 and abs(u) > abs(v)


class HalfLineGraph(LineGraph):
    """N_s: the non-negative part of Z_s. The s-edge leaving 0 is missing.

    """

    def step(self, v, s):
        if v == 0 and s == self.s:
            return None

        return super(HalfLineGraph, self).step(v, s)


def _first_visits(graph, mu, start, target, horizon, walks, seed, parallel):
    def visit(index):
        rng = np.random.default_rng(derive_seed(seed, index))
        indices = mu.sample_indices(rng.random(horizon))

        return graph.first_visit(start, [mu.words[i] for i in indices], target)

    return run_parallel(visit, range(walks), parallel)


def avoidance_probability_estimate(graph,
                                   mu,
                                   start,
                                   target,
                                   horizon,
                                   walks,
                                   seed,
                                   parallel=1):
    """Fraction of walks from `start` not at `target` at any time 1 to
    `horizon`.

    """

    if horizon < 1 or walks < 1:
        raise ContractViolationError('horizon and walks must be positive')

    start_time = time.time()
    visits = _first_visits(graph, mu, start, target, horizon, walks, seed, parallel)
    estimate = binomial_estimate(sum(1 for visit in visits if visit is None), walks)
    LOGGER.debug('Avoidance of %r from %r over %d walks of %d steps: %.4f in %s.',
                 target,
                 start,
                 walks,
                 horizon,
                 estimate.value,
                 format_timespan(time.time() - start_time))

    return estimate


def escape_probability_estimate(graph, mu, horizon, walks, seed, parallel=1):
    """Fraction of walks from the root that do not return to it by time
    `horizon`.

    """

    return avoidance_probability_estimate(graph,
                                          mu,
                                          graph.root,
                                          graph.root,
                                          horizon,
                                          walks,
                                          seed,
                                          parallel)
