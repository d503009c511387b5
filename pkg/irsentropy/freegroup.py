"""Reduced word arithmetic in free groups, finitely supported measures,
convolution powers and Shannon entropy.

Words use the wire format of the command line and the measure files:
a string over ``a-z`` for the generators 0 to 25 and ``A-Z`` for their
inverses. The empty word is the identity.

"""

import math
import string
import logging
from collections import namedtuple
from collections import defaultdict

import numpy as np
from scipy.stats import entropy as scipy_entropy

from .errors import ContractViolationError
from .errors import ResourceBudgetError


LOGGER = logging.getLogger(__name__)

DEFAULT_SUPPORT_BUDGET = 2000000
DEFAULT_GENERATION_DEPTH = 6
PROBABILITY_TOLERANCE = 1e-12

_GENERATION_SEARCH_LIMIT = 50000


class Generator(namedtuple('Generator', ['index', 'inverted'])):
    """A free generator or its inverse.

    """

    __slots__ = ()

    @classmethod
    def parse(cls, letter):
        if len(letter) != 1 or letter not in string.ascii_letters:
            raise ContractViolationError(f"bad generator letter '{letter}'")

        return cls(string.ascii_lowercase.index(letter.lower()),
                   letter.isupper())

    @property
    def letter(self):
        letter = string.ascii_lowercase[self.index]

        if self.inverted:
            letter = letter.upper()

        return letter

    @property
    def inverse(self):
        return Generator(self.index, not self.inverted)

    def __str__(self):
        return self.letter


def generators(rank):
    """The symmetric generating set of the free group of given rank, in
    the order a, A, b, B, ...

    """

    return [Generator(index, inverted)
            for index in range(rank)
            for inverted in [False, True]]


def _check_text(text):
    for letter in text:
        if letter not in string.ascii_letters:
            raise ContractViolationError(
                f"bad letter '{letter}' in word '{text}'")


def _reduce_text(text):
    stack = []

    for letter in text:
        if stack and stack[-1] == letter.swapcase():
            stack.pop()
        else:
            stack.append(letter)

    return ''.join(stack)


class ReducedWord(object):
    """An element of a free group as an immutable reduced word. Words are
    ordered by length, then lexicographically.

    """

    __slots__ = ('text', )

    def __init__(self, text=''):
        object.__setattr__(self, 'text', text)

    @classmethod
    def parse(cls, text):
        """Parse given word in wire format, reducing it.

        """

        text = text.strip()

        if text in ['', 'e', 'ε']:
            return EMPTY

        _check_text(text)

        return cls(_reduce_text(text))

    def __setattr__(self, name, value):
        raise AttributeError('ReducedWord is immutable')

    @property
    def letters(self):
        return tuple(Generator.parse(letter) for letter in self.text)

    def __len__(self):
        return len(self.text)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, index):
        if isinstance(index, slice):
            return ReducedWord(self.text[index])

        return Generator.parse(self.text[index])

    def __eq__(self, other):
        return isinstance(other, ReducedWord) and self.text == other.text

    def __hash__(self):
        return hash(self.text)

    def __lt__(self, other):
        return (len(self.text), self.text) < (len(other.text), other.text)

    def __le__(self, other):
        return self == other or self < other

    def __mul__(self, other):
        return mul(self, other)

    def __repr__(self):
        return f"ReducedWord('{self.text}')"

    def __str__(self):
        return self.text

    def rank(self):
        """The smallest rank of a free group containing this word.

        """

        if not self.text:
            return 0

        return max(string.ascii_lowercase.index(letter.lower())
                   for letter in self.text) + 1

    def inverse(self):
        return inv(self)


EMPTY = ReducedWord('')


def reduce(letters):
    """Freely reduce given sequence of generators or wire format string.

    """

    if isinstance(letters, str):
        _check_text(letters)

        return ReducedWord(_reduce_text(letters))

    return ReducedWord(_reduce_text(''.join(letter.letter for letter in letters)))


def mul(g, h):
    a = g.text
    b = h.text
    cancelled = 0
    length = min(len(a), len(b))

    while cancelled < length and a[-1 - cancelled] == b[cancelled].swapcase():
        cancelled += 1

    return ReducedWord(a[:len(a) - cancelled] + b[cancelled:])


def inv(g):
    return ReducedWord(g.text[::-1].swapcase())


def power(g, exponent):
    if exponent < 0:
        g = inv(g)
        exponent = -exponent

    result = EMPTY

    for _ in range(exponent):
        result = mul(result, g)

    return result


def conjugate(g, gamma):
    """Returns g^gamma = gamma^-1 g gamma.

    """

    return mul(mul(inv(gamma), g), gamma)


def commutator(g, h):
    """Returns [g, h] = g h g^-1 h^-1.

    """

    return mul(mul(mul(g, h), inv(g)), inv(h))


def word(text):
    return ReducedWord.parse(text)


def random_reduced_word(length, rank, rng):
    """Returns a uniformly random reduced word of given length in the
    free group of given rank.

    """

    letters = [generator.letter for generator in generators(rank)]
    text = []

    for position in range(length):
        if position == 0:
            text.append(letters[rng.integers(len(letters))])
        else:
            choices = [letter
                       for letter in letters
                       if letter != text[-1].swapcase()]
            text.append(choices[rng.integers(len(choices))])

    return ReducedWord(''.join(text))


class FiniteDistribution(object):
    """A finitely supported probability distribution over hashable
    keys. Iteration follows insertion order.

    """

    def __init__(self, atoms, check=True):
        self.atoms = dict(atoms)

        if check:
            total = math.fsum(self.atoms.values())

            if abs(total - 1.0) > PROBABILITY_TOLERANCE:
                raise ContractViolationError(
                    f'probabilities sum to {total!r}, not 1')

    def __len__(self):
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __getitem__(self, key):
        return self.atoms.get(key, 0.0)

    def items(self):
        return self.atoms.items()

    def keys(self):
        return list(self.atoms)

    def probabilities(self):
        return np.fromiter(self.atoms.values(), dtype=float, count=len(self.atoms))

    def entropy(self):
        return shannon_entropy(self)

    def pushforward(self, function):
        """Returns the image distribution under given function.

        """

        atoms = defaultdict(float)

        for key, probability in self.atoms.items():
            atoms[function(key)] += probability

        return FiniteDistribution(atoms, check=False)

    def convolve(self, other, mul, budget=DEFAULT_SUPPORT_BUDGET):
        atoms = defaultdict(float)

        for g, p in self.atoms.items():
            for h, q in other.atoms.items():
                atoms[mul(g, h)] += p * q

            if len(atoms) > budget:
                raise ResourceBudgetError('support', budget, 'convolve')

        return FiniteDistribution(atoms, check=False)

    def sorted(self, key=None):
        return FiniteDistribution(
            [(k, self.atoms[k]) for k in sorted(self.atoms, key=key)],
            check=False)


def point_mass(key):
    return FiniteDistribution({key: 1.0})


def convolution_power(steps, t, mul, identity, budget=DEFAULT_SUPPORT_BUDGET):
    """Returns the law of the product of `t` independent steps, each
    distributed as the items (element, probability) of `steps`, by
    dynamic programming over supports.

    """

    if t < 0:
        raise ContractViolationError(f't must be non-negative, not {t}')

    steps = list(steps)
    current = {identity: 1.0}

    for i in range(t):
        following = defaultdict(float)

        for g, p in current.items():
            for s, q in steps:
                following[mul(g, s)] += p * q

            if len(following) > budget:
                raise ResourceBudgetError('support', budget, f't={i + 1}')

        current = following

    return FiniteDistribution(current, check=False)


class StepDistribution(object):
    """A finitely supported generating probability measure on the free
    group of rank `rank`, given as a mapping from words to positive
    weights. Weights are normalized when `normalize` is True.

    """

    def __init__(self,
                 atoms,
                 rank=None,
                 normalize=False,
                 generation_depth=DEFAULT_GENERATION_DEPTH):
        weights = defaultdict(float)

        for key, weight in dict(atoms).items():
            if not isinstance(key, ReducedWord):
                key = ReducedWord.parse(key)

            if weight <= 0:
                raise ContractViolationError(
                    f"weight of '{key}' must be positive, not {weight}")

            weights[key] += weight

        if not weights:
            raise ContractViolationError('empty measure')

        total = math.fsum(weights.values())

        if normalize:
            weights = {key: weight / total for key, weight in weights.items()}
        elif abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ContractViolationError(f'probabilities sum to {total!r}, not 1')

        self.atoms = {key: weights[key] for key in sorted(weights)}

        if rank is None:
            rank = max(max(key.rank() for key in self.atoms), 1)
        elif any(key.rank() > rank for key in self.atoms):
            raise ContractViolationError(f'measure support exceeds rank {rank}')

        self.rank = rank
        self.max_step_length = max(len(key) for key in self.atoms)
        self.words = list(self.atoms)
        self.probabilities = np.array(list(self.atoms.values()))
        self.cdf = np.cumsum(self.probabilities)
        self._entropy = None

        if generation_depth:
            self.check_generation(generation_depth)

    @classmethod
    def from_text(cls, text, rank=None):
        """Parse lines ``word weight``. Empty lines and ``#`` comments are
        ignored. Weights are normalized.

        """

        atoms = defaultdict(float)

        for number, line in enumerate(text.splitlines(), 1):
            line = line.split('#')[0].strip()

            if not line:
                continue

            fields = line.split()

            if len(fields) == 1:
                fields = ['', fields[0]]

            if len(fields) != 2:
                raise ContractViolationError(f"line {number}: bad atom '{line}'")

            try:
                weight = float(fields[1])
            except ValueError:
                raise ContractViolationError(
                    f"line {number}: bad weight '{fields[1]}'")

            atoms[ReducedWord.parse(fields[0])] += weight

        return cls(atoms, rank=rank, normalize=True)

    def __len__(self):
        return len(self.atoms)

    def items(self):
        return self.atoms.items()

    @property
    def entropy(self):
        if self._entropy is None:
            self._entropy = float(scipy_entropy(self.probabilities))

        return self._entropy

    def check_generation(self, depth):
        """Log a warning if some generator is not a product of at most
        `depth` atoms. Returns True if all generators were found.

        """

        missing = set(ReducedWord(generator.letter)
                      for generator in generators(self.rank))
        reached = set(self.atoms)
        frontier = set(self.atoms)
        missing -= reached

        for _ in range(depth - 1):
            if not missing or len(reached) > _GENERATION_SEARCH_LIMIT:
                break

            frontier = set(mul(g, s) for g in frontier for s in self.atoms)
            frontier -= reached
            reached |= frontier
            missing -= frontier

        if missing:
            LOGGER.warning(
                'Measure support may not generate the group as a semigroup. '
                'Not reached within %d steps: %s.',
                depth,
                ', '.join(sorted(str(g) for g in missing)))

        return not missing

    def sample_indices(self, uniforms):
        indices = np.searchsorted(self.cdf, uniforms, side='right')

        return np.minimum(indices, len(self.words) - 1)

    def to_text(self):
        return ''.join(f'{key} {probability!r}\n'
                       for key, probability in self.atoms.items())


def srw(rank=2):
    """The uniform measure on the generators and their inverses.

    """

    letters = generators(rank)

    return StepDistribution({ReducedWord(letter.letter): 1.0 for letter in letters},
                            rank=rank,
                            normalize=True)


def load_measure(path, rank=None):
    with open(path, 'r') as fin:
        return StepDistribution.from_text(fin.read(), rank=rank)


def convolution(mu, t, budget=DEFAULT_SUPPORT_BUDGET):
    """The exact law of Z_t, with atoms in canonical word order.

    """

    distribution = convolution_power(mu.items(), t, mul, EMPTY, budget)

    return distribution.sorted()


def shannon_entropy(distribution):
    """Shannon entropy in nats.

    """

    return float(scipy_entropy(distribution.probabilities()))


def sample_walk(mu, t, seed):
    """Returns the positions Z_0, ..., Z_t of a walk with increments
    drawn from `mu`.

    """

    if t < 0:
        raise ContractViolationError(f't must be non-negative, not {t}')

    rng = np.random.default_rng(seed)
    position = EMPTY
    positions = [position]

    for index in mu.sample_indices(rng.random(t)):
        position = mul(position, mu.words[index])
        positions.append(position)

    return positions


def sample_walks(mu, t, count, seed):
    """Returns the endpoints Z_t of `count` independent walks.

    """

    rng = np.random.default_rng(seed)
    indices = mu.sample_indices(rng.random((count, t)))
    endpoints = []

    for row in indices:
        position = EMPTY

        for index in row:
            position = mul(position, mu.words[index])

        endpoints.append(position)

    return endpoints


def reach_times(mu, max_t=16, budget=DEFAULT_SUPPORT_BUDGET):
    """Returns ``(times, delta)`` where ``times[s]`` is the smallest t with
    mu^t(s) > 0 for each generator s, and delta is the minimum of
    mu^t_s(s) over s.

    """

    times = {}
    delta = 1.0
    targets = [ReducedWord(g.letter) for g in generators(mu.rank)]
    distribution = point_mass(EMPTY)

    for t in range(1, max_t + 1):
        distribution = distribution.convolve(FiniteDistribution(mu.atoms),
                                             mul,
                                             budget)

        for target in targets:
            if target not in times and distribution[target] > 0:
                times[target] = t
                delta = min(delta, distribution[target])

        if len(times) == len(targets):
            return times, delta

    missing = ', '.join(str(target) for target in targets if target not in times)

    raise ContractViolationError(
        f'generators {missing} not reached within {max_t} steps')
