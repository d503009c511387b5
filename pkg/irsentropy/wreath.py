"""Lamplighter groups Z_m wr Z^d and finitary permutations of Z^d,
optionally extended by translations.

Named one-letter generators:

- ``f``, ``F``: switch the lamp at the origin up or down.
- ``t``, ``T``: transpose the origin and the first unit vector.
- ``x``, ``y``, ``z`` and ``X``, ``Y``, ``Z``: unit translations and
  their inverses.

"""

import re
import logging
from collections import defaultdict
from collections import namedtuple

from .errors import ConstructionError
from .errors import ContractViolationError
from .freegroup import DEFAULT_SUPPORT_BUDGET
from .freegroup import FiniteDistribution
from .freegroup import convolution_power
from .irs import ConjugacyClass
from .irs import finite
from .irs import infinite


LOGGER = logging.getLogger(__name__)

SHIFT_LETTERS = 'xyz'

LampElement = namedtuple('LampElement', ['lamps', 'base'])
FinPermElement = namedtuple('FinPermElement', ['perm', 'shift'])


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def _unit(dimension, index, sign=1):
    vector = [0] * dimension
    vector[index] = sign

    return tuple(vector)


def parse_dimension(name):
    """Parse ``z1``, ``z2`` or ``z3``.

    """

    mo = re.match(r'^z(\d+)$', str(name))

    if not mo or not 1 <= int(mo.group(1)) <= 3:
        raise ConstructionError(f"bad base or point set '{name}', expected z1, z2 or z3")

    return int(mo.group(1))


def parse_lamp_order(name):
    mo = re.match(r'^z(\d+)$', str(name))

    if not mo or int(mo.group(1)) < 2:
        raise ConstructionError(f"bad lamp group '{name}', expected z<m> with m >= 2")

    return int(mo.group(1))


class _WordGroup(object):
    """Words over named generators evaluated as products.

    """

    def letters(self):
        raise NotImplementedError()

    def generator(self, letter):
        raise NotImplementedError()

    def parse(self, text):
        value = self.identity

        for letter in text.strip():
            value = self.mul(value, self.generator(letter))

        return value

    def shift_generator(self, letter):
        index = SHIFT_LETTERS.find(letter.lower())

        if index < 0 or index >= self.dimension:
            return None

        return _unit(self.dimension, index, -1 if letter.isupper() else 1)

    def measure(self, weights):
        """A normalized finitely supported measure from a mapping of words
        to positive weights.

        """

        atoms = defaultdict(float)
        total = 0.0

        for text, weight in dict(weights).items():
            if weight <= 0:
                raise ContractViolationError(
                    f"weight of '{text}' must be positive, not {weight}")

            atoms[self.parse(text)] += weight
            total += weight

        return FiniteDistribution({g: weight / total for g, weight in atoms.items()})

    def srw(self):
        return self.measure({letter: 1.0 for letter in self.letters()})


class LamplighterGroup(_WordGroup):
    """Z_m wr Z^d. Elements are (lamps, base) with lamps a sorted tuple of
    (point, value) pairs with non-zero values.

    """

    def __init__(self, lamp_order=2, dimension=1):
        if lamp_order < 2:
            raise ConstructionError(f'lamp order must be at least 2, not {lamp_order}')

        if not 1 <= dimension <= 3:
            raise ConstructionError(f'base dimension must be 1, 2 or 3, not {dimension}')

        self.lamp_order = lamp_order
        self.dimension = dimension
        self.origin = (0, ) * dimension
        self.identity = LampElement((), self.origin)
        self.name = f'z{lamp_order} wr z{dimension}'

    def letters(self):
        letters = ['f']

        if self.lamp_order > 2:
            letters.append('F')

        for letter in SHIFT_LETTERS[:self.dimension]:
            letters += [letter, letter.upper()]

        return letters

    def generator(self, letter):
        if letter == 'f':
            return LampElement(((self.origin, 1), ), self.origin)
        elif letter == 'F':
            return LampElement(((self.origin, self.lamp_order - 1), ), self.origin)

        shift = self.shift_generator(letter)

        if shift is None:
            raise ContractViolationError(f"bad lamplighter generator '{letter}'")

        return LampElement((), shift)

    def mul(self, g, h):
        lamps = dict(g.lamps)

        for point, value in h.lamps:
            point = _add(point, g.base)
            lamps[point] = (lamps.get(point, 0) + value) % self.lamp_order

        return LampElement(tuple(sorted((point, value)
                                        for point, value in lamps.items()
                                        if value != 0)),
                           _add(g.base, h.base))

    def inv(self, g):
        lamps = [(_sub(point, g.base), (-value) % self.lamp_order)
                 for point, value in g.lamps]

        return LampElement(tuple(sorted(lamps)), tuple(-a for a in g.base))

    def lamp(self, g, point):
        for p, value in g.lamps:
            if p == point:
                return value

        return 0

    def format(self, g):
        lamps = ','.join(f'{list(point)}:{value}' for point, value in g.lamps)

        return f'({{{lamps}}}, {list(g.base)})'


class FinitaryPermutationGroup(_WordGroup):
    """Finitely supported permutations of Z^d, extended by the translations
    when `shift` is True. An element (perm, c) is the map x -> perm(x + c),
    with perm stored as a sorted tuple of (point, image) pairs over its
    support.

    """

    def __init__(self, dimension=1, shift=True):
        if not 1 <= dimension <= 3:
            raise ConstructionError(f'point dimension must be 1, 2 or 3, not {dimension}')

        self.dimension = dimension
        self.shift = shift
        self.origin = (0, ) * dimension
        self.identity = FinPermElement((), self.origin)
        self.name = f'sym z{dimension}' + (' with shift' if shift else '')

    def letters(self):
        letters = ['t']

        if self.shift:
            for letter in SHIFT_LETTERS[:self.dimension]:
                letters += [letter, letter.upper()]

        return letters

    def generator(self, letter):
        if letter in 'tT':
            e1 = _unit(self.dimension, 0)

            return FinPermElement(tuple(sorted([(self.origin, e1), (e1, self.origin)])),
                                  self.origin)

        shift = None

        if self.shift:
            shift = self.shift_generator(letter)

        if shift is None:
            raise ContractViolationError(f"bad permutation generator '{letter}'")

        return FinPermElement((), shift)

    def mul(self, g, h):
        """The composition g after h.

        """

        first = dict(g.perm)
        second = {_add(point, g.shift): _add(image, g.shift)
                  for point, image in h.perm}
        perm = []

        for point in set(first) | set(second):
            image = second.get(point, point)
            image = first.get(image, image)

            if image != point:
                perm.append((point, image))

        return FinPermElement(tuple(sorted(perm)), _add(g.shift, h.shift))

    def inv(self, g):
        perm = [(_sub(image, g.shift), _sub(point, g.shift)) for point, image in g.perm]

        return FinPermElement(tuple(sorted(perm)), tuple(-a for a in g.shift))

    def apply(self, g, point):
        point = _add(point, g.shift)

        return dict(g.perm).get(point, point)

    def apply_inverse(self, g, point):
        inverse = {image: p for p, image in g.perm}

        return _sub(inverse.get(point, point), g.shift)

    def format(self, g):
        perm = ','.join(f'{list(point)}->{list(image)}' for point, image in g.perm)

        return f'({{{perm}}}, {list(g.shift)})'


def lamp_mul(group, g, h):
    return group.mul(g, h)


def lamp_inv(group, g):
    return group.inv(g)


def perm_mul(group, g, h):
    return group.mul(g, h)


def perm_inv(group, g):
    return group.inv(g)


class _WreathConjugacyClass(ConjugacyClass):

    def __init__(self, group):
        self.group = group
        self.identity = group.identity

    def mul(self, g, h):
        return self.group.mul(g, h)

    def inv(self, g):
        return self.group.inv(g)

    def parse_element(self, text):
        return self.group.parse(text)

    def format_element(self, g):
        return self.group.format(g)

    def index_key(self, theta):
        return ','.join(str(a) for a in theta)

    def convolution(self, mu, t, budget=DEFAULT_SUPPORT_BUDGET):
        return convolution_power(mu.items(), t, self.group.mul, self.identity, budget)


class LamplighterSubgroup(_WreathConjugacyClass):
    """K = lamps off at the origin, trivial base. The conjugate indexed by
    the base point c is K_c, lamps off at c.

    """

    def mho(self, g):
        if g.base != self.group.origin:
            return infinite('base coordinate')

        return finite(point for point, _ in g.lamps)

    def null_key(self, g):
        return g.base

    def coset_key(self, theta, g):
        return (g.base, self.group.lamp(g, theta))

    def act_index(self, theta, g):
        return _sub(theta, g.base)


class PointStabilizer(_WreathConjugacyClass):
    """K = the stabilizer of the origin. The conjugate indexed by the point
    x is the stabilizer of x.

    """

    def mho(self, g):
        if g.shift != self.group.origin:
            return infinite('shift coordinate')

        return finite(point for point, _ in g.perm)

    def null_key(self, g):
        return g.shift

    def coset_key(self, theta, g):
        return self.group.apply_inverse(g, theta)

    def act_index(self, theta, g):
        return self.group.apply_inverse(g, theta)


def wreath_norm(K, g):
    return K.mho(g).norm


def perm_norm(K, g):
    return K.mho(g).norm


def core_coset_key(K, theta, g):
    """Equal for two elements iff they are in the same Core_theta coset,
    for a finite set of indices `theta`. The empty set keys by the cosets
    of the finite norm elements.

    """

    if not theta:
        return K.null_key(g)

    return tuple(K.coset_key(index, g) for index in sorted(theta))
