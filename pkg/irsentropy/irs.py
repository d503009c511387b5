"""Intersectional invariant random subgroups.

A subgroup K is described by a ConjugacyClass descriptor, which knows
the conjugate indices theta, the right action of the group on them and
the cosets of each conjugate K^theta. For an index set Theta, Core_Theta
is the intersection of K^theta over theta in Theta. g is in Core_Theta
iff Theta does not meet mho(g), the set of theta with g not in K^theta.

"""

import math
import hashlib
import logging
import threading
from collections import defaultdict
from collections import OrderedDict as odict

from .errors import ContractViolationError
from .errors import ResourceBudgetError
from .freegroup import EMPTY
from .freegroup import ReducedWord
from .freegroup import convolution
from .freegroup import generators
from .freegroup import inv
from .freegroup import mul
from .gluing import CopyVertex
from .gluing import TailVertex
from .gluing import TreeVertex
from .models import char_eval


LOGGER = logging.getLogger(__name__)

DEFAULT_MHO_BUDGET = 500000
DEFAULT_INDEX_BUDGET = 200000


class MhoResult(object):
    """Either a finite set of conjugate indices, or a certificate naming
    the oracle that rejected the element.

    """

    def __init__(self, indices=None, certificate=None):
        if indices is not None:
            indices = frozenset(indices)

        self.indices = indices
        self.certificate = certificate

    @property
    def is_finite(self):
        return self.indices is not None

    @property
    def norm(self):
        if self.indices is None:
            return math.inf

        return len(self.indices)

    def __repr__(self):
        if self.is_finite:
            return f'Finite({len(self.indices)})'
        else:
            return f'Infinite({self.certificate})'


def finite(indices):
    return MhoResult(indices=indices)


def infinite(certificate):
    return MhoResult(certificate=certificate)


class ConjugacyClass(object):
    """Base class of subgroup descriptors.

    """

    identity = None

    def mul(self, g, h):
        raise NotImplementedError()

    def inv(self, g):
        raise NotImplementedError()

    def parse_element(self, text):
        raise NotImplementedError()

    def format_element(self, g):
        return str(g)

    def mho(self, g):
        raise NotImplementedError()

    def null_key(self, g):
        """Equal for two elements iff they are in the same coset of the
        subgroup of finite norm elements.

        """

        raise NotImplementedError()

    def coset_key(self, theta, g):
        """Equal for two elements iff they are in the same right coset of
        K^theta.

        """

        raise NotImplementedError()

    def act_index(self, theta, g):
        """The right action theta.g, with K^(theta.g) = (K^theta)^g.

        """

        raise NotImplementedError()

    def index_key(self, theta):
        """A stable text form of `theta`, used to seed its percolation
        uniform.

        """

        return repr(theta)

    def convolution(self, mu, t, budget):
        raise NotImplementedError()

    def in_conjugate(self, theta, g):
        return self.coset_key(theta, g) == self.coset_key(theta, self.identity)


class GluedConjugacyClass(ConjugacyClass):
    """The stabilizer of the root of a glued graph. Its conjugates are
    the vertex stabilizers.

    """

    identity = EMPTY

    def __init__(self, graph, mho_budget=DEFAULT_MHO_BUDGET):
        self.graph = graph
        self.quotient = graph.quotient
        self.mho_budget = mho_budget
        self._characters = generators(graph.rank)[::2]
        self._tree = None

    def mul(self, g, h):
        return mul(g, h)

    def inv(self, g):
        return inv(g)

    def parse_element(self, text):
        return ReducedWord.parse(text)

    def null_key(self, g):
        return (self.quotient.evaluate(g),
                tuple(char_eval(s, g) for s in self._characters))

    def tree_vertices(self):
        if self._tree is None:
            self._tree = list(self.graph.ball_distances(self.graph.root,
                                                        self.graph.n))

        return self._tree

    def candidates(self, g):
        """All vertices possibly moved by `g`, given that `g` is accepted by
        the quotient and character oracles. Walks from any other vertex
        stay inside one copy or tail, where such elements act trivially.

        """

        graph = self.graph
        marked = graph.marked
        quotient = self.quotient
        leaves = graph.leaves()
        copy_leaves = [leaf for leaf in leaves if graph.leaf_kind(leaf) == 'copy']
        count = (len(self.tree_vertices())
                 + len(leaves) * len(g)
                 + 2 * len(copy_leaves) * len(g))

        if count > self.mho_budget:
            raise ResourceBudgetError('mho candidates', self.mho_budget, f'|g|={len(g)}')

        candidates = list(self.tree_vertices())

        for leaf in leaves:
            candidates += [TailVertex(leaf, position) for position in range(len(g))]

        states = set()
        prefix = quotient.identity

        for s in g.letters:
            if s == marked.s:
                states.add(quotient.mul(marked.x, quotient.inv(prefix)))
            elif s == marked.s.inverse:
                states.add(quotient.mul(marked.y, quotient.inv(prefix)))

            prefix = quotient.mul(prefix, quotient.generator_image(s))

        for leaf in copy_leaves:
            candidates += [CopyVertex(leaf, state) for state in sorted(states)]

        return candidates

    def mho(self, g):
        if self.quotient.evaluate(g) != self.quotient.identity:
            return infinite(f'quotient {self.quotient.name}')

        for s in self._characters:
            if char_eval(s, g) != 0:
                return infinite(f'character {s}')

        return finite(v
                      for v in self.candidates(g)
                      if self.graph.act(v, g) != v)

    def coset_key(self, theta, g):
        return self.graph.act(theta, g)

    def act_index(self, theta, g):
        return self.graph.act(theta, g)

    def convolution(self, mu, t, budget):
        return convolution(mu, t, budget)


def mho(K, g):
    return K.mho(g)


def norm(K, g):
    """The number of conjugates not containing `g`, math.inf if infinite.

    """

    return K.mho(g).norm


def membership_probability(p, normval):
    """Probability that an element of given norm is in Core_Theta for a
    Bernoulli(p) index set Theta. At p = 0 the limit subgroup of finite
    norm elements is used.

    """

    if not 0.0 <= p <= 1.0:
        raise ContractViolationError(f'p must be in [0, 1], not {p}')

    if normval == 0:
        return 1.0

    if math.isinf(normval):
        return 0.0

    return (1.0 - p) ** normval


class _UniformStore(object):
    """Lazily resolved uniforms in (0, 1], one per index key, derived from
    (seed, sample). Shared by coupled samples.

    """

    def __init__(self, seed, sample):
        self.seed = seed
        self.sample = sample
        self._uniforms = {}
        self._lock = threading.Lock()

    def uniform(self, key):
        with self._lock:
            try:
                return self._uniforms[key]
            except KeyError:
                digest = hashlib.blake2b(f'{self.seed}:{self.sample}:{key}'.encode('utf-8'),
                                         digest_size=8)
                value = (int.from_bytes(digest.digest(), 'little') + 1) / 2.0 ** 64
                self._uniforms[key] = value

                return value

    def __len__(self):
        return len(self._uniforms)


class ThetaSample(object):
    """A Bernoulli(p) random set of conjugate indices. Index theta is
    included iff its uniform is at most p, so samples at different
    levels sharing a store are coupled.

    """

    def __init__(self, K, p, seed, sample=0, store=None, relabeling=None):
        if not 0.0 <= p <= 1.0:
            raise ContractViolationError(f'p must be in [0, 1], not {p}')

        if store is None:
            store = _UniformStore(seed, sample)

        self.K = K
        self.p = p
        self.seed = seed
        self.sample = sample
        self.store = store
        self.relabeling = relabeling

    def uniform(self, theta):
        if self.relabeling is not None:
            theta = self.K.act_index(theta, self.relabeling)

        return self.store.uniform(self.K.index_key(theta))

    def contains(self, theta):
        if self.p == 0.0:
            return False

        return self.uniform(theta) <= self.p

    @property
    def is_empty(self):
        return self.p == 0.0

    @property
    def is_full(self):
        return self.p == 1.0

    def at_level(self, q):
        return ThetaSample(self.K,
                           q,
                           self.seed,
                           self.sample,
                           self.store,
                           self.relabeling)

    def relabel(self, g):
        """The sample Theta.g.

        """

        relabeling = self.K.inv(g)

        if self.relabeling is not None:
            relabeling = self.K.mul(relabeling, self.relabeling)

        if relabeling == self.K.identity:
            relabeling = None

        return ThetaSample(self.K, self.p, self.seed, self.sample, self.store, relabeling)


def relabel_theta(theta, g):
    return theta.relabel(g)


class FixedTheta(object):
    """A deterministic index set, either explicit or all indices.

    """

    def __init__(self, K, indices=(), everything=False):
        self.K = K
        self.indices = frozenset(indices)
        self.everything = everything

        if everything:
            self.p = 1.0
        elif not self.indices:
            self.p = 0.0
        else:
            self.p = None

    def contains(self, theta):
        return self.everything or theta in self.indices

    @property
    def is_empty(self):
        return not self.everything and not self.indices

    @property
    def is_full(self):
        return self.everything

    def relabel(self, g):
        if self.everything:
            return self

        return FixedTheta(self.K, [self.K.act_index(theta, g) for theta in self.indices])


def empty_theta(K):
    return FixedTheta(K)


def full_theta(K):
    return FixedTheta(K, everything=True)


def contains(K, g, theta):
    """True iff `g` is in Core_Theta(K). An empty Theta stands for the
    limit subgroup of finite norm elements.

    """

    if isinstance(theta, FixedTheta) and not theta.everything and theta.indices:
        return all(K.in_conjugate(index, g) for index in theta.indices)

    result = K.mho(g)

    if not result.is_finite:
        return False

    return not any(theta.contains(index) for index in result.indices)


class CoreStructure(object):
    """The parts of the Core_Theta coset partition of a finite support that
    do not depend on Theta. Elements are grouped by their finite norm
    class, and for each class the indices that can separate its elements
    and the coset keys of the elements at those indices are tabulated.

    """

    def __init__(self, K, support, index_budget=DEFAULT_INDEX_BUDGET):
        self.K = K
        self.support = list(support)
        self.classes = odict()

        for z in self.support:
            self.classes.setdefault(K.null_key(z), []).append(z)

        self.relevant = {}
        self.tables = {}
        total = 0

        for key, members in self.classes.items():
            representative_inverse = K.inv(members[0])
            indices = set()

            for z in members[1:]:
                result = K.mho(K.mul(z, representative_inverse))

                if not result.is_finite:
                    raise ContractViolationError(
                        f'elements {K.format_element(z)} and '
                        f'{K.format_element(members[0])} share a finite norm '
                        f'class but their quotient has infinite norm')

                indices |= result.indices

            indices = sorted(indices, key=K.index_key)
            total += len(indices)

            if total > index_budget:
                raise ResourceBudgetError('relevant indices', index_budget)

            self.relevant[key] = indices
            self.tables[key] = {
                z: tuple(K.coset_key(theta, z) for theta in indices)
                for z in members
            }

    def max_relevant(self):
        return max([len(indices) for indices in self.relevant.values()] + [0])

    def keys(self, theta):
        """Map each support element to a key naming its Core_Theta coset.

        """

        keys = {}

        for key, members in self.classes.items():
            indices = self.relevant[key]
            mask = [i for i, index in enumerate(indices) if theta.contains(index)]

            for z in members:
                row = self.tables[key][z]
                keys[z] = (key, tuple(row[i] for i in mask))

        return keys

    def keys_for_mask(self, key, mask):
        """Keys of the members of one class for the relevant indices at
        given positions.

        """

        return {z: tuple(row[i] for i in mask)
                for z, row in self.tables[key].items()}


def core_partition(K, support, theta, structure=None):
    """Partition the support into Core_Theta cosets. Returns a list of
    blocks in first seen order.

    """

    if structure is None:
        structure = CoreStructure(K, support)

    blocks = defaultdict(list)

    for z, key in structure.keys(theta).items():
        blocks[key].append(z)

    return list(blocks.values())
