"""Surgery of a marked transient Cayley graph and half-lines onto the
leaves of the depth n tree of the rank 2 free group.

A leaf is a reduced word of length n. The edge leaving a leaf towards
its parent is labeled by the inverse of its last letter, called the
leaf's xi. The leaf's xi-inverse slot leads into a tail, a copy of the
half-line N_xi whose vertex 0 has its xi-edge pointing at the leaf. The
two remaining slots carry either a copy of the marked graph with the
marked edge rerouted through the leaf, or a self-loop when xi is in the
marked pair.

"""

import logging
from collections import namedtuple

import numpy as np

from .errors import ConstructionError
from .errors import ContractViolationError
from .freegroup import EMPTY
from .freegroup import Generator
from .freegroup import ReducedWord
from .freegroup import mul
from .freegroup import generators
from .models import QuotientCayleyGraph
from .models import avoidance_probability_estimate
from .schreier import SchreierGraph
from .schreier import random_vertex


LOGGER = logging.getLogger(__name__)

TREE = 'tree'
COPY = 'copy'
TAIL = 'tail'


class _TaggedVertex(object):
    """Value equality within one vertex type only.

    """

    __slots__ = ()

    def __eq__(self, other):
        return type(self) is type(other) and tuple.__eq__(self, other)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.KIND, ) + tuple(self))


class TreeVertex(_TaggedVertex, namedtuple('TreeVertex', ['word'])):
    __slots__ = ()
    KIND = TREE


class CopyVertex(_TaggedVertex, namedtuple('CopyVertex', ['leaf', 'state'])):
    __slots__ = ()
    KIND = COPY


class TailVertex(_TaggedVertex, namedtuple('TailVertex', ['leaf', 'position'])):
    __slots__ = ()
    KIND = TAIL


Region = namedtuple('Region', ['kind', 'leaf'])


def _is_copy(v):
    return type(v) is CopyVertex


class MarkedPair(object):
    """A quotient Cayley graph `base` with the oriented edge from `x` to
    `y` labeled `s`.

    """

    def __init__(self, base, x, y, s):
        if isinstance(s, str):
            s = Generator.parse(s)

        if not isinstance(base, QuotientCayleyGraph):
            raise ConstructionError('the marked graph must be a quotient Cayley graph')

        if base.rank != 2:
            raise ConstructionError(f'gluing needs rank 2, not {base.rank}')

        if s.index >= 2:
            raise ConstructionError(f"'{s}' is not a rank 2 generator")

        if base.step(x, s) != y:
            raise ConstructionError(
                f'no edge labeled {s} from {x!r} to {y!r} in the marked graph')

        self.base = base
        self.x = x
        self.y = y
        self.s = s

    def flipped(self):
        return MarkedPair(self.base, self.y, self.x, self.s.inverse)

    def __repr__(self):
        return (f'MarkedPair({self.base.quotient.name}, {self.x!r}, {self.y!r}, '
                f'{self.s})')


def default_marked_pair(base, s):
    """Mark the edge from the identity to the image of `s`.

    """

    if isinstance(s, str):
        s = Generator.parse(s)

    return MarkedPair(base, base.root, base.step(base.root, s), s)


class GluedGraph(SchreierGraph):

    def __init__(self, marked, n):
        if n < 1:
            raise ContractViolationError(f'glue depth must be at least 1, not {n}')

        self.marked = marked
        self.n = n
        self.rank = 2
        self.root = TreeVertex(EMPTY)
        self.metadata = {
            'base': marked.base.quotient.name,
            'mark': str(marked.s),
            'x': list(marked.x),
            'y': list(marked.y),
            'n': n
        }

    @property
    def quotient(self):
        return self.marked.base.quotient

    def step(self, v, t):
        if type(v) is TreeVertex:
            return self._step_tree(v.word, t)
        elif type(v) is CopyVertex:
            return self._step_copy(v, t)
        else:
            return self._step_tail(v, t)

    def _step_tree(self, w, t):
        if len(w) < self.n:
            return TreeVertex(mul(w, ReducedWord(t.letter)))

        last = w[-1]

        if t == last.inverse:
            return TreeVertex(w[:-1])
        elif t == last:
            return TailVertex(w, 0)
        elif last.index == self.marked.s.index:
            return TreeVertex(w)
        elif t == self.marked.s:
            return CopyVertex(w, self.marked.y)
        else:
            return CopyVertex(w, self.marked.x)

    def _step_copy(self, v, t):
        marked = self.marked

        if v.state == marked.x and t == marked.s:
            return TreeVertex(v.leaf)
        elif v.state == marked.y and t == marked.s.inverse:
            return TreeVertex(v.leaf)
        else:
            return CopyVertex(v.leaf, marked.base.step(v.state, t))

    def _step_tail(self, v, t):
        xi = v.leaf[-1].inverse

        if t == xi:
            if v.position == 0:
                return TreeVertex(v.leaf)
            else:
                return TailVertex(v.leaf, v.position - 1)
        elif t == xi.inverse:
            return TailVertex(v.leaf, v.position + 1)
        else:
            return v

    def region_of(self, v):
        if type(v) is TreeVertex:
            return Region(TREE, None)

        return Region(v.KIND, v.leaf)

    def anchor(self, v):
        """The tree word of a tree vertex, otherwise the leaf the vertex
        hangs from.

        """

        if type(v) is TreeVertex:
            return v.word

        return v.leaf

    def leaves(self):
        layer = [EMPTY]

        for _ in range(self.n):
            layer = [ReducedWord(w.text + s.letter)
                     for w in layer
                     for s in generators(2)
                     if not w.text or w.text[-1] != s.inverse.letter]

        return layer

    def leaf_kind(self, leaf):
        """``copy`` if the leaf carries a copy of the marked graph, otherwise
        ``loop``.

        """

        if leaf[-1].index == self.marked.s.index:
            return 'loop'

        return COPY

    def _copy_distances(self, state):
        quotient = self.quotient
        base = self.marked.base
        inverse = quotient.inv(state)

        return (base.distance_to_root(quotient.mul(inverse, self.marked.x)),
                base.distance_to_root(quotient.mul(inverse, self.marked.y)))

    def distance_to_root(self, v, max_radius=None):
        if type(v) is TreeVertex:
            return len(v.word)
        elif type(v) is TailVertex:
            return self.n + 1 + v.position
        else:
            return self.n + 1 + min(self._copy_distances(v.state))

    def depth_lower_bound(self, v):
        if type(v) is CopyVertex:
            quotient = self.quotient
            inverse = quotient.inv(v.state)

            return self.n + 1 + min(
                quotient.displacement_lower_bound(quotient.mul(inverse, self.marked.x)),
                quotient.displacement_lower_bound(quotient.mul(inverse, self.marked.y)))

        return self.distance_to_root(v)

    def known_tree_depth(self):
        return self.n

    def has_nonempty_shadow(self, v):
        """Tree and tail vertices shadow the vertices hanging below them.
        A copy vertex is searched like in any other graph.

        """

        if type(v) is CopyVertex:
            return super(GluedGraph, self).has_nonempty_shadow(v)

        return True

    def shadow_contains(self, v, u, radius=None):
        """Copy vertices are judged by a search from `u` that avoids `v` and
        stays in the copy. `u` is in the shadow if the search does not
        leave the copy within `radius` steps.

        """

        if v == self.root or u == v:
            return True

        if type(v) is TreeVertex:
            return self.anchor(u).text.startswith(v.word.text)
        elif type(v) is TailVertex:
            return (type(u) is TailVertex
                    and u.leaf == v.leaf
                    and u.position >= v.position)
        elif type(u) is CopyVertex and u.leaf == v.leaf:
            if radius is None:
                radius = self.shadow_radius(v, u) - self.n

            for x, _ in self.breadth_first(u, radius, avoid=[v], expand=_is_copy):
                if type(x) is TreeVertex:
                    return False

            return True
        else:
            return False

    def prefix_k(self, v, k):
        if k > self.n:
            raise ContractViolationError(
                f'graph is tree-like to depth {self.n}, not {k}')

        if type(v) is TreeVertex and len(v.word) <= k:
            return v

        return TreeVertex(self.anchor(v)[:k])


def measure_orientation(marked, mu, horizon, walks, seed, parallel=1):
    """Estimate the probability of never visiting x from y and of never
    visiting y from x in the marked graph. Returns the pair oriented so
    that the first estimate is the larger, and both estimates.

    """

    forward = avoidance_probability_estimate(marked.base,
                                             mu,
                                             marked.y,
                                             marked.x,
                                             horizon,
                                             walks,
                                             seed,
                                             parallel)
    backward = avoidance_probability_estimate(marked.base,
                                              mu,
                                              marked.x,
                                              marked.y,
                                              horizon,
                                              walks,
                                              seed,
                                              parallel)

    if backward.value > forward.value:
        marked = marked.flipped()

    return marked, forward, backward


def glue(marked,
         n,
         mu=None,
         horizon=1000,
         walks=1000,
         seed=0,
         parallel=1):
    """Returns the glued graph of depth `n`. If `mu` is given the marked
    edge is oriented by the larger avoidance estimate and both estimates
    are recorded in the graph's metadata.

    """

    if mu is not None:
        marked, forward, backward = measure_orientation(marked,
                                                        mu,
                                                        horizon,
                                                        walks,
                                                        seed,
                                                        parallel)

    graph = GluedGraph(marked, n)

    if mu is not None:
        graph.metadata.update({
            'beta_forward': forward.value,
            'beta_backward': backward.value,
            'beta': max(forward.value, backward.value),
            'beta_stderr': max(forward.stderr, backward.stderr),
            'beta_horizon': horizon,
            'beta_walks': walks,
            'beta_seed': seed
        })
        LOGGER.info('Glued %s with n=%d, beta=%.4f (forward %.4f, backward %.4f).',
                    graph.quotient.name,
                    n,
                    graph.metadata['beta'],
                    forward.value,
                    backward.value)

    return graph


SelfNormalizingReport = namedtuple('SelfNormalizingReport',
                                   ['samples', 'equal_to_root', 'radius'])


def audit_self_normalizing(graph, samples, seed, radius=None):
    """Compare ball fingerprints of random non-root vertices with the root
    fingerprint. Re-rootings with a fingerprint equal to the root's would
    indicate a normalizer larger than the subgroup.

    """

    if radius is None:
        radius = max(3, graph.n + 2)

    rng = np.random.default_rng(seed)
    root_fingerprint = graph.ball_fingerprint(graph.root, radius)
    checked = 0
    equal = 0

    while checked < samples:
        v = random_vertex(graph, rng, graph.n + 3)

        if v == graph.root:
            continue

        checked += 1

        if graph.ball_fingerprint(v, radius) == root_fingerprint:
            LOGGER.warning('Vertex %r has the root ball of radius %d.', v, radius)
            equal += 1

    return SelfNormalizingReport(samples, equal, radius)
