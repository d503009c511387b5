"""Rooted edge-labeled Schreier graphs presented as a lazy right action
of the generators on canonical vertex states.

"""

import math
import logging
from collections import namedtuple
from collections import OrderedDict as odict

import nographs as nog
import numpy as np

from .errors import ConstructionError
from .errors import ContractViolationError
from .errors import IndeterminateResultError
from .errors import ResourceBudgetError
from .freegroup import EMPTY
from .freegroup import Generator
from .freegroup import ReducedWord
from .freegroup import generators
from .freegroup import mul
from .freegroup import random_reduced_word


LOGGER = logging.getLogger(__name__)

DEFAULT_SHADOW_PADDING = 8
DEFAULT_VERTEX_BUDGET = 2000000


BallFingerprint = namedtuple('BallFingerprint', ['radius', 'data'])


class SchreierGraph(object):
    """Base class of all graphs. Subclasses set `root` and `rank` and
    implement step(), which returns the endpoint of the edge labeled
    `s` leaving `v`, or None if the graph is a fragment with that slot
    missing.

    """

    root = None
    rank = 2
    vertex_budget = DEFAULT_VERTEX_BUDGET

    def step(self, v, s):
        raise NotImplementedError()

    def labels(self):
        return generators(self.rank)

    def act(self, v, w):
        """Returns v.w by applying the letters of `w` one at a time.

        """

        for s in w:
            u = self.step(v, s)

            if u is None:
                raise ContractViolationError(f'no {s}-edge leaves {v!r}')

            v = u

        return v

    def trajectory(self, start, steps):
        """Yields the vertices visited when applying given words in order,
        starting with `start`.

        """

        v = start
        yield v

        for w in steps:
            v = self.act(v, w)
            yield v

    def first_visit(self, start, steps, target):
        """Returns the first time t >= 1 the trajectory is at `target`, or
        None.

        """

        for t, v in enumerate(self.trajectory(start, steps)):
            if t > 0 and v == target:
                return t

        return None

    def neighbours(self, v):
        for s in self.labels():
            u = self.step(v, s)

            if u is not None:
                yield s, u

    def breadth_first(self, start, radius=None, avoid=(), expand=None):
        """Yields ``(vertex, distance)`` in breadth first order from `start`,
        `start` included, visiting labels in canonical order. Vertices at
        distance `radius` and vertices for which `expand` is false are
        reported but not expanded. Vertices in `avoid` are never visited.

        Raises ResourceBudgetError if more than `vertex_budget` vertices
        are expanded.

        """

        if radius is None:
            radius = math.inf

        def next_vertices(v, traversal):
            if traversal.depth >= radius:
                return ()

            if expand is not None and not expand(v):
                return ()

            return [u for _, u in self.neighbours(v)]

        traversal = nog.TraversalBreadthFirst(next_vertices)
        traversal.start_from(start,
                             calculation_limit=self.vertex_budget,
                             already_visited=set(avoid))

        yield start, 0

        try:
            for v in traversal:
                yield v, traversal.depth
        except RuntimeError:
            raise ResourceBudgetError('vertices',
                                      self.vertex_budget,
                                      f'search from {start!r}') from None

    def ball_distances(self, center, radius):
        """Returns an ordered dictionary of vertex to distance, in breadth
        first order from `center`.

        """

        if radius < 0:
            raise ContractViolationError(f'radius must be non-negative, not {radius}')

        return odict(self.breadth_first(center, radius))

    def ball(self, center, radius):
        return set(self.ball_distances(center, radius))

    def sphere(self, center, radius):
        return set(v
                   for v, distance in self.ball_distances(center, radius).items()
                   if distance == radius)

    def distance_to_root(self, v, max_radius=64):
        for u, distance in self.breadth_first(self.root, max_radius):
            if u == v:
                return distance

        raise IndeterminateResultError(f'{v!r} not within distance {max_radius} of the root')

    def depth_lower_bound(self, v):
        """A cheap lower bound on the distance from the root to `v`.

        """

        return self.distance_to_root(v)

    def known_tree_depth(self):
        """The depth to which the graph is known to be tree-like by
        construction, or None if unknown.

        """

        return None

    def tree_image(self, n):
        """Map the reduced words of length at most `n` to vertices. Returns
        None if some step is missing.

        """

        image = odict([(EMPTY, self.root)])
        layer = [EMPTY]

        for _ in range(n):
            following = []

            for w in layer:
                v = image[w]

                for s in self.labels():
                    if len(w) > 0 and w.text[-1] == s.inverse.letter:
                        continue

                    u = self.step(v, s)

                    if u is None:
                        return None

                    ws = ReducedWord(w.text + s.letter)
                    image[ws] = u
                    following.append(ws)

            layer = following

        return image

    def is_tree_like(self, n):
        """True iff the ball of radius `n` at the root is the regular tree of
        depth `n` and every vertex at depth `n` has a non-empty shadow.

        """

        if n < 0:
            raise ContractViolationError(f'n must be non-negative, not {n}')

        image = self.tree_image(n)

        if image is None:
            return False

        # Edges leaving the sphere, loops included, are outside the ball.
        if len(set(image.values())) != len(image):
            return False

        return all(self.has_nonempty_shadow(v)
                   for w, v in image.items()
                   if len(w) == n)

    def has_nonempty_shadow(self, v):
        """Some vertex other than `v` has all its root paths through
        `v`. Searches the outward neighbours of `v`.

        """

        if v == self.root:
            return True

        depth = self.distance_to_root(v)

        for _, u in self.neighbours(v):
            if u == v:
                continue

            try:
                if self.distance_to_root(u) > depth and self.shadow_contains(v, u):
                    return True
            except IndeterminateResultError:
                continue

        return False

    def shadow_radius(self, v, u):
        return max(self.distance_to_root(v),
                   self.distance_to_root(u)) + DEFAULT_SHADOW_PADDING

    def shadow_contains(self, v, u, radius=None):
        """True iff every path from `u` to the root passes through `v`,
        judged inside the ball of given radius at the root.

        """

        if v == self.root or u == v:
            return True

        if radius is None:
            radius = self.shadow_radius(v, u)

        ball = self.ball_distances(self.root, radius)

        if u not in ball:
            raise IndeterminateResultError(
                f'{u!r} is outside the search radius {radius}')

        for x, _ in self.breadth_first(u, avoid=[v], expand=ball.__contains__):
            if x == self.root:
                return False

        return True

    def prefix_k(self, v, k):
        """The depth `k` vertex all root paths from `v` pass through, or
        `v` itself if its depth is at most `k`.

        """

        distances = self.ball_distances(self.root, self.distance_to_root(v))
        depth = distances[v]

        if depth <= k:
            return v

        # Walk a geodesic back to depth k.
        x = v

        while distances[x] > k:
            for _, u in self.neighbours(x):
                if distances.get(u, math.inf) == distances[x] - 1:
                    x = u
                    break

        try:
            contained = self.shadow_contains(x, v)
        except IndeterminateResultError:
            contained = False

        if not contained:
            raise ContractViolationError(
                f'graph is not tree-like to depth {k}: no {k}-prefix of {v!r}')

        return x

    def ball_fingerprint(self, v, radius):
        """Canonical form of the labeled ball of given radius at `v`.

        """

        numbers = {u: number
                   for number, u in enumerate(self.ball_distances(v, radius))}
        rows = []

        for u in numbers:
            row = []

            for s in self.labels():
                x = self.step(u, s)

                if x is None:
                    row.append('-')
                else:
                    row.append(str(numbers.get(x, '.')))

            rows.append(' '.join(row))

        return BallFingerprint(radius, ';'.join(rows).encode('ascii'))


class FreeGroupCayleyGraph(SchreierGraph):
    """The Cayley graph of the free group, vertices are reduced words.

    """

    def __init__(self, rank=2):
        self.rank = rank
        self.root = EMPTY

    def step(self, v, s):
        return mul(v, ReducedWord(s.letter))

    def distance_to_root(self, v, max_radius=None):
        return len(v)

    def known_tree_depth(self):
        return math.inf

    def has_nonempty_shadow(self, v):
        return True

    def shadow_contains(self, v, u, radius=None):
        return u.text.startswith(v.text)

    def prefix_k(self, v, k):
        return v[:k]


class FiniteSchreierGraph(SchreierGraph):
    """A finite graph backed by a table ``{vertex: {letter: vertex}}`` over
    the generator letters. Inverse steps are derived from the table.

    """

    def __init__(self, table, root, rank=None):
        if rank is None:
            rank = max([Generator.parse(letter).index + 1
                        for row in table.values()
                        for letter in row] + [1])

        self.rank = rank
        self.root = root
        self._forward = {}
        self._backward = {}

        if root not in table:
            raise ConstructionError(f'root {root!r} is not a vertex')

        for generator in generators(rank):
            if generator.inverted:
                continue

            forward = {}

            for v, row in table.items():
                if generator.letter not in row:
                    raise ConstructionError(
                        f"vertex {v!r} has no outgoing '{generator}' edge")

                forward[v] = row[generator.letter]

            backward = {u: v for v, u in forward.items()}

            if len(backward) != len(forward) or set(backward) != set(forward):
                raise ConstructionError(
                    f"'{generator}' edges do not form a bijection")

            self._forward[generator.index] = forward
            self._backward[generator.index] = backward

    @classmethod
    def from_edge_list(cls, text, rank=None):
        """Parse lines ``v s u`` and one ``root v`` line. A line with an
        inverse letter ``v S u`` is read as ``u s v``.

        """

        table = {}
        root = None

        for number, line in enumerate(text.splitlines(), 1):
            fields = line.split('#')[0].split()

            if not fields:
                continue

            if fields[0] == 'root' and len(fields) == 2:
                root = fields[1]
                continue

            if len(fields) != 3:
                raise ConstructionError(f"line {number}: bad edge '{line.strip()}'")

            v, letter, u = fields
            generator = Generator.parse(letter)

            if generator.inverted:
                v, u = u, v

            table.setdefault(v, {})[generator.inverse.letter
                                    if generator.inverted
                                    else generator.letter] = u
            table.setdefault(u, {})

        if root is None:
            raise ConstructionError('missing root line')

        return cls(table, root, rank)

    def vertices(self):
        return list(self._forward[0])

    def step(self, v, s):
        if s.inverted:
            return self._backward[s.index][v]
        else:
            return self._forward[s.index][v]

    def to_edge_list(self):
        lines = [f'root {self.root}']

        for v in self.vertices():
            for index in range(self.rank):
                lines.append(f'{v} {Generator(index, False)} '
                             f'{self._forward[index][v]}')

        return '\n'.join(lines) + '\n'


def to_edge_list(graph, max_vertices=100000):
    """Serialize the component of the root of given finite graph, naming
    vertices by breadth first search order.

    """

    distances = graph.ball_distances(graph.root, max_vertices)

    if len(distances) > max_vertices:
        raise ResourceBudgetError('vertices', max_vertices, 'to_edge_list')

    numbers = {v: number for number, v in enumerate(distances)}
    lines = ['root 0']

    for v, number in numbers.items():
        for s in graph.labels():
            if not s.inverted:
                lines.append(f'{number} {s} {numbers[graph.step(v, s)]}')

    return '\n'.join(lines) + '\n'


class ProductSchreierGraph(SchreierGraph):
    """The orbit graph of a tuple of vertices, one per component graph,
    under the diagonal action. The stabilizer of the root tuple is the
    intersection of the stabilizers of its coordinates.

    """

    def __init__(self, graphs, roots=None):
        if not graphs:
            raise ConstructionError('no component graphs')

        if roots is None:
            roots = [graph.root for graph in graphs]

        if len(roots) != len(graphs):
            raise ConstructionError('one root per component graph is required')

        self.graphs = list(graphs)
        self.rank = graphs[0].rank
        self.root = tuple(roots)

    def step(self, v, s):
        u = tuple(graph.step(x, s) for graph, x in zip(self.graphs, v))

        if None in u:
            return None

        return u

    def depth_lower_bound(self, v):
        return self.graphs[0].depth_lower_bound(v[0])

    def has_nonempty_shadow(self, v):
        if self.root[0] == self.graphs[0].root:
            return self.graphs[0].has_nonempty_shadow(v[0])

        return super(ProductSchreierGraph, self).has_nonempty_shadow(v)


def random_vertex(graph, rng, max_length):
    """The endpoint of a uniformly random reduced word of random length at
    most `max_length` applied to the root.

    """

    length = int(rng.integers(max_length + 1))
    w = random_reduced_word(length, graph.rank, rng)
    v = graph.root

    for s in w:
        u = graph.step(v, s)

        if u is None:
            break

        v = u

    return v


def schreier_violations(graph, pairs, seed, max_length):
    """Count the sampled (vertex, label) pairs where stepping forth and
    back does not return to the vertex.

    """

    rng = np.random.default_rng(seed)
    labels = graph.labels()
    violations = 0

    for _ in range(pairs):
        v = random_vertex(graph, rng, max_length)
        s = labels[int(rng.integers(len(labels)))]
        u = graph.step(v, s)

        if u is None or graph.step(u, s.inverse) != v:
            LOGGER.debug('Schreier violation at %r with label %s.', v, s)
            violations += 1

    return violations
