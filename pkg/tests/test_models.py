import unittest

import numpy as np

from irsentropy.errors import ConstructionError
from irsentropy.errors import ContractViolationError
from irsentropy.errors import QuotientOverflowError
from irsentropy.freegroup import Generator
from irsentropy.freegroup import commutator
from irsentropy.freegroup import random_reduced_word
from irsentropy.freegroup import srw
from irsentropy.freegroup import word
from irsentropy.logs import configure_logging
from irsentropy.models import AbelianQuotient
from irsentropy.models import HeisenbergQuotient
from irsentropy.models import QuotientCayleyGraph
from irsentropy.models import binomial_estimate
from irsentropy.models import char_eval
from irsentropy.models import escape_probability_estimate
from irsentropy.models import heisenberg_eval
from irsentropy.models import quotient_by_name
from irsentropy.models import quotient_cayley_graph
from irsentropy.schreier import FreeGroupCayleyGraph


class ModelsTest(unittest.TestCase):

    def test_heisenberg_eval(self):
        self.assertEqual(heisenberg_eval(word('')), (0, 0, 0))
        self.assertEqual(heisenberg_eval(word('a')), (1, 0, 0))
        self.assertEqual(heisenberg_eval(word('ab')), (1, 1, 1))
        self.assertEqual(heisenberg_eval(word('ba')), (1, 1, 0))
        self.assertEqual(heisenberg_eval(word('abAB')), (0, 0, 1))
        self.assertEqual(
            heisenberg_eval(commutator(commutator(word('a'), word('b')), word('a'))),
            (0, 0, 0))

    def test_heisenberg_homomorphism(self):
        """Evaluation is a homomorphism and inv() is the group inverse.

        """

        rng = np.random.default_rng(5)
        quotient = HeisenbergQuotient()

        for _ in range(200):
            g = random_reduced_word(int(rng.integers(13)), 2, rng)
            h = random_reduced_word(int(rng.integers(13)), 2, rng)
            x = quotient.evaluate(g)

            self.assertEqual(quotient.evaluate(g * h),
                             quotient.mul(x, quotient.evaluate(h)))
            self.assertEqual(quotient.mul(x, quotient.inv(x)), quotient.identity)
            self.assertLessEqual(quotient.displacement_lower_bound(x), len(g))

    def test_heisenberg_errors(self):
        quotient = HeisenbergQuotient()

        with self.assertRaises(ContractViolationError):
            quotient.evaluate(word('c'))

        with self.assertRaises(QuotientOverflowError):
            quotient.mul((2 ** 62, 0, 0), (2 ** 62, 0, 0))

    def test_trajectory_array(self):
        """The vectorized trajectory agrees with step by step products.

        """

        rng = np.random.default_rng(6)

        for quotient in [HeisenbergQuotient(), AbelianQuotient(2)]:
            letters = [Generator.parse(letter)
                       for letter in rng.choice(list('aAbB'), 50)]
            images = [quotient.generator_image(s) for s in letters]
            start = quotient.evaluate(word('abb'))
            positions = quotient.trajectory_array(start, images)
            position = start

            self.assertEqual(tuple(positions[0]), start)

            for i, image in enumerate(images, 1):
                position = quotient.mul(position, image)
                self.assertEqual(tuple(int(a) for a in positions[i]), position)

    def test_trajectory_array_overflow(self):
        heisenberg = HeisenbergQuotient()

        # The central coordinate grows as the product of the others.
        with self.assertRaises(QuotientOverflowError):
            heisenberg.trajectory_array((0, 0, 0), [(2 ** 40, 0, 0), (0, 2 ** 40, 0)])

        with self.assertRaises(QuotientOverflowError):
            heisenberg.trajectory_array((2 ** 62, 0, 0), [(2 ** 62, 0, 0)])

        with self.assertRaises(QuotientOverflowError):
            AbelianQuotient(1).trajectory_array((2 ** 62, ), [(2 ** 62, )])

        positions = heisenberg.trajectory_array((0, 0, 0), [(2 ** 20, 0, 0), (0, 2 ** 20, 0)])

        self.assertEqual(tuple(int(a) for a in positions[-1]), (2 ** 20, 2 ** 20, 2 ** 40))

    def test_char_eval(self):
        self.assertEqual(char_eval('a', word('aab')), -2)
        self.assertEqual(char_eval('a', word('A')), 1)
        self.assertEqual(char_eval('b', word('aab')), -1)
        self.assertEqual(char_eval('a', word('abAB')), 0)
        self.assertEqual(char_eval(Generator.parse('b'), word('')), 0)

    def test_abelian_quotient(self):
        quotient = AbelianQuotient(1)

        self.assertEqual(quotient.rank, 2)
        self.assertEqual(quotient.evaluate(word('aabAB')), (1, ))
        self.assertEqual(quotient.generator_image(Generator.parse('b')), (0, ))
        self.assertEqual(AbelianQuotient(3).evaluate(word('aCb')), (1, 1, -1))

        with self.assertRaises(ConstructionError):
            AbelianQuotient(-1)

    def test_quotient_by_name(self):
        self.assertIsInstance(quotient_by_name('heisenberg'), HeisenbergQuotient)
        self.assertEqual(quotient_by_name('abelian:2').dimension, 2)
        self.assertEqual(quotient_by_name('abelian:2').name, 'abelian:2')

        with self.assertRaises(ConstructionError):
            quotient_by_name('heisenberg', rank=3)

        with self.assertRaises(ConstructionError):
            quotient_by_name('nilpotent')

    def test_ball_growth(self):
        """Heisenberg balls are larger than the balls of its abelian
        quotient Z^2 and of the same size as the tree ball up to radius
        two.

        """

        heisenberg = QuotientCayleyGraph(HeisenbergQuotient())
        plane = QuotientCayleyGraph(AbelianQuotient(2))

        self.assertEqual(len(heisenberg.ball(heisenberg.root, 2)), 17)
        self.assertEqual(len(plane.ball(plane.root, 2)), 13)
        self.assertEqual(len(plane.ball(plane.root, 6)), 85)
        self.assertGreater(len(heisenberg.ball(heisenberg.root, 6)), 85)

        sizes = [len(heisenberg.ball(heisenberg.root, radius)) for radius in range(7)]

        self.assertEqual(sizes, sorted(set(sizes)))

    def test_quotient_graph_act(self):
        graph = QuotientCayleyGraph(HeisenbergQuotient())

        self.assertEqual(graph.act(graph.root, word('abAB')), (0, 0, 1))
        self.assertEqual(graph.act((1, 0, 0), word('b')), (1, 1, 1))
        self.assertEqual(graph.depth_lower_bound((2, -3, 7)), 5)

    def test_quotient_cayley_graph(self):
        graph = quotient_cayley_graph(AbelianQuotient(2))

        self.assertIsInstance(graph, QuotientCayleyGraph)
        self.assertEqual(graph.root, (0, 0))
        self.assertEqual(graph.act(graph.root, word('abA')), (0, 1))
        self.assertEqual(len(graph.sphere(graph.root, 1)), 4)

    def test_first_visit(self):
        graph = QuotientCayleyGraph(AbelianQuotient(1))
        steps = [word(text) for text in ['a', 'a', 'A', 'A', 'A']]

        self.assertEqual(graph.first_visit(graph.root, steps, (0, )), 4)
        self.assertEqual(graph.first_visit(graph.root, steps, (-1, )), 5)
        self.assertIsNone(graph.first_visit(graph.root, steps, (3, )))
        self.assertEqual(graph.first_visit((1, ), steps, (2, )), 1)

    def test_binomial_estimate(self):
        self.assertEqual(binomial_estimate(0, 0), (0.0, 0.0, 0))

        estimate = binomial_estimate(3, 4)

        self.assertEqual(estimate.value, 0.75)
        self.assertAlmostEqual(estimate.stderr, (0.75 * 0.25 / 4) ** 0.5, delta=1e-12)

    def test_escape_tree(self):
        """The simple random walk on the 4-regular tree returns to the root
        with probability 1/3.

        """

        estimate = escape_probability_estimate(FreeGroupCayleyGraph(2),
                                               srw(2),
                                               200,
                                               1000,
                                               0)

        self.assertAlmostEqual(estimate.value, 2 / 3, delta=0.05)
        self.assertEqual(estimate.trials, 1000)

    def test_escape_recurrent(self):
        """The walk on Z^1 with loops is recurrent, the walk on the
        Heisenberg group transient.

        """

        line = escape_probability_estimate(QuotientCayleyGraph(AbelianQuotient(1)),
                                           srw(2),
                                           1000,
                                           500,
                                           1)
        heisenberg = escape_probability_estimate(
            QuotientCayleyGraph(HeisenbergQuotient()),
            srw(2),
            1000,
            500,
            1,
            parallel=4)

        self.assertLess(line.value, 0.15)
        self.assertGreater(heisenberg.value, line.value)

    def test_escape_errors(self):
        with self.assertRaises(ContractViolationError):
            escape_probability_estimate(FreeGroupCayleyGraph(2), srw(2), 0, 10, 0)


configure_logging()

if __name__ == '__main__':
    unittest.main()
