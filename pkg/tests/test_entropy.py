import math
import unittest

from irsentropy.entropy import EXACT
from irsentropy.entropy import MONTE_CARLO
from irsentropy.entropy import bundle_entropy
from irsentropy.entropy import choose_glue_depth
from irsentropy.entropy import core_quotient_entropy
from irsentropy.entropy import entropy_curve
from irsentropy.entropy import escape_margin
from irsentropy.entropy import fano_bound
from irsentropy.entropy import fixing_estimate
from irsentropy.entropy import glue_depth_parameters
from irsentropy.entropy import plugin_entropy
from irsentropy.entropy import prefix_at_infinity
from irsentropy.entropy import reach_constants
from irsentropy.entropy import realize_entropy
from irsentropy.entropy import rw_entropy
from irsentropy.entropy import sample_endpoints
from irsentropy.errors import ContractViolationError
from irsentropy.errors import ResourceBudgetError
from irsentropy.freegroup import EMPTY
from irsentropy.freegroup import srw
from irsentropy.gluing import GluedGraph
from irsentropy.gluing import TreeVertex
from irsentropy.gluing import default_marked_pair
from irsentropy.gluing import measure_orientation
from irsentropy.irs import GluedConjugacyClass
from irsentropy.logs import configure_logging
from irsentropy.models import AbelianQuotient
from irsentropy.models import HeisenbergQuotient
from irsentropy.models import LineGraph
from irsentropy.models import QuotientCayleyGraph
from irsentropy.schreier import FreeGroupCayleyGraph
from irsentropy.wreath import FinitaryPermutationGroup
from irsentropy.wreath import LamplighterGroup
from irsentropy.wreath import LamplighterSubgroup
from irsentropy.wreath import PointStabilizer


LN3 = math.log(3)

GRID = [0.0, 0.25, 0.5, 0.75, 1.0]

# Z_2 wr Z with the walk uniform on f, x and X at t = 2. Base 0 carries
# the identity with probability 1/3, bases 1 and -1 two elements with
# probability 1/9 each that differ at two lamps, bases 2 and -2 one.
H2_FULL = (5 / 3) * LN3
H2_BASE = (1 / 3) * LN3 + 2 * (2 / 9) * math.log(9 / 2) + 2 * (1 / 9) * math.log(9)


def h2(p):
    separated = 1.0 - (1.0 - p) ** 2

    return (H2_BASE
            + 2 * separated * ((2 / 9) * math.log(9) - (2 / 9) * math.log(9 / 2)))


def lamplighter():
    group = LamplighterGroup(2, 1)

    return group, LamplighterSubgroup(group), group.srw()


def lamplighter_entropies(grid, t_max):
    """Exact H_t(p) on the Z_2 wr Z grid for t = 1 to `t_max`.

    """

    _, K, mu = lamplighter()

    return {
        t: [t * estimate.value for estimate in entropy_curve(K, mu, grid, t).estimates]
        for t in range(1, t_max + 1)
    }


def glued_heisenberg(n):
    base = QuotientCayleyGraph(HeisenbergQuotient())

    return default_marked_pair(base, 'b'), GluedGraph(default_marked_pair(base, 'b'), n)


class EntropyTest(unittest.TestCase):

    def test_plugin_entropy(self):
        self.assertEqual(plugin_entropy([]), 0.0)
        self.assertEqual(plugin_entropy([5]), 0.0)
        self.assertAlmostEqual(plugin_entropy([1, 1, 0]), math.log(2), delta=1e-12)
        self.assertAlmostEqual(plugin_entropy([1, 1], miller_madow=True),
                               math.log(2) + 1 / 4,
                               delta=1e-12)

    def test_lamplighter_t1(self):
        """At t = 1 every support element is alone in its base class.

        """

        _, K, mu = lamplighter()

        for p in [0.0, 0.3, 1.0]:
            estimate = bundle_entropy(K, mu, p, 1)

            self.assertAlmostEqual(estimate.value, LN3, delta=1e-12)
            self.assertEqual(estimate.stderr, 0.0)
            self.assertEqual(estimate.mode, EXACT)

    def test_lamplighter_endpoints(self):
        _, K, mu = lamplighter()

        self.assertAlmostEqual(bundle_entropy(K, mu, 1.0, 2).value,
                               H2_FULL / 2,
                               delta=1e-12)
        self.assertAlmostEqual(bundle_entropy(K, mu, 0.0, 2).value,
                               H2_BASE / 2,
                               delta=1e-12)
        self.assertAlmostEqual(h2(1.0), H2_FULL, delta=1e-12)

    def test_lamplighter_exact_curve(self):
        """Exact enumeration over Theta matches the closed form and is
        non-decreasing in p.

        """

        _, K, mu = lamplighter()
        grid = [0.0, 0.25, 0.5, 0.75, 1.0]
        curve = entropy_curve(K, mu, grid, 2)
        values = [estimate.value for estimate in curve.estimates]

        self.assertEqual(curve.p_grid, grid)

        for p, estimate in zip(grid, curve.estimates):
            self.assertEqual(estimate.mode, EXACT)
            self.assertEqual(estimate.p, p)
            self.assertAlmostEqual(estimate.value, h2(p) / 2, delta=1e-12)

        self.assertEqual(values, sorted(values))

    def test_lamplighter_t3_monotone(self):
        _, K, mu = lamplighter()
        curve = entropy_curve(K, mu, [0.0, 0.25, 0.5, 0.75, 1.0], 3)
        values = [estimate.value for estimate in curve.estimates]

        for lower, upper in zip(values, values[1:]):
            self.assertLessEqual(lower, upper + 1e-12)

        full = rw_entropy(mu, 3, K.group)[-1].H

        self.assertAlmostEqual(values[-1], full / 3, delta=1e-12)

    def test_subadditivity(self):
        """H_{t+s}(p) is at most H_t(p) + H_s(p) in exact mode.

        """

        entropies = lamplighter_entropies(GRID, 4)

        for t in [1, 2]:
            for s in [1, 2]:
                for i, p in enumerate(GRID):
                    self.assertLessEqual(entropies[t + s][i],
                                         entropies[t][i] + entropies[s][i] + 1e-12,
                                         f't={t}, s={s}, p={p}')

    def test_bowen_monotone_lamplighter(self):
        """(1/t) H_t(p) and the differences H_{t+1}(p) - H_t(p) are
        non-increasing in t.

        """

        entropies = lamplighter_entropies(GRID, 4)

        for i, p in enumerate(GRID):
            values = [entropies[t][i] for t in range(1, 5)]
            ratios = [value / t for t, value in enumerate(values, 1)]
            differences = [values[0]] + [b - a for a, b in zip(values, values[1:])]

            for previous, ratio in zip(ratios, ratios[1:]):
                self.assertLessEqual(ratio, previous + 1e-12, f'p={p}')

            for previous, difference in zip(differences, differences[1:]):
                self.assertLessEqual(difference, previous + 1e-12, f'p={p}')

    def test_bowen_monotone_glued(self):
        _, graph = glued_heisenberg(2)
        K = GluedConjugacyClass(graph)

        for p in [0.0, 0.5, 1.0]:
            estimates = [bundle_entropy(K, srw(2), p, t, theta_samples=200, seed=2,
                                        exact_max_indices=-1)
                         for t in range(1, 5)]

            for previous, estimate in zip(estimates, estimates[1:]):
                slack = 3 * math.hypot(previous.stderr, estimate.stderr)

                self.assertLessEqual(estimate.value,
                                     previous.value + slack + 1e-12,
                                     f'p={p}, t={estimate.t}')

    def test_glued_endpoints(self):
        """At t = 4 the p = 0 value is the entropy of the walk pushed to the
        Heisenberg group and the p = 1 value is bounded away from 0.

        """

        _, graph = glued_heisenberg(2)
        K = GluedConjugacyClass(graph)
        curve = entropy_curve(K, srw(2), [0.0, 0.5, 1.0], 4, theta_samples=200, seed=4,
                              exact_max_indices=-1)
        low, middle, high = curve.estimates
        heisenberg = rw_entropy(srw(2), 4, HeisenbergQuotient())[-1]

        self.assertEqual(low.mode, EXACT)
        self.assertAlmostEqual(low.value, heisenberg.H_over_t, delta=1e-12)
        self.assertEqual(high.mode, EXACT)
        self.assertGreater(high.value - 3 * high.stderr, 0.0)
        self.assertEqual(middle.mode, MONTE_CARLO)

        # Every sampled partition lies between the two endpoint partitions.
        self.assertLessEqual(low.value, middle.value + 1e-12)
        self.assertLessEqual(middle.value, high.value + 1e-12)

    def test_full_realization_lamplighter_z3(self):
        """On Z_2 wr Z^3 the p = 1 endpoint is the random walk entropy and
        bounds the difference estimate from above.

        """

        group = LamplighterGroup(2, 3)
        K = LamplighterSubgroup(group)
        mu = group.srw()
        row = rw_entropy(mu, 4, group)[-1]
        curve = entropy_curve(K, mu, [0.0, 0.5, 1.0], 4, theta_samples=50, seed=6,
                              exact_max_indices=-1)
        low, middle, high = curve.estimates

        self.assertEqual(high.mode, EXACT)
        self.assertAlmostEqual(high.value, row.H_over_t, delta=1e-12)
        self.assertLessEqual(row.H_diff, high.value + 1e-12)
        self.assertLess(low.value, high.value)
        self.assertLessEqual(low.value, middle.value + 1e-12)
        self.assertLessEqual(middle.value, high.value + 1e-12)

    def test_monte_carlo(self):
        """Monte Carlo estimates agree with exact values and are exactly
        monotone under the coupling.

        """

        _, K, mu = lamplighter()
        grid = [0.0, 0.25, 0.5, 0.75, 1.0]
        curve = entropy_curve(K, mu, grid, 2, theta_samples=400, seed=3,
                              exact_max_indices=-1)
        values = [estimate.value for estimate in curve.estimates]

        for p, estimate in zip(grid, curve.estimates):
            if p in [0.0, 1.0]:
                self.assertEqual(estimate.mode, EXACT)
            else:
                self.assertEqual(estimate.mode, MONTE_CARLO)
                self.assertEqual(estimate.theta_samples, 400)
                self.assertGreater(estimate.stderr, 0.0)
                self.assertLess(abs(estimate.value - h2(p) / 2),
                                5 * estimate.stderr + 1e-12)

        for lower, upper in zip(values, values[1:]):
            self.assertLessEqual(lower, upper + 1e-12)

    def test_monte_carlo_reproducible(self):
        _, K, mu = lamplighter()
        first = bundle_entropy(K, mu, 0.4, 3, theta_samples=20, seed=5,
                               exact_max_indices=-1)
        second = bundle_entropy(K, mu, 0.4, 3, theta_samples=20, seed=5,
                                exact_max_indices=-1, parallel=4)

        self.assertEqual(first, second)

    def test_coupling_inequality(self):
        """H(q) - H(p) is at most H(q - p) in exact mode.

        """

        _, K, mu = lamplighter()
        grid = [0.0, 0.2, 0.3, 0.5, 0.7, 1.0]
        values = dict(zip(grid, [estimate.value
                                 for estimate in entropy_curve(K, mu, grid, 3).estimates]))

        for p, q in [(0.2, 0.5), (0.3, 0.5), (0.5, 0.7), (0.3, 1.0)]:
            self.assertLessEqual(values[q] - values[p],
                                 values[round(q - p, 10)] + 1e-12)

    def test_walk_samples(self):
        """Sampled walks give plug-in estimates close to the exact value.

        """

        _, K, mu = lamplighter()
        exact = bundle_entropy(K, mu, 1.0, 2)
        sampled = bundle_entropy(K, mu, 1.0, 2, walk_samples=20000, seed=1)
        corrected = bundle_entropy(K, mu, 1.0, 2, walk_samples=20000, seed=1,
                                   miller_madow=True)

        self.assertEqual(sampled.walk_samples, 20000)
        self.assertAlmostEqual(sampled.value, exact.value, delta=0.02)
        self.assertGreater(corrected.value, sampled.value)
        self.assertTrue(corrected.miller_madow)

    def test_sample_endpoints(self):
        group, K, mu = lamplighter()
        endpoints = sample_endpoints(K, mu, 2, 30000, 4)
        frequency = sum(1 for z in endpoints if z == group.identity) / len(endpoints)

        self.assertAlmostEqual(frequency, 1 / 3, delta=0.015)
        self.assertEqual(endpoints, sample_endpoints(K, mu, 2, 30000, 4))

    def test_point_stabilizer(self):
        """Transpositions have norm two and the curve runs from the shift
        marginal to the full walk entropy.

        """

        group = FinitaryPermutationGroup(1, shift=True)
        K = PointStabilizer(group)
        mu = group.srw()
        curve = entropy_curve(K, mu, [0.0, 0.5, 1.0], 2)
        values = [estimate.value for estimate in curve.estimates]
        shifts = rw_entropy(group.measure({'x': 1, 'X': 1, '': 1}), 2, group)[-1].H

        self.assertEqual(K.mho(group.parse('t')).norm, 2)
        self.assertAlmostEqual(values[0], shifts / 2, delta=1e-12)
        self.assertLessEqual(values[0], values[1] + 1e-12)
        self.assertLessEqual(values[1], values[2] + 1e-12)
        self.assertAlmostEqual(values[2], rw_entropy(mu, 2, group)[-1].H / 2, delta=1e-12)

    def test_glued_t1(self):
        """On a glued graph distinct steps stay in distinct cosets.

        """

        _, graph = glued_heisenberg(2)
        K = GluedConjugacyClass(graph)

        for p in [0.0, 0.5, 1.0]:
            self.assertAlmostEqual(bundle_entropy(K, srw(2), p, 1).value,
                                   math.log(4),
                                   delta=1e-12)

    def test_entropy_errors(self):
        _, K, mu = lamplighter()

        with self.assertRaises(ContractViolationError):
            bundle_entropy(K, mu, 1.5, 2)

        with self.assertRaises(ContractViolationError):
            bundle_entropy(K, mu, 0.5, 0)

        with self.assertRaises(ContractViolationError):
            entropy_curve(K, mu, [0.5, 0.2], 2)

        with self.assertRaises(ContractViolationError):
            bundle_entropy(K, mu, 0.5, 2, theta_samples=1, exact_max_indices=-1)

        with self.assertRaises(ResourceBudgetError) as cm:
            bundle_entropy(K, mu, 0.5, 6, support_budget=20)

        self.assertIn('t=', str(cm.exception))

    def test_realize_entropy(self):
        _, K, mu = lamplighter()
        target = h2(0.5) / 2
        realization = realize_entropy(K, mu, target, 2, tolerance=1e-6)

        self.assertAlmostEqual(realization.p, 0.5, delta=1e-4)
        self.assertAlmostEqual(realization.estimate.value, target, delta=1e-6)
        self.assertEqual(realize_entropy(K, mu, H2_FULL / 2, 2).p, 1.0)
        self.assertEqual(realize_entropy(K, mu, H2_BASE / 2, 2).p, 0.0)

        with self.assertRaises(ContractViolationError):
            realize_entropy(K, mu, 10.0, 2)

    def test_rw_entropy_free(self):
        rows = rw_entropy(srw(2), 4)

        self.assertEqual([row.t for row in rows], [1, 2, 3, 4])
        self.assertAlmostEqual(rows[0].H, math.log(4), delta=1e-12)
        self.assertAlmostEqual(rows[0].H_diff, rows[0].H, delta=1e-12)

        for row in rows:
            self.assertAlmostEqual(row.H_over_t, row.H / row.t, delta=1e-12)

        for previous, row in zip(rows, rows[1:]):
            self.assertAlmostEqual(row.H_diff, row.H - previous.H, delta=1e-12)

    def test_rw_entropy_heisenberg(self):
        """The pushed forward walk on the Heisenberg group has strictly
        decreasing H_t / t.

        """

        rows = rw_entropy(srw(2), 6, HeisenbergQuotient())
        ratios = [row.H_over_t for row in rows]

        self.assertAlmostEqual(rows[0].H, math.log(4), delta=1e-12)

        for previous, ratio in zip(ratios, ratios[1:]):
            self.assertLess(ratio, previous)

    def test_rw_entropy_abelian(self):
        rows = rw_entropy(srw(2), 3, AbelianQuotient(1))

        self.assertAlmostEqual(rows[0].H, 1.5 * math.log(2), delta=1e-12)

        with self.assertRaises(ContractViolationError):
            rw_entropy(srw(2), 0)

    def test_fano_bound(self):
        self.assertEqual(fano_bound(1.0, 5), 0.0)
        self.assertAlmostEqual(fano_bound(0.5, 0), 2 * math.log(2), delta=1e-12)
        self.assertAlmostEqual(fano_bound(0.0, 2), 4 * math.log(4), delta=1e-12)

        with self.assertRaises(ContractViolationError):
            fano_bound(1.5, 1)

        with self.assertRaises(ContractViolationError):
            fano_bound(0.5, -1)

    def test_choose_glue_depth(self):
        self.assertEqual(choose_glue_depth(2, 0.1, 1, 0.5, 1.0, 1.0), 9)

        depth = glue_depth_parameters(2, 0.1, 1, 0.5, 1.0, 1.0)

        self.assertEqual(depth.ell, 4)
        self.assertEqual(depth.q, 0.5)
        self.assertEqual(glue_depth_parameters(0, 0.5, 1, 1.0, 1.0, 1.0).ell, 1)
        self.assertGreater(choose_glue_depth(2, 0.01, 1, 0.5, 1.0, 1.0), 9)
        self.assertGreater(choose_glue_depth(2, 0.1, 2, 0.5, 1.0, 1.0), 9)

        with self.assertRaises(ContractViolationError):
            choose_glue_depth(2, 1.5, 1, 0.5, 1.0, 1.0)

        with self.assertRaises(ContractViolationError):
            choose_glue_depth(2, 0.1, 1, 0.0, 1.0, 1.0)

    def test_reach_constants(self):
        self.assertAlmostEqual(reach_constants(srw(2)), 0.25, delta=1e-12)

    def test_escape_margin(self):
        self.assertEqual(escape_margin(1, 1), 2)
        self.assertEqual(escape_margin(1, 100), 10)
        self.assertEqual(escape_margin(2, 1000), 28)

    def test_fixing_tree(self):
        """From depth 2 of the 4-regular tree the walk reaches the root
        with probability 1/9.

        """

        report = fixing_estimate(FreeGroupCayleyGraph(2), srw(2), 1, 2, 100, 2000, 0)

        self.assertEqual((report.k, report.n, report.horizon, report.walks),
                         (1, 2, 100, 2000))
        self.assertAlmostEqual(report.alpha_upper, 8 / 9, delta=0.04)
        self.assertLessEqual(report.alpha_lower, report.alpha_upper)
        self.assertGreaterEqual(report.alpha_lower, 0.0)

    def test_fixing_glued(self):
        _, graph = glued_heisenberg(3)
        report = fixing_estimate(graph, srw(2), 1, 3, 50, 200, 1, parallel=2)

        self.assertLessEqual(report.alpha_lower, report.alpha_upper)
        self.assertLessEqual(report.alpha_upper, 1.0)
        self.assertGreater(report.alpha_upper, 0.5)

    def test_fixing_tree_lower(self):
        report = fixing_estimate(FreeGroupCayleyGraph(2), srw(2), 1, 2, 100, 10000, 5)

        self.assertGreater(report.alpha_lower - 3 * report.stderr_lower, 0.0)
        self.assertAlmostEqual(report.alpha_lower, 8 / 9, delta=0.03)

    def test_fixing_glued_depth(self):
        """With the glue depth chosen for epsilon = 1/4 the walk keeps its
        1-prefix and escapes with probability about 3/4 or more.

        """

        marked, _ = glued_heisenberg(1)
        marked, forward, backward = measure_orientation(marked, srw(2), 500, 500, 8)
        n = choose_glue_depth(1, 0.25, 1, max(forward.value, backward.value), 1.0, 1.0)

        self.assertLessEqual(n, 8)

        report = fixing_estimate(GluedGraph(marked, n), srw(2), 1, n, 4000, 300, 9)

        self.assertGreaterEqual(report.alpha_lower, 0.75 - 3 * report.stderr_lower)
        self.assertLessEqual(report.alpha_lower, report.alpha_upper)

    def test_fixing_errors(self):
        with self.assertRaises(ContractViolationError):
            fixing_estimate(FreeGroupCayleyGraph(2), srw(2), 2, 2, 10, 10, 0)

        with self.assertRaises(ContractViolationError):
            fixing_estimate(LineGraph('a'), srw(2), 1, 2, 10, 10, 0)

    def test_prefix_at_infinity(self):
        tree = FreeGroupCayleyGraph(2)
        prefix = prefix_at_infinity(tree, srw(2), 1, 400, 2)

        self.assertEqual(prefix_at_infinity(tree, srw(2), 1, 0, 2), EMPTY)
        self.assertEqual(prefix, prefix_at_infinity(tree, srw(2), 1, 400, 2))
        self.assertLessEqual(len(prefix), 1)

        _, graph = glued_heisenberg(2)
        prefix = prefix_at_infinity(graph, srw(2), 2, 200, 3)

        self.assertIsInstance(prefix, TreeVertex)
        self.assertLessEqual(len(prefix.word), 2)

    def test_core_quotient_entropy(self):
        marked, _ = glued_heisenberg(1)
        rows = core_quotient_entropy(marked, srw(2), [1, 2], 1)

        self.assertEqual([n for n, _ in rows], [1, 2])

        for _, estimate in rows:
            self.assertAlmostEqual(estimate.value, math.log(4), delta=1e-12)


configure_logging()

if __name__ == '__main__':
    unittest.main()
