"""Entropy estimators.

The bundle entropy H_t(p) is the expected entropy of the law of the
Core_Theta coset of Z_t, Theta a Bernoulli(p) index set. Partition
entropies split into one term per finite norm class, and each term only
depends on Theta restricted to the finitely many indices relevant to its
class. When all such index sets are small the expectation over Theta is
computed exactly by enumerating subsets, otherwise it is estimated from
Theta samples sharing one coupled uniform stream.

"""

import math
import time
import logging
import itertools
from collections import defaultdict
from collections import namedtuple
from collections import Counter

import numpy as np
from scipy.special import entr
from scipy.stats import entropy as scipy_entropy
from humanfriendly import format_timespan

from .errors import ContractViolationError
from .freegroup import DEFAULT_SUPPORT_BUDGET
from .freegroup import convolution
from .freegroup import convolution_power
from .freegroup import random_reduced_word
from .freegroup import reach_times
from .freegroup import shannon_entropy
from .gluing import GluedGraph
from .irs import CoreStructure
from .irs import GluedConjugacyClass
from .irs import ThetaSample
from .models import NilpotentQuotient
from .models import binomial_estimate
from .parallel import derive_seed
from .parallel import run_parallel


LOGGER = logging.getLogger(__name__)

EXACT = 'exact'
MONTE_CARLO = 'monte_carlo'

DEFAULT_EXACT_MAX_INDICES = 16


EntropyEstimate = namedtuple('EntropyEstimate',
                             [
                                 'value',
                                 'stderr',
                                 't',
                                 'theta_samples',
                                 'mode',
                                 'p',
                                 'seed',
                                 'miller_madow',
                                 'walk_samples'
                             ],
                             defaults=[None, None, False, None])

EntropyCurve = namedtuple('EntropyCurve', ['p_grid', 'estimates', 'seed'])

RwEntropyRow = namedtuple('RwEntropyRow', ['t', 'H', 'H_over_t', 'H_diff'])

FixingReport = namedtuple('FixingReport',
                          [
                              'k',
                              'n',
                              'alpha_lower',
                              'alpha_upper',
                              'stderr_lower',
                              'stderr_upper',
                              'horizon',
                              'walks',
                              'seed'
                          ])

Realization = namedtuple('Realization', ['p', 'estimate', 'iterations'])


def plugin_entropy(counts, miller_madow=False):
    """Plug-in entropy in nats of given counts, with the Miller-Madow
    correction (K - 1) / 2N if `miller_madow` is True.

    """

    counts = np.asarray([count for count in counts if count > 0], dtype=float)

    if len(counts) == 0:
        return 0.0

    value = float(scipy_entropy(counts))

    if miller_madow:
        value += (len(counts) - 1) / (2.0 * np.sum(counts))

    return value


def sample_endpoints(K, mu, t, count, seed):
    """Endpoints Z_t of `count` independent walks in the group of `K`.

    """

    items = list(mu.items())
    cdf = np.cumsum([probability for _, probability in items])
    rng = np.random.default_rng(seed)
    indices = np.minimum(np.searchsorted(cdf, rng.random((count, t)), side='right'),
                         len(items) - 1)
    endpoints = []

    for row in indices:
        position = K.identity

        for index in row:
            position = K.mul(position, items[index][0])

        endpoints.append(position)

    return endpoints


class _BundleProblem(object):
    """Weights of the support of Z_t and the Theta independent parts of
    its Core_Theta partitions.

    """

    def __init__(self, K, mu, t, support_budget, walk_samples, seed):
        if t < 1:
            raise ContractViolationError(f't must be at least 1, not {t}')

        if walk_samples is None:
            distribution = K.convolution(mu, t, support_budget)
            self.weights = dict(distribution.items())
            self.samples = None
        else:
            endpoints = sample_endpoints(K, mu, t, walk_samples, derive_seed(seed, 'walks'))
            counts = Counter(endpoints)
            self.weights = {z: count / walk_samples for z, count in counts.items()}
            self.samples = walk_samples

        self.K = K
        self.t = t
        self.structure = CoreStructure(K, list(self.weights))

    def class_terms(self, key, mask):
        """Entropy and number of blocks of one finite norm class, for the
        relevant indices at the positions in `mask`.

        """

        blocks = defaultdict(float)

        for z, block in self.structure.keys_for_mask(key, mask).items():
            blocks[block] += self.weights[z]

        values = np.fromiter(blocks.values(), dtype=float, count=len(blocks))

        return float(np.sum(entr(values))), len(values)

    def finish(self, entropy, blocks, miller_madow):
        if miller_madow and self.samples:
            entropy += (blocks - 1) / (2.0 * self.samples)

        return entropy

    def exact(self, p, miller_madow):
        entropy = 0.0
        blocks = 0.0

        for key, indices in self.structure.relevant.items():
            m = len(indices)

            if p == 0.0:
                sizes = [0]
            elif p == 1.0:
                sizes = [m]
            else:
                sizes = range(m + 1)

            for size in sizes:
                weight = p ** size * (1.0 - p) ** (m - size)

                for mask in itertools.combinations(range(m), size):
                    term, count = self.class_terms(key, mask)
                    entropy += weight * term
                    blocks += weight * count

        return self.finish(entropy, blocks, miller_madow)

    def sampled(self, theta, miller_madow):
        entropy = 0.0
        blocks = 0

        for key, indices in self.structure.relevant.items():
            mask = [i for i, index in enumerate(indices) if theta.contains(index)]
            term, count = self.class_terms(key, mask)
            entropy += term
            blocks += count

        return self.finish(entropy, blocks, miller_madow)

    def is_exact(self, p, exact_max_indices):
        return p in [0.0, 1.0] or self.structure.max_relevant() <= exact_max_indices


def _estimate(problem,
              p,
              theta_samples,
              seed,
              exact_max_indices,
              miller_madow,
              parallel):
    if not 0.0 <= p <= 1.0:
        raise ContractViolationError(f'p must be in [0, 1], not {p}')

    t = problem.t

    if problem.is_exact(p, exact_max_indices):
        value = problem.exact(p, miller_madow)

        return EntropyEstimate(value / t,
                               0.0,
                               t,
                               0,
                               EXACT,
                               p,
                               seed,
                               miller_madow,
                               problem.samples)

    if theta_samples < 2:
        raise ContractViolationError('at least two theta samples are needed')

    def sample(index):
        return problem.sampled(ThetaSample(problem.K, p, seed, index), miller_madow)

    values = np.array(run_parallel(sample, range(theta_samples), parallel))

    return EntropyEstimate(float(np.mean(values)) / t,
                           float(np.std(values, ddof=1)) / math.sqrt(theta_samples) / t,
                           t,
                           theta_samples,
                           MONTE_CARLO,
                           p,
                           seed,
                           miller_madow,
                           problem.samples)


def bundle_entropy(K,
                   mu,
                   p,
                   t,
                   theta_samples=100,
                   seed=0,
                   exact_max_indices=DEFAULT_EXACT_MAX_INDICES,
                   support_budget=DEFAULT_SUPPORT_BUDGET,
                   walk_samples=None,
                   miller_madow=False,
                   parallel=1):
    """Returns (1/t) H_t(p) as an EntropyEstimate.

    If `walk_samples` is given, the law of Z_t is replaced by the
    empirical law of that many sampled walks and partition entropies
    are plug-in estimates, Miller-Madow corrected if `miller_madow` is
    True.

    """

    start_time = time.time()
    problem = _BundleProblem(K, mu, t, support_budget, walk_samples, seed)
    estimate = _estimate(problem,
                         p,
                         theta_samples,
                         seed,
                         exact_max_indices,
                         miller_madow,
                         parallel)
    LOGGER.info('Bundle entropy at p=%g, t=%d: %.6f +- %.6f (%s) in %s.',
                p,
                t,
                estimate.value,
                estimate.stderr,
                estimate.mode,
                format_timespan(time.time() - start_time))

    return estimate


def entropy_curve(K,
                  mu,
                  p_grid,
                  t,
                  theta_samples=100,
                  seed=0,
                  exact_max_indices=DEFAULT_EXACT_MAX_INDICES,
                  support_budget=DEFAULT_SUPPORT_BUDGET,
                  walk_samples=None,
                  miller_madow=False,
                  parallel=1):
    """Coupled estimates of (1/t) H_t(p) over a sorted grid. All levels use
    the same uniform per (sample, index).

    """

    p_grid = [float(p) for p in p_grid]

    if p_grid != sorted(p_grid) or not all(0.0 <= p <= 1.0 for p in p_grid):
        raise ContractViolationError(f'p grid must be sorted in [0, 1]: {p_grid}')

    start_time = time.time()
    problem = _BundleProblem(K, mu, t, support_budget, walk_samples, seed)
    LOGGER.info('Entropy curve over %d points at t=%d, largest relevant index set %d.',
                len(p_grid),
                t,
                problem.structure.max_relevant())
    estimates = [_estimate(problem,
                           p,
                           theta_samples,
                           seed,
                           exact_max_indices,
                           miller_madow,
                           parallel)
                 for p in p_grid]
    LOGGER.info('Entropy curve done in %s.', format_timespan(time.time() - start_time))

    return EntropyCurve(p_grid, estimates, seed)


def realize_entropy(K,
                    mu,
                    target,
                    t,
                    theta_samples=100,
                    seed=0,
                    tolerance=1e-3,
                    max_iterations=40,
                    exact_max_indices=DEFAULT_EXACT_MAX_INDICES,
                    support_budget=DEFAULT_SUPPORT_BUDGET,
                    parallel=1):
    """Find p with (1/t) H_t(p) close to `target` by bisection on the
    coupled, non-decreasing curve.

    """

    problem = _BundleProblem(K, mu, t, support_budget, None, seed)

    def evaluate(p):
        return _estimate(problem,
                         p,
                         theta_samples,
                         seed,
                         exact_max_indices,
                         False,
                         parallel)

    low = evaluate(0.0)
    high = evaluate(1.0)

    if not low.value - tolerance <= target <= high.value + tolerance:
        raise ContractViolationError(
            f'target {target} is outside [{low.value}, {high.value}] at t={t}')

    if abs(low.value - target) <= tolerance:
        return Realization(0.0, low, 0)

    if abs(high.value - target) <= tolerance:
        return Realization(1.0, high, 0)

    lower = 0.0
    upper = 1.0
    estimate = high

    for iteration in range(1, max_iterations + 1):
        middle = (lower + upper) / 2
        estimate = evaluate(middle)

        if abs(estimate.value - target) <= tolerance or upper - lower <= tolerance:
            return Realization(middle, estimate, iteration)

        if estimate.value < target:
            lower = middle
        else:
            upper = middle

    return Realization((lower + upper) / 2, estimate, max_iterations)


def rw_entropy(mu, t_max, target=None, budget=DEFAULT_SUPPORT_BUDGET):
    """Exact H_t of the walk for t = 1 to `t_max`, in the free group, in a
    nilpotent quotient (of the pushed forward measure) or in a group
    given by a descriptor with mul() and identity.

    """

    if t_max < 1:
        raise ContractViolationError(f't_max must be at least 1, not {t_max}')

    if target is None:
        distributions = (convolution(mu, t, budget) for t in range(1, t_max + 1))
    else:
        if isinstance(target, NilpotentQuotient):
            steps = defaultdict(float)

            for w, probability in mu.items():
                steps[target.evaluate(w)] += probability

            steps = list(steps.items())
        else:
            steps = list(mu.items())

        distributions = (convolution_power(steps, t, target.mul, target.identity, budget)
                         for t in range(1, t_max + 1))

    rows = []
    previous = 0.0

    for t, distribution in enumerate(distributions, 1):
        value = shannon_entropy(distribution)
        rows.append(RwEntropyRow(t, value, value / t, value - previous))
        previous = value
        LOGGER.debug('H_%d = %.6f over %d atoms.', t, value, len(distribution))

    return rows


def escape_margin(r, horizon):
    return 2 * r * max(1, math.ceil(math.log(max(horizon, 1))))


def fixing_estimate(graph,
                    mu,
                    k,
                    n,
                    horizon,
                    walks,
                    seed,
                    parallel=1):
    """Estimate the probability that a walk from depth `n` keeps its
    `k`-prefix. The upper estimate counts walks with no prefix change up
    to the horizon. The lower estimate also requires the walk to end
    beyond the escape margin.

    """

    if k >= n:
        raise ContractViolationError(f'k must be less than n, got k={k}, n={n}')

    if not graph.is_tree_like(n):
        raise ContractViolationError(f'graph is not {n}-tree-like')

    start_time = time.time()
    depth = n + escape_margin(mu.max_step_length, horizon)

    def walk(index):
        rng = np.random.default_rng(derive_seed(seed, index))
        v = graph.act(graph.root, random_reduced_word(n, graph.rank, rng))
        prefix = graph.prefix_k(v, k)

        for i in mu.sample_indices(rng.random(horizon)):
            v = graph.act(v, mu.words[i])

            if graph.prefix_k(v, k) != prefix:
                return (False, False)

        return (True, graph.depth_lower_bound(v) > depth)

    results = run_parallel(walk, range(walks), parallel)
    upper = binomial_estimate(sum(1 for kept, _ in results if kept), walks)
    lower = binomial_estimate(sum(1 for kept, escaped in results if kept and escaped),
                              walks)
    LOGGER.info('Fixing k=%d, n=%d: alpha in [%.4f, %.4f] over %d walks in %s.',
                k,
                n,
                lower.value,
                upper.value,
                walks,
                format_timespan(time.time() - start_time))

    return FixingReport(k,
                        n,
                        lower.value,
                        upper.value,
                        lower.stderr,
                        upper.stderr,
                        horizon,
                        walks,
                        seed)


def prefix_at_infinity(graph, mu, k, horizon, seed, start=None):
    """The k-prefix of the walk if it is constant over the trailing half
    of the horizon, otherwise the root.

    """

    if horizon == 0:
        return graph.root

    if start is None:
        start = graph.root

    rng = np.random.default_rng(seed)
    v = start
    prefixes = [graph.prefix_k(v, k)]

    for i in mu.sample_indices(rng.random(horizon)):
        v = graph.act(v, mu.words[i])
        prefixes.append(graph.prefix_k(v, k))

    trailing = prefixes[horizon // 2:]

    if all(prefix == trailing[-1] for prefix in trailing):
        return trailing[-1]

    return graph.root


def fano_bound(alpha, k):
    """2 H(alpha, 1 - alpha) + 2 ln(4) (1 - alpha) k, in nats.

    """

    if not 0.0 <= alpha <= 1.0:
        raise ContractViolationError(f'alpha must be in [0, 1], not {alpha}')

    if k < 0:
        raise ContractViolationError(f'k must be non-negative, not {k}')

    binary = float(entr(alpha) + entr(1.0 - alpha))

    return 2.0 * binary + 2.0 * math.log(4.0) * (1.0 - alpha) * k


GlueDepth = namedtuple('GlueDepth', ['n', 'ell', 'q'])


def glue_depth_parameters(k, epsilon, r, beta_hat, eta_hat, delta_hat):
    """Returns the glue depth n, the number of escape attempts ell and the
    per attempt success probability q = eta delta^(r + 1) beta.

    """

    if not 0.0 < epsilon < 1.0:
        raise ContractViolationError(f'epsilon must be in (0, 1), not {epsilon}')

    for name, value in [('beta', beta_hat), ('eta', eta_hat), ('delta', delta_hat)]:
        if not 0.0 < value <= 1.0:
            raise ContractViolationError(f'{name} estimate must be in (0, 1], not {value}')

    q = eta_hat * delta_hat ** (r + 1) * beta_hat

    if q <= 0.0:
        raise ContractViolationError('degenerate estimates, success probability is 0')

    if q >= 1.0:
        ell = 1
    else:
        ell = max(1, math.ceil(math.log(epsilon) / math.log(1.0 - q)))

        while (1.0 - q) ** ell >= epsilon:
            ell += 1

        while ell > 1 and (1.0 - q) ** (ell - 1) < epsilon:
            ell -= 1

    return GlueDepth(k + (ell + 2) * r + 1, ell, q)


def choose_glue_depth(k, epsilon, r, beta_hat, eta_hat, delta_hat):
    return glue_depth_parameters(k, epsilon, r, beta_hat, eta_hat, delta_hat).n


def reach_constants(mu, max_t=16):
    """The exact delta = min over generators s of mu^(t_s)(s).

    """

    _, delta = reach_times(mu, max_t)

    return delta


def core_quotient_entropy(marked, mu, n_values, t, support_budget=DEFAULT_SUPPORT_BUDGET):
    """(1/t) H_t(1) of the glued graphs of the given depths.

    """

    rows = []

    for n in n_values:
        K = GluedConjugacyClass(GluedGraph(marked, n))
        rows.append((n, bundle_entropy(K, mu, 1.0, t, support_budget=support_budget)))

    return rows
