"""
Brute-force oracles for TiltStress

Independent checks of the closed forms used elsewhere: an exact max-flow
solution of the indicator-cost transport problem, KL divergence by direct
summation, and grid searches for the robust value and the lambda boundary.
Nothing here uses the dual representation it is meant to verify.
"""

import logging
import math
import time
from collections import deque
from dataclasses import dataclass

import numpy as np

from config import Config
from dist import DiscreteDistribution, sup_diff
from dominance import check_fsd
from errors import (
    InvalidParameter,
    NonPositiveEps,
    NotAbsolutelyContinuous,
    SupportTooLarge,
    TargetUnreachable,
)
from tilt import TiltParams, kl_of_tilt, tilt

logger = logging.getLogger("TiltStress.Oracle")


@dataclass(frozen=True, eq=False)
class Coupling:
    row_values: np.ndarray
    col_values: np.ndarray
    mass: np.ndarray

    def crossing_mass(self):
        """Mass on pairs with y > x"""
        crossing = self.col_values[None, :] > self.row_values[:, None]
        return float(self.mass[crossing].sum())

    def to_dict(self):
        return {
            "row_values": self.row_values.tolist(),
            "col_values": self.col_values.tolist(),
            "mass": self.mass.tolist(),
        }


class FlowNetwork:
    """Residual network with Edmonds-Karp augmenting paths"""

    def __init__(self, size):
        self.size = size
        self.capacity = [[0.0] * size for _ in range(size)]
        self.neighbours = [set() for _ in range(size)]

    def add_edge(self, u, v, capacity):
        self.capacity[u][v] += capacity
        self.neighbours[u].add(v)
        self.neighbours[v].add(u)

    def _bfs(self, source, sink, parent):
        """Shortest augmenting path; fills parent and reports if sink is reached"""
        tol = Config.FLOW_SATURATION_TOL
        visited = [False] * self.size
        visited[source] = True
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in sorted(self.neighbours[u]):
                if not visited[v] and self.capacity[u][v] > tol:
                    visited[v] = True
                    parent[v] = u
                    if v == sink:
                        return True
                    queue.append(v)
        return False

    def max_flow(self, source, sink):
        parent = [-1] * self.size
        total = 0.0
        while self._bfs(source, sink, parent):
            path_flow = math.inf
            v = sink
            while v != source:
                path_flow = min(path_flow, self.capacity[parent[v]][v])
                v = parent[v]
            v = sink
            while v != source:
                u = parent[v]
                self.capacity[u][v] -= path_flow
                self.capacity[v][u] += path_flow
                v = u
            total += path_flow
        return total


def _northwest_corner(rows, cols):
    """Any coupling of two residual mass vectors (greedy fill)"""
    rows, cols = rows.copy(), cols.copy()
    mass = np.zeros((rows.size, cols.size))
    i = j = 0
    while i < rows.size and j < cols.size:
        moved = min(rows[i], cols[j])
        mass[i, j] += moved
        rows[i] -= moved
        cols[j] -= moved
        if rows[i] <= Config.FLOW_SATURATION_TOL:
            i += 1
        else:
            j += 1
    return mass


def _transport(x, p, y, q):
    """
    min over couplings of P(Y > X) = 1 - (max mass on pairs with y <= x).

    Network: source -> x_i (cap p_i), x_i -> y_j (unbounded, only if
    y_j <= x_i), y_j -> sink (cap q_j).
    """
    n, m = len(x), len(y)
    source, sink = 0, n + m + 1
    net = FlowNetwork(n + m + 2)
    unbounded = 2.0  # more than the total mass
    for i in range(n):
        net.add_edge(source, 1 + i, float(p[i]))
        for j in range(m):
            if y[j] <= x[i]:
                net.add_edge(1 + i, 1 + n + j, unbounded)
    for j in range(m):
        net.add_edge(1 + n + j, sink, float(q[j]))

    flow = net.max_flow(source, sink)
    mass = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            if y[j] <= x[i]:
                mass[i, j] = max(unbounded - net.capacity[1 + i][1 + n + j], 0.0)

    leftover_rows = np.clip(np.asarray(p, dtype=np.float64) - mass.sum(axis=1), 0.0, None)
    leftover_cols = np.clip(np.asarray(q, dtype=np.float64) - mass.sum(axis=0), 0.0, None)
    mass += _northwest_corner(leftover_rows, leftover_cols)
    return min(max(1.0 - flow, 0.0), 1.0), mass


def min_coupling_cost(p, q):
    """Exact T(P, Q) by max-flow, with a coupling that attains it"""
    if p.size > Config.ORACLE_MAX_ATOMS or q.size > Config.ORACLE_MAX_ATOMS:
        raise SupportTooLarge(
            f"coupling oracle handles at most {Config.ORACLE_MAX_ATOMS} atoms per side"
        )
    cost, mass = _transport(p.values, p.probs, q.values, q.probs)
    return cost, Coupling(p.values.copy(), q.values.copy(), mass)


def _kl_masses(q, p):
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    live = q > 0
    # 0 log 0 := 0
    terms = q[live] * np.log(q[live] / p[live])
    return max(math.fsum(terms), 0.0)


def kl_direct(q, p):
    """D_KL(Q || P) = sum_i q_i log(q_i / p_i), by direct summation"""
    if hasattr(q, "as_distribution"):
        q = q.as_distribution()
    idx = np.searchsorted(p.values, q.values)
    if np.any(idx >= p.size) or not np.array_equal(p.values[idx], q.values):
        raise NotAbsolutelyContinuous("Q puts mass on atoms outside the support of P")
    return _kl_masses(q.probs, p.probs[idx])


def _kl_term(mass, prob):
    return mass * math.log(mass / prob) if mass > 0 else 0.0


def _grid_blocks(probs, steps, eps):
    """
    Simplex points at resolution 1/steps, one block per prefix of all but the
    last two coordinates, so memory stays at steps + 1 rows.

    A prefix is dropped once its KL terms plus the log-sum lower bound
    r log(r / P_rest) on the remaining coordinates exceed eps.
    """
    n = probs.size
    if n == 1:
        yield np.ones((1, 1))
        return
    rest_mass = np.cumsum(probs[::-1])[::-1]

    def walk(prefix, used, kl):
        k = len(prefix)
        rest = steps - used
        if kl + _kl_term(rest / steps, rest_mass[k]) > eps + Config.KL_TOL:
            return
        if k == n - 2:
            i = np.arange(rest + 1)
            block = np.empty((rest + 1, n))
            block[:, :k] = np.asarray(prefix, dtype=np.float64) / steps
            block[:, k] = i / steps
            block[:, k + 1] = (rest - i) / steps
            yield block
            return
        for m in range(rest + 1):
            yield from walk(prefix + (m,), used + m, kl + _kl_term(m / steps, probs[k]))

    yield from walk((), 0, 0.0)


def brute_force_V(p, eps, grid_step):
    """
    Grid-search lower bound on V_eps over laws on P's atoms.

    Every simplex point at resolution grid_step inside the KL ball is scored
    with the max-flow oracle. Since T(P, Q) <= TV(P, Q), each block is taken
    in decreasing total-variation order and scoring stops once TV can no
    longer beat the best cost.
    """
    if p.size > Config.BRUTE_FORCE_MAX_ATOMS:
        raise SupportTooLarge(f"brute force handles at most {Config.BRUTE_FORCE_MAX_ATOMS} atoms")
    low, high = Config.GRID_STEP_RANGE
    if not low <= grid_step <= high:
        raise InvalidParameter(f"grid_step must lie in [{low}, {high}], got {grid_step!r}")
    if not eps > 0:
        raise NonPositiveEps(f"eps must be positive, got {eps!r}")

    steps = int(round(1.0 / grid_step))
    best, feasible, scored = 0.0, 0, 0
    for Q in _grid_blocks(p.probs, steps, eps):
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(Q > 0, Q * np.log(Q / p.probs), 0.0)
        Q = Q[terms.sum(axis=1) <= eps]
        if Q.shape[0] == 0:
            continue
        feasible += Q.shape[0]
        tv = 0.5 * np.abs(Q - p.probs).sum(axis=1)
        for idx in np.argsort(-tv, kind="stable"):
            if tv[idx] <= best:
                break
            cost, _ = _transport(p.values, p.probs, p.values, Q[idx])
            scored += 1
            best = max(best, cost)
    logger.debug(f"brute_force_V: {feasible} feasible grid laws, {scored} scored, best {best!r}")
    return best


def min_kl_for_target(p, target):
    """
    Smallest KL that lifts F(a) - G(a) to `target` at some atom.

    At a fixed atom the cheapest way is a two-point move (mass below a scaled
    uniformly), costing the binary divergence between g = F(a) - target and
    F(a).
    """
    best = math.inf
    for F in p.cum[:-1]:
        if F < target:
            continue
        g = F - target
        below = g * math.log(g / F) if g > 0 else 0.0
        best = min(best, below + (1 - g) * math.log((1 - g) / (1 - F)))
    if math.isinf(best):
        raise TargetUnreachable(f"no atom can reach {target!r}")
    return best


def _h_grid(x, lam):
    C = 1.0 - math.exp(-1.0 / lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = C * x * (1.0 - x) / (1.0 - C * x)
    return np.where((x <= 0) | (x >= 1), 0.0, out)


def grid_argmax_h(lam, step=1e-4):
    """Grid maximizer of h over [0, 1]"""
    x = np.linspace(0.0, 1.0, int(round(1.0 / step)) + 1)
    return float(x[int(np.argmax(_h_grid(x, lam)))])


def grid_level_crossing(x_grid, level=0.5, lo=1e-3, hi=1e3, iterations=200):
    """lambda where max over x_grid of h crosses `level`, by plain bisection"""
    x_grid = np.asarray(x_grid, dtype=np.float64)
    for _ in range(iterations):
        mid = math.sqrt(lo * hi)
        if _h_grid(x_grid, mid).max() > level:
            lo = mid
        else:
            hi = mid
    return math.sqrt(lo * hi)


def random_distribution(rng, max_atoms=8):
    """Random law with 1..max_atoms integer-spaced atoms"""
    n = int(rng.integers(1, max_atoms + 1))
    values = np.sort(rng.choice(np.arange(-10, 11), size=n, replace=False)).astype(float)
    probs = rng.dirichlet(np.ones(n))
    return DiscreteDistribution.from_samples(values, probs)


def run_verification(instances, seed):
    """
    Oracle-vs-closed-form suite on seeded random instances.

    Checks the transport duality, the closed-form KL of the tilt and the
    dominance of every tilt; returns counts and worst deviations.
    """
    rng = np.random.default_rng(seed)
    started = time.time()
    worst_duality = worst_kl = worst_fsd = 0.0
    failures = 0

    for _ in range(instances):
        p = random_distribution(rng)
        q = random_distribution(rng)
        cost, _ = min_coupling_cost(p, q)
        duality = abs(cost - sup_diff(p, q)[1])

        lam = float(10 ** rng.uniform(-1.5, 2.0))
        a = float(rng.choice(p.values))
        params = TiltParams(lam, a)
        t = tilt(p, params)
        kl_err = abs(kl_of_tilt(p, params) - kl_direct(t, p))
        ok, violation = check_fsd(p, t)

        worst_duality = max(worst_duality, duality)
        worst_kl = max(worst_kl, kl_err)
        worst_fsd = max(worst_fsd, violation)
        if duality > 1e-10 or kl_err > Config.KL_TOL or not ok:
            failures += 1

    elapsed = time.time() - started
    logger.info(f"Verified {instances} instances in {elapsed:.2f}s, {failures} failures")
    return {
        "instances": instances,
        "seed": seed,
        "failures": failures,
        "max_duality_gap": worst_duality,
        "max_kl_gap": worst_kl,
        "max_fsd_violation": worst_fsd,
        "passed": failures == 0,
    }
