"""Reversible finite chains: construction, exact evolution, and mixing.

The simple random walk (SRW) on a graph moves to a uniformly random
neighbor at each step.  Chains are stored as sparse row-stochastic
kernels with a certified stationary distribution; stochasticity and
detailed balance are validated to 1e-12 at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, bipartition, connected_components

ROW_SUM_TOL = 1e-12
REVERSIBILITY_TOL = 1e-12

APERIODIC = "aperiodic"
BIPARTITE_PERIODIC = "bipartite-periodic"


class ChainError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ReversibleChain:
    """Row-stochastic kernel P with stationary distribution pi.

    ``period_info`` is 'aperiodic' or 'bipartite-periodic' (detected by
    two-coloring each component, not spectrally).  ``components`` lists
    the state sets of the communicating classes.
    """

    n: int
    kernel: sp.csr_matrix
    stationary: np.ndarray
    period_info: str
    components: tuple
    source: dict = field(default_factory=dict)
    reversible_flag: bool = True

    @property
    def is_irreducible(self) -> bool:
        return len(self.components) == 1

    def __repr__(self):
        return (f"ReversibleChain(n={self.n}, {self.period_info}, "
                f"components={len(self.components)})")


def _validate(kernel: sp.csr_matrix, pi: np.ndarray) -> None:
    rows = np.asarray(kernel.sum(axis=1)).ravel()
    worst = np.abs(rows - 1.0).max() if len(rows) else 0.0
    if worst > ROW_SUM_TOL:
        raise ChainError(f"kernel rows deviate from 1 by {worst:.3e}")
    if abs(pi.sum() - 1.0) > 1e-9 or np.any(pi < 0):
        raise ChainError("stationary vector is not a probability distribution")
    flux = sp.diags(pi) @ kernel
    asym = (flux - flux.T).tocoo()
    worst = np.abs(asym.data).max() if asym.nnz else 0.0
    if worst > REVERSIBILITY_TOL:
        raise ChainError(f"detailed balance violated by {worst:.3e}")


def _graph_period_info(g: Graph) -> str:
    for comp in connected_components(g):
        sub_colors = bipartition(_induced(g, comp))
        if sub_colors is not None:
            return BIPARTITE_PERIODIC
    return APERIODIC


def _induced(g: Graph, vertices) -> Graph:
    from .graphs import make_graph
    idx = {v: i for i, v in enumerate(vertices)}
    edges = [(idx[u], idx[v]) for u, v in g.edges if u in idx and v in idx]
    return make_graph(len(vertices), edges)


def srw_chain(g: Graph) -> ReversibleChain:
    """SRW kernel P(x,y) = 1/deg(x) on edges, pi proportional to degree."""
    degs = np.array([g.degree(v) for v in range(g.n)], dtype=np.int64)
    isolated = np.flatnonzero(degs == 0)
    if len(isolated):
        raise ChainError(
            f"isolated vertices have no SRW step: {isolated.tolist()[:20]}")
    rows, cols, vals = [], [], []
    for u, v in g.edges:
        rows.append(u), cols.append(v), vals.append(1.0 / degs[u])
        rows.append(v), cols.append(u), vals.append(1.0 / degs[v])
    kernel = sp.csr_matrix((vals, (rows, cols)), shape=(g.n, g.n))
    pi = degs / degs.sum()
    _validate(kernel, pi)
    comps = tuple(tuple(c) for c in connected_components(g))
    return ReversibleChain(
        n=g.n, kernel=kernel, stationary=pi,
        period_info=_graph_period_info(g), components=comps,
        source={"kind": "srw", "graph": dict(g.provenance)})


def chain_from_kernel(kernel, stationary, source=None) -> ReversibleChain:
    """Wrap an explicit kernel; fails unless it is verifiably reversible."""
    kernel = sp.csr_matrix(kernel)
    pi = np.asarray(stationary, dtype=float)
    _validate(kernel, pi)
    n = kernel.shape[0]
    # communicating classes via the support graph
    adj = [set() for _ in range(n)]
    coo = kernel.tocoo()
    for u, v, w in zip(coo.row, coo.col, coo.data):
        if u != v and w > 0:
            adj[u].add(int(v))
            adj[v].add(int(u))
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(tuple(sorted(comp)))
    has_diag = kernel.diagonal().max() > 0 if n else False
    period = APERIODIC if has_diag else _kernel_period_info(adj, n)
    return ReversibleChain(
        n=n, kernel=kernel, stationary=pi, period_info=period,
        components=tuple(comps), source=dict(source or {"kind": "kernel"}))


def _kernel_period_info(adj, n) -> str:
    color = [-1] * n
    for s in range(n):
        if color[s] >= 0:
            continue
        color[s] = 0
        stack = [s]
        bip = True
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if color[w] < 0:
                    color[w] = 1 - color[u]
                    stack.append(w)
                elif color[w] == color[u]:
                    bip = False
        if bip and any(adj[v] for v in range(n)):
            return BIPARTITE_PERIODIC
    return APERIODIC


def evolve(chain: ReversibleChain, mu0: np.ndarray, t: int) -> np.ndarray:
    """Distribution after t steps: mu0 P^t by repeated sparse products."""
    mu = np.asarray(mu0, dtype=float)
    if mu.shape != (chain.n,):
        raise ChainError(f"distribution has shape {mu.shape}, expected ({chain.n},)")
    if t < 0:
        raise ChainError("step count must be >= 0")
    pt = chain.kernel.T.tocsr()
    for _ in range(t):
        mu = pt @ mu
    return mu


def point_mass(n: int, x: int) -> np.ndarray:
    mu = np.zeros(n)
    mu[x] = 1.0
    return mu


def distances(chain: ReversibleChain, x: int, t: int):
    """(total variation, squared L2(pi)) distance of P^t(x, .) from pi."""
    mu = evolve(chain, point_mass(chain.n, x), t)
    pi = chain.stationary
    tv = 0.5 * np.abs(mu - pi).sum()
    l2sq = float(np.sum(mu * mu / pi) - 1.0)
    return float(tv), l2sq


@dataclass(frozen=True)
class MixingProfile:
    """Worst-start total-variation mixing data on an epsilon grid.

    ``tv_curve[t]`` is the max over measured starts of TV(P^t(x,.), pi);
    ``mixing_times[eps]`` is the least t with tv_curve[t] <= eps (strict
    infimum convention, no tolerance).  When only a sampled subset of
    starts was swept the profile is a lower bound and flagged.
    """

    eps_grid: tuple
    mixing_times: dict
    cutoff_ratios: dict
    tv_curve: tuple
    l2sq_curve: tuple
    worst_starts: tuple
    starts: tuple
    exact_starts: bool

    def mixing_time(self, eps: float) -> int:
        if eps >= 1.0:
            return 0
        key = min(self.mixing_times, key=lambda e: abs(e - eps))
        if abs(key - eps) > 1e-12:
            raise KeyError(f"eps={eps} not on the profile grid")
        return self.mixing_times[key]


def _farthest_point_starts(chain: ReversibleChain, count: int) -> list:
    """Greedy k-center seeds over the kernel's support graph."""
    n = chain.n
    adj = [[] for _ in range(n)]
    coo = chain.kernel.tocoo()
    for u, v in zip(coo.row, coo.col):
        if u != v:
            adj[u].append(int(v))
    from collections import deque
    chosen = [0]
    dist = np.full(n, np.inf)
    while len(chosen) < min(count, n):
        src = chosen[-1]
        d = np.full(n, -1, dtype=np.int64)
        d[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if d[w] < 0:
                    d[w] = d[u] + 1
                    queue.append(w)
        reach = d >= 0
        dist[reach] = np.minimum(dist[reach], d[reach])
        nxt = int(np.argmax(np.where(np.isfinite(dist), dist, -1.0)))
        if nxt in chosen:
            break
        chosen.append(nxt)
    return chosen


def mixing_profile(chain: ReversibleChain, eps_grid,
                   exact_start_limit: int = 5000,
                   sample_starts: int = 64,
                   max_steps: int = 100000) -> MixingProfile:
    """Worst-start mixing times for each epsilon, plus cutoff ratios.

    Evolves every start simultaneously (dense columns against the sparse
    kernel); above ``exact_start_limit`` states a farthest-point sample
    of starts is used instead and the result is a flagged lower bound.
    Raises for periodic or reducible chains, whose TV does not converge.
    """
    if chain.period_info != APERIODIC:
        raise ChainError("mixing time undefined: chain is bipartite-periodic")
    if not chain.is_irreducible:
        raise ChainError("mixing time undefined: chain is reducible")
    eps_grid = tuple(float(e) for e in eps_grid)
    if not eps_grid or any(not (0.0 < e < 1.0) for e in eps_grid):
        raise ChainError("epsilon grid must lie in (0,1)")

    n = chain.n
    if n <= exact_start_limit:
        starts = list(range(n))
        exact = True
    else:
        starts = _farthest_point_starts(chain, sample_starts)
        exact = False
    pi = chain.stationary
    pt = chain.kernel.T.tocsr()
    cols = np.zeros((n, len(starts)))
    for j, s in enumerate(starts):
        cols[s, j] = 1.0

    targets = sorted(set(eps_grid) | {1.0 - e for e in eps_grid})
    need = min(targets)
    tv_curve = []
    l2_curve = []
    worst_starts = []
    mixing_times = {}
    t = 0
    prev_tv = prev_l2 = math.inf
    while True:
        tv_all = 0.5 * np.abs(cols - pi[:, None]).sum(axis=0)
        worst = int(np.argmax(tv_all))
        tv = tv_all[worst]
        l2 = (np.sum(cols * cols / pi[:, None], axis=0) - 1.0).max()
        # sanity on every profile run: both distances are monotone and
        # the Jensen comparison 4 tv^2 <= l2sq holds pointwise
        if tv > prev_tv + 1e-12 or l2 > prev_l2 + 1e-10:
            raise ChainError(f"distance increased at t={t}")
        if 4.0 * tv * tv > l2 + 1e-12:
            raise ChainError(f"Jensen violation at t={t}")
        prev_tv, prev_l2 = tv, l2
        tv_curve.append(float(tv))
        l2_curve.append(float(l2))
        worst_starts.append(starts[worst])
        for e in targets:
            if e not in mixing_times and tv <= e:
                mixing_times[e] = t
        if tv <= need:
            break
        t += 1
        if t > max_steps:
            raise ChainError(f"no mixing below eps={need} within {max_steps} steps")
        cols = pt @ cols

    ratios = {}
    for e in eps_grid:
        hi = mixing_times[e]
        lo = mixing_times[1.0 - e]
        ratios[e] = (hi / lo) if lo > 0 else math.inf
    return MixingProfile(
        eps_grid=eps_grid,
        mixing_times={e: mixing_times[e] for e in targets},
        cutoff_ratios=ratios,
        tv_curve=tuple(tv_curve), l2sq_curve=tuple(l2_curve),
        worst_starts=tuple(worst_starts),
        starts=tuple(starts), exact_starts=exact)


def power_chain(chain: ReversibleChain, t: int,
                dense_limit: int = 3000) -> ReversibleChain:
    """Chain with kernel P^t and the same stationary distribution."""
    if t < 1:
        raise ChainError("exponent must be >= 1")
    if t == 1:
        return chain
    if chain.n > dense_limit:
        raise ChainError(
            f"dense kernel power needs n <= {dense_limit}, got {chain.n}")
    dense = chain.kernel.toarray()
    powered = np.linalg.matrix_power(dense, t)
    kern = sp.csr_matrix(powered)
    return chain_from_kernel(
        kern, chain.stationary,
        source={"kind": "power", "t": t, "base": dict(chain.source)})
