"""Seeded trajectory simulation: regeneration times, good steps, and the
chain of regeneration positions.

A walk regenerates when it first reaches graph distance k from its
previous regeneration position (the anchor); the sequence of anchors is
the Y-chain, whose exact one-step kernel is the sphere-hitting solve
from the hitting module.  A step is good when at least d-1 neighbors of
the current position are strictly farther from the anchor, which is what
couples the walk to the tree level chain.  All randomness flows through
counter-based Philox streams keyed by (seed, stream); every result
records its key, so reruns are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .checks import Check
from .graphs import Graph, bfs_distances, inflate, is_connected
from .chains import srw_chain
from .hitting import (candidate_small_sets, sphere_hit_distribution,
                      survival_vector, HittingError)


class WalkError(ValueError):
    pass


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator keyed by (seed, stream): splittable and replayable."""
    key = np.array([seed, stream], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


class _UniformStream:
    """Batched uniforms in [0,1) so tight loops avoid per-step RNG calls."""

    def __init__(self, rng: np.random.Generator, batch: int = 16384):
        self._rng = rng
        self._batch = batch
        self._buf = rng.random(batch)
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.random(self._batch)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


def random_walk_positions(g: Graph, start: int, steps: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Plain SRW trajectory of the given length (positions 0..steps)."""
    stream = _UniformStream(rng)
    pos = np.empty(steps + 1, dtype=np.int64)
    pos[0] = start
    cur = start
    adj = g.adjacency
    for t in range(1, steps + 1):
        nbrs = adj[cur]
        cur = nbrs[int(stream.next() * len(nbrs))]
        pos[t] = cur
    return pos


def tau(t: int, d: int, k: int) -> int:
    """ceil((d-2) t / (d k)), in exact integer arithmetic."""
    if d < 3 or k < 1 or t < 0:
        raise WalkError(f"need d >= 3, k >= 1, t >= 0; got d={d}, k={k}, t={t}")
    num = (d - 2) * t
    den = d * k
    return -(-num // den)


@dataclass(frozen=True)
class WalkTrace:
    """A trajectory annotated with regenerations and good-step flags.

    ``T[i]`` are the regeneration times (T[0] = 0); ``good_flags[j]`` says
    whether position j had at least d-1 neighbors strictly farther from
    its block's anchor (the anchor itself always qualifies); ``U[i]`` is
    the number of non-good times in completed block i.
    """

    start: int
    k: int
    positions: np.ndarray
    T: tuple
    good_flags: np.ndarray
    U: tuple
    seed: int
    stream: int

    @property
    def n_blocks(self) -> int:
        return len(self.T) - 1

    @property
    def block_lengths(self) -> tuple:
        return tuple(self.T[i + 1] - self.T[i] for i in range(self.n_blocks))

    def anchors(self) -> np.ndarray:
        """Anchor vertex governing each time index (the block's start)."""
        out = np.empty(len(self.positions), dtype=np.int64)
        bounds = list(self.T) + [len(self.positions)]
        for i in range(len(bounds) - 1):
            out[bounds[i]:bounds[i + 1]] = self.positions[bounds[i]]
        return out

    def csv_rows(self):
        """Rows (t, vertex, anchor, good) for trace dumps."""
        anchors = self.anchors()
        return [(t, int(self.positions[t]), int(anchors[t]),
                 bool(self.good_flags[t]))
                for t in range(len(self.positions))]


def annotate_trace(g: Graph, positions, k: int):
    """Re-derive (T, good_flags, U) from raw positions; pure function.

    Raises when some anchor cannot reach distance k at all, since the
    block would never terminate.
    """
    positions = np.asarray(positions, dtype=np.int64)
    steps = len(positions) - 1
    T = [0]
    good = np.zeros(len(positions), dtype=bool)
    anchor = int(positions[0])
    dist = bfs_distances(g, anchor, cutoff=k)
    if not np.any(dist == k):
        raise WalkError(
            f"anchor {anchor} has no vertex at distance {k}; "
            f"regeneration impossible")
    j = 0
    while j <= steps:
        p = int(positions[j])
        need = g.degree(p) - 1
        dp = dist[p]
        farther = 0
        for w in g.adjacency[p]:
            dw = dist[w]
            if dw < 0 or dw > dp:
                farther += 1
        good[j] = farther >= need
        if j < steps:
            nxt = int(positions[j + 1])
            if dist[nxt] == k:
                T.append(j + 1)
                anchor = nxt
                dist = bfs_distances(g, anchor, cutoff=k)
                if not np.any(dist == k):
                    raise WalkError(
                        f"anchor {anchor} has no vertex at distance {k}; "
                        f"regeneration impossible")
        j += 1
    U = []
    for i in range(len(T) - 1):
        lo, hi = T[i], T[i + 1]
        U.append(int(hi - lo - int(good[lo:hi].sum())))
    return tuple(T), good, tuple(U)


def simulate_walk(g: Graph, start: int, steps: int, k: int,
                  seed: int, stream: int = 0) -> WalkTrace:
    """SRW trajectory with regenerations at distance k, fully annotated."""
    if k < 1:
        raise WalkError("regeneration distance must be >= 1")
    if not is_connected(g):
        raise WalkError("walk simulation needs a connected graph")
    rng = make_rng(seed, stream)
    positions = random_walk_positions(g, start, steps, rng)
    T, good, U = annotate_trace(g, positions, k)
    return WalkTrace(start=start, k=k, positions=positions, T=T,
                     good_flags=good, U=U, seed=seed, stream=stream)


@dataclass(frozen=True)
class BlockStats:
    """Aggregated regeneration-block statistics across traces."""

    n_blocks: int
    t1_mean: float
    t1_var: float
    t1_stderr: float
    u_survival: tuple        # P[U > l] for l = 0, 1, ...
    decay_ratio: object      # geometric fit of the survival, None if U == 0
    checks: tuple


def block_statistics(traces, min_blocks: int = 1000) -> BlockStats:
    """Mean/variance of the regeneration time and the tail of U."""
    lengths = []
    us = []
    for tr in traces:
        lengths.extend(tr.block_lengths)
        us.extend(tr.U)
    n = len(lengths)
    if n < min_blocks:
        raise WalkError(f"need at least {min_blocks} completed blocks, got {n}")
    arr = np.asarray(lengths, dtype=float)
    mean = float(arr.mean())
    var = float(arr.var(ddof=1))
    stderr = math.sqrt(var / n)
    u_arr = np.asarray(us, dtype=np.int64)
    max_u = int(u_arr.max()) if len(u_arr) else 0
    survival = tuple(float((u_arr > level).mean()) for level in range(max_u + 1))
    nonincreasing = all(survival[i] >= survival[i + 1]
                        for i in range(len(survival) - 1))
    drops = survival[-1] < 1.0
    ratio = None
    positive = [sv for sv in survival if sv > 0]
    if len(positive) >= 2:
        logs = np.log(positive)
        ratio = float(np.exp(np.polyfit(np.arange(len(logs)), logs, 1)[0]))
    checks = (
        Check(name="u-survival-nonincreasing", lhs=survival, rhs=None,
              passed=nonincreasing),
        Check(name="u-survival-drops-below-1", lhs=survival[-1], rhs=1.0,
              passed=drops),
    )
    return BlockStats(n_blocks=n, t1_mean=mean, t1_var=var, t1_stderr=stderr,
                      u_survival=survival, decay_ratio=ratio, checks=checks)


@dataclass(frozen=True)
class EmpiricalKernelRow:
    anchor: int
    trials: int
    frequencies: dict
    exact: dict
    tv_deviation: float
    seed: int
    stream: int


def empirical_y_kernel(g: Graph, k: int, trials: int, seed: int,
                       anchors=None) -> list:
    """Monte Carlo rows of the regeneration kernel against the exact solve.

    For each anchor, ``trials`` independent first regenerations are
    sampled and binned; the row is compared in total variation against
    the absorbing-solve distribution.
    """
    if trials < 10_000:
        raise WalkError(f"need >= 10000 trials per anchor, got {trials}")
    if anchors is None:
        anchors = [0]
    out = []
    for si, anchor in enumerate(anchors):
        exact = sphere_hit_distribution(g, anchor, k)
        dist = bfs_distances(g, anchor, cutoff=k)
        rng = make_rng(seed, si)
        stream = _UniformStream(rng)
        counts = {}
        adj = g.adjacency
        for _ in range(trials):
            cur = anchor
            while dist[cur] != k:
                nbrs = adj[cur]
                cur = nbrs[int(stream.next() * len(nbrs))]
            counts[cur] = counts.get(cur, 0) + 1
        freq = {u: counts.get(u, 0) / trials for u in exact.sphere}
        exact_map = {u: float(p) for u, p in zip(exact.sphere, exact.probabilities)}
        tv = 0.5 * sum(abs(freq[u] - exact_map[u]) for u in exact.sphere)
        out.append(EmpiricalKernelRow(
            anchor=anchor, trials=trials, frequencies=freq, exact=exact_map,
            tv_deviation=tv, seed=seed, stream=si))
    return out


def sample_first_regenerations(g: Graph, anchor: int, k: int, trials: int,
                               rng: np.random.Generator):
    """Durations and landing spots of ``trials`` first regenerations."""
    dist = bfs_distances(g, anchor, cutoff=k)
    if not np.any(dist == k):
        raise WalkError(f"anchor {anchor} has no vertex at distance {k}")
    stream = _UniformStream(rng)
    adj = g.adjacency
    durations = np.empty(trials, dtype=np.int64)
    landings = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        cur = anchor
        steps = 0
        while dist[cur] != k:
            nbrs = adj[cur]
            cur = nbrs[int(stream.next() * len(nbrs))]
            steps += 1
        durations[i] = steps
        landings[i] = cur
    return durations, landings


def _count_regenerations(g: Graph, start: int, steps: int, k: int,
                         stream: _UniformStream) -> int:
    """Completed regenerations of one fresh walk within ``steps`` steps."""
    adj = g.adjacency
    anchor = start
    dist = bfs_distances(g, anchor, cutoff=k)
    regens = 0
    cur = start
    for _ in range(steps):
        nbrs = adj[cur]
        cur = nbrs[int(stream.next() * len(nbrs))]
        if dist[cur] == k:
            regens += 1
            anchor = cur
            dist = bfs_distances(g, anchor, cutoff=k)
    return regens


@dataclass(frozen=True)
class EscapeTransferReport:
    """Decomposition of long-horizon escape into Y-chain escape plus the
    chance of completing too few regenerations.

    ``srw_escape`` is the exact worst escape probability at horizon t+s
    over the candidate sets; ``y_escape`` kills the exact regeneration
    kernel on each set for tau(t) steps; ``k_escape`` does the same with
    the distance-k SRW kernel; ``slow_regen`` is the Monte Carlo estimate
    of the worst P[fewer than tau(t) regenerations by t+s].
    """

    k: int
    t: int
    s: int
    tau_t: int
    alpha_requested: object
    alpha_used: float
    n_sets: int
    srw_escape: float
    y_escape: float
    k_escape: object
    slow_regen: float
    slow_regen_stderr: float
    trials: int
    seed: int
    checks: tuple
    note: str = ""

    @property
    def all_passed(self) -> bool:
        return not any(c.failed for c in self.checks)


def escape_transfer_experiment(g: Graph, k: int, t: int, s: int,
                               trials: int, seed: int,
                               alpha: float = None,
                               mc_starts_limit: int = 64) -> EscapeTransferReport:
    """Exact + Monte Carlo verification of the escape decomposition.

    P_a[T_{A^c} > t+s] <= P^Y_a[T_{A^c} > tau(t)] + P_a[T_{tau(t)} > t+s]
    is asserted for the worst candidate set within Monte Carlo error.
    When ``alpha`` is None the scale max(1/n, (d-1)^{-3k^2}) is used and
    the substitution is recorded in the note.
    """
    if not g.is_regular:
        raise WalkError("escape transfer experiment needs a regular graph")
    d = g.regular_degree
    note = ""
    if alpha is None:
        alpha_used = max(1.0 / g.n, float(d - 1) ** (-3 * k * k))
        note = (f"alpha defaulted to max(1/n, (d-1)^(-3k^2)) = {alpha_used:.6g}")
    else:
        alpha_used = float(alpha)
    chain = srw_chain(g)
    if alpha_used < chain.stationary.min() - 1e-15:
        raise WalkError(
            f"alpha={alpha_used:.6g} is below the smallest stationary mass; "
            f"no candidate sets exist")
    sets = candidate_small_sets(chain, alpha_used, graph=g)
    if not sets:
        raise WalkError("candidate family is empty")
    tau_t = tau(t, d, k)
    horizon = t + s

    srw_escape = max(float(survival_vector(chain, A, horizon).max())
                     for A in sets)

    w_rows = {}
    needed = sorted({v for A in sets for v in A})
    for v in needed:
        hit = sphere_hit_distribution(g, v, k)
        w_rows[v] = dict(zip(hit.sphere, hit.probabilities))
    y_escape = 0.0
    for A in sets:
        index = {v: i for i, v in enumerate(A)}
        m = len(A)
        w_sub = np.zeros((m, m))
        for v in A:
            for u, p in w_rows[v].items():
                if u in index:
                    w_sub[index[v], index[u]] = p
        u_vec = np.ones(m)
        for _ in range(tau_t):
            u_vec = w_sub @ u_vec
        y_escape = max(y_escape, float(u_vec.max()))

    k_escape = None
    gk = inflate(g, k)
    if min(gk.degree(v) for v in range(gk.n)) > 0:
        k_chain = srw_chain(gk)
        k_escape = max(float(survival_vector(k_chain, A, tau_t).max())
                       for A in sets)

    if g.n <= mc_starts_limit:
        starts = list(range(g.n))
    else:
        starts = sorted({v for A in sets for v in A})[:mc_starts_limit]
    slow = 0.0
    slow_se = 0.0
    for si, a in enumerate(starts):
        rng = make_rng(seed, 1_000_000 + si)
        stream = _UniformStream(rng)
        few = 0
        for _ in range(trials):
            if _count_regenerations(g, a, horizon, k, stream) < tau_t:
                few += 1
        p_hat = few / trials
        se = math.sqrt(max(p_hat * (1.0 - p_hat), 1.0 / trials) / trials)
        if p_hat > slow:
            slow, slow_se = p_hat, se
        slow_se = max(slow_se, se)

    margin = 4.0 * slow_se + 1e-9
    checks = [Check(
        name="escape-decomposition",
        lhs=srw_escape, rhs=y_escape + slow + margin,
        passed=srw_escape <= y_escape + slow + margin,
        note=f"margin includes 4 stderr = {4.0 * slow_se:.3g}")]
    if k_escape is not None:
        checks.append(Check(
            name="y-vs-k-escape", lhs=y_escape, rhs=k_escape, passed=None,
            note="informational: equal on graphs with girth > 2k"))
    return EscapeTransferReport(
        k=k, t=t, s=s, tau_t=tau_t, alpha_requested=alpha,
        alpha_used=alpha_used, n_sets=len(sets), srw_escape=srw_escape,
        y_escape=y_escape, k_escape=k_escape, slow_regen=slow,
        slow_regen_stderr=slow_se, trials=trials, seed=seed,
        checks=tuple(checks), note=note)
