"""Eigenvalue machinery for reversible chains.

Kernels are conjugated by sqrt(pi) into symmetric form before solving,
which preserves the spectrum and admits symmetric solvers.  Dense mode
returns the full eigenvalue multiset; iterative mode finds the second
largest and the smallest eigenvalue by power iteration on shifted
operators with the known top eigenvector deflated.  The restricted
Perron root lambda(A) of a killed chain is computed the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .chains import ReversibleChain
from .graphs import Graph

DENSE_BUDGET = 3000
EIG_ONE_TOL = 1e-9
POWER_TOL = 1e-13
POWER_MAX_ITER = 300_000
RESTRICTED_STAGNATION = 1e-13
RESTRICTED_MAX_ITER = 100_000


class SpectralError(ValueError):
    pass


def rho(d: int) -> float:
    """Spectral radius of SRW on the infinite d-regular tree: 2 sqrt(d-1)/d."""
    return 2.0 * math.sqrt(d - 1) / d


def symmetrized(chain: ReversibleChain) -> sp.csr_matrix:
    """S = D^{1/2} P D^{-1/2} with D = diag(pi); symmetric by reversibility."""
    root = np.sqrt(chain.stationary)
    inv = np.zeros_like(root)
    nz = root > 0
    inv[nz] = 1.0 / root[nz]
    return (sp.diags(root) @ chain.kernel @ sp.diags(inv)).tocsr()


@dataclass(frozen=True)
class SpectrumSummary:
    """Extremal (and optionally full) eigenvalue data of a chain kernel.

    ``lambda_star`` is the largest modulus among eigenvalues != 1, and
    ``t_rel = 1/(1 - lambda_star)`` (infinite for periodic chains).
    ``eigenvalues`` holds the full sorted multiset in dense mode, None in
    iterative mode.  ``rho_d`` is filled when the source graph is regular.
    """

    lambda2: float
    lambda_min: float
    lambda_star: float
    t_rel: float
    rho_d: object
    method: str
    residuals: dict = field(default_factory=dict)
    eigenvalues: object = None


def _lambda_star(lambda2: float, lambda_min: float) -> float:
    candidates = []
    if lambda2 < 1.0 - EIG_ONE_TOL:
        candidates.append(abs(lambda2))
    candidates.append(abs(lambda_min))
    return max(candidates) if candidates else 0.0


def _power_top(op_matvec, n: int, deflate=None, tol=POWER_TOL,
               max_iter=POWER_MAX_ITER, seed: int = 7):
    """Largest eigenvalue of a symmetric PSD operator by power iteration.

    Returns (rayleigh, vector, iterations, residual).  The Rayleigh
    quotient of the final iterate never exceeds the true eigenvalue.
    """
    rng = np.random.Generator(np.random.Philox(key=np.uint64(seed)))
    x = rng.standard_normal(n)
    if deflate is not None:
        x -= (deflate @ x) * deflate
    norm = np.linalg.norm(x)
    if norm == 0:
        return 0.0, x, 0, 0.0
    x /= norm
    theta_old = math.inf
    for it in range(1, max_iter + 1):
        y = op_matvec(x)
        if deflate is not None:
            y -= (deflate @ y) * deflate
        theta = float(x @ y)
        norm = np.linalg.norm(y)
        if norm < 1e-300:
            return 0.0, y, it, 0.0
        x = y / norm
        if abs(theta - theta_old) < tol:
            resid = float(np.linalg.norm(op_matvec(x) - theta * x))
            return theta, x, it, resid
        theta_old = theta
    resid = float(np.linalg.norm(op_matvec(x) - theta_old * x))
    return theta_old, x, max_iter, resid


def spectrum(chain: ReversibleChain, mode: str = "dense-full",
             dense_budget: int = DENSE_BUDGET,
             source_graph: Graph = None) -> SpectrumSummary:
    """Eigenvalue summary of the chain kernel.

    dense-full computes the whole symmetric eigendecomposition (budgeted
    by n); iterative-extremal finds lambda2 and lambda_min via power
    iteration on (I+S)/2 with sqrt(pi) deflated and on (I-S)/2.
    """
    rho_d = None
    if source_graph is not None and source_graph.is_regular and source_graph.n:
        rho_d = rho(source_graph.regular_degree)

    if mode == "dense-full":
        if chain.n > dense_budget:
            raise SpectralError(
                f"dense mode budget is n <= {dense_budget}, got {chain.n}")
        s = symmetrized(chain).toarray()
        eigs = np.linalg.eigvalsh(s)
        eigs_desc = eigs[::-1]
        lambda2 = float(eigs_desc[1]) if chain.n > 1 else 1.0
        lambda_min = float(eigs_desc[-1])
        nontrivial = eigs_desc[eigs_desc < 1.0 - EIG_ONE_TOL]
        lam = float(np.abs(nontrivial).max()) if len(nontrivial) else 0.0
        t_rel = 1.0 / (1.0 - lam) if lam < 1.0 else math.inf
        return SpectrumSummary(
            lambda2=lambda2, lambda_min=lambda_min, lambda_star=lam,
            t_rel=t_rel, rho_d=rho_d, method="dense-full",
            residuals={}, eigenvalues=eigs_desc.copy())

    if mode != "iterative-extremal":
        raise SpectralError(f"unknown spectrum mode {mode!r}")
    if not chain.is_irreducible:
        raise SpectralError("iterative mode requires an irreducible chain")

    s = symmetrized(chain)
    n = chain.n
    top = np.sqrt(chain.stationary)
    top /= np.linalg.norm(top)

    def up(x):   # (I + S)/2: spectrum in [0, 1], top pair deflated
        return 0.5 * (x + s @ x)

    def down(x):  # (I - S)/2: top eigenvalue corresponds to lambda_min
        return 0.5 * (x - s @ x)

    theta2, _, it2, res2 = _power_top(up, n, deflate=top)
    lambda2 = 2.0 * theta2 - 1.0
    theta_min, _, itm, resm = _power_top(down, n)
    lambda_min = 1.0 - 2.0 * theta_min
    residuals = {"lambda2": res2, "lambda2_iterations": it2,
                 "lambda_min": resm, "lambda_min_iterations": itm}
    if it2 >= POWER_MAX_ITER or itm >= POWER_MAX_ITER:
        raise SpectralError(
            f"power iteration did not converge; residuals {residuals}")
    lam = _lambda_star(lambda2, lambda_min)
    t_rel = 1.0 / (1.0 - lam) if lam < 1.0 - 1e-15 else math.inf
    return SpectrumSummary(
        lambda2=lambda2, lambda_min=lambda_min, lambda_star=lam,
        t_rel=t_rel, rho_d=rho_d, method="iterative-extremal",
        residuals=residuals, eigenvalues=None)


RAMANUJAN = "ramanujan"
ONE_SIDED = "one-sided-at-margin"
NEITHER = "neither"


@dataclass(frozen=True)
class RamanujanReport:
    category: str
    rho_d: float
    lambda2: float
    lambda2_over_rho: float
    min_nontrivial: float
    bipartite: bool
    tol: float


def classify_ramanujan(g: Graph, summary: SpectrumSummary,
                       tol: float = 1e-9) -> RamanujanReport:
    """Check whether all nontrivial eigenvalues lie in [-rho_d, rho_d].

    'ramanujan' when the two-sided bound holds; 'one-sided-at-margin'
    when only lambda2 clears rho_d while the bottom stays away from -1
    (finite-size stand-in for the one-sided asymptotic notion); else
    'neither'.  The margin lambda2/rho_d is always reported.
    """
    if not g.is_regular or g.regular_degree < 3:
        raise SpectralError("classification needs a d-regular graph with d >= 3")
    from .graphs import is_bipartite
    bip = is_bipartite(g)
    r = rho(g.regular_degree)
    lambda2 = summary.lambda2
    if summary.eigenvalues is not None:
        eigs = np.asarray(summary.eigenvalues)
        nontrivial = eigs[np.abs(np.abs(eigs) - 1.0) > EIG_ONE_TOL]
        min_nt = float(nontrivial.min()) if len(nontrivial) else 0.0
        max_abs = float(np.abs(nontrivial).max()) if len(nontrivial) else 0.0
        two_sided = max_abs <= r + tol
    else:
        # extremal data only: for a connected bipartite graph the spectrum
        # is symmetric, so lambda2 <= rho implies the two-sided bound
        lam_min = summary.lambda_min
        if bip and lam_min <= -1.0 + EIG_ONE_TOL:
            min_nt = -lambda2
            two_sided = lambda2 <= r + tol
        else:
            min_nt = lam_min
            two_sided = max(abs(lambda2), abs(lam_min)) <= r + tol
    if two_sided:
        cat = RAMANUJAN
    elif lambda2 <= r + tol and min_nt > -1.0 + tol:
        cat = ONE_SIDED
    else:
        cat = NEITHER
    return RamanujanReport(
        category=cat, rho_d=r, lambda2=lambda2,
        lambda2_over_rho=lambda2 / r, min_nontrivial=min_nt,
        bipartite=bip, tol=tol)


def poincare_bound(n: int, lambda_star: float, eps: float):
    """Mixing-time bound (1/2) log(n / eps^2) / log(1 / lambda_star).

    Comes from chaining Jensen with the spectral contraction of the L2
    distance; for lambda_star = 0 the chain mixes exactly in one step
    from stationarity's perspective and 0 is returned.
    """
    if n < 2:
        raise SpectralError(f"need n >= 2, got {n}")
    if not (0.0 < eps < 1.0):
        raise SpectralError(f"eps must lie in (0,1), got {eps}")
    if lambda_star < 0.0 or lambda_star >= 1.0:
        raise SpectralError(
            f"lambda_star must lie in [0,1), got {lambda_star}")
    if lambda_star == 0.0:
        return 0.0
    return 0.5 * math.log(n / (eps * eps)) / math.log(1.0 / lambda_star)


@dataclass(frozen=True)
class RestrictedEig:
    """Perron root of the kernel restricted (killed) on a subset A.

    Carries both forms of the comparison with lambda2: the plain bound
    lambda(A) <= lambda2 + pi(A), asserted only when lambda2 >= 0, and
    the always-valid refinement lambda(A) <= lambda2 + (1-lambda2) pi(A).
    """

    subset: tuple
    lambda_A: float
    pi_A: float
    lambda2: object
    plain_bound: object
    plain_applicable: bool
    plain_pass: object
    refined_bound: object
    refined_pass: object
    iterations: int
    residual: float


def restricted_top_eig(chain: ReversibleChain, subset,
                       lambda2=None, tol: float = 1e-9) -> RestrictedEig:
    """Largest eigenvalue of P_A via power iteration on its symmetrization.

    A must be a proper nonempty subset.  A nilpotent restriction (the
    iterate collapses to zero) yields lambda(A) = 0.  When ``lambda2`` is
    given, the comparison bounds are evaluated; pass None to skip them.
    """
    subset = tuple(sorted(int(v) for v in set(subset)))
    if not subset:
        raise SpectralError("subset must be nonempty")
    if len(subset) >= chain.n:
        raise SpectralError("subset must be a proper subset of the states")
    idx = np.asarray(subset, dtype=np.int64)
    sub = chain.kernel[idx][:, idx].tocsr()
    pi_sub = chain.stationary[idx]
    root = np.sqrt(pi_sub)
    s_sub = (sp.diags(root) @ sub @ sp.diags(1.0 / root)).tocsr()
    m = len(subset)

    # Iterate on (I + S_A)/2: positive semidefinite, so no +/- eigenvalue
    # pair can trap the iteration, and nonnegative iterates stay
    # nonnegative.  Top eigenvalue maps back as lambda(A) = 2 theta - 1.
    x = np.ones(m) / math.sqrt(m)
    theta_old = math.inf
    iterations = 0
    collapsed = False
    for it in range(1, RESTRICTED_MAX_ITER + 1):
        y = 0.5 * (x + s_sub @ x)
        norm = np.linalg.norm(y)
        iterations = it
        if norm < 1e-300:
            collapsed = True
            break
        theta = float(x @ y)
        x = y / norm
        if abs(theta - theta_old) < RESTRICTED_STAGNATION:
            break
        theta_old = theta
    if collapsed:
        lam, residual = 0.0, 0.0
    else:
        lam = max(2.0 * float(x @ (0.5 * (x + s_sub @ x))) - 1.0, 0.0)
        residual = float(np.linalg.norm(s_sub @ x - lam * x))

    pi_A = float(pi_sub.sum())
    plain_bound = plain_pass = refined_bound = refined_pass = None
    plain_applicable = False
    if lambda2 is not None:
        plain_bound = lambda2 + pi_A
        refined_bound = lambda2 + (1.0 - lambda2) * pi_A
        plain_applicable = lambda2 >= 0.0
        plain_pass = (lam <= plain_bound + tol) if plain_applicable else None
        refined_pass = lam <= refined_bound + tol
    return RestrictedEig(
        subset=subset, lambda_A=lam, pi_A=pi_A, lambda2=lambda2,
        plain_bound=plain_bound, plain_applicable=plain_applicable,
        plain_pass=plain_pass, refined_bound=refined_bound,
        refined_pass=refined_pass, iterations=iterations, residual=residual)


@dataclass(frozen=True)
class ComparisonReport:
    """Two-chain domination of restricted Perron roots.

    With P1 <= C1 P2 entrywise on its support and stationary ratio bound
    C2, lambda_{P1}(A) <= C1 C2^2 lambda_{P2}(A).
    """

    C1: float
    C2: float
    lhs: float
    rhs: float
    passed: bool


def compare_restricted(chain1: ReversibleChain, chain2: ReversibleChain,
                       subset, tol: float = 1e-9) -> ComparisonReport:
    if chain1.n != chain2.n:
        raise SpectralError("chains must share a state space")
    k1 = chain1.kernel.tocoo()
    k2 = chain2.kernel.tocoo()
    p2_entries = {(int(u), int(v)): w for u, v, w in zip(k2.row, k2.col, k2.data)}
    c1 = 0.0
    for u, v, w in zip(k1.row, k1.col, k1.data):
        if w <= 0:
            continue
        denom = p2_entries.get((int(u), int(v)), 0.0)
        if denom <= 0:
            raise SpectralError(
                f"support violation: P1({u},{v}) = {w:.3e} but P2({u},{v}) = 0")
        c1 = max(c1, w / denom)
    ratio = chain1.stationary / chain2.stationary
    c2 = float(max(ratio.max(), (1.0 / ratio).max()))
    lhs = restricted_top_eig(chain1, subset).lambda_A
    rhs_root = restricted_top_eig(chain2, subset).lambda_A
    rhs = c1 * c2 * c2 * rhs_root
    return ComparisonReport(C1=c1, C2=c2, lhs=lhs, rhs=rhs,
                            passed=lhs <= rhs + tol)
