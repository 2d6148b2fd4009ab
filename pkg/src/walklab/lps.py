"""Lubotzky-Phillips-Sarnak Ramanujan graphs X(p, q).

Cayley graphs of PSL(2,q) or PGL(2,q) whose p+1 generators come from the
integer quadruples a0^2 + a1^2 + a2^2 + a3^2 = p with a0 odd positive and
a1, a2, a3 even, mapped to 2x2 matrices over F_q through a square root of
-1 mod q.  When p is a quadratic residue mod q the generators land in
PSL(2,q) and the graph is non-bipartite on q(q^2-1)/2 vertices; otherwise
the graph lives on all of PGL(2,q), is bipartite, and has q(q^2-1)
vertices.  Matrices are kept as canonical projective representatives:
scaled so the first nonzero entry is 1.
"""

from __future__ import annotations

import math

from .graphs import Graph, GraphError, make_graph


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def legendre_symbol(a: int, p: int) -> int:
    """Euler's criterion; p an odd prime."""
    a %= p
    if a == 0:
        return 0
    r = pow(a, (p - 1) // 2, p)
    return -1 if r == p - 1 else 1


def sqrt_minus_one(q: int) -> int:
    """Smallest square root of -1 mod q (exists iff q = 1 mod 4)."""
    if q % 4 != 1:
        raise GraphError(f"-1 is not a square mod {q}")
    for z in range(2, q):
        if legendre_symbol(z, q) == -1:
            root = pow(z, (q - 1) // 4, q)
            return min(root, q - root)
    raise GraphError(f"no quadratic non-residue found mod {q}")


def quadruples(p: int) -> list:
    """All (a0, a1, a2, a3) with sum of squares p, a0 odd > 0, rest even."""
    sols = []
    limit = int(math.isqrt(p))
    for a0 in range(1, limit + 1, 2):
        r0 = p - a0 * a0
        for a1 in range(-limit, limit + 1):
            if a1 % 2:
                continue
            r1 = r0 - a1 * a1
            if r1 < 0:
                continue
            for a2 in range(-limit, limit + 1):
                if a2 % 2:
                    continue
                r2 = r1 - a2 * a2
                if r2 < 0:
                    continue
                a3 = math.isqrt(r2)
                if a3 * a3 == r2 and a3 % 2 == 0:
                    sols.append((a0, a1, a2, a3))
                    if a3 > 0:
                        sols.append((a0, a1, a2, -a3))
    sols.sort()
    return sols


def _canon(m: tuple, q: int) -> tuple:
    """Scale so the first nonzero entry equals 1 (projective representative)."""
    for entry in m:
        if entry % q != 0:
            inv = pow(entry, q - 2, q)
            return tuple((inv * x) % q for x in m)
    raise GraphError("zero matrix cannot be normalized")


def _mul(a: tuple, b: tuple, q: int) -> tuple:
    return ((a[0] * b[0] + a[1] * b[2]) % q,
            (a[0] * b[1] + a[1] * b[3]) % q,
            (a[2] * b[0] + a[3] * b[2]) % q,
            (a[2] * b[1] + a[3] * b[3]) % q)


def _det(m: tuple, q: int) -> int:
    return (m[0] * m[3] - m[1] * m[2]) % q


def generators(p: int, q: int) -> list:
    """Canonical generator matrices; must number exactly p+1."""
    i = sqrt_minus_one(q)
    gens = []
    for a0, a1, a2, a3 in quadruples(p):
        m = ((a0 + i * a1) % q, (a2 + i * a3) % q,
             (-a2 + i * a3) % q, (a0 - i * a1) % q)
        gens.append(_canon(m, q))
    distinct = sorted(set(gens))
    if len(distinct) != p + 1:
        raise GraphError(
            f"expected {p + 1} distinct generators, got {len(distinct)} "
            f"(p={p}, q={q})")
    return distinct


def _pgl_elements(q: int) -> list:
    """Canonical representatives of PGL(2,q), in deterministic order."""
    elems = []
    # first nonzero entry is m[0] = 1
    for b in range(q):
        for c in range(q):
            bc = (b * c) % q
            for d in range(q):
                if d != bc:
                    elems.append((1, b, c, d))
    # m[0] = 0 forces m[1] = 1 and det = -c != 0
    for c in range(1, q):
        for d in range(q):
            elems.append((0, 1, c, d))
    return elems


def build_lps(p: int, q: int) -> Graph:
    """Construct the (p+1)-regular LPS Cayley graph X(p, q).

    Requires distinct primes p, q = 1 mod 4 with q > 2*sqrt(p).  The
    result is audited: regularity, vertex count against the group order,
    and simplicity all raise on mismatch.
    """
    for name, value in (("p", p), ("q", q)):
        if not is_prime(value):
            raise GraphError(f"{name}={value} is not prime")
        if value % 4 != 1:
            raise GraphError(f"{name}={value} must be 1 mod 4")
    if p == q:
        raise GraphError("p and q must be distinct")
    if q * q <= 4 * p:
        raise GraphError(f"q={q} too small: need q > 2*sqrt(p) for p={p}")

    gens = generators(p, q)
    residue = legendre_symbol(p, q)
    pgl = _pgl_elements(q)
    if residue == 1:
        squares = {(x * x) % q for x in range(1, q)}
        vertices = [m for m in pgl if _det(m, q) in squares]
        expected_n = q * (q * q - 1) // 2
    else:
        vertices = pgl
        expected_n = q * (q * q - 1)
    if len(vertices) != expected_n:
        raise GraphError(
            f"group enumeration produced {len(vertices)} elements, "
            f"expected {expected_n}")

    index = {m: i for i, m in enumerate(vertices)}
    edges = set()
    for m, src in index.items():
        for s in gens:
            tgt = index[_canon(_mul(m, s, q), q)]
            if tgt == src:
                raise GraphError(f"self-loop at group element {m}")
            edges.add((min(src, tgt), max(src, tgt)))
    if 2 * len(edges) != expected_n * (p + 1):
        raise GraphError(
            f"multi-edge collision: {len(edges)} edges for "
            f"{expected_n} vertices of degree {p + 1}")

    g = make_graph(expected_n, sorted(edges),
                   {"kind": "lps", "p": p, "q": q,
                    "group": "PSL" if residue == 1 else "PGL",
                    "legendre": residue})
    if not g.is_regular or g.regular_degree != p + 1:
        raise GraphError("LPS output failed the regularity audit")
    return g
