"""Exact small-ball (anticoncentration) probabilities for signed sums.

For a multiset V = {v_1, ..., v_n} in R^d (d = 1 or 2) and radius beta,
two concentration functionals are computed exactly:

* rho(V)  = sup_v P( sum_i v_i x_i  in  B(v, beta) ),  x_i i.i.d. signs
  with P(+1) = 1/2 + s/(2n);
* rho*(V) = the same supremum with x drawn uniformly from the sign vectors
  of fixed entry sum sbar.

Both suprema are over closed balls and are attained on a finite candidate
set: in d=1 an optimal window can be slid until its left endpoint sits on an
achievable sum; in d=2 an optimal disk can be moved until either its center
sits on an achievable sum or two achievable sums lie on its boundary.  The
sweep therefore tests every achievable point and, in the plane, the two
radius-beta centers determined by each pair of points at distance <= 2*beta.
(Pair midpoints alone are not enough: three points can be coverable by one
disk whose optimal center is none of the midpoints.)

All arithmetic is exact: inputs are scaled to a common integer grid, pattern
weights are big-integer numerators over one common denominator, and the
boundary predicates for the irrational pair-centers reduce to integer
comparisons (a <= c*sqrt(g) decided by sign analysis and squaring).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd, sqrt
from typing import Sequence

import numpy as np

from .sampler import (FIXED_SUM, IID, InfeasibleParameters, SkewedBernoulli,
                      UnionSetS, check_fixed_sum, union_feasible)

EXACT_MODE_CAP = 24


def as_fraction(x) -> Fraction:
    """Exact conversion: ints, Fractions, strings, and binary floats."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (float, np.floating)):
        return Fraction(float(x))
    raise TypeError(f"cannot convert {type(x).__name__} to an exact rational")


def _as_point(p) -> tuple[Fraction, ...]:
    if isinstance(p, complex):
        return (as_fraction(p.real), as_fraction(p.imag))
    if isinstance(p, (tuple, list, np.ndarray)):
        seq = tuple(as_fraction(c) for c in p)
        if len(seq) not in (1, 2):
            raise ValueError(f"points must live in R^1 or R^2, got length {len(seq)}")
        return seq
    return (as_fraction(p),)


@dataclass(frozen=True)
class SmallBallQuery:
    """A multiset of exact points, a radius, and the sign-vector model."""

    points: tuple[tuple[Fraction, ...], ...]
    beta: Fraction
    model: str  # IID or FIXED_SUM
    s: int      # skew parameter for IID, target entry sum for FIXED_SUM

    @classmethod
    def iid(cls, v: Sequence, beta, s: int) -> "SmallBallQuery":
        return cls._build(v, beta, IID, s)

    @classmethod
    def fixed_sum(cls, v: Sequence, beta, sbar: int) -> "SmallBallQuery":
        return cls._build(v, beta, FIXED_SUM, sbar)

    @classmethod
    def _build(cls, v, beta, model, s):
        pts = tuple(_as_point(p) for p in v)
        if not pts:
            raise ValueError("V must be nonempty")
        dim = len(pts[0])
        if any(len(p) != dim for p in pts):
            raise ValueError("all points must share one dimension")
        b = as_fraction(beta)
        if b < 0:
            raise ValueError("beta must be nonnegative")
        n = len(pts)
        if model == IID:
            if abs(s) > n:
                raise InfeasibleParameters(f"|s|={abs(s)} exceeds n={n}")
        elif model == FIXED_SUM:
            check_fixed_sum(n, s)
        else:
            raise ValueError(f"model must be {IID!r} or {FIXED_SUM!r}")
        return cls(points=pts, beta=b, model=model, s=s)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dimension(self) -> int:
        return len(self.points[0])

    def sum_sq_norm(self) -> Fraction:
        return sum((c * c for p in self.points for c in p), Fraction(0))


# ---------------------------------------------------------------------------
# exact enumeration of achievable sums with big-integer weights


def _lcm(a: int, b: int) -> int:
    return a // gcd(a, b) * b


def _enumerate_sums(w_rows: list[list[int]], dim: int):
    """All 2^n signed sums with plus-counts; int64 when safe, objects else."""
    bound = sum(max(abs(c) for c in row) for row in w_rows) if dim == 1 else \
        sum(sum(abs(c) for c in row) for row in w_rows)
    use_i64 = bound < 2 ** 62
    dtype = np.int64 if use_i64 else object
    sums = np.zeros((1, dim), dtype=dtype)
    plus = np.zeros(1, dtype=np.int64)
    for row in w_rows:
        wi = np.array(row, dtype=dtype)
        sums = np.concatenate([sums - wi, sums + wi], axis=0)
        plus = np.concatenate([plus, plus + 1])
    return sums, plus


def _weighted_support(query: SmallBallQuery):
    """Distinct achievable sums with exact weight numerators.

    Returns (points: sorted int tuples in scaled coordinates,
             numerators, denominator, scale, beta_scaled).
    """
    n, dim = query.n, query.dimension
    if n > EXACT_MODE_CAP:
        raise ValueError(
            f"n={n} exceeds the exact-mode cap {EXACT_MODE_CAP}; "
            f"use the Monte Carlo opt-in for rho under the iid model")
    scale = 1
    for p in query.points:
        for c in p:
            scale = _lcm(scale, c.denominator)
    w_rows = [[int(c * scale) for c in p] for p in query.points]
    beta_scaled = query.beta * scale
    sums, plus = _enumerate_sums(w_rows, dim)

    if query.model == FIXED_SUM:
        k = (n + query.s) // 2
        mask = plus == k
        sums, plus = sums[mask], plus[mask]
        denom = comb(n, k)
        weight_of_a = {k: 1}
    else:
        s = query.s
        denom = (2 * n) ** n
        weight_of_a = {a: (n + s) ** a * (n - s) ** (n - a) for a in range(n + 1)}

    agg: dict[tuple, int] = {}
    if sums.dtype == object:
        for row, a in zip(sums, plus):
            key = tuple(int(c) for c in row)
            agg[key] = agg.get(key, 0) + weight_of_a[int(a)]
    else:
        stacked = np.column_stack([sums, plus])
        uniq, counts = np.unique(stacked, axis=0, return_counts=True)
        for row, cnt in zip(uniq, counts):
            key = tuple(int(c) for c in row[:dim])
            agg[key] = agg.get(key, 0) + int(cnt) * weight_of_a[int(row[dim])]
    pts = sorted(agg)
    numerators = [agg[p] for p in pts]
    return pts, numerators, denom, scale, beta_scaled


# ---------------------------------------------------------------------------
# d = 1: sorted interval stabbing


def _sweep_line(pts, numerators, denom, scale, beta_scaled, beta):
    from bisect import bisect_right

    xs = [p[0] for p in pts]
    prefix = [0]
    for m in numerators:
        prefix.append(prefix[-1] + m)
    two_beta = 2 * beta_scaled
    best_num, best_i = -1, 0
    for i, x in enumerate(xs):
        j = bisect_right(xs, x + two_beta)
        num = prefix[j] - prefix[i]
        if num > best_num:
            best_num, best_i = num, i
    center = Fraction(xs[best_i], scale) + beta
    return Fraction(best_num, denom), center


# ---------------------------------------------------------------------------
# d = 2: point centers plus two-point boundary centers, all predicates exact


def _leq_sqrt(a: int, c: int, g_num: int, g_den: int) -> bool:
    """Exact test of  a <= c * sqrt(g_num / g_den)  with g >= 0."""
    if a <= 0:
        if c >= 0:
            return True
        return a * a * g_den >= c * c * g_num
    if c <= 0:
        return False
    return a * a * g_den <= c * c * g_num


def _sweep_plane(pts, numerators, denom, scale, beta_scaled, beta):
    # double all coordinates so pair midpoints stay integral
    P = [(2 * x, 2 * y) for (x, y) in pts]
    n_pts = len(P)
    b4 = (2 * beta_scaled) ** 2          # squared radius in doubled units
    p4, q4 = b4.numerator, b4.denominator

    # float grid for near-pair discovery only; every predicate below is exact
    pair_dist = 2.0 * sqrt(float(b4)) if p4 else 0.0
    cell = max(pair_dist * (1 + 1e-9), 1.0)
    grid: dict[tuple[int, int], list[int]] = {}
    for idx, (x, y) in enumerate(P):
        grid.setdefault((int(float(x) // cell), int(float(y) // cell)), []).append(idx)

    def neighbors(i):
        kx, ky = int(float(P[i][0]) // cell), int(float(P[i][1]) // cell)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                yield from grid.get((kx + dx, ky + dy), ())

    def mass_at_point(cx: int, cy: int) -> int:
        total = 0
        for j in range(n_pts):
            dx, dy = P[j][0] - cx, P[j][1] - cy
            if (dx * dx + dy * dy) * q4 <= p4:
                total += numerators[j]
        return total

    half = 2 * scale  # doubled coordinates over the original denominator
    best_num = -1
    best_center = None

    for (x, y) in P:
        num = mass_at_point(x, y)
        if num > best_num:
            best_num = num
            best_center = (Fraction(x, half), Fraction(y, half))

    seen = set()
    for i in range(n_pts):
        for j in neighbors(i):
            if j <= i or (i, j) in seen:
                continue
            seen.add((i, j))
            (px, py), (qx, qy) = P[i], P[j]
            lx, ly = qx - px, qy - py
            L = lx * lx + ly * ly
            if L == 0 or L * q4 > 4 * p4:        # farther apart than 2*beta
                continue
            mx, my = (px + qx) // 2, (py + qy) // 2   # doubled coords are even
            ux, uy = -ly, lx
            # center = m +- sqrt(G)*u with G = (b4 - L/4)/L
            g_num, g_den = 4 * p4 - L * q4, 4 * L * q4
            for sign in (1, -1):
                total = 0
                for t in range(n_pts):
                    rx, ry = P[t][0] - mx, P[t][1] - my
                    a = 4 * (rx * rx + ry * ry) - L
                    c = sign * 8 * (rx * ux + ry * uy)
                    if _leq_sqrt(a, c, g_num, g_den):
                        total += numerators[t]
                if total > best_num:
                    best_num = total
                    h = sqrt(g_num / g_den) if g_num else 0.0
                    best_center = ((mx + sign * h * ux) / half,
                                   (my + sign * h * uy) / half)
                if g_num == 0:   # both centers coincide at the midpoint
                    break
    return Fraction(best_num, denom), best_center


def _sweep(query: SmallBallQuery):
    pts, numerators, denom, scale, beta_scaled = _weighted_support(query)
    if query.dimension == 1:
        return _sweep_line(pts, numerators, denom, scale, beta_scaled, query.beta)
    return _sweep_plane(pts, numerators, denom, scale, beta_scaled, query.beta)


def rho_iid(query: SmallBallQuery, mc_samples: int | None = None,
            rng: np.random.Generator | None = None):
    """sup_v P(sum v_i x_i in B(v, beta)) for i.i.d. skewed signs.

    Exact (Fraction) for n <= 24.  For larger n the caller must opt in to a
    Monte Carlo estimate, which sweeps the ball over the sampled sums and is
    only an approximation of the supremum.
    """
    if query.model != IID:
        raise ValueError("rho_iid needs an IID-model query")
    if query.n <= EXACT_MODE_CAP:
        return _sweep(query)
    if mc_samples is None:
        raise ValueError(
            f"n={query.n} exceeds exact mode; pass mc_samples to opt in to "
            f"Monte Carlo")
    if rng is None:
        raise ValueError("Monte Carlo mode needs an rng")
    return _rho_monte_carlo(query, mc_samples, rng)


def rho_star(query: SmallBallQuery):
    """Exact sup over centers under the fixed-entry-sum uniform model."""
    if query.model != FIXED_SUM:
        raise ValueError("rho_star needs a FIXED_SUM-model query")
    return _sweep(query)


def _rho_monte_carlo(query: SmallBallQuery, samples: int, rng: np.random.Generator):
    n = query.n
    signs = np.where(rng.integers(0, 2 * n, size=(samples, n)) < n + query.s,
                     1.0, -1.0)
    v = np.array([[float(c) for c in p] for p in query.points])
    sums = signs @ v
    beta = float(query.beta)
    if query.dimension == 1:
        xs = np.sort(sums[:, 0])
        right = np.searchsorted(xs, xs + 2 * beta, side="right")
        counts = right - np.arange(xs.size)
        i = int(np.argmax(counts))
        return counts[i] / samples, float(xs[i] + beta)
    best, center = 0, (0.0, 0.0)
    for i in range(min(samples, 4096)):
        c = sums[i]
        cnt = int(np.count_nonzero(
            ((sums - c) ** 2).sum(axis=1) <= beta ** 2 * (1 + 1e-12)))
        if cnt > best:
            best, center = cnt, (float(c[0]), float(c[1]))
    return best / samples, center


def erdos_extremal_bound(n: int) -> Fraction:
    """comb(n, floor(n/2)) / 2^n: the fair-signs extremal small-ball value,
    attained by a constant multiset with entries larger than the radius."""
    return Fraction(comb(n, n // 2), 2 ** n)


@dataclass(frozen=True)
class RhoRelationReport:
    rho: Fraction
    rho_center: object
    rho_star_minus: Fraction | None
    rho_star_plus: Fraction | None
    prob_sum_minus: Fraction
    prob_sum_plus: Fraction
    conditioning_ok: bool
    ratio: float
    constant: float


def rho_relation_check(v: Sequence, beta, s: int) -> RhoRelationReport:
    """Exact check of the conditioning inequality linking rho and rho*.

    For each feasible sbar in {s-1, s+1}:  rho >= P(sum = sbar) * rho*_sbar,
    exactly.  Also reports the ratio rho*sqrt(n)/max rho* and the recorded
    conditioning constant P(sum = sbar*)*sqrt(n).
    """
    q = SmallBallQuery.iid(v, beta, s)
    n = q.n
    rho, center = rho_iid(q)
    model = SkewedBernoulli(n, s)
    stars: dict[int, Fraction | None] = {}
    probs: dict[int, Fraction] = {}
    ok = True
    for sbar in (s - 1, s + 1):
        probs[sbar] = model.prob_sum(sbar)
        if (n + sbar) % 2 == 0 and abs(sbar) <= n:
            star, _ = rho_star(SmallBallQuery.fixed_sum(v, beta, sbar))
            stars[sbar] = star
            if rho < probs[sbar] * star:
                ok = False
        else:
            stars[sbar] = None
    finite = {sb: st for sb, st in stars.items() if st is not None and st > 0}
    if finite:
        sb_max = max(finite, key=lambda sb: finite[sb])
        ratio = float(rho) * sqrt(n) / float(finite[sb_max])
        constant = float(probs[sb_max]) * sqrt(n)
    else:  # degenerate: no feasible class
        ratio, constant = float("nan"), float("nan")
    return RhoRelationReport(
        rho=rho, rho_center=center,
        rho_star_minus=stars[s - 1], rho_star_plus=stars[s + 1],
        prob_sum_minus=probs[s - 1], prob_sum_plus=probs[s + 1],
        conditioning_ok=ok, ratio=ratio, constant=constant)


# ---------------------------------------------------------------------------
# collapsed-coordinate small-ball probability (exact, both conditioning types)


@dataclass(frozen=True)
class CollapsedBallReport:
    probability: Fraction
    bound: Fraction
    satisfied: bool
    epsilon: Fraction
    norm_weighted: Fraction
    on_lattice: bool
    admissible: bool


def collapsed_ball_probability(n: int, n0: int, s: int,
                               u_prime: Sequence,
                               f_prime: Sequence,
                               beta_prime,
                               epsilon) -> CollapsedBallReport:
    """Exact P( |<x' + f', u'>| <= beta' * n^5 ) for the collapsed vector
    x' = (x_1+...+x_{n0}, x_{n0+1}, ..., x_n) of a uniform element of the
    union set, enumerated over both conditioning types.

    u_prime has n - n0 + 1 planar components; the first one multiplies the
    collapsed coordinate.  The report asserts the anticoncentration bound
    1 - (1-eps)/8 and flags the admissibility side conditions: components on
    the beta'*n^4 lattice and weighted norm n0*|u_1|^2 + sum |u_i|^2 of
    order one (accepted window [1/4, 4]).
    """
    if not union_feasible(n, s):
        raise InfeasibleParameters(f"union set empty for n={n}, s={s}")
    if not 1 <= n0 <= n - 2:
        raise ValueError(f"need 1 <= n0 <= n-2 so at least two tail "
                         f"coordinates remain, got n0={n0}, n={n}")
    m = n - n0 + 1
    u = [_as_point(p) for p in u_prime]
    u = [p if len(p) == 2 else (p[0], Fraction(0)) for p in u]
    f = [as_fraction(x) for x in f_prime]
    if len(u) != m or len(f) != m:
        raise ValueError(f"u' and f' must have n-n0+1 = {m} components")
    bp = as_fraction(beta_prime)
    eps = as_fraction(epsilon)
    if not 0 < eps < 1:
        raise ValueError("epsilon must lie in (0, 1)")

    lattice_step = bp * n ** 4
    on_lattice = all((c / lattice_step).denominator == 1 for p in u for c in p)
    norm_weighted = (n0 * (u[0][0] ** 2 + u[0][1] ** 2)
                     + sum(p[0] ** 2 + p[1] ** 2 for p in u[1:]))
    admissible = on_lattice and Fraction(1, 4) <= norm_weighted <= 4

    radius = bp * n ** 5
    radius_sq = radius * radius
    us = UnionSetS.from_params(n, s)

    hit = 0
    tail_len = n - n0
    for tail in itertools.product((-1, 1), repeat=tail_len):
        tail_sum = sum(tail)
        wx = sum((t + f[j + 1]) * u[j + 1][0] for j, t in enumerate(tail))
        wy = sum((t + f[j + 1]) * u[j + 1][1] for j, t in enumerate(tail))
        for target in (s - 1, s + 1):
            k = target - tail_sum
            if abs(k) > n0 or (k + n0) % 2 != 0:
                continue
            ways = comb(n0, (n0 + k) // 2)
            if ways == 0:
                continue
            ipx = wx + (k + f[0]) * u[0][0]
            ipy = wy + (k + f[0]) * u[0][1]
            if ipx * ipx + ipy * ipy <= radius_sq:
                hit += ways
    probability = Fraction(hit, us.total)
    bound = 1 - (1 - eps) / 8
    return CollapsedBallReport(
        probability=probability, bound=bound,
        satisfied=probability <= bound, epsilon=eps,
        norm_weighted=norm_weighted, on_lattice=on_lattice,
        admissible=admissible)
