"""Generalized arithmetic progressions: enumeration, properness, closeness,
dilation, and exact rational expression of generators.

A GAP of rank r in R^d is the image of the integer box
K_i <= k_i <= K'_i under  (k_1,...,k_r) -> g_0 + sum_i k_i g_i.
Its volume is the box size prod(K'_i - K_i + 1); it is proper when the map
is injective (|Q| = vol(Q)) and symmetric when g_0 = 0 and K_i = -K'_i.

Structured multisets close to a low-rank proper symmetric GAP have large
small-ball probability: a signed sum of lattice-approximable points lives in
the n-fold dilate nQ, so some point of nQ carries mass at least 1/|nQ|.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .smallball import SmallBallQuery, _as_point, as_fraction, rho_iid

ENUMERATION_CAP = 10 ** 6


@dataclass(frozen=True)
class Gap:
    base: tuple[Fraction, ...]
    generators: tuple[tuple[Fraction, ...], ...]
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    @classmethod
    def build(cls, generators: Sequence, lower: Sequence[int], upper: Sequence[int],
              base: Sequence | None = None) -> "Gap":
        gens = tuple(_as_point(g) for g in generators)
        if not gens:
            raise ValueError("a GAP needs at least one generator")
        dim = len(gens[0])
        if any(len(g) != dim for g in gens):
            raise ValueError("generators must share one dimension")
        b = _as_point(base) if base is not None else tuple([Fraction(0)] * dim)
        if len(b) != dim:
            raise ValueError("base point dimension mismatch")
        lo = tuple(int(k) for k in lower)
        hi = tuple(int(k) for k in upper)
        if len(lo) != len(gens) or len(hi) != len(gens):
            raise ValueError("need one (lower, upper) pair per generator")
        if any(a > b_ for a, b_ in zip(lo, hi)):
            raise ValueError("each lower bound must not exceed its upper bound")
        return cls(base=b, generators=gens, lower=lo, upper=hi)

    @classmethod
    def symmetric(cls, generators: Sequence, radii: Sequence[int]) -> "Gap":
        return cls.build(generators, [-k for k in radii], list(radii))

    @property
    def rank(self) -> int:
        return len(self.generators)

    @property
    def dimension(self) -> int:
        return len(self.base)

    @property
    def volume(self) -> int:
        v = 1
        for a, b in zip(self.lower, self.upper):
            v *= b - a + 1
        return v

    @property
    def is_symmetric(self) -> bool:
        return (all(c == 0 for c in self.base)
                and all(a == -b for a, b in zip(self.lower, self.upper)))

    def dilate(self, factor: int) -> "Gap":
        """Same generators, box bounds scaled by factor."""
        if factor < 1:
            raise ValueError("dilation factor must be a positive integer")
        return Gap(base=self.base, generators=self.generators,
                   lower=tuple(factor * a for a in self.lower),
                   upper=tuple(factor * b for b in self.upper))


@dataclass(frozen=True)
class EnumeratedGap:
    gap: Gap
    points: tuple[tuple[Fraction, ...], ...]  # with multiplicity, box order
    distinct: frozenset
    proper: bool

    @property
    def size(self) -> int:
        return len(self.distinct)


def gap_enumerate(gap: Gap, cap: int = ENUMERATION_CAP) -> EnumeratedGap:
    """All images of the integer box; properness decided by distinct count."""
    vol = gap.volume
    if vol > cap:
        raise ValueError(f"volume {vol} exceeds enumeration cap {cap}")
    dim, rank = gap.dimension, gap.rank
    pts = []
    # iterative product over box coordinates, accumulating exact images
    stack = [gap.base]
    for i in range(rank):
        g = gap.generators[i]
        new = []
        for p in stack:
            for k in range(gap.lower[i], gap.upper[i] + 1):
                new.append(tuple(p[c] + k * g[c] for c in range(dim)))
        stack = new
    pts = stack
    distinct = frozenset(pts)
    return EnumeratedGap(gap=gap, points=tuple(pts), distinct=distinct,
                         proper=len(distinct) == vol)


@dataclass(frozen=True)
class ClosenessReport:
    delta: Fraction
    close_count: int
    all_close: bool
    nearest: tuple  # per element: (nearest gap point, squared distance, is_close)


def gap_closeness(v: Sequence, gap: Gap, delta,
                  enumerated: EnumeratedGap | None = None) -> ClosenessReport:
    """Nearest enumerated GAP point for every element of V, exactly.

    An element is delta-close when some q in Q has ||v - q|| <= delta;
    squared distances are compared in rational arithmetic.
    """
    d = as_fraction(delta)
    enum = enumerated or gap_enumerate(gap)
    pts = sorted(enum.distinct)
    d2 = d * d
    out = []
    close = 0
    for raw in v:
        p = _as_point(raw)
        if len(p) != gap.dimension:
            raise ValueError("element dimension does not match the GAP")
        best_q, best_d2 = None, None
        for q in pts:
            dist2 = sum((a - b) ** 2 for a, b in zip(p, q))
            if best_d2 is None or dist2 < best_d2:
                best_q, best_d2 = q, dist2
        is_close = best_d2 <= d2
        close += is_close
        out.append((best_q, best_d2, is_close))
    return ClosenessReport(delta=d, close_count=close,
                           all_close=close == len(out), nearest=tuple(out))


@dataclass(frozen=True)
class PigeonholeReport:
    bound: Fraction
    dilate_size: int
    dilate_volume: int
    rho: Fraction | None
    verified: bool | None


def gap_pigeonhole_bound(v: Sequence, gap: Gap, delta, s: int = 0,
                         verify: bool = True,
                         cap: int = ENUMERATION_CAP) -> PigeonholeReport:
    """Lower bound rho_{n*delta}(V) >= 1/|nQ| from lattice approximability.

    Requires a proper symmetric GAP and every v_i delta-close to it: each
    signed sum of the approximants lands in the dilate nQ, so some point of
    nQ carries probability at least 1/|nQ|, and every pattern's true sum is
    within n*delta of its approximant sum.  When verify is set and the size
    permits, the bound is checked against the exact iid sweep.
    """
    if not gap.is_symmetric:
        raise ValueError("the pigeonhole bound needs a symmetric GAP")
    enum = gap_enumerate(gap, cap=cap)
    if not enum.proper:
        raise ValueError("the pigeonhole bound needs a proper GAP")
    closeness = gap_closeness(v, gap, delta, enumerated=enum)
    if not closeness.all_close:
        raise ValueError(
            f"assignment missing: only {closeness.close_count} of {len(v)} "
            f"elements are delta-close to the GAP")
    n = len(v)
    dilated = gap_enumerate(gap.dilate(n), cap=cap)
    bound = Fraction(1, dilated.size)
    rho = verified = None
    if verify and n <= 20:
        radius = n * as_fraction(delta)
        rho, _ = rho_iid(SmallBallQuery.iid(v, radius, s))
        verified = rho >= bound
    return PigeonholeReport(bound=bound, dilate_size=dilated.size,
                            dilate_volume=dilated.gap.volume,
                            rho=rho, verified=verified)


# ---------------------------------------------------------------------------
# exact rational linear algebra for generator expressions


def rational_solve(a: list[list[Fraction]], b: list[list[Fraction]]):
    """Solve a X = b exactly by Gauss-Jordan; returns None when singular."""
    n = len(a)
    width = len(b[0])
    m = [[Fraction(x) for x in row_a] + [Fraction(x) for x in row_b]
         for row_a, row_b in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [row[n:n + width] for row in m]


def rational_rank(a: list[list[Fraction]]) -> int:
    m = [[Fraction(x) for x in row] for row in a]
    rows, cols = len(m), len(m[0]) if m else 0
    rank = 0
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
        if rank == rows:
            break
    return rank


@dataclass(frozen=True)
class GeneratorExpression:
    kind: str                      # "generators" or "dependency"
    coefficients: tuple            # y_ij rows, exact Fractions
    residual_zero: bool


def express_generators(gap: Gap, coeff_vectors: Sequence[Sequence[int]]
                       ) -> GeneratorExpression:
    """Express each generator through elements w_i = sum_j k_ij g_j.

    With full-rank integer coefficient vectors the generator matrix is
    recovered as K^{-1} w exactly; the reconstruction residual is verified
    to vanish identically.  When the last coefficient vector is dependent,
    the exact rational dependency k_r = sum y_i k_i is returned instead.
    """
    r = gap.rank
    K = [[Fraction(int(c)) for c in row] for row in coeff_vectors]
    if len(K) != r or any(len(row) != r for row in K):
        raise ValueError(f"need {r} coefficient vectors of length {r}")
    dim = gap.dimension
    G = [[gap.generators[i][c] for c in range(dim)] for i in range(r)]
    # w_i = sum_j K[i][j] g_j
    W = [[sum(K[i][j] * G[j][c] for j in range(r)) for c in range(dim)]
         for i in range(r)]
    Y = rational_solve(K, [[Fraction(1) if i == j else Fraction(0)
                            for j in range(r)] for i in range(r)])
    if Y is not None:
        # g_i = sum_j Y[i][j] w_j; verify identically
        resid_zero = all(
            sum(Y[i][j] * W[j][c] for j in range(r)) == G[i][c]
            for i in range(r) for c in range(dim))
        return GeneratorExpression(kind="generators",
                                   coefficients=tuple(tuple(row) for row in Y),
                                   residual_zero=resid_zero)
    # dependent: express k_r through k_1 .. k_{r-1} (least-rank route)
    head = [K[i][:] for i in range(r - 1)]
    target = K[r - 1]
    # solve sum_i y_i k_i = k_r as an r x (r-1) exact system
    a = [[head[i][c] for i in range(r - 1)] for c in range(r)]
    rhs = [[target[c]] for c in range(r)]
    sol = _solve_overdetermined(a, rhs)
    if sol is None:
        raise ValueError("coefficient vectors are singular but not dependent "
                         "on the preceding ones")
    y = tuple(row[0] for row in sol)
    resid_zero = all(sum(y[i] * head[i][c] for i in range(r - 1)) == target[c]
                     for c in range(r))
    return GeneratorExpression(kind="dependency", coefficients=(y,),
                               residual_zero=resid_zero)


def _solve_overdetermined(a, b):
    """Exact solve of a tall consistent system; None when inconsistent."""
    rows, cols = len(a), len(a[0])
    m = [[Fraction(a[r][c]) for c in range(cols)] + [Fraction(b[r][0])]
         for r in range(rows)]
    rank = 0
    pivots = []
    for col in range(cols):
        piv = next((r for r in range(rank, rows) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = 1 / m[rank][col]
        m[rank] = [x * inv for x in m[rank]]
        for r in range(rows):
            if r != rank and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        pivots.append(col)
        rank += 1
    for r in range(rank, rows):
        if m[r][cols] != 0:
            return None
    sol = [[Fraction(0)] for _ in range(cols)]
    for r, col in enumerate(pivots):
        sol[col][0] = m[r][cols]
    return sol
