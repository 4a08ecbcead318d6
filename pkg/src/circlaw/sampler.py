"""Exact samplers for sign vectors and matrices with row-sum constraints.

Four row distributions appear throughout the experiments:

* uniform over all +-1 vectors of length n with entry sum exactly s
  ("fixed-sum" model);
* uniform over the union set S of all vectors with entry sum s-1 or s+1
  ("union" model), the row law of the reduced matrices;
* i.i.d. entries with P(+1) = 1/2 + s/(2n) ("iid" model), the skewed
  Bernoulli product measure matching the fixed-sum mean;
* the collapsed-coordinate conditional laws obtained from the union model
  by summing the first n0 coordinates into one.

Counts and probabilities are kept exact (big integers / fractions) until a
caller explicitly wants floats; class selection inside the union sampler is
done with exact big-integer uniforms, never via floating thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable

import numpy as np

from .rng import uniform_below

FIXED_SUM = "fixed"
UNION_S = "union"
IID = "iid"
MODELS = (FIXED_SUM, UNION_S, IID)

TYPE1 = "type1"  # collapsed law conditioned on total sum s+1
TYPE2 = "type2"  # collapsed law conditioned on total sum s-1


class InfeasibleParameters(ValueError):
    """Raised for (n, s) combinations with no admissible sign vector."""


def fixed_sum_feasible(n: int, s: int) -> bool:
    return n >= 1 and abs(s) <= n and (n + s) % 2 == 0

def union_feasible(n: int, s: int) -> bool:
    # both classes s-1 and s+1 are nonempty iff |s| <= n-1 and n+s is odd
    return n >= 1 and abs(s) <= n - 1 and (n + s) % 2 == 1


def check_fixed_sum(n: int, s: int) -> None:
    if not fixed_sum_feasible(n, s):
        raise InfeasibleParameters(
            f"no +-1 vector of length n={n} has sum s={s}: "
            f"need |s| <= n and n+s even"
        )

def check_union(n: int, s: int) -> None:
    if not union_feasible(n, s):
        raise InfeasibleParameters(
            f"union set for n={n}, s={s} is empty or one-sided: "
            f"need |s| <= n-1 and n+s odd"
        )


@dataclass(frozen=True)
class SignVector:
    """A +-1 vector together with its cached entry sum."""

    entries: np.ndarray
    n: int
    sum: int

    @classmethod
    def from_entries(cls, entries: Iterable[int]) -> "SignVector":
        arr = np.asarray(list(entries) if not isinstance(entries, np.ndarray) else entries,
                         dtype=np.int64)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("entries must be a nonempty 1-d sequence")
        if not np.all(np.abs(arr) == 1):
            raise ValueError("entries must all be -1 or +1")
        return cls(entries=arr, n=int(arr.size), sum=int(arr.sum()))

    def __post_init__(self):
        if self.entries.size != self.n:
            raise ValueError("length mismatch")
        if int(self.entries.sum()) != self.sum:
            raise ValueError("cached sum does not match entries")
        if (self.n + self.sum) % 2 != 0:
            raise ValueError("n + sum must be even for a +-1 vector")


@dataclass(frozen=True)
class SkewedBernoulli:
    """The +-1 law with P(+1) = 1/2 + s/(2n), P(-1) = 1/2 - s/(2n)."""

    n: int
    s: int

    def __post_init__(self):
        if abs(self.s) > self.n:
            raise InfeasibleParameters(f"|s|={abs(self.s)} exceeds n={self.n}")

    @property
    def p_plus(self) -> Fraction:
        return Fraction(self.n + self.s, 2 * self.n)

    @property
    def p_minus(self) -> Fraction:
        return Fraction(self.n - self.s, 2 * self.n)

    def mean(self) -> Fraction:
        return Fraction(self.s, self.n)

    def prob_sum(self, sbar: int) -> Fraction:
        """Exact P(sum of n i.i.d. entries equals sbar)."""
        if (self.n + sbar) % 2 != 0 or abs(sbar) > self.n:
            return Fraction(0)
        a = (self.n + sbar) // 2
        return Fraction(comb(self.n, a) * (self.n + self.s) ** a
                        * (self.n - self.s) ** (self.n - a),
                        (2 * self.n) ** self.n)


@dataclass(frozen=True)
class UnionSetS:
    """The set S of +-1 vectors with entry sum s-1 or s+1, with exact counts."""

    n: int
    s: int
    count_minus: int  # vectors of sum s-1
    count_plus: int   # vectors of sum s+1

    @classmethod
    def from_params(cls, n: int, s: int) -> "UnionSetS":
        check_union(n, s)
        return cls(n=n, s=s,
                   count_minus=comb(n, (n + s - 1) // 2),
                   count_plus=comb(n, (n + s + 1) // 2))

    @property
    def total(self) -> int:
        return self.count_minus + self.count_plus

    def contains(self, v: SignVector) -> bool:
        return v.n == self.n and v.sum in (self.s - 1, self.s + 1)


def sample_fixed_sum_vector(n: int, s: int, rng: np.random.Generator) -> SignVector:
    """Uniform +-1 vector of length n with entry sum exactly s.

    The (n+s)/2 positions holding +1 are chosen uniformly without
    replacement, which gives exact uniformity over all comb(n, (n+s)/2)
    admissible vectors in O(n) time.
    """
    check_fixed_sum(n, s)
    k = (n + s) // 2
    entries = np.full(n, -1, dtype=np.int64)
    if k > 0:
        entries[rng.choice(n, size=k, replace=False)] = 1
    return SignVector(entries=entries, n=n, sum=s)


def sample_union_S_vector(n: int, s: int, rng: np.random.Generator) -> SignVector:
    """Uniform vector from the union set S (sums s-1 and s+1 pooled).

    The class is selected with an exact big-integer uniform draw against the
    binomial counts, so P(sum = s+1) equals count_plus / (count_minus +
    count_plus) exactly; within a class the fixed-sum sampler applies.
    """
    us = UnionSetS.from_params(n, s)
    u = uniform_below(rng, us.total)
    sbar = s + 1 if u < us.count_plus else s - 1
    return sample_fixed_sum_vector(n, sbar, rng)


def sample_skewed_bernoulli_vector(model: SkewedBernoulli,
                                   rng: np.random.Generator) -> SignVector:
    """I.i.d. +-1 entries with P(+1) = (n+s)/(2n), drawn exactly.

    Uses integer uniforms on [0, 2n) compared against n+s, so the law is the
    stated rational one with no floating-point threshold error.
    """
    n, s = model.n, model.s
    entries = np.where(rng.integers(0, 2 * n, size=n) < n + s, 1, -1).astype(np.int64)
    return SignVector(entries=entries, n=n, sum=int(entries.sum()))


def sample_row(n: int, s: int, model: str, rng: np.random.Generator) -> SignVector:
    if model == FIXED_SUM:
        return sample_fixed_sum_vector(n, s, rng)
    if model == UNION_S:
        return sample_union_S_vector(n, s, rng)
    if model == IID:
        return sample_skewed_bernoulli_vector(SkewedBernoulli(n, s), rng)
    raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")


def sample_row_sum_matrix(n: int, s: int, model: str,
                          rng: np.random.Generator) -> np.ndarray:
    """n x n matrix of +-1 with independent rows from the chosen model."""
    rows = [sample_row(n, s, model, rng).entries for _ in range(n)]
    return np.stack(rows)


def type_split_probabilities(n: int, s: int,
                             epsilon: float | None = None) -> tuple[Fraction, Fraction]:
    """Exact (P(type1), P(type2)) for the union set: the chances that a
    uniform element of S has sum s+1 respectively s-1.

    Both reduce to closed forms (n-s+1)/(2n+2) and (n+s+1)/(2n+2).  When
    epsilon is supplied, asserts the crude lower bound (1-epsilon)/4 on each,
    which is the regime the experiments run in; the bound is checked rather
    than trusted because it genuinely fails for |s| close to n.
    """
    us = UnionSetS.from_params(n, s)
    p1 = Fraction(us.count_plus, us.total)
    p2 = Fraction(us.count_minus, us.total)
    if epsilon is not None:
        if abs(s) > (1 - epsilon) * n:
            raise InfeasibleParameters(
                f"|s|={abs(s)} violates |s| <= (1-eps)n with eps={epsilon}")
        bound = Fraction(1 - Fraction(epsilon).limit_denominator(10**9), 4)
        if p1 < bound or p2 < bound:
            raise AssertionError(
                f"type probabilities {float(p1):.4f}/{float(p2):.4f} fall below "
                f"(1-eps)/4={float(bound):.4f} at n={n}, s={s}")
    return p1, p2


@dataclass(frozen=True)
class CollapsedLaw:
    """Law of the collapsed first coordinate x1' = x_1 + ... + x_{n0} for a
    uniform element of the union set, conditioned on one of the two sums.

    The pmf is sub-stochastic: its total equals the probability of the
    conditioning type, exactly in rational arithmetic.
    """

    n: int
    n0: int
    s: int
    type_tag: str
    pmf: dict[int, Fraction] = field(default_factory=dict)
    diagnostic: str | None = None

    def total(self) -> Fraction:
        return sum(self.pmf.values(), Fraction(0))

    def support(self) -> list[int]:
        return sorted(self.pmf)


def collapsed_coordinate_law(n: int, n0: int, s: int, type_tag: str) -> CollapsedLaw:
    """Exact pmf of x1' over k in [-n0, n0] with k + n0 even.

    Type 1 conditions on total sum s+1, type 2 on s-1:

        P(x1' = k) = comb(n0, (n0+k)/2) * comb(n-n0, (n-n0+target-k)/2)
                     / (count_minus + count_plus)
    """
    if type_tag not in (TYPE1, TYPE2):
        raise ValueError(f"type_tag must be {TYPE1!r} or {TYPE2!r}")
    if not 1 <= n0 <= n:
        raise ValueError(f"need 1 <= n0 <= n, got n0={n0}, n={n}")
    if not union_feasible(n, s):
        return CollapsedLaw(n=n, n0=n0, s=s, type_tag=type_tag,
                            diagnostic=f"union set empty for n={n}, s={s}")
    us = UnionSetS.from_params(n, s)
    target = s + 1 if type_tag == TYPE1 else s - 1
    pmf: dict[int, Fraction] = {}
    for k in range(-n0, n0 + 1):
        if (k + n0) % 2 != 0:
            continue
        rest = n - n0 + target - k
        if rest % 2 != 0 or rest < 0 or rest > 2 * (n - n0):
            continue
        ways = comb(n0, (n0 + k) // 2) * comb(n - n0, rest // 2)
        if ways:
            pmf[k] = Fraction(ways, us.total)
    return CollapsedLaw(n=n, n0=n0, s=s, type_tag=type_tag, pmf=pmf)


def collapse_vector(v: SignVector, n0: int) -> np.ndarray:
    """(x_1+...+x_{n0}, x_{n0+1}, ..., x_n) as an integer vector."""
    if not 1 <= n0 <= v.n:
        raise ValueError(f"need 1 <= n0 <= n, got n0={n0}")
    head = int(v.entries[:n0].sum())
    return np.concatenate([[head], v.entries[n0:]])
