"""Orthogonal projections, the distance decomposition, and its tails.

For a subspace V of dimension k and P the projection onto its complement,
the squared distance from x' + f to V splits as

    d'^2 = (n - k) + d_{f'}^2 + Y,

where f' = f + (s/n) * ones, d_{f'} = ||P f'||, and Y collects the centered
cross terms.  Under the i.i.d. skewed sign model E Y = (sigma^2 - 1)(n - k),
which vanishes exactly at s = 0, and E Y^2 <= min(k, n-k) + 4 d_{f'}^2.
Consequently d' concentrates around sqrt(n - k + d_{f'}^2): the median sits
within 3 of it and convex-Lipschitz concentration on the sign cube controls
the tail.  Two analytic curves are reported for the tail, exp(-t^2/4)
(asserted for the i.i.d. model) and 4*exp(-t^2/16) around the median (the
concentration route); for union-set rows the smallest constant C consistent
with freq <= C*sqrt(n)*exp(-t^2/4) is fitted and recorded instead of
asserting a value the analysis never pins down.

The subspace is complex.  For a real subspace the off-diagonal quadratic
term doubles (E Y^2 ~ 2*sum p_ij^2, the conjugate pairing no longer cancels)
and the second-moment bound can genuinely fail at k far from n/2, so the
default random bases here are complex Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sampler import IID, UNION_S, sample_union_S_vector

RANK_THRESHOLD = 1e-10


@dataclass(frozen=True)
class ProjectionOperator:
    """Hermitian idempotent projection onto the complement of a k-dim V."""

    P: np.ndarray
    k: int
    n: int

    def __post_init__(self):
        P = self.P
        if P.shape != (self.n, self.n):
            raise ValueError("projection matrix shape mismatch")
        if np.max(np.abs(P - P.conj().T)) > 1e-10:
            raise ValueError("projection is not Hermitian to 1e-10")
        if np.max(np.abs(P @ P - P)) > 1e-10:
            raise ValueError("projection is not idempotent to 1e-10")
        if abs(np.trace(P).real - (self.n - self.k)) > 1e-8:
            raise ValueError("trace does not equal n - k to 1e-8")


def projection_complement(basis, n: int) -> ProjectionOperator:
    """P projecting onto the orthogonal complement of span(basis) in C^n.

    The basis may be dependent or empty; k is the numerical rank at the
    1e-10 singular-value threshold.
    """
    vectors = [np.asarray(b) for b in basis]
    if not vectors:
        return ProjectionOperator(P=np.eye(n), k=0, n=n)
    B = np.column_stack(vectors)
    if B.shape[0] != n:
        raise ValueError(f"basis vectors must live in dimension {n}")
    u, svals, _ = np.linalg.svd(B, full_matrices=False)
    k = int(np.count_nonzero(svals > RANK_THRESHOLD))
    ur = u[:, :k]
    eye = np.eye(n, dtype=ur.dtype)
    P = eye - ur @ ur.conj().T
    return ProjectionOperator(P=P, k=k, n=n)


@dataclass(frozen=True)
class DistanceDecomposition:
    d_prime_sq: float
    base: float          # n - k
    d_f_prime_sq: float
    Y: float
    n: int
    k: int
    s: int

    @property
    def d_prime(self) -> float:
        return math.sqrt(max(0.0, self.d_prime_sq))

    @property
    def center(self) -> float:
        """sqrt(n - k + d_{f'}^2), the concentration center of d'."""
        return math.sqrt(self.base + self.d_f_prime_sq)

    @property
    def expected_Y_iid(self) -> float:
        """Exact E Y under the i.i.d. skewed model: (sigma^2 - 1)(n - k)."""
        sigma2 = 1.0 - (self.s / self.n) ** 2
        return (sigma2 - 1.0) * self.base


def decompose_distance(P: ProjectionOperator, x_prime, f: np.ndarray | None,
                       s: int, n: int) -> DistanceDecomposition:
    """Split d'^2 = ||P(f + x')||^2 into (n-k) + d_{f'}^2 + Y."""
    x = np.asarray(getattr(x_prime, "entries", x_prime), dtype=float)
    fv = np.zeros(n) if f is None else np.asarray(f)
    if x.shape != (n,) or fv.shape != (n,):
        raise ValueError("dimension mismatch")
    w = P.P @ (fv + x)
    d2 = float(np.real(np.vdot(w, w)))
    f_prime = fv + s / n
    pf = P.P @ f_prime
    df2 = float(np.real(np.vdot(pf, pf)))
    base = float(P.n - P.k)
    return DistanceDecomposition(d_prime_sq=d2, base=base, d_f_prime_sq=df2,
                                 Y=d2 - base - df2, n=n, k=P.k, s=s)


def complex_gaussian_basis(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    """n x k complex Gaussian matrix spanning a generic k-dim subspace."""
    if k == 0:
        return np.zeros((n, 0), dtype=complex)
    return rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))


def _iid_sign_block(rng: np.random.Generator, rows: int, n: int, s: int) -> np.ndarray:
    return np.where(rng.integers(0, 2 * n, size=(rows, n)) < n + s, 1.0, -1.0)


def _distances_sq(P: ProjectionOperator, X: np.ndarray,
                  f: np.ndarray) -> np.ndarray:
    W = (X + f) @ P.P.conj().T
    return np.einsum("ij,ij->i", W, W.conj()).real


@dataclass(frozen=True)
class MomentReport:
    samples: int
    mean_Y: float
    stderr_mean: float
    expected_mean: float
    second_moment: float
    stderr_second: float
    bound: float
    within_bound: bool


def moment_bound_check(P: ProjectionOperator, f: np.ndarray | None, s: int,
                       n: int, samples: int,
                       rng: np.random.Generator) -> MomentReport:
    """Monte Carlo first and second moments of Y against the analytic bound
    E Y^2 <= min(k, n-k) + 4 d_{f'}^2 (asserted up to four standard errors).
    """
    if samples < 10 ** 4:
        raise ValueError("need at least 1e4 samples for a stable band")
    fv = np.zeros(n) if f is None else np.asarray(f)
    f_prime = fv + s / n
    pf = P.P @ f_prime
    df2 = float(np.real(np.vdot(pf, pf)))
    base = float(P.n - P.k)
    ys = []
    block = 4096
    remaining = samples
    while remaining > 0:
        b = min(block, remaining)
        X = _iid_sign_block(rng, b, n, s)
        ys.append(_distances_sq(P, X, fv) - base - df2)
        remaining -= b
    Y = np.concatenate(ys)
    y2 = Y ** 2
    mean = float(Y.mean())
    second = float(y2.mean())
    bound = min(P.k, P.n - P.k) + 4 * df2
    stderr_second = float(y2.std(ddof=1) / math.sqrt(samples))
    sigma2 = 1.0 - (s / n) ** 2
    return MomentReport(
        samples=samples, mean_Y=mean,
        stderr_mean=float(Y.std(ddof=1) / math.sqrt(samples)),
        expected_mean=(sigma2 - 1.0) * base,
        second_moment=second, stderr_second=stderr_second,
        bound=bound, within_bound=second <= bound + 4 * stderr_second)


@dataclass(frozen=True)
class TailRow:
    t: float
    frequency: float
    iid_bound: float        # exp(-t^2/4)
    median_bound: float     # 4*exp(-t^2/16)
    asserted: bool | None   # frequency <= iid_bound, asserted for IID only


@dataclass(frozen=True)
class TailTable:
    n: int
    k: int
    s: int
    model: str
    samples: int
    center: float
    d_f_prime_sq: float
    rows: tuple[TailRow, ...]
    fitted_constant: float | None  # smallest C with freq <= C*sqrt(n)*e^{-t^2/4}

    @property
    def all_asserted_hold(self) -> bool:
        return all(r.asserted for r in self.rows if r.asserted is not None)


def talagrand_tail_experiment(n: int, k: int, s: int, f: np.ndarray | None,
                              t_ladder, samples: int,
                              model: str, rng: np.random.Generator,
                              basis: np.ndarray | None = None) -> TailTable:
    """Empirical P(|d' - sqrt(n-k+d_{f'}^2)| >= t + 3) over a t ladder.

    The subspace is spanned by the supplied basis or by k complex Gaussian
    columns drawn from rng.  The proviso k <= n - 10 is enforced; for the
    i.i.d. model every frequency is checked against exp(-t^2/4), for
    union-set rows the smallest consistent constant is fitted instead.
    """
    if k > n - 10:
        raise ValueError(f"need k <= n-10, got k={k}, n={n}")
    if samples < 10 ** 4:
        raise ValueError("need at least 1e4 samples")
    if model not in (IID, UNION_S):
        raise ValueError(f"model must be {IID!r} or {UNION_S!r}")
    if basis is None:
        basis = complex_gaussian_basis(n, k, rng)
    P = projection_complement([basis[:, j] for j in range(basis.shape[1])], n)
    fv = np.zeros(n) if f is None else np.asarray(f)
    f_prime = fv + s / n
    pf = P.P @ f_prime
    df2 = float(np.real(np.vdot(pf, pf)))
    center = math.sqrt((n - P.k) + df2)

    devs = []
    block = 4096
    remaining = samples
    while remaining > 0:
        b = min(block, remaining)
        if model == IID:
            X = _iid_sign_block(rng, b, n, s)
        else:
            X = np.stack([sample_union_S_vector(n, s, rng).entries
                          for _ in range(b)]).astype(float)
        d = np.sqrt(np.maximum(_distances_sq(P, X, fv), 0.0))
        devs.append(np.abs(d - center))
        remaining -= b
    dev = np.concatenate(devs)

    rows = []
    fitted = None
    for t in t_ladder:
        t = float(t)
        freq = float(np.count_nonzero(dev >= t + 3.0)) / samples
        iid_b = math.exp(-t * t / 4.0)
        med_b = 4.0 * math.exp(-t * t / 16.0)
        asserted = freq <= iid_b if model == IID else None
        rows.append(TailRow(t=t, frequency=freq, iid_bound=iid_b,
                            median_bound=med_b, asserted=asserted))
    if model == UNION_S:
        fitted = max((r.frequency / (math.sqrt(n) * r.iid_bound)
                      for r in rows), default=0.0)
    return TailTable(n=n, k=P.k, s=s, model=model, samples=samples,
                     center=center, d_f_prime_sq=df2, rows=tuple(rows),
                     fitted_constant=fitted)
