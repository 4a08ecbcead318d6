"""Singular-value experiments and the exact linear-algebra identities they
lean on: interlacing under row deletion, the negative second moment, and the
adjugate form of the cofactor identity.

The adjugate is computed in exact integer arithmetic for sign matrices
(fraction-free Bareiss determinants of the minors), which removes floating
cancellation from an identity whose whole point is to be exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampler import IID, MODELS, sample_row


class NonConvergenceError(RuntimeError):
    """SVD failed to converge; surfaced explicitly, never truncated."""


@dataclass(frozen=True)
class SingularSpectrum:
    """Nonincreasing singular values sigma_1 >= ... >= sigma_n >= 0."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("singular values must be nonnegative and nonincreasing")

    @property
    def smallest(self) -> float:
        return float(self.values[-1])


def singular_values(matrix: np.ndarray, check: bool = True) -> SingularSpectrum:
    """Full singular spectrum of a dense matrix.

    The squared values are checked against the squared Frobenius norm
    (relative 1e-8) as an independent consistency anchor.
    """
    a = np.asarray(matrix)
    if not np.all(np.isfinite(a)):
        raise NonConvergenceError("matrix has non-finite entries")
    try:
        vals = np.linalg.svd(a, compute_uv=False)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise NonConvergenceError(f"SVD did not converge: {exc}") from exc
    if check:
        frob2 = float(np.sum(np.abs(a) ** 2))
        gap = abs(float(np.sum(vals ** 2)) - frob2)
        if gap > 1e-8 * max(frob2, 1.0):
            raise NonConvergenceError(
                f"sum of squared singular values misses the Frobenius norm "
                f"by {gap:.3e}")
    return SingularSpectrum(values=vals)


@dataclass(frozen=True)
class TailExperimentReport:
    """Empirical tail of the least singular value over a ladder of exponents.

    hits[j] counts draws with sigma_min < n**(-a_ladder[j]); the ladder is
    evaluated on the same draws, so the hit counts are nonincreasing in the
    exponent by construction.
    """

    n: int
    s: int
    model: str
    a_ladder: tuple[float, ...]
    trials: int
    hits: tuple[int, ...]
    excluded: int
    sigma_min: tuple[float, ...]

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(h / self.trials for h in self.hits)


def least_singular_tail(n: int, s: int, F: np.ndarray | None,
                        a_exponents, trials: int,
                        rng: np.random.Generator,
                        model: str = "union",
                        gamma: float | None = None) -> TailExperimentReport:
    """Frequency of sigma_min(X + F) < n^(-A) over a ladder of A values."""
    if model not in MODELS:
        raise ValueError(f"model must be one of {MODELS}")
    if trials < 1:
        raise ValueError("trials must be at least 1")
    ladder = tuple(float(a) for a in np.atleast_1d(a_exponents))
    Fm = np.zeros((n, n)) if F is None else np.asarray(F, dtype=float)
    if gamma is not None and np.max(np.abs(Fm)) > n ** gamma:
        raise ValueError(f"|F| entries exceed n^gamma = {n ** gamma:.3g}")
    thresholds = [n ** (-a) for a in ladder]
    hits = [0] * len(ladder)
    sig = []
    excluded = 0
    for _ in range(trials):
        X = np.stack([sample_row(n, s, model, rng).entries
                      for _ in range(n)]).astype(float)
        try:
            smin = singular_values(X + Fm).smallest
        except NonConvergenceError:
            excluded += 1
            continue
        sig.append(smin)
        for j, thr in enumerate(thresholds):
            if smin < thr:
                hits[j] += 1
    done = trials - excluded
    if done == 0:
        raise NonConvergenceError("every draw failed the SVD")
    return TailExperimentReport(n=n, s=s, model=model, a_ladder=ladder,
                                trials=done, hits=tuple(hits),
                                excluded=excluded, sigma_min=tuple(sig))


@dataclass(frozen=True)
class InterlacingReport:
    ok: bool
    k: int
    max_violation: float
    first_violation: tuple[int, str] | None


def interlacing_check(A: np.ndarray, k: int, rtol: float = 1e-9) -> InterlacingReport:
    """Verify sigma_i(A) >= sigma_i(A') >= sigma_{i+k}(A) for the submatrix
    A' of the first n-k rows, within rtol * sigma_1."""
    a = np.asarray(A)
    n = a.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"need 1 <= k <= n-1, got k={k}")
    full = singular_values(a).values
    sub = singular_values(a[: n - k]).values
    tol = rtol * max(full[0], 1e-300)
    worst = 0.0
    first = None
    for i in range(n - k):
        upper_gap = sub[i] - full[i]          # violation if positive
        lower_gap = full[i + k] - sub[i]
        for gap, side in ((upper_gap, "upper"), (lower_gap, "lower")):
            if gap > worst:
                worst = gap
            if gap > tol and first is None:
                first = (i, side)
    return InterlacingReport(ok=first is None, k=k, max_violation=float(worst),
                             first_violation=first)


@dataclass(frozen=True)
class NegativeSecondMomentReport:
    lhs: float
    rhs: float
    relative_gap: float


def negative_second_moment_check(a_prime: np.ndarray) -> NegativeSecondMomentReport:
    """sum sigma_i^{-2} against the sum of inverse squared leave-one-out row
    distances, each side computed independently."""
    A = np.asarray(a_prime)
    n_rows = A.shape[0]
    if A.ndim != 2 or n_rows > A.shape[1]:
        raise ValueError("need an n' x n matrix with n' <= n")
    vals = singular_values(A).values
    if vals[-1] <= 1e-10:
        raise ValueError(f"matrix is rank deficient (sigma_min = {vals[-1]:.3e})")
    lhs = float(np.sum(vals ** (-2.0)))
    rhs = 0.0
    for i in range(n_rows):
        others = np.delete(A, i, axis=0)
        q, _ = np.linalg.qr(others.conj().T)
        resid = A[i] - q @ (q.conj().T @ A[i].conj()).conj() if np.iscomplexobj(A) \
            else A[i] - q @ (q.T @ A[i])
        dist = float(np.linalg.norm(resid))
        rhs += dist ** (-2.0)
    return NegativeSecondMomentReport(lhs=lhs, rhs=rhs,
                                      relative_gap=abs(lhs - rhs) / abs(lhs))


# ---------------------------------------------------------------------------
# exact integer determinants, adjugate, and the cofactor identity

ADJUGATE_SIZE_CAP = 10


def det_int(matrix) -> int:
    """Exact determinant of an integer matrix (fraction-free Bareiss)."""
    M = [[int(x) for x in row] for row in np.asarray(matrix)]
    n = len(M)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return 0
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
            M[i][k] = 0
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def adjugate_int(matrix) -> np.ndarray:
    """Exact adjugate of an integer matrix: adj[i][j] is the signed minor
    with row j and column i removed, so adj(X) @ X = det(X) * I exactly."""
    a = np.asarray(matrix)
    n = a.shape[0]
    if n > ADJUGATE_SIZE_CAP:
        raise ValueError(f"adjugate guarded to n <= {ADJUGATE_SIZE_CAP}")
    if n == 1:
        return np.array([[1]], dtype=object)
    rows = [[int(x) for x in row] for row in a]
    adj = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            minor = [r[:i] + r[i + 1:] for ri, r in enumerate(rows) if ri != j]
            adj[i, j] = (-1) ** (i + j) * det_int(minor)
    return adj


def cofactor_identity_check(X, a: np.ndarray) -> float:
    """Relative residual of the identity  C(X) b = det(X) a  with b = X a.

    C is the exact integer adjugate, so the only residual left is the
    floating error in forming b and the products.  Singular X is rejected.
    """
    Xi = np.asarray(X)
    n = Xi.shape[0]
    det = det_int(Xi)
    if det == 0:
        raise ValueError("X is singular; the identity needs det(X) != 0")
    adj = adjugate_int(Xi).astype(float)
    a = np.asarray(a, dtype=float)
    b = Xi.astype(float) @ a
    return float(np.linalg.norm(adj @ b - det * a) / abs(det))
