"""Eigenvalues, empirical spectral distributions, and the circular measure.

A matrix with every row summing to s always has the eigenvalue s on the
all-ones vector.  Deleting the last row and column and subtracting the rank-
one matrix built from the last row preserves the remaining spectrum exactly:

    spec(M_n) = {s}  union  spec(X_{n-1} - F_{n-1}),

where X_{n-1} is the leading principal block and every row of F_{n-1} equals
(m_{n,1}, ..., m_{n,n-1}).  Working with the reduced matrix sidesteps the
deterministic outlier eigenvalue when comparing against the circular law.

Sign matrices are integer matrices, and integer matrices can be exactly
defective (nontrivial Jordan blocks); double precision then only locates the
eigenvalue cluster to machine_eps**(1/k).  Comparisons that must certify a
1e-6 match therefore fall back to an extended-precision eigensolve when the
double-precision pass cannot close the gap.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg

__all__ = [
    "EigensolverError", "SpectrumSample", "EsdFunction",
    "eigenvalues_dense", "eigenvalues_extended", "logabsdet_lu", "logdet_complex_lu",
    "normalized_esd", "esd_from_reduction", "circular_cdf",
    "grid_sup_distance", "ks_distance_to_circular",
    "spectrum_via_reduction", "pair_spectra", "reduction_match_error",
    "write_eigenvalue_csv",
]

OUTLIER_EXCLUSION_THRESHOLD = 1.1


class EigensolverError(RuntimeError):
    """Eigen/LU factorization failed to converge or inputs were invalid."""


def eigenvalues_dense(matrix: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense square matrix (complex array of length n).

    Non-convergence surfaces as EigensolverError; the result is never
    silently truncated.
    """
    a = np.asarray(matrix, dtype=complex if np.iscomplexobj(matrix) else float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigensolverError(f"square matrix required, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EigensolverError("matrix has non-finite entries")
    try:
        vals = scipy.linalg.eigvals(a)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare
        raise EigensolverError(f"eigensolver did not converge: {exc}") from exc
    if vals.shape[0] != a.shape[0]:  # pragma: no cover - defensive
        raise EigensolverError("eigensolver returned a truncated spectrum")
    return vals


def eigenvalues_extended(int_matrix: np.ndarray, dps: int = 60) -> np.ndarray:
    """Eigenvalues of an integer matrix via an extended-precision solve.

    Used as a fallback when a matrix is (near-)defective and double
    precision cannot resolve the eigenvalue cluster to the demanded
    tolerance.  Returns complex128 values accurate far beyond it.
    """
    import mpmath as mp

    a = np.asarray(int_matrix)
    with mp.workdps(dps):
        vals = mp.eig(mp.matrix(a.tolist()), left=False, right=False)
        return np.array([complex(v) for v in vals])


def logdet_complex_lu(matrix: np.ndarray) -> complex:
    """log(det) of a complex matrix from a pivoted LU factorization.

    The imaginary part is defined modulo 2*pi; callers compare determinants
    through exp() of differences.  Singular input raises EigensolverError.
    """
    a = np.asarray(matrix, dtype=complex)
    lu, piv = scipy.linalg.lu_factor(a)
    diag = np.diag(lu)
    if np.any(diag == 0):
        raise EigensolverError("matrix is numerically singular")
    swaps = int(np.sum(piv != np.arange(len(piv))))
    return complex(np.sum(np.log(diag.astype(complex))) + (swaps % 2) * 1j * math.pi)


def logabsdet_lu(matrix: np.ndarray) -> float:
    """log|det| via LU; -inf for a numerically singular matrix."""
    a = np.asarray(matrix, dtype=complex if np.iscomplexobj(matrix) else float)
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0:
        return float("-inf")
    return float(logdet)


@dataclass(frozen=True)
class SpectrumSample:
    """Spectrum of one matrix draw plus its normalization metadata."""

    eigenvalues: np.ndarray
    n: int
    s: int
    sigma: float

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, s: int,
                    check: bool = True) -> "SpectrumSample":
        a = np.asarray(matrix)
        n = a.shape[0]
        sigma = math.sqrt(max(0.0, 1.0 - (s / n) ** 2))
        vals = eigenvalues_dense(a)
        if check:
            trace_gap = abs(vals.sum() - np.trace(a))
            if trace_gap > 1e-8 * n:
                raise EigensolverError(
                    f"eigenvalue sum deviates from trace by {trace_gap:.3e}")
            if np.all(np.abs(vals) > 1e-12):
                z = np.sum(np.log(vals.astype(complex)))
                w = logdet_complex_lu(a)
                rel = abs(np.exp(z - w) - 1.0)
                if rel > 1e-6:
                    raise EigensolverError(
                        f"eigenvalue product deviates from determinant "
                        f"(relative {rel:.3e})")
        return cls(eigenvalues=vals, n=n, s=s, sigma=sigma)


class EsdFunction:
    """Empirical spectral distribution of a set of normalized eigenvalues.

    Evaluates mu(s, t) = (1/N) #{ k : Re(z_k) <= s and Im(z_k) <= t }.
    """

    def __init__(self, points: np.ndarray, excluded_outlier: complex | None = None):
        self.points = np.asarray(points, dtype=complex).ravel()
        if self.points.size == 0:
            raise ValueError("an ESD needs at least one point")
        self.excluded_outlier = excluded_outlier
        self._re = np.sort(self.points.real)
        # imaginary parts sorted within increasing real order for fast counting
        order = np.argsort(self.points.real, kind="stable")
        self._im_by_re = self.points.imag[order]

    def __len__(self) -> int:
        return self.points.size

    def __call__(self, s: float, t: float) -> float:
        k = np.searchsorted(self._re, s, side="right")
        if k == 0:
            return 0.0
        return float(np.count_nonzero(self._im_by_re[:k] <= t)) / self.points.size


def normalized_esd(matrix: np.ndarray, n: int, s: int,
                   epsilon: float = 1e-6,
                   exclude_outlier: bool | None = None) -> EsdFunction:
    """ESD of matrix / (sigma*sqrt(n)) with sigma^2 = 1 - (s/n)^2.

    exclude_outlier=None applies the default policy: drop the single point
    nearest s/(sigma*sqrt(n)) only when that target lies outside 1.1 in
    modulus, where it would otherwise distort sup-distance comparisons
    against the unit-disk law.
    """
    if abs(s) > (1 - epsilon) * n:
        raise ValueError(
            f"normalization degenerates: |s|={abs(s)} > (1-eps)*n with eps={epsilon}")
    sigma = math.sqrt(1.0 - (s / n) ** 2)
    pts = eigenvalues_dense(matrix) / (sigma * math.sqrt(n))
    target = s / (sigma * math.sqrt(n))
    excluded = None
    if exclude_outlier is None:
        exclude_outlier = abs(target) > OUTLIER_EXCLUSION_THRESHOLD
    if exclude_outlier and pts.size > 1:
        j = int(np.argmin(np.abs(pts - target)))
        excluded = complex(pts[j])
        pts = np.delete(pts, j)
    return EsdFunction(pts, excluded_outlier=excluded)


def esd_from_reduction(matrix: np.ndarray, s: int) -> EsdFunction:
    """ESD of the reduced (n-1)-spectrum, normalized by sigma*sqrt(n).

    The deterministic eigenvalue s never enters the point cloud; it is
    recorded as the excluded outlier.
    """
    n = matrix.shape[0]
    sigma = math.sqrt(1.0 - (s / n) ** 2)
    if sigma == 0.0:
        raise ValueError("sigma is zero: |s| equals n")
    _, reduced = spectrum_via_reduction(matrix)
    scale = sigma * math.sqrt(n)
    return EsdFunction(reduced / scale, excluded_outlier=complex(s / scale))


def _sqrt_segment(a: float, b: float) -> float:
    """Integral of sqrt(1-x^2) over [a, b] clipped to [-1, 1]."""
    a = min(max(a, -1.0), 1.0)
    b = min(max(b, -1.0), 1.0)
    if b <= a:
        return 0.0
    Fa = 0.5 * (a * math.sqrt(max(0.0, 1.0 - a * a)) + math.asin(a))
    Fb = 0.5 * (b * math.sqrt(max(0.0, 1.0 - b * b)) + math.asin(b))
    return Fb - Fa


def _cap_area(u: float) -> float:
    """Area of the unit-disk cap {x > u}."""
    if u >= 1.0:
        return 0.0
    if u <= -1.0:
        return math.pi
    return math.acos(u) - u * math.sqrt(1.0 - u * u)


def _corner_area(s: float, t: float) -> float:
    """Area of {x^2+y^2 <= 1, x > s, y > t}."""
    if s >= 1.0 or t >= 1.0:
        return 0.0
    if t <= -1.0:
        return _cap_area(s)
    if s <= -1.0:
        return _cap_area(t)
    ut = math.sqrt(1.0 - t * t)
    if t >= 0.0:
        a = max(s, -ut)
        if a >= ut:
            return 0.0
        return _sqrt_segment(a, ut) - t * (ut - a)
    # t < 0: full slices beyond |x| >= ut, shortened slices in between
    area = 2.0 * _sqrt_segment(max(s, -1.0), -ut)
    a = max(s, -ut)
    if a < ut:
        area += _sqrt_segment(a, ut) - t * (ut - a)
    area += 2.0 * _sqrt_segment(max(s, ut), 1.0)
    return area


def circular_cdf(s: float, t: float) -> float:
    """Uniform-disk cdf: (1/pi) * area{ |z| <= 1, Re z <= s, Im z <= t }.

    Closed-form circular-segment geometry; inclusion-exclusion against the
    two caps plus the corner region.
    """
    if s <= -1.0 or t <= -1.0:
        return 0.0
    if s >= 1.0 and t >= 1.0:
        return 1.0
    area = math.pi - _cap_area(s) - _cap_area(t) + _corner_area(s, t)
    return min(1.0, max(0.0, area / math.pi))


def grid_sup_distance(cdf_a, cdf_b, grid: int = 101,
                      lo: float = -1.5, hi: float = 1.5) -> float:
    """sup over an axis-aligned grid on [lo,hi]^2 of |cdf_a - cdf_b|."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    xs = np.linspace(lo, hi, grid)
    worst = 0.0
    for sx in xs:
        for ty in xs:
            worst = max(worst, abs(cdf_a(sx, ty) - cdf_b(sx, ty)))
    return worst


def ks_distance_to_circular(esd: EsdFunction, grid: int = 101) -> float:
    """Kolmogorov-style sup distance between an ESD and the disk law on the
    default [-1.5, 1.5]^2 grid.  Deterministic given inputs."""
    if grid < 2:
        raise ValueError("grid must be at least 2")
    xs = np.linspace(-1.5, 1.5, grid)
    # vectorized empirical counts: points sorted by real part
    re = np.sort(esd.points.real)
    order = np.argsort(esd.points.real, kind="stable")
    im = esd.points.imag[order]
    npts = esd.points.size
    worst = 0.0
    for sx in xs:
        k = np.searchsorted(re, sx, side="right")
        if k == 0:
            emp = np.zeros_like(xs)
        else:
            im_sorted = np.sort(im[:k])
            emp = np.searchsorted(im_sorted, xs, side="right") / npts
        for ty, e in zip(xs, emp):
            worst = max(worst, abs(e - circular_cdf(sx, ty)))
    return worst


def spectrum_via_reduction(matrix: np.ndarray) -> tuple[int, np.ndarray]:
    """(s, spec(X_{n-1} - F_{n-1})) for a matrix with constant row sums s.

    Rejects input whose row sums are not all identical.  For n = 1 the
    reduced spectrum is empty.
    """
    a = np.asarray(matrix)
    n = a.shape[0]
    sums = a.sum(axis=1)
    if not np.all(sums == sums[0]):
        raise ValueError("rows do not share a common sum; reduction undefined")
    s = int(round(float(sums[0])))
    if n == 1:
        return s, np.array([], dtype=complex)
    X = a[: n - 1, : n - 1]
    F = np.tile(a[n - 1, : n - 1], (n - 1, 1))
    return s, eigenvalues_dense(X - F)


def eigenvalue_s_distance(matrix: np.ndarray, tol: float = 1e-8) -> tuple[int, float, bool]:
    """(s, min |lambda - s|, used_extended) for a constant-row-sum matrix.

    The eigenvalue s can be part of a multiple cluster, where double
    precision resolves it only to ~sqrt(machine eps); integer matrices are
    then re-solved in extended precision before the distance is reported.
    """
    a = np.asarray(matrix)
    sums = a.sum(axis=1)
    if not np.all(sums == sums[0]):
        raise ValueError("rows do not share a common sum")
    s = int(round(float(sums[0])))
    dist = float(np.min(np.abs(eigenvalues_dense(a) - s)))
    if dist <= tol or not np.all(a == np.round(a)):
        return s, dist, False
    vals = eigenvalues_extended(a.astype(np.int64))
    return s, float(np.min(np.abs(vals - s))), True


def pair_spectra(a: np.ndarray, b: np.ndarray) -> float:
    """Max pairing error under greedy nearest-neighbor multiset matching.

    Matches in order of decreasing modulus so dominant eigenvalues pair
    first; O(n^2), fine at experiment scale.
    """
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel().copy()
    if a.size != b.size:
        raise ValueError(f"spectra differ in size: {a.size} vs {b.size}")
    available = np.ones(b.size, dtype=bool)
    worst = 0.0
    for z in sorted(a, key=abs, reverse=True):
        idx = np.where(available)[0]
        dists = np.abs(b[idx] - z)
        j = idx[int(np.argmin(dists))]
        available[j] = False
        worst = max(worst, float(np.min(dists)))
    return worst


def reduction_match_error(matrix: np.ndarray, tol: float = 1e-6) -> tuple[float, bool]:
    """Pairing error between spec(M) and {s} union the reduced spectrum.

    Runs in double precision first; if the error cannot be certified below
    tol (defective integer matrices cluster eigenvalues at machine
    eps**(1/k)), both sides are recomputed in extended precision.  Returns
    (error, used_extended_precision).
    """
    a = np.asarray(matrix)
    s, reduced = spectrum_via_reduction(a)
    full = eigenvalues_dense(a)
    union = np.concatenate([[complex(s)], reduced])
    err = pair_spectra(full, union)
    if err <= tol:
        return err, False
    if not np.all(a == np.round(a)):
        return err, False
    n = a.shape[0]
    full_hp = eigenvalues_extended(a.astype(np.int64))
    X = a[: n - 1, : n - 1]
    F = np.tile(a[n - 1, : n - 1], (n - 1, 1))
    reduced_hp = eigenvalues_extended((X - F).astype(np.int64))
    union_hp = np.concatenate([[complex(s)], reduced_hp])
    return pair_spectra(full_hp, union_hp), True


def write_eigenvalue_csv(path: str | Path, points: np.ndarray) -> Path:
    """Two-column CSV (re, im) with header, one row per eigenvalue."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im"])
        for z in np.asarray(points, dtype=complex).ravel():
            writer.writerow([repr(float(z.real)), repr(float(z.imag))])
    return path
