"""Ky Fan p-k norms, their duals, and the variational cross-check.

||A||_(p,k) = (sigma_1^p + ... + sigma_k^p)^(1/p).  Special members:
spectral = sigma_1, schatten(p) = kyfan(p, n0), trace = kyfan(1, n0).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import as_matrix, psd_power, svd
from .errors import InvalidInputError

# p beyond this behaves like the spectral norm in float64; callers get redirected
P_CAP = 1e6


@dataclass(frozen=True)
class NormSpec:
    """Which unitarily invariant norm to use.

    family is 'kyfan' or 'spectral'.  k = None means "all singular values of
    the operand" (Schatten), resolved per matrix at evaluation time.
    """

    family: str
    p: float | None = None
    k: int | None = None

    @staticmethod
    def kyfan(p, k):
        return NormSpec("kyfan", float(p), int(k))

    @staticmethod
    def spectral():
        return NormSpec("spectral")

    @staticmethod
    def schatten(p):
        return NormSpec("kyfan", float(p), None)

    @staticmethod
    def trace():
        return NormSpec("kyfan", 1.0, None)

    def resolve(self, n0):
        """Concrete (p, k) for a matrix with n0 singular values."""
        if self.family == "spectral":
            return None, 1
        if self.family != "kyfan":
            raise InvalidInputError("unknown norm family %r" % self.family)
        p = self.p
        if p is None or not np.isfinite(p) or p < 1:
            raise InvalidInputError("kyfan norm needs finite p >= 1")
        k = n0 if self.k is None else int(self.k)
        if not 1 <= k <= n0:
            raise InvalidInputError("k must lie in [1, %d], got %d" % (n0, k))
        if p > P_CAP:
            return None, k  # spectral limit; sum over top k degenerates to sigma_1
        return p, k

    def label(self):
        if self.family == "spectral":
            return "spectral"
        if self.k is None:
            return "schatten:p=%g" % self.p
        return "kyfan:p=%g,k=%d" % (self.p, self.k)


def _sigma_norm(sigma, p, k):
    # overflow-safe (sum sigma_i^p)^(1/p) on leading-axis stacks of sigma vectors
    top = sigma[..., :k]
    s1 = top[..., 0]
    if p is None:  # spectral limit
        return s1
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(s1[..., None] > 0, top / np.where(s1[..., None] > 0, s1[..., None], 1.0), 0.0)
        val = s1 * np.sum(ratios ** p, axis=-1) ** (1.0 / p)
    return np.where(s1 > 0, val, 0.0)


def norm(a, spec):
    """||a||_spec.  `a` may carry leading stack axes (..., m, n); broadcasts."""
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2:
        raise InvalidInputError("norm expects a matrix")
    n0 = min(a.shape[-2:])
    p, k = spec.resolve(n0)
    sigma = np.linalg.svd(a, compute_uv=False)
    out = _sigma_norm(sigma, p, k)
    return float(out) if a.ndim == 2 else out


def norm_of_sigma(sigma, spec):
    """Norm value from an already-computed non-increasing singular value vector."""
    sigma = np.asarray(sigma, dtype=float)
    p, k = spec.resolve(sigma.shape[-1])
    return float(_sigma_norm(sigma, p, k)) if sigma.ndim == 1 else _sigma_norm(sigma, p, k)


# ---------------------------------------------------------------------------
# dual norm
#
# By von Neumann duality the matrix dual norm reduces to the vector gauge dual
# psi*(d) = max{ <x, d> : psi(x) <= 1 } on the singular values d of G, with x
# non-negative and non-increasing.  Entries past position k are free up to x_k,
# so with w = (d_1, ..., d_{k-1}, sum_{i>=k} d_i) the problem becomes
#     max <w, y>  over  y_1 >= ... >= y_k >= 0,  sum y_i^p <= 1.
# Solved numerically: projected ascent (isotonic + radial feasibility) from the
# flat top-j vertices and the uniform vector, then an exact stationarity solve
# on the active face the ascent found.
# ---------------------------------------------------------------------------


def _pav_blocks(y):
    # pool adjacent violators of non-increase; returns [(lo, hi, mean)] partition
    out = []  # [lo, hi, mean]
    for i, v in enumerate(np.asarray(y, dtype=float)):
        out.append([i, i + 1, v])
        while len(out) > 1 and out[-2][2] < out[-1][2]:
            lo2, hi2, v2 = out.pop()
            lo1, hi1, v1 = out.pop()
            w1, w2 = hi1 - lo1, hi2 - lo2
            out.append([lo1, hi2, (v1 * w1 + v2 * w2) / (w1 + w2)])
    return [(lo, hi, v) for lo, hi, v in out]


def _isotonic_desc(y):
    # Euclidean projection onto the non-increasing non-negative cone
    z = np.empty_like(np.asarray(y, dtype=float))
    for lo, hi, v in _pav_blocks(y):
        z[lo:hi] = v
    return np.clip(z, 0.0, None)


def _gauge(y, p):
    y = np.clip(y, 0.0, None)
    m = y.max() if y.size else 0.0
    if m == 0:
        return 0.0
    return m * float(np.sum((y / m) ** p)) ** (1.0 / p)


def _face_value(w, pattern, p):
    # exact optimum over the face: y constant on each pattern block, 0 on the tail
    q = p / (p - 1.0)
    means = np.array([w[lo:hi].mean() for lo, hi in pattern])
    if np.any(means < 0) or np.any(np.diff(means) > 1e-12):
        return None
    sizes = np.array([hi - lo for lo, hi in pattern], dtype=float)
    val = float(np.sum(sizes * means ** q)) ** (1.0 / q)
    return val


def _dual_gauge(d, p, k):
    """psi*(d) for the kyfan(p,k) gauge; d non-increasing >= 0."""
    d = np.asarray(d, dtype=float)
    n = d.size
    k = min(k, n)
    if not np.any(d > 0):
        return 0.0
    w = np.concatenate([d[:k - 1], [float(np.sum(d[k - 1:]))]])
    # vertex values: flat top-j supports are exact and cover the p = 1 (LP) case
    best = 0.0
    for j in range(1, k + 1):
        best = max(best, float(np.sum(w[:j])) / j ** (1.0 / p))
    if p <= 1.0:
        return best
    # projected ascent: gradient step, isotonic restore, radial rescale
    starts = [np.ones(k) / k ** (1.0 / p)]
    for j in range(1, k + 1):
        y0 = np.zeros(k)
        y0[:j] = 1.0 / j ** (1.0 / p)
        starts.append(y0)
    best_y = None
    for y in starts:
        y = y.copy()
        step = 1.0 / max(np.max(w), 1e-300)
        for it in range(200):
            y = _isotonic_desc(y + step * w)
            g = _gauge(y, p)
            if g > 0:
                y = y / g
            step *= 0.97
        v = float(np.dot(w, y))
        if v > best:
            best, best_y = v, y
    # exact stationarity solves on candidate active faces: the face the ascent
    # detected, the pooled-violator partition of w, and the simple prefix faces
    candidates = []
    if best_y is not None:
        y = best_y
        pattern, lo = [], 0
        for i in range(1, k + 1):
            if i == k or abs(y[i] - y[i - 1]) > 1e-7 * max(y[0], 1e-300):
                if y[lo] > 1e-9 * max(y[0], 1e-300):
                    pattern.append((lo, i))
                lo = i
        if pattern:
            candidates.append(pattern)
    candidates.append([(lo, hi) for lo, hi, _ in _pav_blocks(w)])
    for j in range(1, k + 1):
        candidates.append([(0, j)])
        candidates.append([(i, i + 1) for i in range(j)])
    for pattern in candidates:
        fv = _face_value(w, pattern, p)
        if fv is not None:
            best = max(best, fv)
    return best


def dual_norm(g, spec):
    """max{ Re tr(G* X) : ||X||_spec <= 1 }, via the vector gauge dual."""
    g = as_matrix(g)
    d = svd(g).sigma
    n0 = d.size
    p, k = spec.resolve(n0)
    if p is None:  # spectral: dual gauge of the sup gauge is the full sum
        return float(np.sum(d))
    return _dual_gauge(d, p, k)


def variational_norm_check(a, p, k, trials=32, seed=0):
    """max over sampled isometries U of (Re tr(U* (A*A)^(p/2) U))^(1/p).

    The top-k right singular vectors are always included, so the returned
    value matches ||A||_(p,k) up to eigensolver accuracy; random U give
    strictly interior values.
    """
    a = as_matrix(a)
    n0 = min(a.shape)
    if not 1 <= k <= n0:
        raise InvalidInputError("k out of range")
    if not np.isfinite(p) or p < 1:
        raise InvalidInputError("p must be finite and >= 1")
    f = svd(a)
    s1 = f.sigma[0]
    if s1 == 0:
        return 0.0
    ratios = (f.sigma / s1) ** p
    rng = np.random.default_rng(seed)
    n = a.shape[1]

    def value(u):
        # tr(U* (A*A)^{p/2} U) = s1^p * sum_ij ratios_i |(Z* U)_ij|^2;
        # null-space components of U contribute nothing
        zu = f.right.conj().T @ u
        t = float(np.sum(ratios[:, None] * np.abs(zu) ** 2))
        return s1 * max(t, 0.0) ** (1.0 / p)

    best = value(f.right[:, :k])
    for _ in range(trials):
        gmat = rng.standard_normal((n, k)) + 1j * rng.standard_normal((n, k))
        u, _ = np.linalg.qr(gmat)
        best = max(best, value(u))
    return best
