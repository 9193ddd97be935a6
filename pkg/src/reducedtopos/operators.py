"""Finite-dimensional operator toolkit.

Matrices are plain complex numpy arrays. Projections and density matrices are
validated on the way in; everything downstream treats them as immutable.
"""
from dataclasses import dataclass

import numpy as np

from . import tolerance
from .errors import DimMismatch, NonCommuting, NotADensityMatrix, NotAProjection, NotHermitian


def as_matrix(a):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def matrix_from_pairs(rows):
    """Build a complex matrix from row-major ``[[ [re, im], ... ], ...]`` data."""
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DimMismatch("expected rows of [re, im] pairs")
    return as_matrix(arr[..., 0] + 1j * arr[..., 1])


def matrix_to_pairs(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _check_dims(*ms):
    dims = {m.shape for m in ms}
    if len(dims) != 1:
        raise DimMismatch(f"dimension mismatch: {sorted(dims)}")


def dist(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def close(a, b):
    return dist(a, b) <= tolerance.eps()


def is_hermitian(a):
    a = np.asarray(a)
    return dist(a, a.conj().T) <= tolerance.eps()


def commute(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return dist(a @ b, b @ a) <= tolerance.eps()


def is_projection(p):
    p = np.asarray(p)
    return is_hermitian(p) and dist(p @ p, p) <= tolerance.eps()


def as_projection(p):
    p = as_matrix(p)
    if not is_projection(p):
        raise NotAProjection("matrix is not an orthogonal projection")
    return p


def rank(p):
    return int(round(float(np.trace(p).real)))


def identity(dim):
    return np.eye(dim, dtype=complex)


def zeros(dim):
    return np.zeros((dim, dim), dtype=complex)


def ket_projection(vec):
    v = np.asarray(vec, dtype=complex).reshape(-1)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("zero vector")
    v = v / n
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: tuple
    projections: tuple

    def reconstruct(self):
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projections))


def spectral_decompose(a):
    """Eigenvalues ascending, eigenvalues within epsilon merged into one projection."""
    a = as_matrix(a)
    if not is_hermitian(a):
        raise NotHermitian("operator is not Hermitian")
    h = (a + a.conj().T) / 2
    w, v = np.linalg.eigh(h)
    e = tolerance.eps()
    groups = []
    for i, lam in enumerate(w):
        if groups and lam - groups[-1][0][-1] <= e:
            groups[-1][0].append(lam)
            groups[-1][1].append(i)
        else:
            groups.append(([lam], [i]))
    vals, projs = [], []
    for lams, idx in groups:
        vecs = v[:, idx]
        vals.append(float(np.mean(lams)))
        projs.append(vecs @ vecs.conj().T)
    return SpectralDecomposition(tuple(vals), tuple(projs))


@dataclass(frozen=True)
class BorelSelection:
    """A set of eigenvalues, given either explicitly or as a closed interval."""

    values: tuple = None
    interval: tuple = None

    def __post_init__(self):
        if (self.values is None) == (self.interval is None):
            raise ValueError("give exactly one of values or interval")
        if self.interval is not None:
            lo, hi = self.interval
            if not lo <= hi:
                raise ValueError(f"malformed interval [{lo}, {hi}]")

    @classmethod
    def of(cls, *values):
        return cls(values=tuple(float(x) for x in values))

    @classmethod
    def between(cls, lo, hi):
        return cls(interval=(float(lo), float(hi)))

    def contains(self, lam):
        e = tolerance.eps()
        if self.interval is not None:
            lo, hi = self.interval
            return lo - e <= lam <= hi + e
        return any(abs(lam - x) <= e for x in self.values)


def spectral_projection(a, delta):
    """Projection onto the eigenspaces of ``a`` whose eigenvalue lies in ``delta``."""
    a = as_matrix(a)
    sd = spectral_decompose(a)
    out = zeros(a.shape[0])
    for lam, p in zip(sd.eigenvalues, sd.projections):
        if delta.contains(lam):
            out = out + p
    return out


def proj_leq(p, q):
    p, q = as_matrix(p), as_matrix(q)
    _check_dims(p, q)
    return dist(p @ q, p) <= tolerance.eps()


def _nearest_projection(m):
    h = (m + m.conj().T) / 2
    w, v = np.linalg.eigh(h)
    keep = v[:, w > 0.5]
    return keep @ keep.conj().T


def proj_meet(p, q):
    p, q = as_matrix(p), as_matrix(q)
    _check_dims(p, q)
    if not commute(p, q):
        raise NonCommuting("meet of non-commuting projections")
    return _nearest_projection(p @ q)


def proj_join(p, q):
    p, q = as_matrix(p), as_matrix(q)
    _check_dims(p, q)
    if not commute(p, q):
        raise NonCommuting("join of non-commuting projections")
    return _nearest_projection(p + q - p @ q)


def proj_complement(p):
    p = as_matrix(p)
    return identity(p.shape[0]) - p


class DensityMatrix:
    """A validated state. The matrix is copied and marked read-only."""

    __slots__ = ("matrix",)

    def __init__(self, m):
        m = as_matrix(m)
        e = tolerance.eps()
        if not is_hermitian(m):
            raise NotADensityMatrix("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1) > e:
            raise NotADensityMatrix("density matrix does not have unit trace")
        if np.linalg.eigvalsh((m + m.conj().T) / 2).min() < -e:
            raise NotADensityMatrix("density matrix is not positive")
        m = m.copy()
        m.flags.writeable = False
        self.matrix = m

    @property
    def dim(self):
        return self.matrix.shape[0]

    @classmethod
    def from_vector(cls, vec):
        return cls(ket_projection(vec))

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(identity(dim) / dim)

    @classmethod
    def random(cls, dim, rng, rank=None):
        k = dim if rank is None else rank
        g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
        m = g @ g.conj().T
        return cls(m / np.trace(m).real)

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def trace_pairing(rho, p):
    """tr(rho P), snapped onto 0 or 1 when within epsilon of either."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_matrix(rho)
    p = as_matrix(p)
    _check_dims(m, p)
    t = float(np.trace(m @ p).real)
    e = tolerance.eps()
    if abs(t) <= e:
        return 0.0
    if abs(t - 1) <= e:
        return 1.0
    return min(max(t, 0.0), 1.0)
