"""Bipartite pure and mixed states, Schmidt decomposition and entropies.

Amplitudes of a bipartite pure state are stored as a ``dim_a x dim_b``
matrix whose ``(i, j)`` entry is the amplitude of ``|i>_A |j>_B``.  The
flattened (row-major) matrix is the usual Kronecker-ordered state vector.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

NORM_TOL = 1e-12
EIG_FLOOR = 1e-10

Side = Literal["A", "B"]

UP, DOWN = 0, 1


class NormalizationError(ValueError):
    """Raised when a state or density matrix is not normalized."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureBipartiteState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes)
        if amps.ndim != 2 or amps.shape[0] < 1 or amps.shape[1] < 1:
            raise ValueError(f"amplitudes must be a non-empty matrix, got shape {amps.shape}")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > NORM_TOL:
            raise NormalizationError(f"squared norm {norm2!r} differs from 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @classmethod
    def normalized(cls, amplitudes) -> "PureBipartiteState":
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amps / norm)

    @classmethod
    def from_vector(cls, vector, dim_a: int, dim_b: int) -> "PureBipartiteState":
        return cls(np.asarray(vector, dtype=complex).reshape(dim_a, dim_b))

    @classmethod
    def product(cls, a, b) -> "PureBipartiteState":
        return cls(np.outer(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))

    @property
    def dim_a(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def dim_b(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def kron(self, other: "PureBipartiteState") -> "PureBipartiteState":
        """Joint state of two independent pairs, Alice holding both A parts."""
        return PureBipartiteState(np.kron(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"PureBipartiteState(dim_a={self.dim_a}, dim_b={self.dim_b})"


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """Nonincreasing real coefficients with the matching local bases (as columns)."""

    coefficients: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if np.any(c < 0):
            raise ValueError("Schmidt coefficients must be nonnegative")
        if np.any(np.diff(c) > NORM_TOL):
            raise ValueError("Schmidt coefficients must be nonincreasing")
        if abs(float(np.sum(c**2)) - 1.0) > NORM_TOL:
            raise NormalizationError("squared Schmidt coefficients must sum to 1")
        for name in ("basis_a", "basis_b"):
            b = np.asarray(getattr(self, name))
            if b.ndim != 2 or b.shape[1] != c.size:
                raise ValueError(f"{name} needs one column per coefficient")
            if np.max(np.abs(b.conj().T @ b - np.eye(c.size)), initial=0.0) > 1e-9:
                raise ValueError(f"{name} columns are not orthonormal")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "basis_a", _frozen(self.basis_a))
        object.__setattr__(self, "basis_b", _frozen(self.basis_b))

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.coefficients > EIG_FLOOR))

    def reconstruct(self) -> np.ndarray:
        return (self.basis_a * self.coefficients) @ self.basis_b.T


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > NORM_TOL:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(m).real
        if abs(tr - 1.0) > NORM_TOL:
            raise NormalizationError(f"density matrix trace {tr!r} differs from 1")
        if np.linalg.eigvalsh(m).min() < -EIG_FLOOR:
            raise ValueError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "matrix", _frozen(m))

    @classmethod
    def pure(cls, vector) -> "DensityMatrix":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in nonincreasing order."""
        return np.linalg.eigvalsh(self.matrix)[::-1]

    def entropy(self) -> float:
        return shannon_entropy(self.eigenvalues())


def shannon_entropy(probabilities) -> float:
    """Base-2 entropy with 0 log 0 = 0; tiny negative round-off is clamped."""
    p = np.asarray(probabilities, dtype=float)
    p = np.where(p < 0, 0.0, p)
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)) + 0.0)


def binary_entropy(x: float) -> float:
    return shannon_entropy([x, 1.0 - x])


def _block_singular_values(m: np.ndarray) -> np.ndarray:
    # Permuted block structure is common (Schmidt projection residuals, product
    # states in a Schmidt basis); singular values are the union over blocks.
    rows, cols = np.nonzero(m)
    if rows.size == 0:
        return np.zeros(0)
    ra, ca = np.unique(rows), np.unique(cols)
    if ra.size * ca.size == rows.size or ra.size == 1 or ca.size == 1:
        return np.linalg.svd(m[np.ix_(ra, ca)], compute_uv=False)
    r_idx = np.searchsorted(ra, rows)
    c_idx = np.searchsorted(ca, cols) + ra.size
    n = ra.size + ca.size
    graph = coo_matrix((np.ones(rows.size), (r_idx, c_idx)), shape=(n, n))
    ncomp, labels = connected_components(graph, directed=False)
    if ncomp == 1:
        return np.linalg.svd(m[np.ix_(ra, ca)], compute_uv=False)
    row_lab, col_lab = labels[: ra.size], labels[ra.size :]
    rcount = np.bincount(row_lab, minlength=ncomp)
    ccount = np.bincount(col_lab, minlength=ncomp)
    # 1 x 1 blocks need no SVD
    single = (rcount == 1) & (ccount == 1)
    rmask, cmask = single[row_lab], single[col_lab]
    r1 = ra[rmask][np.argsort(row_lab[rmask])]
    c1 = ca[cmask][np.argsort(col_lab[cmask])]
    out = [np.abs(m[r1, c1])]
    for comp in np.flatnonzero(~single):
        rsel = ra[row_lab == comp]
        csel = ca[col_lab == comp]
        out.append(np.linalg.svd(m[np.ix_(rsel, csel)], compute_uv=False))
    return np.concatenate(out)


def schmidt_coefficients(state: PureBipartiteState) -> np.ndarray:
    """Schmidt coefficients only, padded with zeros to ``min(dim_a, dim_b)``."""
    d = min(state.dim_a, state.dim_b)
    s = np.sort(_block_singular_values(state.amplitudes))[::-1]
    out = np.zeros(d)
    out[: min(d, s.size)] = s[:d]
    return out


def schmidt_decompose(state: PureBipartiteState) -> SchmidtForm:
    """Schmidt decomposition via the singular value decomposition.

    ``amplitudes = U diag(c) V^H`` gives ``|alpha_i> = U[:, i]`` and
    ``|beta_i> = V^H[i, :]`` (amplitudes are coefficients of |a>|b>, so no
    conjugate appears).  Equal coefficients are ordered by the
    first basis index on which the corresponding ``|alpha_i>`` has its
    largest weight.
    """
    u, s, vh = np.linalg.svd(state.amplitudes, full_matrices=False)
    s = np.clip(s, 0.0, None)
    lead = np.argmax(np.abs(u) ** 2 - 1e-12 * np.arange(u.shape[0])[:, None], axis=0)
    # group ties at 1e-12 resolution, then order each group by leading index
    keys = np.round(-s / 1e-12)
    order = np.lexsort((lead, keys))
    return SchmidtForm(s[order], u[:, order], vh[order, :].T)


def partial_trace(state: PureBipartiteState, side: Side) -> DensityMatrix:
    """Reduced density matrix of ``side`` (the other subsystem is traced out)."""
    m = state.amplitudes
    if side == "A":
        rho = m @ m.conj().T
    elif side == "B":
        rho = m.T @ m.conj()
    else:
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return DensityMatrix((rho + rho.conj().T) / 2)


def entanglement_entropy(state: PureBipartiteState) -> float:
    """Entropy of entanglement in ebits: Shannon entropy of the squared Schmidt coefficients."""
    return shannon_entropy(schmidt_coefficients(state) ** 2)


def fidelity(psi, w) -> float:
    """<psi|W|psi> for a pure input and a (possibly mixed) output."""
    if isinstance(psi, PureBipartiteState):
        psi = psi.vector
    v = np.asarray(psi, dtype=complex).reshape(-1)
    mat = w.matrix if isinstance(w, DensityMatrix) else np.asarray(w, dtype=complex)
    if mat.shape != (v.size, v.size):
        raise ValueError(f"dimension mismatch: vector {v.size}, operator {mat.shape}")
    f = float(np.real(v.conj() @ mat @ v))
    return min(max(f, 0.0), 1.0)


def max_entangled_fidelity(state: PureBipartiteState) -> float:
    """Largest overlap |<Phi|Psi>|^2 with any maximally entangled d x d state: (sum c_i)^2 / d."""
    if state.dim_a != state.dim_b:
        raise ValueError(f"state must be d x d, got {state.dim_a} x {state.dim_b}")
    c = schmidt_coefficients(state)
    return float(np.sum(c) ** 2 / state.dim_a)


def pair_state(theta: float) -> PureBipartiteState:
    """cos(theta)|up_A down_B> - sin(theta)|down_A up_B>."""
    amps = np.zeros((2, 2), dtype=complex)
    amps[UP, DOWN] = np.cos(theta)
    amps[DOWN, UP] = -np.sin(theta)
    return PureBipartiteState(amps)


def singlet() -> PureBipartiteState:
    return pair_state(np.pi / 4)


def maximally_entangled(d: int) -> PureBipartiteState:
    """sum_m |m>|m> / sqrt(d)."""
    return PureBipartiteState(np.eye(d, dtype=complex) / np.sqrt(d))


def werner_state() -> DensityMatrix:
    """I/8 + |Psi-><Psi-|/2 on two qubits."""
    s = singlet().vector
    return DensityMatrix(np.eye(4) / 8 + np.outer(s, s.conj()) / 2)


def random_state(dim_a: int, dim_b: int, rng: np.random.Generator) -> PureBipartiteState:
    m = rng.normal(size=(dim_a, dim_b)) + 1j * rng.normal(size=(dim_a, dim_b))
    return PureBipartiteState.normalized(m)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary (QR of a Ginibre matrix with the phase fix)."""
    z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph

