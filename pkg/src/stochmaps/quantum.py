"""Matrix algebras: density matrices, Kraus channels, Choi matrices,
spectral decompositions, measurement and unitary evolution.

Units have hbar = 1.  Kraus operators use the Schroedinger convention
``rho -> sum_i K_i rho K_i^*``; the Heisenberg dual is
``A -> sum_i K_i^* A K_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    BadProbability,
    DimensionMismatch,
    InputFormatError,
    NotADensityMatrix,
    NotAState,
    NotCompletelyPositive,
    NotHermitian,
)
from .finstoch import FiniteSpace, ProbDist

EPS_HERM = 1e-9
EPS_PSD = 1e-8
EPS_SPEC = 1e-8
CLUSTER_TOL = 1e-8

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
UP = np.array([[1, 0], [0, 0]], dtype=complex)
DOWN = np.array([[0, 0], [0, 1]], dtype=complex)
PLUS = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
MINUS = 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex)


def _cfrozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def _square(a, what: str) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {a.shape}")
    return a


def check_hermitian(a, eps: float = EPS_HERM) -> np.ndarray:
    a = _square(a, "operator")
    dev = np.max(np.abs(a - dagger(a))) if a.size else 0.0
    if dev > eps:
        raise NotHermitian(f"operator is not Hermitian (max |A - A*| = {dev:.3g})")
    return a


def matrix_to_dict(a: np.ndarray) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def matrix_from_dict(d: Mapping) -> np.ndarray:
    try:
        re = np.asarray(d["re"], dtype=float)
        im = np.asarray(d.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError, AttributeError) as e:
        raise InputFormatError(f"malformed complex matrix JSON: {e}") from e
    if re.shape != im.shape:
        raise InputFormatError("'re' and 'im' parts have different shapes")
    return re + 1j * im


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        try:
            m = check_hermitian(self.matrix)
        except NotHermitian as e:
            raise NotADensityMatrix(str(e)) from None
        m = 0.5 * (m + dagger(m))
        tr = np.trace(m).real
        if abs(tr - 1.0) > EPS_HERM:
            raise NotADensityMatrix(f"trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh(m).min()
        if lo < -EPS_PSD:
            raise NotADensityMatrix(f"negative eigenvalue {lo:.3g}")
        object.__setattr__(self, "matrix", _cfrozen(m))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, np.conj(psi)))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityMatrix":
        return cls(np.eye(dim) / dim)

    def to_dict(self) -> dict:
        return matrix_to_dict(self.matrix)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DensityMatrix":
        return cls(matrix_from_dict(d))


@dataclass(frozen=True, eq=False)
class MatrixState:
    """A linear functional on ``M_n`` stored by its values on matrix units:
    ``values[i, j] = omega(E_ij)``.
    """

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _cfrozen(_square(self.values, "state table")))

    def __call__(self, a) -> complex:
        return complex(np.sum(self.values * np.asarray(a, dtype=complex)))


def state_from_density(rho: DensityMatrix) -> MatrixState:
    # omega(E_ij) = tr(rho E_ij) = rho_ji
    return MatrixState(rho.matrix.T)


def density_from_state(omega: MatrixState) -> DensityMatrix:
    try:
        return DensityMatrix(omega.values.T)
    except NotADensityMatrix as e:
        raise NotAState(f"functional is not a state: {e}") from None


def expectation(rho: DensityMatrix, a) -> complex:
    return complex(np.trace(rho.matrix @ np.asarray(a, dtype=complex)))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    operators: tuple

    def __post_init__(self):
        ops = tuple(_cfrozen(k) for k in self.operators)
        if not ops:
            raise InputFormatError("a Kraus channel needs at least one operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ops):
            raise DimensionMismatch("Kraus operators must all share one 2-d shape")
        object.__setattr__(self, "operators", ops)

    @property
    def out_dim(self) -> int:
        return self.operators[0].shape[0]

    @property
    def in_dim(self) -> int:
        return self.operators[0].shape[1]

    def is_trace_preserving(self, eps: float = EPS_HERM) -> bool:
        """Equivalently: the Heisenberg dual is unital."""
        s = sum(dagger(k) @ k for k in self.operators)
        return bool(np.max(np.abs(s - np.eye(self.in_dim))) <= eps)

    def is_unital(self, eps: float = EPS_HERM) -> bool:
        """Schroedinger action sends the identity to the identity."""
        if self.in_dim != self.out_dim:
            return False
        s = sum(k @ dagger(k) for k in self.operators)
        return bool(np.max(np.abs(s - np.eye(self.out_dim))) <= eps)

    def then(self, other: "KrausChannel") -> "KrausChannel":
        """Apply ``self`` first, then ``other``."""
        if other.in_dim != self.out_dim:
            raise DimensionMismatch("channels are not composable")
        return KrausChannel(tuple(b @ a for b in other.operators for a in self.operators))

    def to_dict(self) -> dict:
        return {"operators": [matrix_to_dict(k) for k in self.operators]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "KrausChannel":
        try:
            ops = d["operators"]
        except (KeyError, TypeError) as e:
            raise InputFormatError(f"malformed Kraus JSON: {e}") from e
        return cls(tuple(matrix_from_dict(k) for k in ops))


def _schrodinger(K: KrausChannel, rho: np.ndarray) -> np.ndarray:
    if rho.shape != (K.in_dim, K.in_dim):
        raise DimensionMismatch(f"state of shape {rho.shape} for a channel with input dim {K.in_dim}")
    return sum(k @ rho @ dagger(k) for k in K.operators)


def apply_channel_schrodinger(K: KrausChannel, rho: DensityMatrix | np.ndarray):
    """``sum_i K_i rho K_i^*``.

    A :class:`DensityMatrix` in gives a :class:`DensityMatrix` out (which
    requires a trace-preserving channel); a raw array is mapped as is.
    """
    if isinstance(rho, DensityMatrix):
        return DensityMatrix(_schrodinger(K, rho.matrix))
    return _schrodinger(K, np.asarray(rho, dtype=complex))


def apply_channel_heisenberg(K: KrausChannel, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (K.out_dim, K.out_dim):
        raise DimensionMismatch(f"observable of shape {a.shape} for output dim {K.out_dim}")
    return sum(dagger(k) @ a @ k for k in K.operators)


def bit_flip_channel(p: float) -> KrausChannel:
    """Keep the state with probability ``p``, apply ``sigma_x`` otherwise."""
    if not 0.0 <= p <= 1.0:
        raise BadProbability(f"p must lie in [0, 1], got {p!r}")
    return KrausChannel((np.sqrt(p) * np.eye(2), np.sqrt(1.0 - p) * SIGMA_X))


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel((np.eye(dim),))


@dataclass(frozen=True, eq=False)
class ChoiMatrix:
    """``sum_ij E_ij (x) Phi(E_ij)`` with row index ``(i, a) -> i * out_dim + a``."""

    in_dim: int
    out_dim: int
    matrix: np.ndarray

    def __post_init__(self):
        m = check_hermitian(self.matrix)
        n = self.in_dim * self.out_dim
        if m.shape != (n, n):
            raise DimensionMismatch(f"Choi matrix of shape {m.shape}, expected ({n}, {n})")
        object.__setattr__(self, "matrix", _cfrozen(m))

    @property
    def dims(self) -> tuple[int, int]:
        return self.in_dim, self.out_dim

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)

    def apply(self, rho) -> np.ndarray:
        """Action of the underlying map, read off the Choi blocks."""
        rho = np.asarray(rho, dtype=complex)
        blocks = self.matrix.reshape(self.in_dim, self.out_dim, self.in_dim, self.out_dim)
        # Phi(rho) = sum_ij rho_ij Phi(E_ij)
        return np.einsum("ij,iajb->ab", rho, blocks)


def choi_of_map(phi: Callable[[np.ndarray], np.ndarray], in_dim: int, out_dim: int | None = None) -> ChoiMatrix:
    blocks = []
    for i in range(in_dim):
        row = []
        for j in range(in_dim):
            e = np.zeros((in_dim, in_dim), dtype=complex)
            e[i, j] = 1.0
            row.append(np.asarray(phi(e), dtype=complex))
        blocks.append(row)
    if out_dim is None:
        out_dim = blocks[0][0].shape[0]
    return ChoiMatrix(in_dim, out_dim, np.block(blocks))


def choi_matrix(K: KrausChannel) -> ChoiMatrix:
    return choi_of_map(lambda e: _schrodinger(K, e), K.in_dim, K.out_dim)


def transpose_map(a: np.ndarray) -> np.ndarray:
    return np.asarray(a).T


def is_completely_positive(C: ChoiMatrix, eps: float = EPS_PSD) -> bool:
    return bool(C.eigenvalues().min() >= -eps)


def kraus_from_choi(C: ChoiMatrix, eps: float = EPS_PSD) -> KrausChannel:
    w, v = np.linalg.eigh(C.matrix)
    if w.min() < -eps:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {w.min():.3g}")
    ops = []
    for lam, vec in zip(w, v.T):
        if lam > eps:
            # vec[(i, a)] = K[a, i]
            ops.append(np.sqrt(lam) * vec.reshape(C.in_dim, C.out_dim).T)
    if not ops:
        ops.append(np.zeros((C.out_dim, C.in_dim)))
    return KrausChannel(tuple(ops))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: tuple[float, ...]
    projections: tuple[np.ndarray, ...]

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projections))

    def ranks(self) -> list[int]:
        return [int(round(np.trace(p).real)) for p in self.projections]

    def apply_function(self, fn: Callable[[float], complex]) -> np.ndarray:
        """``f(A) = sum_lambda f(lambda) P_lambda``."""
        return sum(fn(lam) * p for lam, p in zip(self.eigenvalues, self.projections))


def spectral_decomposition(a, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    a = check_hermitian(a)
    a = 0.5 * (a + dagger(a))
    w, v = np.linalg.eigh(a)
    groups: list[list[int]] = [[0]]
    for k in range(1, len(w)):
        if w[k] - w[groups[-1][-1]] < cluster_tol:
            groups[-1].append(k)
        else:
            groups.append([k])
    lams, projs = [], []
    for g in groups:
        # re-orthonormalize degenerate eigenvectors against solver drift
        q, _ = np.linalg.qr(v[:, g])
        lams.append(float(np.mean(w[g])))
        projs.append(_cfrozen(q @ dagger(q)))
    return SpectralDecomposition(tuple(lams), tuple(projs))


def _eigen_labels(lams: Sequence[float]) -> tuple[str, ...]:
    labels = [format(lam + 0.0, ".12g") for lam in lams]
    if len(set(labels)) != len(labels):
        labels = [repr(float(lam)) for lam in lams]
    return tuple(labels)


@dataclass(frozen=True, eq=False)
class MeasurementMap:
    """``C^{spectrum(A)} -> M_n``, ``e_lambda -> P_lambda``."""

    spectrum: FiniteSpace
    eigenvalues: tuple[float, ...]
    projections: tuple[np.ndarray, ...]

    def __call__(self, coeffs) -> np.ndarray:
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (self.spectrum.size,):
            raise DimensionMismatch("coefficient vector does not match the spectrum")
        return sum(c * p for c, p in zip(coeffs, self.projections))

    def pullback(self, rho: DensityMatrix) -> ProbDist:
        if rho.dim != self.projections[0].shape[0]:
            raise DimensionMismatch("state and observable dimensions differ")
        p = np.array([np.trace(rho.matrix @ proj).real for proj in self.projections])
        return ProbDist(self.spectrum, p)


def measurement_map(a, cluster_tol: float = CLUSTER_TOL) -> MeasurementMap:
    sd = spectral_decomposition(a, cluster_tol)
    return MeasurementMap(FiniteSpace(_eigen_labels(sd.eigenvalues)), sd.eigenvalues, sd.projections)


def measure(a, rho: DensityMatrix | np.ndarray, cluster_tol: float = CLUSTER_TOL) -> ProbDist:
    """Outcome distribution ``p_lambda = tr(rho P_lambda)`` on the spectrum of ``a``."""
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(rho)
    return measurement_map(a, cluster_tol).pullback(rho)


def unitary(h, t: float) -> np.ndarray:
    """``exp(-i t H)`` through the spectral decomposition of ``H``."""
    return spectral_decomposition(h).apply_function(lambda lam: np.exp(-1j * t * lam))


def unitary_evolution(h, t: float, rho: DensityMatrix) -> DensityMatrix:
    u = unitary(h, t)
    return DensityMatrix(u @ rho.matrix @ dagger(u))


def _liouville_rhs(h: np.ndarray, r: np.ndarray) -> np.ndarray:
    return -1j * (h @ r - r @ h)


def liouville_step(h, rho: DensityMatrix | np.ndarray, dt: float) -> np.ndarray:
    """One classical fourth-order Runge-Kutta step of ``drho/dt = -i[H, rho]``.

    Works on raw arrays so that many steps can be chained without
    re-validating; wrap the final result in :class:`DensityMatrix`.
    """
    h = check_hermitian(h)
    r = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    k1 = _liouville_rhs(h, r)
    k2 = _liouville_rhs(h, r + 0.5 * dt * k1)
    k3 = _liouville_rhs(h, r + 0.5 * dt * k2)
    k4 = _liouville_rhs(h, r + dt * k3)
    return r + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def liouville_evolve(h, t: float, rho: DensityMatrix, steps: int) -> DensityMatrix:
    r = rho.matrix
    dt = t / steps if steps else 0.0
    for _ in range(steps):
        r = liouville_step(h, r, dt)
    return DensityMatrix(r)


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (g + dagger(g))


def random_density(rng: np.random.Generator, dim: int, rank: int | None = None) -> DensityMatrix:
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ dagger(g)
    return DensityMatrix(m / np.trace(m).real)


def random_kraus(rng: np.random.Generator, in_dim: int, out_dim: int, n_ops: int = 3) -> KrausChannel:
    """Trace-preserving channel from an isometry split into blocks."""
    g = rng.normal(size=(n_ops * out_dim, in_dim)) + 1j * rng.normal(size=(n_ops * out_dim, in_dim))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[k * out_dim:(k + 1) * out_dim, :] for k in range(n_ops)))
