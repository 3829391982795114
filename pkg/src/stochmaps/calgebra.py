"""Finite-dimensional commutative C*-algebras ``C^X``.

Elements are complex vectors indexed by a :class:`FiniteSpace` with pointwise
multiplication, complex conjugation as involution and the sup norm.  Linear
maps ``C^Y -> C^X`` are stored as ``|X| x |Y|`` matrices whose column ``y`` is
the image of the basis vector ``e_y``.

The contravariant functor from stochastic matrices lives here together with
its inverse on positive unital maps, the point-evaluation characters and the
Gelfand transform.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import (
    BadSize,
    DimensionMismatch,
    InputFormatError,
    NotAState,
    NotPositive,
    NotUnital,
)
from .finstoch import EPS_STOCH, FiniteSpace, ProbDist, StochMatrix

EPS_POS = 1e-9


def _cfrozen(a) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DiagElement:
    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.space.size,):
            raise DimensionMismatch(f"{v.shape} values for a space of size {self.space.size}")
        object.__setattr__(self, "values", _cfrozen(v))

    @classmethod
    def unit(cls, space: FiniteSpace) -> "DiagElement":
        return cls(space, np.ones(space.size))

    @classmethod
    def basis(cls, space: FiniteSpace, label) -> "DiagElement":
        v = np.zeros(space.size)
        v[space.index(label)] = 1.0
        return cls(space, v)

    def _check(self, other: "DiagElement"):
        if other.space != self.space:
            raise DimensionMismatch(f"{self.space.labels} vs {other.space.labels}")

    def __add__(self, other: "DiagElement") -> "DiagElement":
        self._check(other)
        return DiagElement(self.space, self.values + other.values)

    def __sub__(self, other: "DiagElement") -> "DiagElement":
        self._check(other)
        return DiagElement(self.space, self.values - other.values)

    def __mul__(self, other) -> "DiagElement":
        if isinstance(other, DiagElement):
            self._check(other)
            return DiagElement(self.space, self.values * other.values)
        return DiagElement(self.space, self.values * complex(other))

    def __rmul__(self, scalar) -> "DiagElement":
        return DiagElement(self.space, self.values * complex(scalar))

    def star(self) -> "DiagElement":
        return DiagElement(self.space, np.conj(self.values))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def is_positive(self, eps: float = EPS_POS) -> bool:
        return bool(np.all(np.abs(self.values.imag) <= eps) and np.all(self.values.real >= -eps))

    def allclose(self, other: "DiagElement", atol: float = 1e-12) -> bool:
        return self.space == other.space and np.allclose(self.values, other.values, rtol=0, atol=atol)


def sup_norm(a: DiagElement) -> float:
    return a.sup_norm()


@dataclass(frozen=True, eq=False)
class DiagMap:
    """Linear map ``C^domain_space -> C^codomain_space``."""

    domain_space: FiniteSpace
    codomain_space: FiniteSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        shape = (self.codomain_space.size, self.domain_space.size)
        if m.shape != shape:
            raise DimensionMismatch(f"matrix has shape {m.shape}, expected {shape}")
        object.__setattr__(self, "matrix", _cfrozen(m))

    @classmethod
    def identity(cls, space: FiniteSpace) -> "DiagMap":
        return cls(space, space, np.eye(space.size))

    def __call__(self, a: DiagElement) -> DiagElement:
        if a.space != self.domain_space:
            raise DimensionMismatch(f"{a.space.labels} is not the domain {self.domain_space.labels}")
        return DiagElement(self.codomain_space, self.matrix @ a.values)

    def after(self, other: "DiagMap") -> "DiagMap":
        """``self . other``."""
        if other.codomain_space != self.domain_space:
            raise DimensionMismatch("maps are not composable")
        return DiagMap(other.domain_space, self.codomain_space, self.matrix @ other.matrix)

    def image(self, label) -> DiagElement:
        return DiagElement(self.codomain_space, self.matrix[:, self.domain_space.index(label)])

    def is_positive(self, eps: float = EPS_POS) -> bool:
        # Positive elements are nonnegative combinations of basis vectors,
        # so checking the basis images suffices.
        m = self.matrix
        return bool(np.all(np.abs(m.imag) <= eps) and np.all(m.real >= -eps))

    def is_unital(self, eps: float = EPS_POS) -> bool:
        return bool(np.all(np.abs(self.matrix.sum(axis=1) - 1.0) <= eps))

    def allclose(self, other: "DiagMap", atol: float = 1e-12) -> bool:
        return (
            self.domain_space == other.domain_space
            and self.codomain_space == other.codomain_space
            and np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)
        )

    def to_dict(self) -> dict:
        return {
            "domain": list(self.domain_space.labels),
            "codomain": list(self.codomain_space.labels),
            "matrix_re": self.matrix.real.tolist(),
            "matrix_im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DiagMap":
        try:
            dom = FiniteSpace(tuple(d["domain"]))
            cod = FiniteSpace(tuple(d["codomain"]))
            re = np.asarray(d["matrix_re"], dtype=float)
            im = np.asarray(d.get("matrix_im", np.zeros_like(re)), dtype=float)
            m = re + 1j * im
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"malformed DiagMap JSON: {e}") from e
        return cls(dom, cod, m)


def functor_C(f: StochMatrix) -> DiagMap:
    """``C^f(e_y) = sum_x f_{yx} e_x``, a positive unital map ``C^Y -> C^X``."""
    return DiagMap(f.codomain, f.domain, f.entries.T)


def check_positive_unital(phi: DiagMap, eps: float = EPS_POS) -> None:
    m = phi.matrix
    if np.any(np.abs(m.imag) > eps):
        raise NotPositive("a basis vector is sent to a non-real element")
    if np.any(m.real < -eps):
        x, y = np.unravel_index(np.argmin(m.real), m.shape)
        raise NotPositive(
            f"image of e_{phi.domain_space.labels[y]} has entry {m.real[x, y]:.3g} "
            f"at {phi.codomain_space.labels[x]!r}"
        )
    if not phi.is_unital(eps):
        raise NotUnital("the unit is not sent to the unit")


def stochastic_spectrum_fd(phi: DiagMap) -> StochMatrix:
    """Inverse of :func:`functor_C` on positive unital maps."""
    check_positive_unital(phi)
    a = phi.matrix.real.T
    if np.any(a < 0):
        a = np.clip(a, 0.0, None)
        a = a / a.sum(axis=0)
    return StochMatrix(phi.codomain_space, phi.domain_space, a)


def is_star_homomorphism(phi: DiagMap, eps: float = EPS_POS) -> bool:
    one_y = DiagElement.unit(phi.domain_space)
    if not phi(one_y).allclose(DiagElement.unit(phi.codomain_space), atol=eps):
        return False
    basis = [DiagElement.basis(phi.domain_space, y) for y in phi.domain_space.labels]
    images = [phi(e) for e in basis]
    for e, img in zip(basis, images):
        if not phi(e.star()).allclose(img.star(), atol=eps):
            return False
    for (e1, i1), (e2, i2) in itertools.product(zip(basis, images), repeat=2):
        if not phi(e1 * e2).allclose(i1 * i2, atol=eps):
            return False
    return True


@dataclass(frozen=True)
class Character:
    """Point evaluation ``ev_x`` on ``C^space``."""

    space: FiniteSpace
    point_index: int

    def __post_init__(self):
        if not 0 <= self.point_index < self.space.size:
            raise BadSize(f"point index {self.point_index} out of range")

    @property
    def label(self) -> str:
        return self.space.labels[self.point_index]

    def __call__(self, a: DiagElement) -> complex:
        if a.space != self.space:
            raise DimensionMismatch("character and element live on different spaces")
        return complex(a.values[self.point_index])

    def __repr__(self) -> str:
        return f"ev[{self.label}]"


def characters(space: FiniteSpace) -> list[Character]:
    return [Character(space, i) for i in range(space.size)]


def brute_force_characters(space: FiniteSpace) -> list[Character]:
    """Enumerate every {0,1}-valued linear functional on the basis and keep
    the unital, multiplicative ones.
    """
    n = space.size
    if n > 12:
        raise BadSize("brute-force enumeration is limited to 12 points")
    found = []
    basis = [DiagElement.basis(space, x) for x in space.labels]
    unit = DiagElement.unit(space)
    for coeffs in itertools.product((0, 1), repeat=n):
        c = np.array(coeffs, dtype=complex)

        def chi(a: DiagElement) -> complex:
            return complex(c @ a.values)

        if abs(chi(unit) - 1) > EPS_POS:
            continue
        if all(
            abs(chi(a * b) - chi(a) * chi(b)) <= EPS_POS
            for a, b in itertools.product(basis, repeat=2)
        ):
            found.append(Character(space, int(np.argmax(c.real))))
    return sorted(found, key=lambda chi: chi.point_index)


def spectrum_space(space: FiniteSpace) -> FiniteSpace:
    """The set of characters, labelled ``ev[x]``."""
    return FiniteSpace(tuple(repr(c) for c in characters(space)))


def h_map(space: FiniteSpace) -> dict[str, Character]:
    """``x -> ev_x``."""
    return {c.label: c for c in characters(space)}


def gelfand_transform(a: DiagElement) -> DiagElement:
    """``chi -> chi(a)`` as an element of ``C^{spectrum}``."""
    chars = characters(a.space)
    return DiagElement(spectrum_space(a.space), [chi(a) for chi in chars])


def gelfand_map(space: FiniteSpace) -> DiagMap:
    """The Gelfand transform as a linear map ``C^X -> C^{spectrum(X)}``."""
    spec = spectrum_space(space)
    cols = [gelfand_transform(DiagElement.basis(space, x)).values for x in space.labels]
    return DiagMap(space, spec, np.column_stack(cols))


def spectrum_map(f: StochMatrix) -> StochMatrix:
    """Transport ``f`` to the character spaces along ``h``."""
    hx = h_map(f.domain)
    hy = h_map(f.codomain)
    dom = spectrum_space(f.domain)
    cod = spectrum_space(f.codomain)
    a = np.zeros(f.shape)
    for x, chi in hx.items():
        for y, eta in hy.items():
            a[cod.index(repr(eta)), dom.index(repr(chi))] = f.entries[
                f.codomain.index(y), f.domain.index(x)
            ]
    return StochMatrix(dom, cod, a)


def as_state(omega: DiagElement | ProbDist | np.ndarray, space: FiniteSpace | None = None) -> ProbDist:
    """Validate coefficients ``omega(e_x)`` of a state on ``C^X``."""
    if isinstance(omega, ProbDist):
        return omega
    if isinstance(omega, DiagElement):
        space, v = omega.space, omega.values
    else:
        v = np.asarray(omega, dtype=complex)
        if space is None:
            space = FiniteSpace.range(v.shape[0])
    v = np.asarray(v, dtype=complex)
    if np.any(np.abs(v.imag) > EPS_POS) or np.any(v.real < -EPS_STOCH):
        raise NotAState("state coefficients must be nonnegative reals")
    if abs(v.real.sum() - 1.0) > EPS_STOCH:
        raise NotAState(f"state is not normalized: omega(1) = {v.real.sum()!r}")
    return ProbDist(space, v.real)


def pullback_state(phi: DiagMap, omega: DiagElement | ProbDist) -> DiagElement:
    """``omega . phi`` as coefficients on ``phi.domain_space``."""
    w = as_state(omega, phi.codomain_space)
    if w.space != phi.codomain_space:
        raise DimensionMismatch("state does not live on the codomain of the map")
    return DiagElement(phi.domain_space, phi.matrix.T @ w.weights)


def linear_functional(coeffs: DiagElement) -> Callable[[DiagElement], complex]:
    return lambda a: complex(coeffs.values @ a.values)
