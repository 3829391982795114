"""Convex decompositions of states over characters, barycenters of measures
over measures, and the stochastic spectrum of positive unital maps.

At finite dimension the state space of ``C^X`` is a simplex, so a state is a
unique convex combination of point evaluations with weights
``omega(e_x)``; no limiting procedure is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .calgebra import (
    Character,
    DiagElement,
    DiagMap,
    as_state,
    check_positive_unital,
    characters,
)
from .errors import DimensionMismatch, NotAState, SpaceMismatch
from .finstoch import EPS_STOCH, FiniteSpace, ProbDist, StochMatrix
from .kernels import AtomicMeasure, eval_on_set


@dataclass(frozen=True, eq=False)
class ConvexDecomposition:
    weights: tuple[float, ...]
    characters: tuple[Character, ...]

    def __post_init__(self):
        w = tuple(float(x) for x in self.weights)
        chars = tuple(self.characters)
        if len(w) != len(chars):
            raise DimensionMismatch("one weight per character")
        if any(x < -EPS_STOCH for x in w) or abs(sum(w) - 1.0) > EPS_STOCH:
            raise NotAState("weights must form a probability vector")
        if len(set(chars)) != len(chars):
            raise NotAState("characters must be distinct")
        if len({c.space for c in chars}) > 1:
            raise SpaceMismatch("characters from different algebras")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "characters", chars)

    @property
    def space(self) -> FiniteSpace:
        return self.characters[0].space

    def is_dirac(self) -> bool:
        return len(self.characters) == 1

    def as_dict(self) -> dict[str, float]:
        return {c.label: w for c, w in zip(self.characters, self.weights)}

    def weight_vector(self) -> np.ndarray:
        v = np.zeros(self.space.size)
        for c, w in zip(self.characters, self.weights):
            v[c.point_index] += w
        return v


def decompose_state(omega, space: FiniteSpace | None = None) -> ConvexDecomposition:
    """Weights ``omega(e_x)`` on ``ev_x``; characters with zero weight are dropped."""
    p = as_state(omega, space)
    chars, weights = [], []
    for chi in characters(p.space):
        w = p.weights[chi.point_index]
        if w > 0.0:
            chars.append(chi)
            weights.append(w)
    return ConvexDecomposition(tuple(weights), tuple(chars))


def reconstruct_state(d: ConvexDecomposition) -> DiagElement:
    """Coefficients ``omega(e_x) = sum_i lambda_i chi_i(e_x)``."""
    space = d.space
    vals = []
    for x in space.labels:
        e = DiagElement.basis(space, x)
        vals.append(sum(w * chi(e) for w, chi in zip(d.weights, d.characters)))
    return DiagElement(space, vals)


@dataclass(frozen=True, eq=False)
class MeasureOverMeasures:
    components: tuple[tuple[float, AtomicMeasure], ...]

    def __post_init__(self):
        comps = tuple((float(w), mu) for w, mu in self.components)
        if not comps:
            raise NotAState("empty mixture")
        if any(w < 0 for w, _ in comps) or abs(sum(w for w, _ in comps) - 1.0) > EPS_STOCH:
            raise NotAState("mixture weights must form a probability vector")
        object.__setattr__(self, "components", comps)

    @classmethod
    def dirac(cls, mu: AtomicMeasure) -> "MeasureOverMeasures":
        return cls(((1.0, mu),))

    def integrate(self, functional) -> float:
        """``int F(mu) dOmega(mu)`` for a functional ``F`` on measures."""
        return float(sum(w * functional(mu) for w, mu in self.components))


def mix(alpha: float, a: MeasureOverMeasures, b: MeasureOverMeasures) -> MeasureOverMeasures:
    return MeasureOverMeasures(
        tuple((alpha * w, mu) for w, mu in a.components)
        + tuple(((1.0 - alpha) * w, mu) for w, mu in b.components)
    )


def barycenter(omega: MeasureOverMeasures) -> AtomicMeasure:
    """``E -> int mu(E) dOmega(mu)``, i.e. the weighted mixture of the components."""
    domains = {mu.domain for _, mu in omega.components}
    if len(domains) > 1:
        raise SpaceMismatch(f"component measures live on different spaces: {domains}")
    acc: dict[float, float] = {}
    for w, mu in omega.components:
        for x, m in zip(mu.locations.tolist(), mu.masses.tolist()):
            acc[x] = acc.get(x, 0.0) + w * m
    xs = sorted(acc)
    return AtomicMeasure(xs, [acc[x] for x in xs], domain=domains.pop())


def barycenter_on_set(omega: MeasureOverMeasures, E) -> float:
    """``int ev_E dOmega``, computed without forming the barycenter."""
    return omega.integrate(lambda mu: eval_on_set(mu, E))


def stochastic_spectrum_map(phi: DiagMap) -> dict[str, ConvexDecomposition]:
    """For each character ``ev_x`` of the codomain algebra, the decomposition of
    the pulled back state ``ev_x . phi`` over the characters of the domain
    algebra.  Keys are the labels ``x``.
    """
    check_positive_unital(phi)
    out = {}
    for chi in characters(phi.codomain_space):
        # (chi . phi)(e_y) = phi(e_y)_x
        coeffs = [chi(phi(DiagElement.basis(phi.domain_space, y))) for y in phi.domain_space.labels]
        coeffs = np.clip(np.real(coeffs), 0.0, None)
        out[chi.label] = decompose_state(ProbDist(phi.domain_space, coeffs))
    return out


def spectrum_as_matrix(phi: DiagMap) -> StochMatrix:
    """Columns of the stochastic spectrum gathered into a matrix ``X ~> Y``."""
    decs = stochastic_spectrum_map(phi)
    cols = [decs[x].weight_vector() for x in phi.codomain_space.labels]
    return StochMatrix(phi.codomain_space, phi.domain_space, np.column_stack(cols))


def defining_identity_gap(phi: DiagMap) -> float:
    """``max |int ev_b d sigma_chi - chi(phi(b))|`` over characters and basis ``b``."""
    decs = stochastic_spectrum_map(phi)
    gap = 0.0
    for chi in characters(phi.codomain_space):
        d = decs[chi.label]
        for y in phi.domain_space.labels:
            b = DiagElement.basis(phi.domain_space, y)
            lhs = sum(w * eta(b) for w, eta in zip(d.weights, d.characters))
            gap = max(gap, abs(lhs - chi(phi(b))))
    return gap


def _compose_decompositions(
    first: dict[str, ConvexDecomposition], second: dict[str, ConvexDecomposition]
) -> dict[str, dict[str, float]]:
    """Kernel composition: ``x -> sum_y first_x(y) second_y``."""
    out = {}
    for x, d in first.items():
        acc: dict[str, float] = {}
        for w, eta in zip(d.weights, d.characters):
            for z, v in second[eta.label].as_dict().items():
                acc[z] = acc.get(z, 0.0) + w * v
        out[x] = acc
    return out


def functoriality_check(phi: DiagMap, psi: DiagMap) -> float:
    """Max gap between the spectrum of ``phi . psi`` and the composition of the
    spectra of ``phi`` and ``psi``.

    ``phi: C^Y -> C^X`` and ``psi: C^Z -> C^Y``.
    """
    composite = stochastic_spectrum_map(phi.after(psi))
    composed = _compose_decompositions(stochastic_spectrum_map(phi), stochastic_spectrum_map(psi))
    gap = 0.0
    for x, d in composite.items():
        direct = d.as_dict()
        for z in psi.domain_space.labels:
            gap = max(gap, abs(direct.get(z, 0.0) - composed[x].get(z, 0.0)))
    return gap


def random_state(rng: np.random.Generator, space: FiniteSpace | int) -> ProbDist:
    space = FiniteSpace.range(space) if isinstance(space, int) else space
    w = rng.random(space.size)
    return ProbDist(space, w / w.sum())


def random_measure_over_measures(
    rng: np.random.Generator, support: Sequence[float], components: int = 3, domain=None
) -> MeasureOverMeasures:
    comps = []
    ws = rng.random(components)
    ws = ws / ws.sum()
    for w in ws:
        k = int(rng.integers(1, len(support) + 1))
        locs = rng.choice(np.asarray(support, dtype=float), size=k, replace=False)
        m = rng.random(k)
        comps.append((w, AtomicMeasure(locs, m / m.sum(), domain=domain)))
    return MeasureOverMeasures(tuple(comps))
