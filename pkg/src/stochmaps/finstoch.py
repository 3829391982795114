"""Finite probability spaces and stochastic matrices.

Convention: matrices are **column-stochastic**.  A stochastic map
``f: X ~> Y`` is stored as a ``|Y| x |X|`` array whose entry ``[y, x]`` is the
probability of landing on ``y`` when starting from ``x``; every column sums
to one.  Most Markov-chain code is row-stochastic, so transpose before
handing matrices to such libraries.

Spaces are compared by their labels, never by array index alone.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    BadSize,
    DimensionMismatch,
    InputFormatError,
    NotStochastic,
    UnknownLabel,
)

EPS_STOCH = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FiniteSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(x) for x in self.labels)
        if not labels:
            raise BadSize("a finite space needs at least one label")
        if len(set(labels)) != len(labels):
            raise InputFormatError(f"duplicate labels in {labels!r}")
        object.__setattr__(self, "labels", labels)

    @classmethod
    def range(cls, n: int) -> "FiniteSpace":
        return cls(tuple(str(i) for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label) -> int:
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise UnknownLabel(f"{label!r} is not a point of {self.labels!r}") from None


def _clean_columns(a: np.ndarray, eps: float, what: str) -> np.ndarray:
    """Clamp tiny negatives, renormalize, and reject anything else."""
    a = np.array(a, dtype=float, copy=True)
    if not np.all(np.isfinite(a)):
        raise NotStochastic(f"{what} has non-finite entries")
    if np.any(a < -eps):
        raise NotStochastic(f"{what} has entries below -{eps:g} (min {a.min():.3g})")
    sums = a.sum(axis=0)
    bad = np.abs(sums - 1.0) > eps
    if np.any(bad):
        col = int(np.argmax(bad))
        raise NotStochastic(f"{what}: column {col} sums to {float(sums[col])!r}, expected 1")
    if np.any(a < 0):
        a = np.clip(a, 0.0, None)
        a = a / a.sum(axis=0)
    return a


@dataclass(frozen=True, eq=False)
class ProbDist:
    space: FiniteSpace
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.space.size,):
            raise DimensionMismatch(
                f"{w.shape[0] if w.ndim == 1 else w.shape} weights for a space of size {self.space.size}"
            )
        w = _clean_columns(w, EPS_STOCH, "probability distribution")
        object.__setattr__(self, "weights", _frozen(w))

    @classmethod
    def uniform(cls, space: FiniteSpace) -> "ProbDist":
        return cls(space, np.full(space.size, 1.0 / space.size))

    @classmethod
    def dirac(cls, space: FiniteSpace, label) -> "ProbDist":
        w = np.zeros(space.size)
        w[space.index(label)] = 1.0
        return cls(space, w)

    def __getitem__(self, label) -> float:
        return float(self.weights[self.space.index(label)])

    def to_dict(self) -> dict:
        return {"space": list(self.space.labels), "weights": self.weights.tolist()}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ProbDist":
        try:
            space = FiniteSpace(tuple(d["space"]))
            weights = np.asarray(d["weights"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"malformed ProbDist JSON: {e}") from e
        return cls(space, weights)


@dataclass(frozen=True, eq=False)
class StochMatrix:
    """A stochastic map ``domain ~> codomain`` with entries ``[y, x]``."""

    domain: FiniteSpace
    codomain: FiniteSpace
    entries: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        shape = (self.codomain.size, self.domain.size)
        if a.shape != shape:
            raise DimensionMismatch(f"entries have shape {a.shape}, expected {shape}")
        object.__setattr__(self, "entries", _frozen(_clean_columns(a, EPS_STOCH, "stochastic matrix")))

    @classmethod
    def identity(cls, space: FiniteSpace) -> "StochMatrix":
        return cls(space, space, np.eye(space.size))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def column(self, label) -> ProbDist:
        return ProbDist(self.codomain, self.entries[:, self.domain.index(label)])

    def is_deterministic(self) -> bool:
        return bool(np.all((self.entries == 0.0) | (self.entries == 1.0)))

    def to_function(self) -> dict[str, str]:
        """The label map behind a deterministic matrix."""
        if not self.is_deterministic():
            raise NotStochastic("matrix has entries outside {0, 1}")
        rows = np.argmax(self.entries, axis=0)
        return {x: self.codomain.labels[r] for x, r in zip(self.domain.labels, rows)}

    def allclose(self, other: "StochMatrix", atol: float = 1e-12) -> bool:
        return (
            self.domain == other.domain
            and self.codomain == other.codomain
            and np.allclose(self.entries, other.entries, rtol=0.0, atol=atol)
        )

    def to_dict(self) -> dict:
        return {
            "domain": list(self.domain.labels),
            "codomain": list(self.codomain.labels),
            "entries": self.entries.tolist(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StochMatrix":
        try:
            dom = FiniteSpace(tuple(d["domain"]))
            cod = FiniteSpace(tuple(d["codomain"]))
            entries = np.asarray(d["entries"], dtype=float)
        except (KeyError, TypeError, ValueError) as e:
            raise InputFormatError(f"malformed StochMatrix JSON: {e}") from e
        return cls(dom, cod, entries)


def compose(g: StochMatrix, f: StochMatrix) -> StochMatrix:
    """``g . f``: first ``f``, then ``g``."""
    if f.codomain != g.domain:
        raise DimensionMismatch(
            f"cannot compose: codomain {f.codomain.labels} != domain {g.domain.labels}"
        )
    return StochMatrix(f.domain, g.codomain, g.entries @ f.entries)


def from_function(
    f: Mapping | Callable, domain: FiniteSpace, codomain: FiniteSpace
) -> StochMatrix:
    """Deterministic stochastic map with ``f_{yx} = 1`` iff ``y = f(x)``."""
    lookup = f.get if isinstance(f, Mapping) else f
    a = np.zeros((codomain.size, domain.size))
    for j, x in enumerate(domain.labels):
        y = lookup(x)
        if y is None:
            raise UnknownLabel(f"function undefined at {x!r}")
        a[codomain.index(y), j] = 1.0
    return StochMatrix(domain, codomain, a)


def push(f: StochMatrix, p: ProbDist) -> ProbDist:
    if p.space != f.domain:
        raise DimensionMismatch(f"distribution lives on {p.space.labels}, map on {f.domain.labels}")
    return ProbDist(f.codomain, f.entries @ p.weights)


def is_probability_preserving(
    f: Mapping | Callable, p: ProbDist, q: ProbDist, eps: float = EPS_STOCH
) -> bool:
    lookup = f.get if isinstance(f, Mapping) else f
    sums = dict.fromkeys(q.space.labels, 0.0)
    for x, px in zip(p.space.labels, p.weights):
        y = lookup(x)
        if y is None or str(y) not in sums:
            return False
        sums[str(y)] += px
    return all(abs(sums[y] - q[y]) <= eps for y in q.space.labels)


def trajectory(f: StochMatrix, p0: ProbDist, n: int) -> list[ProbDist]:
    """``[p0, f p0, ..., f^n p0]``."""
    if f.domain != f.codomain:
        raise DimensionMismatch("iteration needs an endomorphism")
    if n < 0:
        raise BadSize("number of steps must be non-negative")
    out = [p0]
    w = p0.weights
    if p0.space != f.domain:
        raise DimensionMismatch(f"distribution lives on {p0.space.labels}, map on {f.domain.labels}")
    for _ in range(n):
        w = f.entries @ w
        out.append(ProbDist(f.codomain, w))
    return out


def iterate(f: StochMatrix, p0: ProbDist, n: int) -> ProbDist:
    return trajectory(f, p0, n)[-1]


def circulant(space: FiniteSpace, offsets: Mapping[int, float]) -> StochMatrix:
    """``entries[(x + k) mod N, x] = offsets[k]``."""
    n = space.size
    a = np.zeros((n, n))
    for k, v in offsets.items():
        for x in range(n):
            a[(x + k) % n, x] += v
    return StochMatrix(space, space, a)


def random_walk_circle(n: int) -> StochMatrix:
    if n < 3:
        raise BadSize(f"random walk on a circle needs at least 3 points, got {n}")
    return circulant(FiniteSpace.range(n), {1: 0.5, -1: 0.5})


HEAT_STENCIL = {0: 0.56, 1: 0.21, -1: 0.21, 2: 0.01, -2: 0.01}


def heat_space(n: int = 20) -> FiniteSpace:
    """``n`` points ``k/(n/2)`` on ``[-1, 1)``, with 1 identified with -1."""
    half = n // 2
    return FiniteSpace(tuple(f"{k / half:g}" for k in range(-half, n - half)))


def heat_matrix(n: int = 20) -> StochMatrix:
    if n < 5:
        raise BadSize(f"heat stencil needs at least 5 points, got {n}")
    return circulant(heat_space(n), HEAT_STENCIL)


def random_stochastic(
    rng: np.random.Generator, domain: FiniteSpace | int, codomain: FiniteSpace | int
) -> StochMatrix:
    dom = FiniteSpace.range(domain) if isinstance(domain, int) else domain
    cod = FiniteSpace.range(codomain) if isinstance(codomain, int) else codomain
    a = rng.random((cod.size, dom.size))
    return StochMatrix(dom, cod, a / a.sum(axis=0))


def random_function(
    rng: np.random.Generator, domain: FiniteSpace, codomain: FiniteSpace
) -> dict[str, str]:
    picks = rng.integers(0, codomain.size, size=domain.size)
    return {x: codomain.labels[i] for x, i in zip(domain.labels, picks)}


def trajectory_csv(traj: Sequence[ProbDist], out: io.TextIOBase | None = None) -> str:
    """Header = labels, one row per step, 17 significant digits."""
    buf = out if out is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(traj[0].space.labels)
    for p in traj:
        w.writerow(format(float(v), ".17g") for v in p.weights)
    return buf.getvalue() if out is None else ""


def read_trajectory_csv(text: str | Iterable[str]) -> list[ProbDist]:
    lines = text.splitlines() if isinstance(text, str) else list(text)
    rows = list(csv.reader(lines))
    space = FiniteSpace(tuple(rows[0]))
    return [ProbDist(space, np.array([float(v) for v in r])) for r in rows[1:]]
