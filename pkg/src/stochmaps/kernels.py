"""Discretized Markov kernels on one-dimensional compact spaces.

Measures are atomic: finitely many ``(location, mass)`` pairs.  Densities only
ever appear as quadrature oracles for convergence reports.  Atoms may carry an
exact (sympy) location and mass alongside the floats; set evaluation uses the
exact values when present, which is what makes the rationals demo
meaningful.

Circle coordinates are reals modulo the circumference with representative in
``[lo, hi)``.  Pushforward merges atoms whose canonical coordinates compare
equal; near-coincident atoms are kept apart.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np
import sympy
from scipy import integrate as spi

from .errors import BadSize, BoundViolated, DimensionMismatch, GridMismatch, NotStochastic
from .finstoch import EPS_STOCH, FiniteSpace, StochMatrix, heat_matrix

QUAD_TOL = 1e-10
ORACLE_POINTS = 10_000


@dataclass(frozen=True)
class Domain:
    kind: str  # "interval" or "circle"
    lo: float
    hi: float

    def __post_init__(self):
        if self.kind not in ("interval", "circle"):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if not self.hi > self.lo:
            raise BadSize("domain needs hi > lo")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def canonical(self, x: float) -> float:
        if self.kind == "circle" and not self.lo <= x < self.hi:
            return self.lo + (x - self.lo) % self.length
        return x

    def contains(self, x: float) -> bool:
        if self.kind == "circle":
            return True
        return self.lo <= x <= self.hi


def interval(lo: float = 0.0, hi: float = 1.0) -> Domain:
    return Domain("interval", lo, hi)


def circle(lo: float = -1.0, hi: float = 1.0) -> Domain:
    return Domain("circle", lo, hi)


@dataclass(frozen=True)
class GridSpace:
    """``n`` equally spaced points.

    Interval: cell midpoints of ``n`` equal cells.  Circle: ``lo + k*h`` with
    cells centred on the points.
    """

    domain: Domain
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise BadSize(f"a grid needs at least 2 points, got {self.n}")

    @property
    def spacing(self) -> float:
        return self.domain.length / self.n

    @property
    def points(self) -> np.ndarray:
        h = self.spacing
        k = np.arange(self.n)
        if self.domain.kind == "interval":
            return self.domain.lo + (k + 0.5) * h
        return self.domain.lo + k * h

    @property
    def boundaries(self) -> np.ndarray:
        h = self.spacing
        k = np.arange(self.n + 1)
        if self.domain.kind == "interval":
            return self.domain.lo + k * h
        return self.domain.lo + (k - 0.5) * h

    def cell_of(self, x: float) -> int:
        x = self.domain.canonical(x)
        if self.domain.kind == "interval":
            k = int(math.floor((x - self.domain.lo) / self.spacing))
            return min(max(k, 0), self.n - 1)
        return int(math.floor((x - self.domain.lo) / self.spacing + 0.5)) % self.n

    def finite_space(self) -> FiniteSpace:
        return FiniteSpace(tuple(format(float(p), ".12g") for p in self.points))


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    locations: np.ndarray
    masses: np.ndarray
    exact: tuple | None = None
    domain: Domain | None = None
    exact_masses: tuple | None = None

    def __post_init__(self):
        loc = np.atleast_1d(np.asarray(self.locations, dtype=float)).copy()
        m = np.atleast_1d(np.asarray(self.masses, dtype=float)).copy()
        if loc.shape != m.shape or loc.ndim != 1:
            raise DimensionMismatch("locations and masses must be equal-length vectors")
        if np.any(m < 0):
            raise NotStochastic("atom masses must be nonnegative")
        if self.domain is not None:
            loc = np.array([self.domain.canonical(x) for x in loc])
            if not all(self.domain.contains(x) for x in loc):
                raise DimensionMismatch("atom outside its domain")
        if self.exact is not None:
            ex = tuple(sympy.sympify(e) for e in self.exact)
            if len(ex) != len(loc):
                raise DimensionMismatch("exact locations do not match atoms")
            object.__setattr__(self, "exact", ex)
        if self.exact_masses is not None:
            em = tuple(sympy.sympify(w) for w in self.exact_masses)
            if len(em) != len(m) or any(w < 0 for w in em):
                raise DimensionMismatch("exact masses do not match atoms")
            object.__setattr__(self, "exact_masses", em)
        loc.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", m)

    @classmethod
    def dirac(cls, x, domain: Domain | None = None) -> "AtomicMeasure":
        """Point mass; pass a sympy number or Fraction to keep the exact value."""
        if isinstance(x, (float, int, np.floating)) and not isinstance(x, bool):
            return cls([float(x)], [1.0], domain=domain)
        ex = sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else sympy.sympify(x)
        return cls([float(ex)], [1.0], exact=(ex,), domain=domain)

    def __len__(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    def is_probability(self, eps: float = EPS_STOCH) -> bool:
        return abs(self.total_mass - 1.0) <= eps

    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.masses.tolist()))

    def merged(self) -> "AtomicMeasure":
        """Combine atoms at identical coordinates, sorted by location."""
        acc: dict[float, float] = {}
        for x, m in zip(self.locations.tolist(), self.masses.tolist()):
            acc[x] = acc.get(x, 0.0) + m
        xs = sorted(acc)
        return AtomicMeasure(xs, [acc[x] for x in xs], domain=self.domain)

    def allclose(self, other: "AtomicMeasure", atol: float = 1e-12) -> bool:
        a, b = self.merged(), other.merged()
        return (
            len(a) == len(b)
            and np.array_equal(a.locations, b.locations)
            and np.allclose(a.masses, b.masses, rtol=0, atol=atol)
        )


def integrate(mu: AtomicMeasure, phi: Callable) -> complex | np.ndarray:
    """``sum_k mass_k * phi(location_k)``; ``phi`` may be vector valued."""
    total = 0.0
    for x, m in zip(mu.locations, mu.masses):
        total = total + m * np.asarray(phi(float(x)))
    if np.ndim(total) == 0:
        return complex(total) if np.iscomplexobj(total) else float(total)
    return total


def pushforward(f: Callable[[float], float], mu: AtomicMeasure, domain: Domain | None = None) -> AtomicMeasure:
    target = domain if domain is not None else mu.domain
    locs = [float(f(float(x))) for x in mu.locations]
    if target is not None:
        locs = [target.canonical(x) for x in locs]
    return AtomicMeasure(locs, mu.masses, domain=target).merged()


@dataclass(frozen=True, eq=False)
class GridKernel:
    """Row ``i`` is the probability measure ``mu_{x_i}`` on the codomain points."""

    domain: GridSpace
    codomain: GridSpace
    rows: np.ndarray

    def __post_init__(self):
        r = np.array(self.rows, dtype=float, copy=True)
        if r.shape != (self.domain.n, self.codomain.n):
            raise DimensionMismatch(f"rows have shape {r.shape}, expected {(self.domain.n, self.codomain.n)}")
        if np.any(r < -EPS_STOCH) or np.any(np.abs(r.sum(axis=1) - 1.0) > EPS_STOCH):
            raise NotStochastic("every kernel row must be a probability measure")
        r = np.clip(r, 0.0, None)
        r.setflags(write=False)
        object.__setattr__(self, "rows", r)

    @classmethod
    def identity(cls, grid: GridSpace) -> "GridKernel":
        return cls(grid, grid, np.eye(grid.n))

    def row(self, i: int) -> AtomicMeasure:
        return AtomicMeasure(self.codomain.points, self.rows[i], domain=self.codomain.domain)

    def row_at(self, x: float) -> AtomicMeasure:
        pts = self.domain.points
        hit = np.flatnonzero(pts == self.domain.domain.canonical(x))
        if hit.size != 1:
            raise GridMismatch(f"{x!r} is not a grid point of the kernel's domain")
        return self.row(int(hit[0]))

    def measures(self) -> list[AtomicMeasure]:
        return [self.row(i) for i in range(self.domain.n)]


def kernel_compose(nu: GridKernel, mu: GridKernel) -> GridKernel:
    """``(nu . mu)_x({z}) = integral over y of nu_y({z}) d mu_x(y)``."""
    if mu.codomain != nu.domain:
        raise GridMismatch("codomain grid of the first kernel differs from the domain grid of the second")
    rows = []
    for i in range(mu.domain.n):
        rows.append(integrate(mu.row(i), lambda y: nu.row_at(y).masses))
    return GridKernel(mu.domain, nu.codomain, np.array(rows))


def kernel_to_stoch(k: GridKernel) -> StochMatrix:
    return StochMatrix(k.domain.finite_space(), k.codomain.finite_space(), k.rows.T)


def stoch_to_kernel(f: StochMatrix, domain: GridSpace, codomain: GridSpace) -> GridKernel:
    if f.shape != (codomain.n, domain.n):
        raise GridMismatch("matrix shape does not match the grids")
    return GridKernel(domain, codomain, f.entries.T)


def heat_kernel(n: int = 20) -> GridKernel:
    """The heat stencil as a kernel on ``n`` points of the circle ``[-1, 1)``."""
    grid = GridSpace(circle(-1.0, 1.0), n)
    return stoch_to_kernel(heat_matrix(n), grid, grid)


def random_kernel(rng: np.random.Generator, domain: GridSpace, codomain: GridSpace) -> GridKernel:
    r = rng.random((domain.n, codomain.n))
    return GridKernel(domain, codomain, r / r.sum(axis=1, keepdims=True))


# --- sets -------------------------------------------------------------------


@dataclass(frozen=True)
class Interval:
    lo: object
    hi: object
    closed_lo: bool = True
    closed_hi: bool = False

    def contains(self, x) -> bool:
        above = (x >= self.lo) if self.closed_lo else (x > self.lo)
        below = (x <= self.hi) if self.closed_hi else (x < self.hi)
        return bool(above) and bool(below)

    @property
    def length(self) -> float:
        return max(float(self.hi) - float(self.lo), 0.0)


def closed(lo, hi) -> Interval:
    return Interval(lo, hi, True, True)


def open_interval(lo, hi) -> Interval:
    return Interval(lo, hi, False, False)


@dataclass(frozen=True)
class IntervalUnion:
    intervals: tuple[Interval, ...]

    def contains(self, x) -> bool:
        return any(iv.contains(x) for iv in self.intervals)

    def lebesgue_measure(self) -> float:
        """Length of the union (overlaps counted once)."""
        ivs = sorted(((float(i.lo), float(i.hi)) for i in self.intervals if i.length > 0))
        total, end = 0.0, -math.inf
        for lo, hi in ivs:
            if hi <= end:
                continue
            total += hi - max(lo, end)
            end = hi
        return total


@dataclass(frozen=True)
class RationalPoints:
    """``Q`` intersected with ``[lo, hi]``; needs exact atom locations."""

    lo: float = 0.0
    hi: float = 1.0

    def contains(self, x) -> bool:
        x = sympy.sympify(x)
        return bool(x.is_rational) and self.lo <= x <= self.hi

    def lebesgue_measure(self) -> float:
        return 0.0


@dataclass(frozen=True)
class Complement:
    inner: object
    within: Interval

    def contains(self, x) -> bool:
        return self.within.contains(x) and not self.inner.contains(x)

    def lebesgue_measure(self) -> float:
        return self.within.length - self.inner.lebesgue_measure()


def eval_on_set(mu: AtomicMeasure, E) -> float:
    """Total mass of the atoms lying in ``E``.

    ``E`` is an :class:`Interval`, :class:`IntervalUnion`, any object with a
    ``contains`` method, or a plain predicate on locations.
    """
    test = E.contains if hasattr(E, "contains") else E
    locs = mu.exact if mu.exact is not None else mu.locations.tolist()
    if mu.exact_masses is not None:
        return float(sum((m for x, m in zip(locs, mu.exact_masses) if test(x)), sympy.Integer(0)))
    return math.fsum(float(m) for x, m in zip(locs, mu.masses) if test(x))


# --- sequences --------------------------------------------------------------


def uniform_dirac_sequence(n: int) -> AtomicMeasure:
    """``(1/n) sum_{k=1}^n delta_{k/n}`` on ``[0, 1]`` with exact atoms."""
    if n < 1:
        raise BadSize("n must be at least 1")
    exact = tuple(sympy.Rational(k, n) for k in range(1, n + 1))
    return AtomicMeasure(
        [k / n for k in range(1, n + 1)],
        np.full(n, 1.0 / n),
        exact=exact,
        domain=interval(0, 1),
        exact_masses=(sympy.Rational(1, n),) * n,
    )


GAUSS_WIDTH = 100.0


def gaussian_normalizer() -> float:
    """``int_{-1}^{1} exp(-100 y^2) dy`` in closed form."""
    return math.sqrt(math.pi) / math.sqrt(GAUSS_WIDTH) * math.erf(math.sqrt(GAUSS_WIDTH))


def gaussian_density(x):
    return np.exp(-GAUSS_WIDTH * np.asarray(x) ** 2) / gaussian_normalizer()


def gaussian_dirac_approx(n: int) -> AtomicMeasure:
    """Bin masses of the normalized ``exp(-100 x^2)`` on ``[-1, 1]``, placed at
    the midpoints of ``n`` equal bins.
    """
    if n < 1:
        raise BadSize("n must be at least 1")
    f = lambda x: math.exp(-GAUSS_WIDTH * x * x)
    z, _ = spi.quad(f, -1.0, 1.0, epsabs=QUAD_TOL, epsrel=0, points=[0.0], limit=200)
    edges = [-1.0 + 2.0 * k / n for k in range(n + 1)]
    masses = []
    for a, b in zip(edges[:-1], edges[1:]):
        pts = [0.0] if a < 0.0 < b else None
        m, _ = spi.quad(f, a, b, epsabs=QUAD_TOL, epsrel=0, points=pts, limit=200)
        masses.append(m / z)
    locs = [-1.0 + (2 * k - 1) / n for k in range(1, n + 1)]
    return AtomicMeasure(locs, masses, domain=interval(-1, 1))


@dataclass(frozen=True)
class DensityLimit:
    """Limit measure with a density on ``[lo, hi]``, integrated by composite
    Simpson on ``points`` nodes.
    """

    density: Callable
    lo: float
    hi: float
    points: int = ORACLE_POINTS

    def integrate(self, phi: Callable) -> float:
        n = self.points + (1 - self.points % 2)  # Simpson wants an odd node count
        x = np.linspace(self.lo, self.hi, n)
        y = np.asarray([phi(float(t)) for t in x], dtype=float) * self.density(x)
        return float(spi.simpson(y, x=x))


def lebesgue(lo: float = 0.0, hi: float = 1.0, points: int = ORACLE_POINTS) -> DensityLimit:
    return DensityLimit(lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / (hi - lo)), lo, hi, points)


def gaussian_limit(points: int = ORACLE_POINTS) -> DensityLimit:
    return DensityLimit(gaussian_density, -1.0, 1.0, points)


def poly_tests(degree: int) -> dict[str, Callable[[float], float]]:
    return {f"x^{k}": (lambda x, k=k: x**k) for k in range(degree + 1)}


@dataclass
class ConvergenceReport:
    rows: list[tuple[int, str, float]] = field(default_factory=list)

    def final_gaps(self) -> dict[str, float]:
        last_n = max(n for n, _, _ in self.rows)
        return {t: g for n, t, g in self.rows if n == last_n}

    def max_final_gap(self) -> float:
        return max(self.final_gaps().values())

    def converged(self, tol: float) -> bool:
        return all(g <= tol for g in self.final_gaps().values())

    def verdict(self, tol: float) -> str:
        return f"converged at {tol:g}" if self.converged(tol) else f"not converged at {tol:g}"

    def table(self) -> dict[tuple[int, str], float]:
        return {(n, t): g for n, t, g in self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "test_id", "gap"])
        for n, t, g in self.rows:
            w.writerow([n, t, format(g, ".17g")])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ConvergenceReport":
        rows = list(csv.reader(text.splitlines()))
        if rows[0] != ["n", "test_id", "gap"]:
            raise ValueError("unexpected header")
        return cls([(int(n), t, float(g)) for n, t, g in rows[1:]])


def _limit_integral(limit, phi) -> float:
    if isinstance(limit, AtomicMeasure):
        return integrate(limit, phi)
    return limit.integrate(phi)


def vague_convergence_report(
    sequence: Sequence[AtomicMeasure] | Mapping[int, AtomicMeasure],
    limit,
    tests: Mapping[str, Callable] | Sequence[Callable],
) -> ConvergenceReport:
    """Gaps ``|int phi d mu_n - int phi d mu|`` for every member and test."""
    if not isinstance(tests, Mapping):
        tests = {f"phi{i}": t for i, t in enumerate(tests)}
    items = sequence.items() if isinstance(sequence, Mapping) else enumerate(sequence, start=1)
    targets = {tid: _limit_integral(limit, phi) for tid, phi in tests.items()}
    report = ConvergenceReport()
    for n, mu in items:
        for tid, phi in tests.items():
            report.rows.append((int(n), tid, float(abs(integrate(mu, phi) - targets[tid]))))
    return report


def rational_set_table(ns: Iterable[int]) -> list[tuple[int, float, float]]:
    """``(n, mu_n(Q cap [0,1]), Lebesgue(Q cap [0,1]))`` for the uniform Dirac sequence."""
    rats = RationalPoints(0, 1)
    return [(n, eval_on_set(uniform_dirac_sequence(n), rats), rats.lebesgue_measure()) for n in ns]


def rational_index(q: sympy.Rational) -> int:
    """Position of ``q`` in the enumeration 0, 1, 1/2, 1/3, 2/3, 1/4, 3/4, ...
    of the rationals in ``[0, 1]``.
    """
    p, d = int(q.p), int(q.q)
    if d == 1:
        return p
    before = 2 + sum(int(sympy.totient(k)) for k in range(2, d))
    return before + sum(1 for k in range(1, p) if math.gcd(k, d) == 1)


@dataclass
class OpenSetDemo:
    limit_point: object
    sequence: list  # exact rational points
    open_set: IntervalUnion
    rows: list[tuple[int, float, float, float, float]]  # k, x_k, delta_xk(U), delta_lim(U), max test gap


def open_set_demo(
    limit_point=sympy.sqrt(2) / 2, terms: int = 8, eps: float = 0.5, degree: int = 3
) -> OpenSetDemo:
    """Dirac masses at rational approximants of an irrational point.

    The open set ``U`` is a union of intervals of radius ``eps / 2^(i+1)``
    around each approximant, ``i`` being its index in the enumeration of the
    rationals, so ``U`` contains every approximant but not the limit.
    """
    x_inf = sympy.sympify(limit_point)
    convergents = sympy.continued_fraction_convergents(sympy.continued_fraction_iterator(x_inf))
    seq = []
    for c in convergents:
        c = sympy.Rational(c)
        if 0 < c <= 1 and c not in seq:
            seq.append(c)
        if len(seq) == terms:
            break
    eps_r = sympy.nsimplify(eps)
    ivs = []
    for q in seq:
        r = eps_r / sympy.Integer(2) ** (rational_index(q) + 1)
        ivs.append(open_interval(q - r, q + r))
    U = IntervalUnion(tuple(ivs))
    limit = AtomicMeasure.dirac(x_inf, domain=interval(0, 1))
    tests = poly_tests(degree)
    rows = []
    for k, q in enumerate(seq, start=1):
        mu = AtomicMeasure.dirac(q, domain=interval(0, 1))
        gap = max(abs(integrate(mu, phi) - integrate(limit, phi)) for phi in tests.values())
        rows.append((k, float(q), eval_on_set(mu, U), eval_on_set(limit, U), gap))
    return OpenSetDemo(x_inf, seq, U, rows)


# --- simple functions -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SimpleFunction:
    """Dyadic lower approximation ``s_n = sum_i (i M / 2^n) chi_{E_i}`` on a grid.

    ``bins[j]`` is the level index ``i`` of grid point ``j``; ``E_i`` is the
    set of grid indices with that bin.
    """

    bound: float
    level: int
    bins: np.ndarray

    @property
    def step(self) -> float:
        return self.bound / 2**self.level

    @property
    def values(self) -> np.ndarray:
        return self.bins * self.step

    def level_set(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.bins == i)

    @property
    def levels(self) -> list[tuple[float, list[tuple[int, int]]]]:
        """Non-empty ``(value, [(start, stop), ...])`` pairs with half-open index ranges."""
        out = []
        for i in np.unique(self.bins):
            idx = self.level_set(int(i))
            ranges, start = [], int(idx[0])
            for a, b in zip(idx[:-1], idx[1:]):
                if b != a + 1:
                    ranges.append((start, int(a) + 1))
                    start = int(b)
            ranges.append((start, int(idx[-1]) + 1))
            out.append((float(i * self.step), ranges))
        return out

    def refines(self, coarser: "SimpleFunction") -> bool:
        """``E_{n,i} = E_{n+1,2i} U E_{n+1,2i+1}`` for every ``i``."""
        return bool(np.all(self.bins // 2 == coarser.bins)) and self.level == coarser.level + 1


def simple_approx(phi, bound: float, level: int, points=None) -> SimpleFunction:
    """``phi`` is either an array of values on the grid or a callable
    evaluated at ``points``.
    """
    if level < 0:
        raise BadSize("level must be non-negative")
    if callable(phi):
        pts = points.points if isinstance(points, GridSpace) else np.asarray(points, dtype=float)
        vals = np.asarray([phi(float(x)) for x in pts], dtype=float)
    else:
        vals = np.asarray(phi, dtype=float)
    if np.any(vals < 0) or np.any(vals > bound):
        raise BoundViolated(f"values must lie in [0, {bound!r}]")
    step = bound / 2**level
    top = 2**level - 1
    bins = np.minimum(np.floor(vals / step), top).astype(np.int64)
    # largest i with fl(i * step) <= phi, so s_n <= phi holds in floating point
    over = bins * step > vals
    while np.any(over):
        bins[over] -= 1
        over = bins * step > vals
    under = (bins < top) & ((bins + 1) * step <= vals)
    while np.any(under):
        bins[under] += 1
        under = (bins < top) & ((bins + 1) * step <= vals)
    bins.setflags(write=False)
    return SimpleFunction(bound, level, bins)
