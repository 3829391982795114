"""Acceptance suite: one test per criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""

import time

import numpy as np

from stochmaps import calgebra as ca
from stochmaps import choquet as ch
from stochmaps import finstoch as fs
from stochmaps import kernels as kn
from stochmaps import quantum as qu

SEED = 20240601


def _corpus(rng, trials=200, max_size=8):
    out = []
    for _ in range(trials):
        a, b, c = (int(s) for s in rng.integers(1, max_size + 1, size=3))
        out.append((fs.random_stochastic(rng, a, b), fs.random_stochastic(rng, b, c)))
    return out


def test_c01_heat_equilibration(criterion):
    t0 = time.perf_counter()
    h = fs.heat_matrix(20)
    p = fs.iterate(h, fs.ProbDist.dirac(h.domain, "0"), 100)
    dist = float(np.abs(p.weights - 1 / 20).max())
    elapsed = time.perf_counter() - t0
    ok = dist < 0.02 and elapsed < 1.0
    assert criterion(1, "heat diffusion equilibrates", ok, f"sup={dist:.4g}, {elapsed:.3f}s")


def test_c02_functor_laws(criterion):
    t0 = time.perf_counter()
    worst = 0.0
    for f, g in _corpus(np.random.default_rng(SEED)):
        lhs = ca.functor_C(fs.compose(g, f)).matrix
        rhs = ca.functor_C(f).matrix @ ca.functor_C(g).matrix
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1.0
    assert criterion(2, "contravariant functoriality", ok, f"max={worst:.3g}, {elapsed:.3f}s")


def test_c03_duality_roundtrip(criterion):
    rng = np.random.default_rng(SEED)
    worst, agree, total = 0.0, 0, 0
    for f, g in _corpus(rng):
        for m in (f, g):
            worst = max(worst, float(np.abs(ca.stochastic_spectrum_fd(ca.functor_C(m)).entries - m.entries).max()))
            total += 1
            agree += ca.is_star_homomorphism(ca.functor_C(m)) == m.is_deterministic()
    # deterministic half so both branches of the characterization are exercised
    for _ in range(200):
        X = fs.FiniteSpace.range(int(rng.integers(1, 9)))
        Y = fs.FiniteSpace.range(int(rng.integers(1, 9)))
        m = fs.from_function(fs.random_function(rng, X, Y), X, Y)
        worst = max(worst, float(np.abs(ca.stochastic_spectrum_fd(ca.functor_C(m)).entries - m.entries).max()))
        total += 1
        agree += ca.is_star_homomorphism(ca.functor_C(m)) == m.is_deterministic()
    ok = worst <= 1e-12 and agree == total
    assert criterion(3, "duality round trip and *-hom detection", ok, f"max={worst:.3g}, agree={agree}/{total}")


def test_c04_bit_flip(criterion):
    worst = 0.0
    for p in (0.0, 0.25, 0.5, 0.75, 1.0):
        out = qu.apply_channel_schrodinger(qu.bit_flip_channel(p), qu.DensityMatrix(qu.UP)).matrix
        worst = max(worst, float(np.abs(out - (p * qu.UP + (1 - p) * qu.DOWN)).max()))
    assert criterion(4, "bit flip Schrodinger action", worst <= 1e-14, f"max={worst:.3g}")


def test_c05_complete_positivity(criterion):
    flips_cp = all(qu.is_completely_positive(qu.choi_matrix(qu.bit_flip_channel(p)))
                   for p in np.linspace(0, 1, 21))
    # independent eigencheck of the transpose Choi matrix
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[2 * i + j, 2 * j + i] = 1.0
    C = qu.choi_of_map(qu.transpose_map, 2)
    lam_min = float(np.linalg.eigvalsh(C.matrix).min())
    ok = (flips_cp and np.array_equal(C.matrix, swap) and abs(lam_min + 1) <= 1e-10
          and not qu.is_completely_positive(C))
    assert criterion(5, "Choi PSD for bit flip, transpose rejected", ok, f"transpose min eig={lam_min:.12g}")


def test_c06_liouville(criterion):
    rng = np.random.default_rng(SEED)
    err = drift = 0.0
    for _ in range(10):
        h = qu.random_hermitian(rng, 3)
        rho = qu.random_density(rng, 3)
        r = rho.matrix
        for _ in range(1000):
            r = qu.liouville_step(h, r, 1e-3)
        exact = qu.unitary(h, 1.0) @ rho.matrix @ qu.dagger(qu.unitary(h, 1.0))
        err = max(err, float(np.abs(r - exact).max()))
        drift = max(drift, abs(np.trace(r) - 1), float(np.abs(r - qu.dagger(r)).max()))
    ok = err <= 1e-8 and drift < 1e-10
    assert criterion(6, "RK4 Liouville vs exact propagator", ok, f"err={err:.3g}, drift={drift:.3g}")


def test_c07_measurement_normalization(criterion):
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for trial in range(100):
        d = int(rng.integers(2, 6))
        if trial % 2:
            # degenerate spectrum from integer eigenvalues
            q, _ = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
            a = q @ np.diag(rng.integers(-1, 2, size=d).astype(float)) @ qu.dagger(q)
            a = (a + qu.dagger(a)) / 2
        else:
            a = qu.random_hermitian(rng, d)
        p = qu.measure(a, qu.random_density(rng, d))
        worst = max(worst, abs(float(p.weights.sum()) - 1), -float(p.weights.min()))
    sd = qu.spectral_decomposition(np.diag([2.0, 2.0, 5.0]))
    cluster_ok = sd.eigenvalues == (2.0, 5.0) and sd.ranks() == [2, 1]
    ok = worst <= 1e-12 and cluster_ok
    assert criterion(7, "measurement yields a distribution", ok, f"max={worst:.3g}, clusters={sd.ranks()}")


def test_c08_kernel_composition(criterion):
    rng = np.random.default_rng(SEED)
    prod = assoc = 0.0
    for _ in range(50):
        grids = [kn.GridSpace(kn.interval(), int(n)) for n in rng.integers(2, 9, size=4)]
        a, b, c = (kn.random_kernel(rng, grids[i], grids[i + 1]) for i in range(3))
        ba = kn.kernel_compose(b, a)
        want = kn.kernel_to_stoch(b).entries @ kn.kernel_to_stoch(a).entries
        prod = max(prod, float(np.abs(kn.kernel_to_stoch(ba).entries - want).max()))
        lhs = kn.kernel_compose(c, ba).rows
        rhs = kn.kernel_compose(kn.kernel_compose(c, b), a).rows
        assert lhs.shape == rhs.shape
        assert lhs.shape == (grids[0].n, grids[3].n)
        assoc = max(assoc, float(np.abs(lhs - rhs).max()))
    ok = prod <= 1e-12 and assoc <= 1e-12
    assert criterion(8, "kernel composition = matrix product", ok, f"prod={prod:.3g}, assoc={assoc:.3g}")


def test_c09_vague_convergence(criterion):
    ns = range(1, 201)
    lebesgue = kn.lebesgue()
    rep = kn.vague_convergence_report({n: kn.uniform_dirac_sequence(n) for n in ns}, lebesgue, {"x": lambda x: x})
    uni = max(abs(g - 1 / (2 * n)) for n, _, g in rep.rows)
    gauss = kn.vague_convergence_report({100: kn.gaussian_dirac_approx(100)}, kn.gaussian_limit(),
                                        kn.poly_tests(3)).max_final_gap()
    table_ok = all(a == 1.0 and b == 0.0 for _, a, b in kn.rational_set_table(range(1, 201)))
    demo = kn.open_set_demo()
    demo_ok = all(r[2] == 1.0 and r[3] == 0.0 for r in demo.rows) and demo.rows[-1][4] < demo.rows[0][4]
    assert lebesgue.points == 10_000
    ok = uni <= 1e-14 and gauss < 1e-3 and table_ok and demo_ok
    assert criterion(9, "vague convergence demos", ok,
                     f"uniform dev={uni:.3g}, gaussian gap={gauss:.3g}, sets={'1 vs 0' if table_ok and demo_ok else 'bad'}")


def test_c10_choquet(criterion):
    rng = np.random.default_rng(SEED)
    exact = all(
        np.array_equal(ch.reconstruct_state(ch.decompose_state(p)).values.real, p.weights)
        for p in (ch.random_state(rng, int(rng.integers(1, 9))) for _ in range(100))
    )
    support = np.linspace(0, 1, 17)
    affine = 0.0
    for _ in range(50):
        o1 = ch.random_measure_over_measures(rng, support)
        o2 = ch.random_measure_over_measures(rng, support)
        alpha = float(rng.random())
        lhs = ch.barycenter(ch.mix(alpha, o1, o2))
        b1, b2 = ch.barycenter(o1), ch.barycenter(o2)
        for x in support:
            mass = lambda mu: kn.eval_on_set(mu, lambda t: t == x)
            affine = max(affine, abs(mass(lhs) - alpha * mass(b1) - (1 - alpha) * mass(b2)))
    dirac = 0
    for _ in range(100):
        X = fs.FiniteSpace.range(int(rng.integers(1, 9)))
        Y = fs.FiniteSpace.range(int(rng.integers(1, 9)))
        fn = fs.random_function(rng, X, Y)
        decs = ch.stochastic_spectrum_map(ca.functor_C(fs.from_function(fn, X, Y)))
        dirac += all(d.is_dirac() and d.characters[0].label == fn[x] for x, d in decs.items())
    ok = exact and affine <= 1e-12 and dirac == 100
    assert criterion(10, "Choquet decomposition and barycenter", ok,
                     f"roundtrip exact={exact}, affine={affine:.3g}, dirac={dirac}/100")


def test_c11_simple_functions(criterion):
    rng = np.random.default_rng(SEED)
    pts = np.linspace(0, 1, 1000)
    violations = 0
    for _ in range(20):
        M = float(rng.uniform(0.5, 10))
        knots = np.concatenate(([0.0], np.sort(rng.random(8)), [1.0]))
        phi = np.interp(pts, knots, rng.uniform(0, M, knots.size))
        prev = None
        for n in range(11):
            s = kn.simple_approx(phi, M, n).values
            violations += int(np.sum(s > phi)) + int(np.sum(phi - s > M / 2**n))
            if prev is not None:
                violations += int(np.sum(prev > s))
            prev = s
    assert criterion(11, "dyadic simple-function approximation", violations == 0, f"violations={violations}")
