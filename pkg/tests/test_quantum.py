import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stochmaps.errors import (
    BadProbability,
    DimensionMismatch,
    NotADensityMatrix,
    NotAState,
    NotCompletelyPositive,
    NotHermitian,
)
from stochmaps.quantum import (
    DOWN,
    MINUS,
    PLUS,
    SIGMA_X,
    SIGMA_Z,
    UP,
    ChoiMatrix,
    DensityMatrix,
    KrausChannel,
    MatrixState,
    apply_channel_heisenberg,
    apply_channel_schrodinger,
    bit_flip_channel,
    choi_matrix,
    choi_of_map,
    dagger,
    density_from_state,
    identity_channel,
    is_completely_positive,
    kraus_from_choi,
    liouville_evolve,
    liouville_step,
    measure,
    measurement_map,
    random_density,
    random_hermitian,
    random_kraus,
    spectral_decomposition,
    state_from_density,
    transpose_map,
    unitary_evolution,
)


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def test_density_validation():
    with pytest.raises(NotADensityMatrix):
        DensityMatrix([[1, 1], [0, 0]])
    with pytest.raises(NotADensityMatrix):
        DensityMatrix(np.eye(2))
    with pytest.raises(NotADensityMatrix):
        DensityMatrix([[1.5, 0], [0, -0.5]])


def test_state_from_density_values():
    w = state_from_density(DensityMatrix.maximally_mixed(2))
    assert abs(w(SIGMA_Z)) < 1e-15
    w = state_from_density(DensityMatrix(np.diag([0.3, 0.7])))
    E11 = np.array([[1, 0], [0, 0]])
    assert abs(w(E11) - 0.3) < 1e-15


def test_state_density_roundtrip(rng):
    worst = 0.0
    for _ in range(50):
        rho = random_density(rng, 3)
        back = density_from_state(state_from_density(rho))
        worst = max(worst, np.abs(back.matrix - rho.matrix).max())
        a = random_hermitian(rng, 3)
        assert abs(state_from_density(rho)(a) - np.trace(rho.matrix @ a)) < 1e-12
    assert worst < 1e-12


def test_density_from_bad_state():
    with pytest.raises(NotAState):
        density_from_state(MatrixState(np.diag([1.0, 1.0])))


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_bit_flip_on_basis_states(p):
    K = bit_flip_channel(p)
    up = apply_channel_schrodinger(K, DensityMatrix(UP)).matrix
    down = apply_channel_schrodinger(K, DensityMatrix(DOWN)).matrix
    np.testing.assert_allclose(up, p * UP + (1 - p) * DOWN, rtol=0, atol=1e-14)
    np.testing.assert_allclose(down, (1 - p) * UP + p * DOWN, rtol=0, atol=1e-14)
    assert K.is_trace_preserving() and K.is_unital()


def test_bit_flip_special_cases():
    rho = DensityMatrix(PLUS)
    np.testing.assert_allclose(apply_channel_schrodinger(bit_flip_channel(1.0), rho).matrix, PLUS, atol=1e-15)
    np.testing.assert_allclose(apply_channel_schrodinger(bit_flip_channel(0.0), DensityMatrix(UP)).matrix, DOWN)
    half = bit_flip_channel(0.5)
    for basis in (UP, DOWN):
        np.testing.assert_allclose(apply_channel_schrodinger(half, DensityMatrix(basis)).matrix, np.eye(2) / 2)
    with pytest.raises(BadProbability):
        bit_flip_channel(1.5)


def test_bit_flip_not_star_homomorphism():
    # Heisenberg dual fails multiplicativity on sigma_z for p in (0, 1)
    K = bit_flip_channel(0.75)
    lhs = apply_channel_heisenberg(K, SIGMA_Z @ SIGMA_Z)
    rhs = apply_channel_heisenberg(K, SIGMA_Z) @ apply_channel_heisenberg(K, SIGMA_Z)
    assert np.abs(lhs - rhs).max() > 0.1


def test_identity_channel(rng):
    rho = random_density(rng, 3)
    np.testing.assert_allclose(apply_channel_schrodinger(identity_channel(3), rho).matrix, rho.matrix, atol=1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        apply_channel_schrodinger(bit_flip_channel(0.5), DensityMatrix.maximally_mixed(3))


def test_heisenberg_schrodinger_duality(rng):
    for _ in range(50):
        din, dout = (int(x) for x in rng.integers(1, 5, size=2))
        K = random_kraus(rng, din, dout, n_ops=int(rng.integers(max(1, -(-din // dout)), 5)))
        rho = random_density(rng, din)
        a = random_hermitian(rng, dout)
        lhs = np.trace(rho.matrix @ apply_channel_heisenberg(K, a))
        rhs = np.trace(apply_channel_schrodinger(K, rho).matrix @ a)
        assert abs(lhs - rhs) < 1e-12


def test_trace_preservation_iff_unital_dual(rng):
    K = random_kraus(rng, 3, 2, n_ops=2)
    assert K.is_trace_preserving()
    np.testing.assert_allclose(apply_channel_heisenberg(K, np.eye(2)), np.eye(3), atol=1e-12)
    rho = random_density(rng, 3)
    assert abs(np.trace(apply_channel_schrodinger(K, rho).matrix) - 1) < 1e-12
    lossy = KrausChannel((0.5 * np.eye(2),))
    assert not lossy.is_trace_preserving()
    with pytest.raises(NotADensityMatrix):
        apply_channel_schrodinger(lossy, DensityMatrix(UP))


def test_choi_identity_channel():
    C = choi_matrix(identity_channel(2))
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    np.testing.assert_allclose(C.matrix, 2 * np.outer(bell, bell), atol=1e-15)
    np.testing.assert_allclose(np.sort(C.eigenvalues()), [0, 0, 0, 2], atol=1e-12)


def test_choi_transpose_is_swap():
    C = choi_of_map(transpose_map, 2)
    swap = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            swap[i * 2 + j, j * 2 + i] = 1
    np.testing.assert_array_equal(C.matrix, swap)
    assert abs(C.eigenvalues().min() + 1) < 1e-10
    assert not is_completely_positive(C)
    with pytest.raises(NotCompletelyPositive):
        kraus_from_choi(C)


def test_transpose_is_positive_but_not_cp(rng):
    for _ in range(20):
        rho = random_density(rng, 2)
        assert np.linalg.eigvalsh(transpose_map(rho.matrix)).min() > -1e-12


@pytest.mark.parametrize("p", [0.0, 0.25, 0.5, 0.75, 1.0])
def test_bit_flip_choi_psd(p):
    assert is_completely_positive(choi_matrix(bit_flip_channel(p)))


def test_kraus_from_choi_reproduces_channel(rng):
    K = bit_flip_channel(0.75)
    K2 = kraus_from_choi(choi_matrix(K))
    assert len(K2.operators) == 2
    for _ in range(20):
        rho = random_density(rng, 2)
        a = apply_channel_schrodinger(K, rho).matrix
        b = apply_channel_schrodinger(K2, rho).matrix
        assert np.abs(a - b).max() < 1e-10


def test_kraus_from_choi_rectangular(rng):
    K = random_kraus(rng, 3, 2, n_ops=3)
    C = choi_matrix(K)
    K2 = kraus_from_choi(C)
    assert (K2.in_dim, K2.out_dim) == (3, 2)
    rho = random_density(rng, 3)
    np.testing.assert_allclose(C.apply(rho.matrix), apply_channel_schrodinger(K, rho).matrix, atol=1e-12)
    np.testing.assert_allclose(
        apply_channel_schrodinger(K2, rho).matrix, apply_channel_schrodinger(K, rho).matrix, atol=1e-10
    )


def test_cp_closed_under_composition(rng):
    for _ in range(10):
        A = random_kraus(rng, 2, 3)
        B = random_kraus(rng, 3, 2)
        assert is_completely_positive(choi_matrix(A.then(B)))


def test_choi_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        ChoiMatrix(1, 2, [[0, 1], [0, 0]])


def test_spectral_sigma_x():
    sd = spectral_decomposition(SIGMA_X)
    assert sd.eigenvalues == pytest.approx((-1.0, 1.0), abs=1e-14)
    np.testing.assert_allclose(sd.projections[0], 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-14)
    np.testing.assert_allclose(sd.projections[1], 0.5 * np.array([[1, 1], [1, 1]]), atol=1e-14)


def test_spectral_identity_and_degenerate():
    sd = spectral_decomposition(np.eye(3))
    assert sd.eigenvalues == (1.0,)
    np.testing.assert_allclose(sd.projections[0], np.eye(3), atol=1e-14)
    sd = spectral_decomposition(np.diag([2.0, 2.0, 5.0]), cluster_tol=1e-8)
    assert sd.eigenvalues == (2.0, 5.0)
    assert sd.ranks() == [2, 1]


def test_spectral_not_hermitian():
    with pytest.raises(NotHermitian):
        spectral_decomposition([[0, 1], [0, 0]])


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1), st.booleans())
def test_spectral_invariants(dim, seed, degenerate):
    rng = np.random.default_rng(seed)
    if degenerate:
        q, _ = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))
        vals = rng.integers(-2, 3, size=dim).astype(float)
        a = q @ np.diag(vals) @ dagger(q)
    else:
        a = random_hermitian(rng, dim)
    sd = spectral_decomposition(a)
    eye = np.eye(dim)
    assert np.abs(sum(sd.projections) - eye).max() < 1e-9
    for i, p in enumerate(sd.projections):
        assert np.abs(p @ p - p).max() < 1e-9
        assert np.abs(p - dagger(p)).max() < 1e-9
        for q_ in sd.projections[i + 1:]:
            assert np.abs(p @ q_).max() < 1e-9
    assert np.abs(sd.reconstruct() - a).max() < 1e-8
    assert list(sd.eigenvalues) == sorted(sd.eigenvalues)


def test_measure_examples():
    p = measure(SIGMA_Z, np.diag([0.3, 0.7]))
    assert p["1"] == pytest.approx(0.3, abs=1e-15)
    assert p["-1"] == pytest.approx(0.7, abs=1e-15)
    p = measure(np.eye(3), random_density(np.random.default_rng(0), 3))
    assert p.space.labels == ("1",) and p["1"] == pytest.approx(1.0, abs=1e-12)
    p = measure(SIGMA_X, UP)
    assert p["1"] == pytest.approx(0.5, abs=1e-15) and p["-1"] == pytest.approx(0.5, abs=1e-15)


def test_measurement_map_pullback_is_trace(rng):
    a = random_hermitian(rng, 4)
    m = measurement_map(a)
    rho = random_density(rng, 4)
    coeffs = rng.normal(size=m.spectrum.size)
    # (omega . m)(c) = tr(rho m(c)) = sum_lambda c_lambda p_lambda
    p = m.pullback(rho)
    assert abs(np.trace(rho.matrix @ m(coeffs)) - coeffs @ p.weights) < 1e-12
    np.testing.assert_allclose(m(np.ones(m.spectrum.size)), np.eye(4), atol=1e-12)


def test_measure_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        measure([[0, 1], [0, 0]], UP)
    with pytest.raises(NotADensityMatrix):
        measure(SIGMA_Z, np.eye(2))


def test_unitary_evolution_examples():
    rho = DensityMatrix(PLUS)
    np.testing.assert_allclose(unitary_evolution(SIGMA_Z, 0.0, rho).matrix, PLUS, atol=1e-15)
    # exact 2x2 conjugation: off-diagonals pick up e^{-2it}
    out = unitary_evolution(SIGMA_Z, np.pi / 2, rho).matrix
    np.testing.assert_allclose(out, MINUS, atol=1e-12)


def test_unitary_evolution_full_period_sign():
    # the phase e^{-2it} on the coherences is 1 again at t = pi
    out = unitary_evolution(SIGMA_Z, np.pi, DensityMatrix(PLUS)).matrix
    np.testing.assert_allclose(out, PLUS, atol=1e-12)


def test_unitary_preserves_spectrum(rng):
    for _ in range(20):
        h = random_hermitian(rng, 4)
        rho = random_density(rng, 4)
        out = unitary_evolution(h, float(rng.normal()), rho)
        np.testing.assert_allclose(np.linalg.eigvalsh(out.matrix), np.linalg.eigvalsh(rho.matrix), atol=1e-10)


def test_liouville_matches_exact(rng):
    for _ in range(5):
        h = random_hermitian(rng, 3)
        rho = random_density(rng, 3)
        approx = liouville_evolve(h, 1.0, rho, 1000).matrix
        exact = unitary_evolution(h, 1.0, rho).matrix
        assert np.abs(approx - exact).max() < 1e-8
        assert abs(np.trace(approx) - 1) < 1e-10
        assert np.abs(approx - dagger(approx)).max() < 1e-10


def test_liouville_step_zero_dt(rng):
    rho = random_density(rng, 2)
    np.testing.assert_array_equal(liouville_step(SIGMA_X, rho, 0.0), rho.matrix)
    with pytest.raises(NotHermitian):
        liouville_step([[0, 1], [0, 0]], rho, 0.1)


def test_kraus_json_roundtrip(rng):
    K = random_kraus(rng, 2, 2)
    K2 = KrausChannel.from_dict(K.to_dict())
    for a, b in zip(K.operators, K2.operators):
        np.testing.assert_array_equal(a, b)
