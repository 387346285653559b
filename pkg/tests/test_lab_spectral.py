import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rsparam.lab.grid import Grid, make_noise, mollifier
from rsparam.lab.spectral import Kernel, LittlewoodPaley

GRID = Grid(10)
LP = LittlewoodPaley(GRID)


def smooth_field(seed, alpha=-0.5):
    return make_noise(GRID, alpha, seed)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(3)
    with pytest.raises(ValueError):
        Grid(8, margin=0.05)
    g = Grid(8)
    assert g.n == 256 and g.h == 1 / 256
    assert g.core.sum() == 192


def test_noise_is_seeded_and_finite():
    a, b = make_noise(GRID, -1.4, 3), make_noise(GRID, -1.4, 3)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, make_noise(GRID, -1.4, 4))
    assert np.all(np.isfinite(a))
    assert mollifier(np.array([0.0]), 10.0)[0] == 1.0


def test_partition_of_unity():
    f = smooth_field(1)
    total = sum(LP.Q(j, f) for j in LP.indices)
    assert np.linalg.norm(total - f) / np.linalg.norm(f) <= 1e-10


def test_paraproduct_of_constant_vanishes():
    f = smooth_field(3)
    assert np.max(np.abs(LP.paraproduct(f, np.ones(GRID.n)))) <= 1e-12


def test_paraproduct_by_one_is_f_minus_S():
    g = smooth_field(4)
    ref = g - LP.smoothing(g)
    assert np.max(np.abs(LP.paraproduct(np.ones(GRID.n), g) - ref)) <= 1e-12 * np.max(np.abs(g))


def test_pbar_collapses_to_paraproduct():
    g8 = Grid(7)
    lp = LittlewoodPaley(g8)
    a, b = make_noise(g8, -0.3, 5), make_noise(g8, -0.7, 6)
    lam = np.outer(a, b)
    ref = lp.paraproduct(a, b)
    assert np.max(np.abs(lp.pbar_general(lam) - ref)) <= 1e-10 * np.max(np.abs(ref))
    assert np.max(np.abs(lp.pbar_separable([(a, b)]) - ref)) <= 1e-12 * np.max(np.abs(ref))


def test_commutator_with_unit_first_argument_is_low_frequency():
    # P_1 = Id - S, so R(1, b, c) = -S(P_b c): no content above the two lowest blocks
    b, c = smooth_field(7), smooth_field(8)
    out = LP.commutator(np.ones(GRID.n), b, c)
    ref = -LP.smoothing(LP.paraproduct(b, c))
    assert np.max(np.abs(out - ref)) <= 1e-12 * np.max(np.abs(b * c))
    for j in range(2, LP.jmax + 1):
        assert np.max(np.abs(LP.Q(j, out))) <= 1e-12 * np.max(np.abs(b * c))


def test_commutator_with_unit_second_argument():
    a, c = smooth_field(9), smooth_field(10)
    expected = LP.paraproduct(a, LP.paraproduct(np.ones(GRID.n), c)) - LP.paraproduct(a, c)
    assert np.allclose(LP.commutator(a, np.ones(GRID.n), c), expected, atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 1000), st.floats(-2, 2))
def test_commutator_trilinear(seed, lam):
    a, a2, b, c = (smooth_field(seed + k) for k in range(4))
    lhs = LP.commutator(a + lam * a2, b, c)
    rhs = LP.commutator(a, b, c) + lam * LP.commutator(a2, b, c)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))


@pytest.mark.parametrize("a", [0, 1])
def test_kernel_fft_matches_direct_sum(a):
    k = Kernel(GRID, 2.0)
    f = smooth_field(11)
    ref = k.convolve_direct(f, a)
    assert np.max(np.abs(k.convolve(f, a) - ref)) <= 1e-10 * np.max(np.abs(ref))


def test_kernel_symbol_oracle():
    k = Kernel(Grid(12), 2.0)
    f = k._pad_freqs
    # at low frequency the truncation is invisible
    assert k.symbol(0)[0] == pytest.approx(1.0)
    assert k.symbol(0)[10] == pytest.approx(1 / (1 + (2 * np.pi * f[10]) ** 2), rel=1e-12)
    assert k.symbol(1)[10] == pytest.approx(2j * np.pi * f[10] * k.symbol(0)[10], rel=1e-12)


def test_kernel_impulse_response():
    # symbol (1 + (2 pi f)^2)^{-1} on the doubled box: exp(-|x|)/2 periodised with period 2
    g = Grid(12)
    k = Kernel(g, 2.0)
    delta = np.zeros(g.n)
    delta[g.n // 2] = 1.0 / g.h
    out = k.convolve(delta)
    r = np.abs(g.x - g.x[g.n // 2])
    away = r > 0.02
    ref = np.cosh(1 - r[away]) / (2 * np.sinh(1.0))
    assert np.max(np.abs(out[away] - ref)) <= 1e-6
