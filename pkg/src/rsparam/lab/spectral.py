"""Kernel convolution, Littlewood-Paley blocks, paraproducts and the commutator."""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .grid import Grid, mollifier


class Kernel:
    """K with symbol (1 + (2 pi f)^2)^(-beta/2), smoothly truncated at high frequency.

    Fields are zero-padded to twice the box length, so the operator is the
    convolution of the box-supported field with the 2L-periodisation of the
    whole-line kernel.  That fixed kernel is used everywhere, so admissibility
    holds exactly with respect to it; for beta = 2 it is
    cosh(L - |x|) / (2 sinh L) on [-L, L].
    """

    def __init__(self, grid: Grid, beta: float, truncation_cells: int = 4):
        self.grid = grid
        self.beta = float(beta)
        self.truncation_cells = truncation_cells
        self._cache: dict = {}

    @cached_property
    def _pad_freqs(self) -> np.ndarray:
        return np.fft.rfftfreq(2 * self.grid.n, d=self.grid.h)

    def symbol(self, a: int = 0) -> np.ndarray:
        out = self._cache.get(a)
        if out is None:
            f = self._pad_freqs
            w = 2 * np.pi * f
            out = (1 + w ** 2) ** (-self.beta / 2) * mollifier(f, self.grid.n / self.truncation_cells)
            out = out * (1j * w) ** a
            self._cache[a] = out
        return out

    def convolve(self, field: np.ndarray, a: int = 0) -> np.ndarray:
        """(D^a K) * field on the grid."""
        n = self.grid.n
        spec = np.fft.rfft(field, n=2 * n)
        return np.fft.irfft(spec * self.symbol(a), n=2 * n)[:n]

    def samples(self, a: int = 0) -> np.ndarray:
        """Grid samples k[m], m = -(n-1)..(n-1), of the discrete kernel (times h)."""
        n = self.grid.n
        k = np.fft.irfft(self.symbol(a), n=2 * n)
        return np.concatenate([k[n + 1:], k[:n]])

    def convolve_direct(self, field: np.ndarray, a: int = 0) -> np.ndarray:
        """Same operator by direct summation; an independent check of ``convolve``."""
        n = self.grid.n
        full = np.convolve(field, self.samples(a))
        return full[n - 1:2 * n - 1]


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 1 for t <= 0, 0 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        e1 = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1 - t, 1.0)), 0.0)
        e0 = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return e1 / (e0 + e1)


class LittlewoodPaley:
    """Dyadic partition of unity on the periodic grid.

    chi(r) = 1 for r <= 3/4 and 0 for r >= 4/3.  Q_{-1} = chi(f/b),
    Q_j = chi(f/(b 2^(j+1))) - chi(f/(b 2^j)) for j >= 0 with b = lp_base;
    the last block absorbs all remaining frequencies, so the blocks sum to
    the identity exactly.  P_j = sum_{i <= j-2} Q_i = chi(f/(b 2^(j-1))).
    """

    def __init__(self, grid: Grid):
        self.grid = grid
        f = grid.freqs
        b = grid.lp_base
        nyq = f[-1]
        self.jmax = max(1, int(np.floor(np.log2(nyq / b))))
        lows = [self._chi(f / (b * 2.0 ** k)) for k in range(self.jmax + 1)]
        blocks = [lows[0]]
        for j in range(0, self.jmax + 1):
            blocks.append(lows[j + 1] - lows[j] if j < self.jmax else 1.0 - lows[j])
        self._low = lows
        self._blocks = blocks

    @staticmethod
    def _chi(r: np.ndarray) -> np.ndarray:
        return _smooth_step((np.abs(r) - 0.75) / (4.0 / 3.0 - 0.75))

    @property
    def indices(self) -> range:
        return range(-1, self.jmax + 1)

    def block_symbol(self, j: int) -> np.ndarray:
        return self._blocks[j + 1]

    def low_symbol(self, j: int) -> np.ndarray:
        """Symbol of P_j."""
        if j <= 0:
            return np.zeros_like(self.grid.freqs)
        if j - 1 >= len(self._low):
            return np.ones_like(self.grid.freqs)
        return self._low[j - 1]

    def _apply(self, symbol: np.ndarray, field: np.ndarray) -> np.ndarray:
        return np.fft.irfft(np.fft.rfft(field) * symbol, n=self.grid.n)

    def Q(self, j: int, field: np.ndarray) -> np.ndarray:
        return self._apply(self.block_symbol(j), field)

    def P(self, j: int, field: np.ndarray) -> np.ndarray:
        return self._apply(self.low_symbol(j), field)

    def paraproduct(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """P_f g = sum_{j >= 1} (P_j f)(Q_j g)."""
        fs = np.fft.rfft(f)
        gs = np.fft.rfft(g)
        n = self.grid.n
        out = np.zeros(n)
        for j in range(1, self.jmax + 1):
            out += (np.fft.irfft(fs * self.low_symbol(j), n=n)
                    * np.fft.irfft(gs * self.block_symbol(j), n=n))
        return out

    def smoothing(self, f: np.ndarray) -> np.ndarray:
        """S(f) := f - P_1(f), the two lowest blocks."""
        return self._apply(self.block_symbol(-1) + self.block_symbol(0), f)

    def commutator(self, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
        """R(a, b, c) = P_a(P_b c) - P_{ab} c."""
        return self.paraproduct(a, self.paraproduct(b, c)) - self.paraproduct(a * b, c)

    def pbar_separable(self, terms) -> np.ndarray:
        """P-bar of Lambda(y, z) = sum_i a_i(y) b_i(z), given as pairs (a_i, b_i)."""
        n = self.grid.n
        out = np.zeros(n)
        for a, b in terms:
            out += self.paraproduct(a, b)
        return out

    def Qbar_separable(self, j: int, terms) -> np.ndarray:
        """(Q_j Lambda)(x) for separable Lambda."""
        out = np.zeros(self.grid.n)
        for a, b in terms:
            out += self.P(j, a) * self.Q(j, b)
        return out

    def _kernel_matrix(self, symbol: np.ndarray) -> np.ndarray:
        """Rows K[x, :] of the periodic convolution with the given symbol."""
        n = self.grid.n
        k = np.fft.irfft(symbol, n=n)
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return k[idx]

    def pbar_general(self, Lam: np.ndarray) -> np.ndarray:
        """P-bar of a general two-variable field Lam[y, z] (O(n^2) memory; small grids)."""
        n = self.grid.n
        if Lam.shape != (n, n):
            raise ValueError("grid mismatch")
        out = np.zeros(n)
        for j in range(1, self.jmax + 1):
            Pm = self._kernel_matrix(self.low_symbol(j))
            Qm = self._kernel_matrix(self.block_symbol(j))
            out += np.einsum("xy,yz,xz->x", Pm, Lam, Qm)
        return out
