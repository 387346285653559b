"""One-dimensional sample grids and the mollified noise."""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


@dataclass(frozen=True)
class Grid:
    """n = 2**J samples of [0, L).

    Identity checks only look at the core [margin*L, (1-margin)*L).
    ``lp_base`` is the frequency (cycles per unit length) of the lowest
    Littlewood-Paley annulus.
    """

    J: int
    L: float = 1.0
    margin: float = 0.125
    lp_base: float = 8.0

    def __post_init__(self):
        if self.J < 4:
            raise ValueError("grid level J must be at least 4")
        if not 0.125 <= self.margin < 0.5:
            raise ValueError("margin must lie in [1/8, 1/2)")

    @property
    def n(self) -> int:
        return 1 << self.J

    @property
    def h(self) -> float:
        return self.L / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @cached_property
    def core(self) -> np.ndarray:
        lo, hi = self.margin * self.L, (1 - self.margin) * self.L
        return (self.x >= lo) & (self.x < hi)

    @cached_property
    def core_indices(self) -> np.ndarray:
        return np.flatnonzero(self.core)

    @cached_property
    def freqs(self) -> np.ndarray:
        """Frequencies (cycles per unit length) of the periodic rfft."""
        return np.fft.rfftfreq(self.n, d=self.h)

    def sample_points(self, count: int) -> np.ndarray:
        """Evenly spread indices inside the core."""
        idx = self.core_indices
        pos = np.linspace(0, len(idx) - 1, count).round().astype(int)
        return idx[pos]

    def metadata(self) -> dict:
        return {"J": self.J, "n": self.n, "L": self.L, "margin": self.margin,
                "lp_base": self.lp_base}


def mollifier(freqs: np.ndarray, cutoff: float) -> np.ndarray:
    """Smooth spectral cutoff exp(-(f/cutoff)^8)."""
    return np.exp(-(np.abs(freqs) / cutoff) ** 8)


def make_noise(grid: Grid, alpha: float, seed: int, cells: int = 8) -> np.ndarray:
    """Gaussian noise with Hölder regularity alpha, mollified at ``cells`` grid cells.

    Fourier amplitudes scale like |f|^(-alpha-1/2), so that dyadic blocks
    have sup norm of order 2^(-j alpha).  The result is periodic on the box.
    """
    rng = np.random.default_rng(seed)
    f = grid.freqs
    m = len(f)
    coef = (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / np.sqrt(2.0)
    coef[0] = 0.0
    if grid.n % 2 == 0:
        coef[-1] = coef[-1].real
    color = (1.0 + f ** 2) ** (-(alpha + 0.5) / 2.0)
    spec = coef * color * mollifier(f, grid.n / cells) * np.sqrt(grid.L)
    return np.fft.irfft(spec, n=grid.n) * grid.n / grid.L

