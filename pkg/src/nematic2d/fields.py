"""Uniform periodic grid and spectral calculus on the flat torus [0, L)^2.

Fields are plain real ndarrays whose trailing two axes are the grid axes
(x, y), indexed ``f[..., ix, iy]``.  Scalars have shape ``(n, n)``, the
velocity ``(2, n, n)``, the director ``(3, n, n)`` and 2x2 tensors
``(2, 2, n, n)``.  Gradients prepend the derivative index, so
``gradient(u)[i, j] = d u_j / d x_i``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np


class TorusGrid:
    """``n x n`` collocation grid with period ``length`` on both axes.

    Transforms are real-to-complex (``rfft2``) over the last two axes.
    First-derivative symbols have the Nyquist mode removed, so odd
    derivatives of real fields stay real and the projection operator
    built from them is an exact idempotent.
    """

    def __init__(self, n: int = 64, length: float = 2 * np.pi):
        n = int(n)
        if n < 8 or n % 2:
            raise ValueError(f"n must be even and >= 8, got {n}")
        if not (np.isfinite(length) and length > 0):
            raise ValueError(f"length must be positive, got {length}")
        self.n = n
        self.length = float(length)
        self.spacing = self.length / n
        self.cell_area = self.spacing**2

        scale = 2 * np.pi / self.length
        mx = np.fft.fftfreq(n, 1.0 / n)       # integer modes -n/2 .. n/2-1
        my = np.fft.rfftfreq(n, 1.0 / n)      # 0 .. n/2
        self.mode_x = mx[:, None]
        self.mode_y = my[None, :]
        self.kx = scale * self.mode_x
        self.ky = scale * self.mode_y
        # Nyquist-free symbols for first derivatives
        self.dx_symbol = 1j * np.where(np.abs(self.mode_x) == n // 2, 0.0, self.kx)
        self.dy_symbol = 1j * np.where(self.mode_y == n // 2, 0.0, self.ky)
        self.laplacian_symbol = -(self.kx**2 + self.ky**2)
        self.dealias_mask = (np.abs(self.mode_x) <= n / 3) & (self.mode_y <= n / 3)

    def __repr__(self):
        return f"TorusGrid(n={self.n}, length={self.length!r})"

    def __eq__(self, other):
        return (isinstance(other, TorusGrid) and self.n == other.n
                and self.length == other.length)

    def __hash__(self):
        return hash((self.n, self.length))

    @cached_property
    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        x = np.arange(self.n) * self.spacing
        return tuple(np.meshgrid(x, x, indexing="ij"))

    @cached_property
    def _proj(self):
        ax, ay = self.dx_symbol.imag, self.dy_symbol.imag
        k2 = ax**2 + ay**2
        inv = np.divide(1.0, k2, out=np.zeros_like(k2), where=k2 > 0)
        return ax, ay, inv

    # -- transforms -------------------------------------------------------

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfft2(f, axes=(-2, -1))

    def ifft(self, fh: np.ndarray) -> np.ndarray:
        return np.fft.irfft2(fh, s=(self.n, self.n), axes=(-2, -1))

    # -- differential operators -------------------------------------------

    def gradient(self, f: np.ndarray, fh: np.ndarray | None = None) -> np.ndarray:
        """Spectral gradient; output shape ``(2,) + f.shape``."""
        if fh is None:
            fh = self.fft(f)
        return np.stack([self.ifft(self.dx_symbol * fh), self.ifft(self.dy_symbol * fh)])

    def divergence(self, v: np.ndarray) -> np.ndarray:
        """Divergence contracting the leading index: ``sum_i d_i v[i, ...]``."""
        vh = self.fft(v)
        return self.ifft(self.dx_symbol * vh[0] + self.dy_symbol * vh[1])

    def divergence_hat(self, vh: np.ndarray) -> np.ndarray:
        return self.dx_symbol * vh[0] + self.dy_symbol * vh[1]

    def laplacian(self, f: np.ndarray, fh: np.ndarray | None = None) -> np.ndarray:
        if fh is None:
            fh = self.fft(f)
        return self.ifft(self.laplacian_symbol * fh)

    def second_derivatives(self, f: np.ndarray, fh: np.ndarray | None = None) -> np.ndarray:
        """Hessian ``H[i, j] = d_i d_j f``; shape ``(2, 2) + f.shape``."""
        if fh is None:
            fh = self.fft(f)
        sx, sy = self.dx_symbol, self.dy_symbol
        hxx = self.ifft(-self.kx**2 * fh)
        hyy = self.ifft(-self.ky**2 * fh)
        hxy = self.ifft(sx * sy * fh)
        return np.stack([np.stack([hxx, hxy]), np.stack([hxy, hyy])])

    # -- projections and filters -------------------------------------------

    def leray_project_hat(self, vh: np.ndarray) -> np.ndarray:
        ax, ay, inv = self._proj
        kv = (ax * vh[0] + ay * vh[1]) * inv
        return np.stack([vh[0] - ax * kv, vh[1] - ay * kv])

    def leray_project(self, v: np.ndarray) -> np.ndarray:
        """Orthogonal projection of a 2-vector field onto its solenoidal part."""
        if v.shape[0] != 2:
            raise ValueError(f"expected a 2-component field, got shape {v.shape}")
        return self.ifft(self.leray_project_hat(self.fft(v)))

    def dealias(self, f: np.ndarray) -> np.ndarray:
        """Zero every mode with ``|m_x| > n/3`` or ``|m_y| > n/3`` (2/3 rule)."""
        return self.ifft(self.fft(f) * self.dealias_mask)

    def solve_poisson_hat(self, rhs_hat: np.ndarray) -> np.ndarray:
        """Zero-mean solution of ``Lap P = rhs`` in spectral space."""
        _, _, inv = self._proj
        return -rhs_hat * inv

    # -- quadrature ----------------------------------------------------------

    def integrate(self, f: np.ndarray) -> float | np.ndarray:
        """Torus integral: mean value times ``L**2`` (spectrally exact quadrature)."""
        return np.sum(f, axis=(-2, -1)) * self.cell_area

    def shift(self, f: np.ndarray, offset) -> np.ndarray:
        """Band-limited translation ``g(x) = f(x + offset)``."""
        ox, oy = offset
        px = np.exp(1j * self.kx * ox)
        py = np.exp(1j * self.ky * oy)
        # a Nyquist mode is sampled as a pure cosine; its shift is a rescale
        px = np.where(np.abs(self.mode_x) == self.n // 2, px.real, px)
        py = np.where(self.mode_y == self.n // 2, py.real, py)
        return self.ifft(self.fft(f) * (px * py))

    def min_image(self, center) -> tuple[np.ndarray, np.ndarray]:
        """Periodic displacement from ``center`` to every grid point."""
        x, y = self.coords
        L = self.length
        dx = (x - center[0] + L / 2) % L - L / 2
        dy = (y - center[1] + L / 2) % L - L / 2
        return dx, dy


def gradient(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    return grid.gradient(f)


def divergence(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    return grid.divergence(v)


def laplacian(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    return grid.laplacian(f)


def leray_project(grid: TorusGrid, v: np.ndarray) -> np.ndarray:
    return grid.leray_project(v)


def integrate(grid: TorusGrid, f: np.ndarray) -> float:
    return grid.integrate(f)


def dealias(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    return grid.dealias(f)
