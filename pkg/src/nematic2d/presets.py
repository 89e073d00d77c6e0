"""Named initial conditions."""

from __future__ import annotations

import numpy as np

from .diagnostics import make_bubble
from .fields import TorusGrid
from .solver import FlowState


def _unit(v):
    v = np.asarray(v, dtype=float)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("director must be nonzero")
    return v / norm


def constant_director(grid: TorusGrid, direction=(0.0, 0.0, 1.0)) -> np.ndarray:
    e = _unit(direction)
    return np.broadcast_to(e[:, None, None], (3, grid.n, grid.n)).copy()


def taylor_green(grid: TorusGrid, amplitude: float = 1.0, director=(0.0, 0.0, 1.0)) -> FlowState:
    """``u = a (sin x cos y, -cos x sin y)`` in units of the period, constant director.

    With the default polar director every director-flow coupling vanishes
    and the velocity obeys Navier-Stokes with viscosity ``mu4 / 2``.
    """
    x, y = grid.coords
    s = 2 * np.pi / grid.length
    u = amplitude * np.stack([np.sin(s * x) * np.cos(s * y), -np.cos(s * x) * np.sin(s * y)])
    return FlowState(u, constant_director(grid, director))


def geodesic(grid: TorusGrid, k=(1, 0)) -> FlowState:
    """``u = 0``, ``d = (cos k.x, sin k.x, 0)``: a tension-free director at rest."""
    x, y = grid.coords
    s = 2 * np.pi / grid.length
    phase = s * (k[0] * x + k[1] * y)
    d = np.stack([np.cos(phase), np.sin(phase), np.zeros_like(phase)])
    return FlowState(np.zeros((2, grid.n, grid.n)), d)


def bubble(grid: TorusGrid, scale: float, degree: int = 1, center=None) -> FlowState:
    if center is None:
        center = (grid.length / 2, grid.length / 2)
    return FlowState(np.zeros((2, grid.n, grid.n)), make_bubble(grid, center, scale, degree))


def random_field(grid: TorusGrid, components: int, rng: np.random.Generator,
                 spectrum_slope: float) -> np.ndarray:
    """Zero-mean smooth random field with mode amplitudes ``(1 + |m|^2)^(-slope/2)``,
    truncated to the dealiased band and scaled to unit RMS."""
    shape = (components, grid.n, grid.n // 2 + 1)
    coef = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    m2 = grid.mode_x**2 + grid.mode_y**2
    filt = (1.0 + m2) ** (-spectrum_slope / 2) * grid.dealias_mask
    filt[0, 0] = 0.0
    f = grid.ifft(coef * filt)
    rms = np.sqrt(np.mean(f**2, axis=(-2, -1), keepdims=True))
    return f / np.where(rms > 0, rms, 1.0)


def random_state(grid: TorusGrid, seed: int = 0, spectrum_slope: float = 4.0,
                 amplitude: float = 1.0, director_amplitude: float = 0.5,
                 base_director=(1.0, 0.0, 0.0)) -> FlowState:
    """Seeded random solenoidal velocity and unit director.

    The director is a random tangent field at ``base_director`` of RMS size
    ``director_amplitude``, added to it and renormalized pointwise; it can
    therefore never vanish before normalization.
    """
    rng = np.random.default_rng(seed)
    u = grid.leray_project(random_field(grid, 2, rng, spectrum_slope))
    rms = np.sqrt(np.mean(np.sum(u**2, axis=0)))
    u = amplitude * u / rms if rms > 0 else u

    e0 = _unit(base_director)
    v = director_amplitude * random_field(grid, 3, rng, spectrum_slope)
    v = v - np.einsum("k,k...->...", e0, v) * e0[:, None, None]
    d = e0[:, None, None] + v
    d = d / np.sqrt(np.sum(d**2, axis=0))
    return FlowState(u, d)
