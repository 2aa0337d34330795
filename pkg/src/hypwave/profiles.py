"""Named radial initial-data families used across experiments and the CLI."""

from __future__ import annotations

import numpy as np

from .geometry import RadialField, RadialGrid


def gaussian(sigma: float = 1.0, amplitude: float = 1.0):
    """amplitude * exp(-r^2 / (2 sigma^2))."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")

    def f(r):
        return amplitude * np.exp(-(r**2) / (2.0 * sigma**2))

    return f


def bump(radius: float = 1.0, amplitude: float = 1.0):
    """Smooth compactly supported bump, vanishing to all orders at ``radius``."""
    if radius <= 0:
        raise ValueError("radius must be positive")

    def f(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        inside = np.abs(r) < radius
        x = r[inside] / radius
        out[inside] = amplitude * np.exp(1.0 - 1.0 / (1.0 - x**2))
        return out

    return f


def ring(center: float = 2.0, width: float = 0.5, amplitude: float = 1.0):
    """Annular profile amplitude * r^2 exp(-((r - center)/width)^2)."""
    if width <= 0:
        raise ValueError("width must be positive")

    def f(r):
        return amplitude * r**2 * np.exp(-(((r - center) / width) ** 2))

    return f


PROFILES = {"gaussian": gaussian, "bump": bump, "ring": ring}


def make_profile(name: str, **params):
    """Profile function by registry name; unknown names raise KeyError."""
    if name not in PROFILES:
        raise KeyError(f"unknown profile {name!r}; choices: {sorted(PROFILES)}")
    return PROFILES[name](**params)


def sample_profile(grid: RadialGrid, name: str, **params) -> RadialField:
    return RadialField.from_function(grid, make_profile(name, **params))
