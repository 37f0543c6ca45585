import math

import numpy as np


def substeps(t_a: float, t_b: float, dt: float):
    """Equal steps of at most dt that land exactly on t_b."""
    if dt <= 0 or not np.isfinite(dt):
        raise ValueError(f"step size must be positive and finite, got {dt}")
    span = t_b - t_a
    if span <= 0:
        return 0, 0.0
    count = max(1, math.ceil(span / dt - 1e-9))
    return count, span / count


def rk4_linear(apply, psi, h):
    """One classical RK4 step of dpsi/dt = -i A psi for a time-independent A."""
    k1 = -1j * apply(psi)
    k2 = -1j * apply(psi + 0.5 * h * k1)
    k3 = -1j * apply(psi + 0.5 * h * k2)
    k4 = -1j * apply(psi + h * k3)
    return psi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def renormalize(psi):
    return psi / np.linalg.norm(psi)
