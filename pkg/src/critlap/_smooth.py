"""C-infinity transition functions shared by bumps and cutoffs."""

from __future__ import annotations

import numpy as np


def _psi(t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smoothstep(t) -> np.ndarray:
    """Smooth monotone step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)
    a = _psi(t)
    b = _psi(1.0 - t)
    return a / (a + b)


def smoothstep_deriv(t) -> np.ndarray:
    """Derivative of :func:`smoothstep`."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    m = (t > 0) & (t < 1)
    tm = t[m]
    a = np.exp(-1.0 / tm)
    b = np.exp(-1.0 / (1.0 - tm))
    da = a / tm**2
    db = -b / (1.0 - tm) ** 2
    out[m] = (da * (a + b) - a * (da + db)) / (a + b) ** 2
    return out


def plateau(r, rho: float) -> np.ndarray:
    """Radial cutoff equal to 1 on ``[0, rho/2]`` and 0 beyond ``rho``."""
    r = np.asarray(r, dtype=float)
    return 1.0 - smoothstep(2.0 * r / rho - 1.0)


def plateau_deriv(r, rho: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return -2.0 / rho * smoothstep_deriv(2.0 * r / rho - 1.0)
