"""Bessel and Hankel functions of orders 0 and 1 at positive real arguments.

Values come from the Cephes routines wrapped by :mod:`scipy.special`, which use
an ascending series / rational approximation below x = 8 and the Hankel
asymptotic form above it.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special as sps

from .errors import DomainError


@dataclass(frozen=True)
class BesselQuad:
    """J0, J1, Y0, Y1 evaluated at one argument."""

    x: float
    j0: float
    j1: float
    y0: float
    y1: float

    @property
    def wronskian_residual(self):
        return self.j1 * self.y0 - self.j0 * self.y1 - 2.0 / (np.pi * self.x)


def _check_positive(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)) or np.any(x <= 0.0):
        raise DomainError("Bessel functions require finite arguments x > 0")
    return x


def bessel_quad(x):
    """Return :class:`BesselQuad` with J0, J1, Y0, Y1 at the scalar ``x > 0``."""
    if not np.isscalar(x) and np.ndim(x) != 0:
        raise DomainError("bessel_quad takes a scalar argument")
    x = float(_check_positive(x))
    return BesselQuad(x, float(sps.j0(x)), float(sps.j1(x)),
                      float(sps.y0(x)), float(sps.y1(x)))


def bessel_j(order, x):
    """J_order(x) for order 0 or 1; ``x`` may be an array."""
    x = _check_positive(x)
    if order == 0:
        return sps.j0(x)
    if order == 1:
        return sps.j1(x)
    raise DomainError(f"unsupported Bessel order {order!r}; only 0 and 1")


def bessel_y(order, x):
    """Y_order(x) for order 0 or 1; ``x`` may be an array."""
    x = _check_positive(x)
    if order == 0:
        return sps.y0(x)
    if order == 1:
        return sps.y1(x)
    raise DomainError(f"unsupported Bessel order {order!r}; only 0 and 1")


def hankel1(order, x):
    """Hankel function of the first kind H^(1)_order(x) = J + iY, order 0 or 1."""
    if order not in (0, 1):
        raise DomainError(f"unsupported Hankel order {order!r}; only 0 and 1")
    x = _check_positive(x)
    out = bessel_j(order, x) + 1j * bessel_y(order, x)
    return out if out.ndim else complex(out)
