"""Bessel functions of the first kind for real order nu > -1.

Provides J_nu, the rescaled function cap_i(nu, r) = r**(-nu) * J_nu(r)
(entire in r**2, finite at r = 0), its first two derivatives through the
recurrence d/dr cap_i(nu, r) = -r * cap_i(nu+1, r), and the ordered positive
zeros j_{nu,n} of J_nu.  cap_i(nu, j*r) solves the radial eigenvalue ODE
u'' + (2*nu+1)/r * u' + j**2 * u = 0, which is why these four things are the
only special-function machinery the rest of the package needs.

Point evaluation of J_nu and the Gamma function are delegated to
scipy.special; zero finding for real (non-integer) order is done here by
sign-change bracketing plus Brent refinement, since scipy only tabulates
zeros of integer orders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DomainError

__all__ = [
    "BesselOrder",
    "BesselTable",
    "bessel_j",
    "bessel_zero",
    "cap_i",
    "cap_i_deriv",
]

# Bracketing mesh for zero finding.  Zeros of J_nu are asymptotically spaced
# by pi, so a pi/8 step cannot straddle two of them.
_MESH_STEP = np.pi / 8.0
_RADIUS_CAP = 1000.0

_SQRT_2_OVER_PI = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class BesselOrder:
    """Validated real order nu > -1."""

    nu: float

    def __post_init__(self):
        nu = float(self.nu)
        if not np.isfinite(nu) or nu <= -1.0:
            raise DomainError(f"Bessel order must satisfy nu > -1, got {self.nu}")
        object.__setattr__(self, "nu", nu)


def _order(nu) -> float:
    if isinstance(nu, BesselOrder):
        return nu.nu
    return BesselOrder(float(nu)).nu


def bessel_j(nu, r):
    """J_nu(r) for r >= 0 (scalar or array)."""
    nu = _order(nu)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("bessel_j requires r >= 0")
    out = special.jv(nu, r)
    return out if out.ndim else float(out)


def _is_half(nu: float, half: float) -> bool:
    return abs(nu - half) < 1e-14


def cap_i(nu, r):
    """r**(-nu) * J_nu(r), with its finite limit 2**(-nu)/Gamma(nu+1) at r=0.

    Orders +-1/2 take the exact trigonometric forms sqrt(2/pi)*cos(r) and
    sqrt(2/pi)*sin(r)/r so that half-integer anchors come out exactly.
    """
    nu = _order(nu)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("cap_i requires r >= 0")
    scalar = r.ndim == 0
    r = np.atleast_1d(r)

    if _is_half(nu, -0.5):
        out = _SQRT_2_OVER_PI * np.cos(r)
    elif _is_half(nu, 0.5):
        out = _SQRT_2_OVER_PI * np.sinc(r / np.pi)
    else:
        out = np.empty_like(r)
        small = r < 1e-8
        # two-term series; the neglected term is O(r^4)
        c0 = 2.0 ** (-nu) / special.gamma(nu + 1.0)
        rs = r[small]
        out[small] = c0 * (1.0 - (rs * rs / 4.0) / (nu + 1.0))
        rb = r[~small]
        out[~small] = rb ** (-nu) * special.jv(nu, rb)
    return float(out[0]) if scalar else out


def cap_i_deriv(nu, r, k=1):
    """k-th derivative (k in {1, 2}) of r -> cap_i(nu, r).

    Uses the recurrence relations
        d/dr cap_i(nu, r)   = -r * cap_i(nu+1, r)
        d2/dr2 cap_i(nu, r) = -cap_i(nu+1, r) + r**2 * cap_i(nu+2, r).
    """
    nu = _order(nu)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError("cap_i_deriv requires r >= 0")
    if k == 1:
        return -r * cap_i(nu + 1.0, r)
    if k == 2:
        return -cap_i(nu + 1.0, r) + r * r * cap_i(nu + 2.0, r)
    raise DomainError(f"cap_i_deriv supports k in {{1, 2}}, got {k}")


def _bracket_zeros(nu: float, count: int, radius_cap: float):
    """Sign-change brackets for the first `count` zeros of J_nu."""
    # J_nu > 0 just right of 0; zeros exceed nu for nu >= 1, while for
    # nu < 1 the first zero may sit below 1 (it tends to 0 as nu -> -1),
    # so the mesh has to start essentially at the origin there.
    lo = max(nu, 1.0) if nu >= 1.0 else 1e-3
    brackets = []
    f_lo = special.jv(nu, lo)
    r = lo
    while len(brackets) < count:
        r_next = r + _MESH_STEP
        if r_next > radius_cap:
            raise DomainError(
                f"found only {len(brackets)} zeros of J_{nu} below radius cap {radius_cap}"
            )
        f_next = special.jv(nu, r_next)
        if f_lo == 0.0:
            brackets.append((r - 1e-9, r + 1e-9))
        elif np.sign(f_lo) != np.sign(f_next):
            brackets.append((r, r_next))
        r, f_lo = r_next, f_next
    return brackets


def bessel_zero(nu, n: int, radius_cap: float = _RADIUS_CAP) -> float:
    """n-th positive zero j_{nu,n} of J_nu (n >= 1).

    Half-integer orders +-1/2 return the exact values n*pi and (n-1/2)*pi.
    Otherwise zeros are bracketed on a pi/8 mesh and refined with Brent's
    method; a DomainError is raised if the mesh passes `radius_cap` before
    n sign changes appear.
    """
    nu = _order(nu)
    n = int(n)
    if n < 1:
        raise DomainError("zero index must satisfy n >= 1")
    if _is_half(nu, 0.5):
        return n * np.pi
    if _is_half(nu, -0.5):
        return (n - 0.5) * np.pi
    bracket = _bracket_zeros(nu, n, radius_cap)[n - 1]
    root = optimize.brentq(lambda x: special.jv(nu, x), *bracket, xtol=1e-15, rtol=8.9e-16)
    return float(root)


class BesselTable:
    """Zeros and cached point values of J_nu for one fixed order.

    Immutable in contract: entries are only ever appended, and every stored
    zero satisfies |J_nu(zero)| below `zero_tol` times the local slope scale.
    """

    def __init__(self, order, n_zeros: int = 0, zero_tol: float = 1e-12):
        self.order = order if isinstance(order, BesselOrder) else BesselOrder(float(order))
        self.zero_tol = zero_tol
        self._zeros = []
        self._cache = {}
        if n_zeros:
            self.zero(n_zeros)

    def zero(self, n: int) -> float:
        """j_{nu,n}, extending the stored list as needed."""
        while len(self._zeros) < n:
            z = bessel_zero(self.order, len(self._zeros) + 1)
            if self._zeros and z <= self._zeros[-1]:
                raise DomainError("computed zeros are not strictly increasing")
            slope = abs(special.jvp(self.order.nu, z))
            if abs(bessel_j(self.order, z)) > self.zero_tol * max(slope, 1.0):
                raise DomainError(f"zero refinement failed for nu={self.order.nu}, n={n}")
            self._zeros.append(z)
        return self._zeros[n - 1]

    @property
    def zeros(self):
        return tuple(self._zeros)

    def j(self, r: float) -> float:
        """Cached J_nu(r)."""
        key = float(r)
        if key not in self._cache:
            self._cache[key] = bessel_j(self.order, key)
        return self._cache[key]

    def interlaces(self, other: "BesselTable", n_max: int) -> bool:
        """Check j_{nu,n} < j_{nu+1,n} < j_{nu,n+1} against the order-(nu+1) table."""
        if abs(other.order.nu - self.order.nu - 1.0) > 1e-12:
            raise DomainError("interlacing check expects a table of order nu + 1")
        return all(
            self.zero(n) < other.zero(n) < self.zero(n + 1) for n in range(1, n_max + 1)
        )
