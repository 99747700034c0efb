"""Closed-form data for the straight cylinder B_1 x R/2piZ in R^N x R/2piZ.

For mode index m >= 1 the m-th nonconstant radial Neumann eigenfunction of
the unit ball is U_m(r) = cap_i(N/2-1, j_m r) / cap_i(N/2-1, j_m) with
j_m = j_{N/2,m}, and the first radial Dirichlet eigenfunction is
phi_1(r) = cap_i(N/2-1, j_dir r) with j_dir = j_{N/2-1,1}.  The bifurcation
point of the rescaled problem sits at lambda_m = j_m**2 - j_dir**2 > 0
(positive by zero interlacing), and the first-order expansion of the
bifurcating branch is governed by the four constants

    mu0   = j_m**2 / lambda_m,          kappa = 1 / j_m,
    gamma = -j_dir**2 * I(j_m) * I1(j_dir) / (j_m**2 * I2(j_m)),
    beta  = gamma / sqrt(lambda_m),

where I = cap_i(N/2-1, .), I1 = cap_i(N/2, .) and I2 is the second
derivative of I.  The auxiliary profile g(r) = r U_m'(r) (equal to
-j_m**2 r**2 I1(j_m r)/I(j_m)) satisfies g'(0) = 0, g(1) = 0 and
g'(1) = j_m**2 I2(j_m)/I(j_m); it is what the elimination map subtracts
to trade a boundary profile for an interior function.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InternalConsistencyError
from .specfun import bessel_zero, cap_i, cap_i_deriv

__all__ = ["CylinderModel", "build_cylinder_model", "eval_profiles", "kernel_profile"]


@dataclass(frozen=True)
class CylinderModel:
    N: int
    m: int
    nu: float          # N/2 - 1, the radial order of the profiles
    j_m: float         # j_{N/2, m}
    j_dir: float       # j_{N/2-1, 1}
    lambda_m: float
    mu0: float
    kappa: float
    beta: float
    gamma: float
    c_m: float         # I(j_m) / (j_m^2 I''(j_m)) = 1/g'(1), boundary-trace normalizer
    _den: float        # I_{N/2-1}(j_m), the normalization denominator of U_m

    # -- profile evaluators (vectorized over r) --------------------------

    def U(self, r):
        """Neumann eigenfunction U_m, normalized U_m(1) = 1."""
        return cap_i(self.nu, self.j_m * np.asarray(r, float)) / self._den

    def dU(self, r):
        r = np.asarray(r, float)
        return self.j_m * cap_i_deriv(self.nu, self.j_m * r, 1) / self._den

    def d2U(self, r):
        r = np.asarray(r, float)
        return self.j_m**2 * cap_i_deriv(self.nu, self.j_m * r, 2) / self._den

    def g(self, r):
        """g(r) = r U_m'(r); computed from the Bessel identity, so g(1) = 0 holds
        to the accuracy of the zero j_m itself."""
        r = np.asarray(r, float)
        return -self.j_m**2 * r * r * cap_i(self.nu + 1.0, self.j_m * r) / self._den

    def dg(self, r):
        r = np.asarray(r, float)
        return self.dU(r) + r * self.d2U(r)

    def phi1(self, r):
        """First Dirichlet eigenfunction, phi_1(r) = cap_i(N/2-1, j_dir r)."""
        return cap_i(self.nu, self.j_dir * np.asarray(r, float))

    def dphi1(self, r):
        r = np.asarray(r, float)
        return self.j_dir * cap_i_deriv(self.nu, self.j_dir * r, 1)

    def as_dict(self):
        return {
            "N": self.N,
            "m": self.m,
            "j_m": self.j_m,
            "j_dir": self.j_dir,
            "lambda_m": self.lambda_m,
            "mu0": self.mu0,
            "kappa": self.kappa,
            "beta": self.beta,
            "gamma": self.gamma,
        }


def build_cylinder_model(N: int, m: int) -> CylinderModel:
    """Populate every closed-form quantity for spatial dimension N and mode m."""
    if int(N) != N or N < 1 or int(m) != m or m < 1:
        raise DomainError(f"N and m must be positive integers, got N={N}, m={m}")
    N, m = int(N), int(m)
    nu = 0.5 * N - 1.0
    j_m = bessel_zero(nu + 1.0, m)
    j_dir = bessel_zero(nu, 1)
    lambda_m = j_m**2 - j_dir**2
    if lambda_m <= 0:
        raise InternalConsistencyError("zero interlacing violated: lambda_m <= 0")
    den = float(cap_i(nu, j_m))
    i2 = float(cap_i_deriv(nu, j_m, 2))
    x = j_dir**2 * den * float(cap_i(nu + 1.0, j_dir)) / (j_m**2 * i2)
    gamma = -x
    beta = gamma / np.sqrt(lambda_m)
    return CylinderModel(
        N=N,
        m=m,
        nu=nu,
        j_m=float(j_m),
        j_dir=float(j_dir),
        lambda_m=float(lambda_m),
        mu0=float(j_m**2 / lambda_m),
        kappa=float(1.0 / j_m),
        beta=float(beta),
        gamma=float(gamma),
        c_m=float(den / (j_m**2 * i2)),
        _den=den,
    )


def eval_profiles(model: CylinderModel, r):
    """(U_m(r), U_m'(r), g(r), phi_1(r)) for 0 <= r <= 1.

    g is evaluated through both of its closed forms, r*U_m'(r) and
    -j_m^2 r^2 cap_i(N/2, j_m r)/cap_i(N/2-1, j_m); disagreement beyond
    rounding means the special-function layer is broken, so it raises.
    """
    r = np.asarray(r, float)
    if np.any(r < 0) or np.any(r > 1):
        raise DomainError("profiles are defined on 0 <= r <= 1")
    u = model.U(r)
    du = model.dU(r)
    g_bessel = model.g(r)
    g_direct = r * du
    if np.max(np.abs(g_bessel - g_direct)) > 1e-11:
        raise InternalConsistencyError("the two closed forms of g disagree")
    return u, du, g_bessel, model.phi1(r)


def kernel_profile(model: CylinderModel, r):
    """Radial factor cap_i(N/2-1, j_dir r) of the bifurcation kernel; zero at r=1."""
    r = np.asarray(r, float)
    if np.any(r < 0) or np.any(r > 1):
        raise DomainError("kernel profile is defined on 0 <= r <= 1")
    return model.phi1(r)
