"""Spectral diagnostics of the linearized reduced map at the trivial branch.

The linearization at u = 0 is the constant-coefficient operator
L_lam v = j_m^2 v + lam v_xx + Lap_t v, block-diagonal over cosine modes:
mode ell sees the radial operator Lap_t + (j_m^2 - lam ell^2) Id with a
Dirichlet condition at r = 1 and an even-symmetry (Neumann) condition at
r = 0.  Its kernel is nontrivial exactly when j_m^2 - ell^2 lam hits a
radial Dirichlet eigenvalue j_{N/2-1,k}^2 of the unit ball, which at
lam = lambda_m happens only for (ell, k) = (1, 1); there the kernel is
spanned by cap_i(N/2-1, j_dir r) cos(x) and the lam-derivative of the
operator acts on it as -Id, giving the strictly negative transversality
number -||v*||^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cylinder import CylinderModel
from .errors import DomainError
from .fields import Grid2D

__all__ = [
    "ModeOperator",
    "SpectralReport",
    "assemble_linearized",
    "kernel_scan",
    "transversality",
    "laplace_matrix",
]


def laplace_matrix(grid: Grid2D) -> np.ndarray:
    """Dense radial Laplacian D2 + (N-1) diag(1/r) D1 with the even limit
    N u''(0) in the first row."""
    rad = grid.radial
    A = rad.D2.copy()
    if rad.N > 1:
        A[0] = rad.N * rad.D2[0]
        A[1:] += (rad.N - 1) / rad.r[1:, None] * rad.D1[1:]
    return A


@dataclass
class ModeOperator:
    """One cosine-mode block of the linearized operator.

    `pde_matrix` evaluates the differential operator at every node;
    `matrix` is the solvable bordered version with the even-symmetry row
    u'(0) = 0 on top and the Dirichlet row u(1) = 0 at the bottom.
    """

    ell: int
    lam: float
    matrix: np.ndarray
    pde_matrix: np.ndarray


@dataclass
class SpectralReport:
    lam: float
    smallest_singular: np.ndarray        # per mode, ell = 0..L
    kernel_tol: float
    kernel_count: int
    kernel_mode: int | None = None
    kernel_vector: np.ndarray | None = None   # unit weighted-L2 norm, positive at r=0
    transversality: float | None = None

    def as_dict(self):
        return {
            "lambda": self.lam,
            "kernel_tol": self.kernel_tol,
            "kernel_count": self.kernel_count,
            "kernel_mode": self.kernel_mode,
            "smallest_singular_values": [float(s) for s in self.smallest_singular],
            "kernel_vector": None
            if self.kernel_vector is None
            else [float(v) for v in self.kernel_vector],
            "transversality": self.transversality,
        }


def assemble_linearized(grid: Grid2D, model: CylinderModel, lam: float):
    """Mode blocks of L_lam = Lap_t - lam (f0 ell)^2 + j_m^2 for ell = 0..L."""
    if lam <= 0:
        raise DomainError("assemble_linearized expects lam > 0")
    rad = grid.radial
    lap = laplace_matrix(grid)
    eye = np.eye(rad.K + 1)
    ops = []
    for ell in range(grid.xb.L + 1):
        wn = grid.xb.wavenumbers[ell]
        pde = lap + (model.j_m**2 - lam * wn**2) * eye
        bordered = pde.copy()
        bordered[0] = rad.D1[0]
        bordered[-1] = 0.0
        bordered[-1, -1] = 1.0
        ops.append(ModeOperator(ell=ell, lam=lam, matrix=bordered, pde_matrix=pde))
    return ops


def kernel_scan(grid: Grid2D, model: CylinderModel, lam: float, tol: float = 1e-7) -> SpectralReport:
    """Per-mode smallest singular values of the bordered blocks; kernel data.

    When exactly one block is singular at tolerance `tol`, the corresponding
    right singular vector is reported, normalized to unit weighted L2 norm
    with a positive value at r = 0.
    """
    if tol <= 0:
        raise DomainError("kernel tolerance must be positive")
    ops = assemble_linearized(grid, model, lam)
    smallest = np.empty(len(ops))
    vectors = []
    for k, op in enumerate(ops):
        _, s, vt = np.linalg.svd(op.matrix)
        smallest[k] = s[-1]
        vectors.append(vt[-1])
    below = np.flatnonzero(smallest < tol)
    report = SpectralReport(
        lam=lam, smallest_singular=smallest, kernel_tol=tol, kernel_count=int(below.size)
    )
    if below.size == 1:
        mode = int(below[0])
        v = vectors[mode]
        norm = np.sqrt(grid.xb.c_factors[mode] * grid.radial.integrate(v * v))
        v = v / norm
        if v[0] < 0:
            v = -v
        report.kernel_mode = mode
        report.kernel_vector = v
    return report


def transversality(grid: Grid2D, model: CylinderModel, dlam: float = 1e-4) -> float:
    """<v*, d/dlam L_lam v*> at lam = lambda_m, which equals -||v*||^2.

    Computed both in closed form (the lam-derivative acts as -Id on the
    mode-1 kernel) and by central finite differences of the assembled mode
    blocks; the two must agree to 1e-6 relative or the assembly is broken.
    """
    scan = kernel_scan(grid, model, model.lambda_m)
    if scan.kernel_count != 1:
        raise DomainError(
            f"transversality needs a one-dimensional kernel, scan found {scan.kernel_count}"
        )
    phi = model.phi1(grid.radial.r)
    norm2 = grid.xb.c_factors[1] * grid.radial.integrate(phi * phi)
    analytic = -norm2

    plus = assemble_linearized(grid, model, model.lambda_m + dlam)[1].pde_matrix
    minus = assemble_linearized(grid, model, model.lambda_m - dlam)[1].pde_matrix
    dvec = (plus - minus) @ phi / (2.0 * dlam)
    fd = grid.xb.c_factors[1] * grid.radial.integrate(phi * dvec)
    if abs(fd - analytic) > 1e-6 * abs(analytic):
        raise DomainError(
            f"transversality cross-check failed: analytic {analytic}, finite difference {fd}"
        )
    return float(analytic)
