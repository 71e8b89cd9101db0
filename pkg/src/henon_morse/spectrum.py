"""Negative spectrum of the singular linearized operator, two ways.

The linearization of the nodal problem at a solution u carries the singular
eigenvalue problem

    -(psi'' + psi'/r) - p r^alpha |u|^(p-1) psi  =  lambda psi / r^2

on (0, 1) with psi(1) = 0.  The substitution t = log r removes both the
1/r and the 1/r^2 singularities at once and turns the problem into a
regular Schrodinger eigenproblem on a half-line,

    -psi_tt + V(t) psi = lambda psi,      V(t) = -p e^((alpha+2) t) |u(e^t)|^(p-1),

with V <= 0 decaying like e^((alpha+2)t) as t -> -infinity.  Truncating at
t = -T with Dirichlet conditions costs an exponentially small perturbation
of the negative eigenvalues.  This module computes:

* ``negative_spectrum``: all negative eigenvalues lambda_1 < ... < lambda_J
  of the truncated problem, by three-point finite differences with
  Sturm-count certification and Richardson extrapolation in the mesh;

* ``radial_morse_index``: the count of negative eigenvalues of the regular
  radial linearized operator (no 1/r^2 weight) by finite element inertia
  in r-coordinates;

* ``mode_negative_count``: for an angular mode k >= 1, the count of
  negative eigenvalues of the k-mode operator (the radial operator plus
  k^2/r^2), again by inertia in r-coordinates on a geometric mesh.

The r-coordinate counts share no discretization machinery with the
t-coordinate route, which is what makes the cross-validation in the Morse
assembly meaningful.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .config import DEFAULT, Settings
from .errors import NonConvergenceError, UsageError
from .radial import RadialProfile, evaluate_profile

__all__ = [
    "SchrodingerProblem",
    "RadialSpectrum",
    "build_schrodinger",
    "negative_spectrum",
    "fd_negative_eigenvalues",
    "radial_morse_index",
    "mode_negative_count",
    "tridiagonal_negative_inertia",
]

# Mesh-refinement caps: eigenvalue extrapolation may double M at most this
# many times; inertia counts may refine their mesh this many times.
_MAX_EIG_LEVELS = 5
_MAX_INERTIA_LEVELS = 4

# 4-point Gauss-Legendre rule on [0, 1], used for element integrals.
_GX = 0.5 * (1.0 + np.array([-0.8611363115940526, -0.3399810435848563,
                             0.3399810435848563, 0.8611363115940526]))
_GW = 0.5 * np.array([0.3478548451374538, 0.6521451548625461,
                      0.6521451548625461, 0.3478548451374538])


@dataclass
class SchrodingerProblem:
    """Truncated log-variable eigenproblem on t in [-T, 0], Dirichlet ends.

    ``V`` holds the potential at the M+1 nodes of ``grid_t``; ``potential``
    is the underlying callable, kept so refinement can resample it on finer
    meshes.  ``corners`` lists t-locations where the potential is continuous
    but not smooth (for a nodal profile, the logs of the interior nodal
    radii: |u|^(p-1) has a kink wherever u crosses zero unless p-1 is an
    even integer).  Discretizations pin these points into the mesh; leaving
    a kink in a cell interior makes the h^2 error constant depend on the
    kink's offset within the cell, which defeats Richardson extrapolation.
    """

    T: float
    M: int
    grid_t: np.ndarray
    V: np.ndarray
    potential: Callable = field(repr=False)
    corners: tuple = ()

    @classmethod
    def from_potential(cls, T: float, M: int, potential: Callable,
                       corners: tuple = ()) -> "SchrodingerProblem":
        if not (T > 0.0 and math.isfinite(T)):
            raise UsageError(f"T must be finite and > 0, got {T}")
        if M < 4:
            raise UsageError(f"M must be at least 4, got {M}")
        corners = tuple(sorted(float(c) for c in corners if -T < c < 0.0))
        grid_t = _fd_mesh(T, M, corners)
        V = np.asarray(potential(grid_t), dtype=float)
        if np.any(V > 1e-9):
            raise UsageError(
                "potential must be nonpositive",
                {"max_V": float(V.max())},
            )
        return cls(T=T, M=M, grid_t=grid_t, V=V, potential=potential,
                   corners=corners)


def build_schrodinger(profile: RadialProfile, settings: Settings = DEFAULT) -> SchrodingerProblem:
    """Build the truncated log-variable problem for a nodal profile.

    T is chosen from the bound |V(t)| <= p d^(p-1) e^((alpha+2)t) so that
    |V(-T)| <= truncation_tol, then verified on the actual potential and
    enlarged if needed.
    """
    alpha = profile.params.alpha
    p = profile.params.p
    d = profile.d

    def potential(t):
        t = np.asarray(t, dtype=float)
        r = np.exp(np.minimum(t, 0.0))
        u, _ = evaluate_profile(profile, r)
        return -p * np.exp((alpha + 2.0) * t) * np.abs(u) ** (p - 1.0)

    tol = settings.truncation_tol
    T = (math.log(p) + (p - 1.0) * math.log(d) - math.log(tol)) / (alpha + 2.0)
    T = max(T, 5.0)
    for _ in range(4):
        if abs(float(potential(np.array([-T]))[0])) <= tol:
            break
        T += 5.0
    else:
        raise NonConvergenceError(
            "could not truncate the potential below truncation_tol",
            {"T": T, "V_at_minus_T": float(potential(np.array([-T]))[0])},
        )
    corners = tuple(math.log(z) for z in profile.nodal_radii[:-1])
    return SchrodingerProblem.from_potential(
        T, settings.schrodinger_intervals, potential, corners=corners)


def _fd_mesh(T: float, M: int, corners: tuple) -> np.ndarray:
    """Uniform M-cell mesh on [-T, 0] with each corner swapped in for its
    nearest interior node.  Node count stays M + 1 and cell widths stay
    within a factor of 3/2 of uniform, so the assembly below keeps its
    clean h^2 behaviour while the potential is smooth inside every cell."""
    t = np.linspace(-T, 0.0, M + 1)
    if not corners:
        return t
    h = T / M
    idx = []
    for c in corners:
        i = int(round((c + T) / h))
        i = min(max(i, 1), M - 1)
        while i in idx:
            i += 1
        if i >= M:
            raise UsageError("too many potential corners for this mesh",
                             {"M": int(M), "corners": len(corners)})
        idx.append(i)
        t[i] = c
    if np.any(np.diff(t) <= 0.0):
        raise UsageError("potential corners too close together for this mesh",
                         {"M": int(M), "corners": len(corners)})
    return t


def fd_negative_eigenvalues(problem: SchrodingerProblem, M: int | None = None) -> np.ndarray:
    """Raw negative eigenvalues of the M-cell discretization (no
    extrapolation).  The scheme is mass-lumped P1 on the corner-pinned mesh,
    symmetrized by the lumped mass into a standard tridiagonal problem; on a
    uniform mesh it is exactly the classical three-point stencil
    (2/h^2 + V_i on the diagonal, -1/h^2 off).  Eigenvalues are located by
    Sturm-sequence bisection restricted to [min V, 0)."""
    if M is None:
        M = problem.M
    t = _fd_mesh(problem.T, M, problem.corners)
    h = np.diff(t)
    v = np.asarray(problem.potential(t[1:-1]), dtype=float)
    mass = 0.5 * (h[:-1] + h[1:])
    diag = (1.0 / h[:-1] + 1.0 / h[1:]) / mass + v
    off = (-1.0 / h[1:-1]) / np.sqrt(mass[:-1] * mass[1:])
    lo = min(float(v.min()), 0.0) - 1e-9 * (1.0 + abs(float(v.min())))
    w = eigh_tridiagonal(diag, off, eigvals_only=True, select="v",
                         select_range=(lo, 0.0))
    w = w[w < 0.0]
    # certification: the Sturm count at shift 0 must agree
    certified = tridiagonal_negative_inertia(diag, off)
    if certified != w.size:
        raise NonConvergenceError(
            "Sturm count at shift 0 disagrees with located eigenvalues",
            {"certified": int(certified), "located": int(w.size), "M": int(M)},
        )
    if w.size > 1 and np.any(np.diff(w) <= 0.0):
        raise NonConvergenceError("negative eigenvalues are not strictly increasing")
    return w


@dataclass(frozen=True)
class RadialSpectrum:
    """All negative eigenvalues of the truncated log-variable problem.

    ``lambdas`` are Richardson-extrapolated to the accuracy target
    eig_tol * (1 + |lambda|); ``M`` records the finest mesh used.
    """

    lambdas: np.ndarray
    T: float
    M: int
    eig_tol: float

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        object.__setattr__(self, "lambdas", lam)
        if lam.size and not (np.all(lam < 0.0) and np.all(np.diff(lam) > 0.0)):
            raise UsageError("lambdas must be strictly increasing and negative")

    def to_dict(self) -> dict:
        return {
            "lambdas": [float(x) for x in self.lambdas],
            "T": self.T,
            "M": self.M,
            "eig_tol": self.eig_tol,
        }


def negative_spectrum(problem: SchrodingerProblem, settings: Settings = DEFAULT) -> RadialSpectrum:
    """All negative eigenvalues, extrapolated until mesh-converged.

    Solves the FD problem at M, 2M, 4M, ...; successive pairs give
    Richardson extrapolants (the FD error is h^2-regular), and the loop
    stops when two consecutive extrapolants agree to
    eig_tol * (1 + |lambda|) elementwise with identical counts.  A count
    that keeps changing, or failure to meet the tolerance within the level
    budget, raises NonConvergenceError rather than returning a guess.
    """
    eig_tol = settings.eig_tol
    M = problem.M
    lam_prev = fd_negative_eigenvalues(problem, M)
    rich_prev = None
    for _ in range(_MAX_EIG_LEVELS):
        M *= 2
        lam = fd_negative_eigenvalues(problem, M)
        if lam.size != lam_prev.size:
            lam_prev, rich_prev = lam, None
            continue
        rich = (4.0 * lam - lam_prev) / 3.0
        if rich_prev is not None and rich.size == rich_prev.size:
            if rich.size == 0 or np.all(
                np.abs(rich - rich_prev) <= eig_tol * (1.0 + np.abs(rich))
            ):
                return RadialSpectrum(lambdas=rich, T=problem.T, M=M, eig_tol=eig_tol)
        lam_prev, rich_prev = lam, rich
    raise NonConvergenceError(
        "negative eigenvalues did not stabilize under mesh refinement",
        {"T": problem.T, "finest_M": int(M),
         "last_counts": int(lam_prev.size)},
    )


def tridiagonal_negative_inertia(diag: np.ndarray, off: np.ndarray) -> int:
    """Number of negative eigenvalues of a symmetric tridiagonal matrix.

    Plain LDL^T recursion (a Sturm sequence): the signs of the pivots
    d_i = a_i - b_{i-1}^2 / d_{i-1} count the eigenvalues below the shift
    already applied to ``diag``.  Pivots too close to zero are clamped to
    a tiny magnitude, preserving their sign.
    """
    diag = np.asarray(diag, dtype=float)
    off = np.asarray(off, dtype=float)
    if diag.size == 0:
        return 0
    if off.size != diag.size - 1:
        raise UsageError("off-diagonal must have length len(diag) - 1")
    pivmin = 1e-30 * max(1.0, float(np.max(off**2))) if off.size else 1e-300
    count = 0
    d = float(diag[0])
    if d < 0.0:
        count += 1
    for i in range(1, diag.size):
        denom = d if abs(d) > pivmin else math.copysign(pivmin, d if d != 0.0 else -1.0)
        d = float(diag[i]) - float(off[i - 1]) ** 2 / denom
        if d < 0.0:
            count += 1
    return count


def _insert_points(base: np.ndarray, extra) -> np.ndarray:
    """Insert radii into a mesh, replacing the nearest node when closer
    than a quarter of the local gap (so spacing never degenerates)."""
    pts = list(base)
    for z in extra:
        z = float(z)
        if z <= pts[0] or z >= pts[-1]:
            continue
        i = int(np.searchsorted(pts, z))
        gap = pts[i] - pts[i - 1]
        if z - pts[i - 1] < 0.25 * gap and i - 1 > 0:
            pts[i - 1] = z
        elif pts[i] - z < 0.25 * gap and i < len(pts) - 1:
            pts[i] = z
        else:
            pts.insert(i, z)
    return np.asarray(pts)


def _mode_form_tridiagonal(
    nodes: np.ndarray,
    profile: RadialProfile,
    k2: float,
) -> tuple[np.ndarray, np.ndarray]:
    """P1 finite-element tridiagonal of the k-mode quadratic form.

    Assembles  a(psi, phi) = int r psi' phi'  +  k2 int psi phi / r
               - p int r^(1+alpha) |u|^(p-1) psi phi
    over all nodes (boundary conditions are applied by the caller slicing
    rows off).  The stiffness element integral int r / h^2 dr is exact;
    the zeroth-order terms use a 4-point Gauss rule per element.
    """
    alpha = profile.params.alpha
    p = profile.params.p
    h = np.diff(nodes)
    stiff = (nodes[:-1] + nodes[1:]) / (2.0 * h)

    pts = nodes[:-1, None] + h[:, None] * _GX[None, :]
    u = profile._spline(pts)
    weight = -p * pts ** (1.0 + alpha) * np.abs(u) ** (p - 1.0)
    if k2:
        weight = weight + k2 / pts
    phi_l = 1.0 - _GX
    phi_r = _GX
    ll = h * ((weight * phi_l**2) @ _GW)
    lr = h * ((weight * phi_l * phi_r) @ _GW)
    rr = h * ((weight * phi_r**2) @ _GW)

    diag = np.zeros(nodes.size)
    diag[:-1] += stiff + ll
    diag[1:] += stiff + rr
    off = -stiff + lr
    return diag, off


def radial_morse_index(profile: RadialProfile, settings: Settings = DEFAULT) -> int:
    """Negative-eigenvalue count of the regular radial linearized operator.

    Weak form int r psi' phi' - p int r^(1+alpha) |u|^(p-1) psi phi on
    radial H^1 functions vanishing at r = 1 (natural condition at r = 0,
    so the origin node is retained).  The count is the matrix inertia; the
    positive-definite r-weighted mass never changes signs, so no pencil
    solve is needed.  The mesh is uniform with the nodal radii inserted,
    and the count must agree on two consecutive refinements.
    """
    counts = []
    cells = settings.radial_mesh_cells
    for level in range(_MAX_INERTIA_LEVELS):
        base = np.linspace(0.0, 1.0, cells * 2**level + 1)
        nodes = _insert_points(base, profile.nodal_radii[:-1])
        diag, off = _mode_form_tridiagonal(nodes, profile, k2=0.0)
        count = tridiagonal_negative_inertia(diag[:-1], off[:-1])
        counts.append(count)
        if len(counts) >= 2 and counts[-1] == counts[-2]:
            return count
    raise NonConvergenceError(
        "radial inertia count did not stabilize under mesh refinement",
        {"counts": counts, "alpha": profile.params.alpha,
         "p": profile.params.p, "n_nodal": profile.params.n_nodal},
    )


def mode_negative_count(profile: RadialProfile, k: int, settings: Settings = DEFAULT) -> int:
    """Negative-eigenvalue count of the angular-mode-k radial operator.

    The k-mode operator adds k^2/r^2 to the radial operator; its form is
    assembled in r-coordinates on a mesh geometric toward the origin
    (nodes at ratio ``mode_mesh_ratio`` from 1 down to ``mode_mesh_rmin``,
    Dirichlet at both ends -- the k^2/r^2 term forces decay at 0).  This
    route shares nothing with the log-variable discretization, making it
    an independent check on the eigenvalue decomposition.
    """
    if not (isinstance(k, int) and k >= 1):
        raise UsageError(f"k must be an integer >= 1, got {k}")
    counts = []
    for level in range(_MAX_INERTIA_LEVELS):
        step = math.log(settings.mode_mesh_ratio) / 2**level
        n_geo = int(math.ceil(-math.log(settings.mode_mesh_rmin) / step))
        base = np.exp(-step * np.arange(n_geo + 1))[::-1]
        base[0] = settings.mode_mesh_rmin
        base[-1] = 1.0
        nodes = _insert_points(base, profile.nodal_radii[:-1])
        diag, off = _mode_form_tridiagonal(nodes, profile, k2=float(k * k))
        count = tridiagonal_negative_inertia(diag[1:-1], off[1:-1])
        counts.append(count)
        if len(counts) >= 2 and counts[-1] == counts[-2]:
            return count
    raise NonConvergenceError(
        "mode inertia count did not stabilize under mesh refinement",
        {"counts": counts, "k": k, "alpha": profile.params.alpha,
         "p": profile.params.p, "n_nodal": profile.params.n_nodal},
    )
