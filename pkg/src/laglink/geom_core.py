"""Sampled curves and surfaces in R^4 = C^2 with the standard symplectic form.

Coordinates are ``(x1, y1, x2, y2)`` with ``z_k = x_k + i y_k``, the symplectic
form is ``dx1^dy1 + dx2^dy2`` and the Liouville primitive is ``x1 dy1 + x2 dy2``.

Closed curves are uniform cyclic sample arrays over a parameter in ``[0, 1)``.
Derivatives along a closed parameter are spectral (FFT) by default, which is
exact up to rounding for band-limited data; ``method="central"`` gives the
plain second-order central difference.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import (
    DegenerateFrame,
    NonFiniteInput,
    NonPositiveRadius,
    NotImmersed,
    OpenCurve,
    PointOnCurve,
)

MIN_SAMPLES = 8
IMMERSION_REL = 1e-8
CONSTANT_REL = 1e-12
GRAM_TOL = 1e-10


# ---------------------------------------------------------------------------
# periodic calculus


def periodic_derivative(f: np.ndarray, axis: int = 0, method: str = "spectral") -> np.ndarray:
    """d/ds of samples ``f(i/N)`` taken over one period ``s in [0, 1)``."""
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    if method == "central":
        return (np.roll(f, -1, axis=axis) - np.roll(f, 1, axis=axis)) * (n / 2.0)
    if method != "spectral":
        raise ValueError(f"unknown derivative method {method!r}")
    k = _wavenumbers(n, f.ndim, axis)
    return np.real(np.fft.ifft(2j * np.pi * k * np.fft.fft(f, axis=axis), axis=axis))


def periodic_antiderivative(f: np.ndarray, axis: int = 0) -> np.ndarray:
    """Spectral antiderivative of the zero-mean part of ``f``, vanishing at s=0.

    The discarded mean is what a closed curve cannot absorb; callers compare it
    against a tolerance separately.
    """
    f = np.asarray(f, dtype=float)
    n = f.shape[axis]
    k = _wavenumbers(n, f.ndim, axis)
    fh = np.fft.fft(f, axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        gh = np.where(k == 0, 0.0, fh / (2j * np.pi * np.where(k == 0, 1.0, k)))
    g = np.real(np.fft.ifft(gh, axis=axis))
    return g - np.take(g, [0], axis=axis)


def _wavenumbers(n: int, ndim: int, axis: int) -> np.ndarray:
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0  # drop the Nyquist mode so derivatives stay real
    shape = [1] * ndim
    shape[axis] = n
    return k.reshape(shape)


def omega(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Standard symplectic pairing of vectors stored in the last axis."""
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0] + u[..., 2] * v[..., 3] - u[..., 3] * v[..., 2]


def _check_finite(a: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(a)):
        raise NonFiniteInput(f"{what} contains non-finite values")


def diameter(points: np.ndarray) -> float:
    """Bounding-box diagonal; a cheap stand-in for the true diameter."""
    return float(np.linalg.norm(np.ptp(points, axis=0)))


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class Point4:
    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        _check_finite(np.array([self.x1, self.y1, self.x2, self.y2], dtype=float), "Point4")

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.y1, self.x2, self.y2])

    @property
    def z1(self) -> complex:
        return complex(self.x1, self.y1)

    @property
    def z2(self) -> complex:
        return complex(self.x2, self.y2)


@dataclass(frozen=True, eq=False)
class SampledCurve2:
    samples: np.ndarray
    closed: bool = True

    def __post_init__(self) -> None:
        a = np.array(self.samples, dtype=float)
        if a.ndim != 2 or a.shape[1] != 2:
            raise ValueError(f"expected an (N, 2) array, got shape {a.shape}")
        if a.shape[0] < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {a.shape[0]}")
        _check_finite(a, "curve")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def reversed(self) -> "SampledCurve2":
        return SampledCurve2(np.roll(self.samples[::-1], 1, axis=0), self.closed)

    def translated(self, dx: float, dy: float) -> "SampledCurve2":
        return SampledCurve2(self.samples + np.array([dx, dy]), self.closed)


@dataclass(frozen=True, eq=False)
class SampledLoop4:
    samples: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.samples, dtype=float)
        if a.ndim != 2 or a.shape[1] != 4:
            raise ValueError(f"expected an (N, 4) array, got shape {a.shape}")
        if a.shape[0] < MIN_SAMPLES:
            raise ValueError(f"need at least {MIN_SAMPLES} samples, got {a.shape[0]}")
        _check_finite(a, "loop")
        a.setflags(write=False)
        object.__setattr__(self, "samples", a)

    def __len__(self) -> int:
        return self.samples.shape[0]

    def point(self, i: int) -> Point4:
        return Point4(*self.samples[i])

    def reversed(self) -> "SampledLoop4":
        # keep sample 0 fixed so parameter 0 stays at the same point
        return SampledLoop4(np.roll(self.samples[::-1], 1, axis=0))

    def projection(self, plane: int) -> SampledCurve2:
        """Projection to the (x1, y1) plane (``plane=1``) or (x2, y2) plane (``plane=2``)."""
        cols = {1: [0, 1], 2: [2, 3]}[plane]
        return SampledCurve2(self.samples[:, cols])


@dataclass(frozen=True, eq=False)
class LagrangianSurface:
    """Sampled map (s, t) -> R^4.

    ``grid`` has shape ``(N_s, N_t, 4)``; s is always cyclic with period 1.
    ``t_values`` are the t parameters of the columns; for ``kind="torus"`` the
    t direction is cyclic with period ``t_period`` and uniform spacing.
    """

    grid: np.ndarray
    kind: str
    t_values: np.ndarray
    t_period: float | None = None
    lagrangian_defect: float = field(default=float("nan"))
    embedded_certificate: bool = False
    metadata: dict[str, Any] = field(default_factory=dict)
    t_method: str = "central"

    def __post_init__(self) -> None:
        g = np.array(self.grid, dtype=float)
        if g.ndim != 3 or g.shape[2] != 4:
            raise ValueError(f"grid must be (N_s, N_t, 4), got {g.shape}")
        _check_finite(g, "surface grid")
        if self.kind not in ("cylinder", "torus"):
            raise ValueError(f"kind must be cylinder or torus, got {self.kind!r}")
        if self.kind == "torus" and self.t_period is None:
            raise ValueError("a torus needs t_period")
        tv = np.array(self.t_values, dtype=float)
        if tv.shape != (g.shape[1],):
            raise ValueError("t_values length must equal N_t")
        g.setflags(write=False)
        tv.setflags(write=False)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "t_values", tv)

    @property
    def n_s(self) -> int:
        return self.grid.shape[0]

    @property
    def n_t(self) -> int:
        return self.grid.shape[1]

    def tangents(self) -> tuple[np.ndarray, np.ndarray]:
        """Discrete partials (d/ds, d/dt) at every grid point."""
        ds = periodic_derivative(self.grid, axis=0)
        if self.kind == "torus":
            dt = periodic_derivative(self.grid, axis=1, method=self.t_method) / self.t_period
        else:
            dt = np.gradient(self.grid, self.t_values, axis=1, edge_order=2)
        return ds, dt

    def s_loop(self, j: int) -> SampledLoop4:
        return SampledLoop4(self.grid[:, j, :])

    def t_loop(self, i: int) -> SampledLoop4:
        if self.kind != "torus":
            raise ValueError("t-loops are closed only on tori")
        return SampledLoop4(self.grid[i, :, :])


def make_surface(
    grid: np.ndarray,
    kind: str,
    t_values: np.ndarray,
    t_period: float | None = None,
    metadata: dict[str, Any] | None = None,
    frames_simple: bool = True,
    t_method: str = "central",
) -> LagrangianSurface:
    """Build a surface and fill in its defect and embedding certificate.

    ``frames_simple`` carries the caller's per-frame simplicity verdict; the
    certificate also needs the grid-distance sanity check to pass. ``t_method``
    picks the t-derivative on tori; spectral suits smooth data only.
    """
    surf = LagrangianSurface(grid, kind, t_values, t_period, metadata=dict(metadata or {}), t_method=t_method)
    ds, dt = surf.tangents()
    defect = float(np.max(np.abs(omega(ds, dt))))
    embedded = frames_simple and grid_embedding_sanity(surf.grid, periodic_t=(kind == "torus"))
    object.__setattr__(surf, "lagrangian_defect", defect)
    object.__setattr__(surf, "embedded_certificate", embedded)
    return surf


def grid_embedding_sanity(grid: np.ndarray, periodic_t: bool) -> bool:
    """True when no two grid points that are not parameter neighbours come
    closer than half the smallest neighbour spacing."""
    ns, nt, _ = grid.shape
    ds = np.linalg.norm(np.roll(grid, -1, axis=0) - grid, axis=-1)
    if periodic_t:
        dtt = np.linalg.norm(np.roll(grid, -1, axis=1) - grid, axis=-1)
    else:
        dtt = np.linalg.norm(np.diff(grid, axis=1), axis=-1)
    spacing = min(float(ds.min()), float(dtt.min()))
    if spacing <= 0.0:
        return False
    tree = cKDTree(grid.reshape(-1, 4))
    pairs = tree.query_pairs(0.5 * spacing, output_type="ndarray")
    if len(pairs) == 0:
        return True
    i0, j0 = np.divmod(pairs[:, 0], nt)
    i1, j1 = np.divmod(pairs[:, 1], nt)
    di = np.abs(i0 - i1)
    di = np.minimum(di, ns - di)
    dj = np.abs(j0 - j1)
    if periodic_t:
        dj = np.minimum(dj, nt - dj)
    return bool(np.all((di <= 1) & (dj <= 1)))


# ---------------------------------------------------------------------------
# integrals


def liouville_integral(loop: SampledLoop4, method: str = "spectral") -> float:
    """Loop integral of x1 dy1 + x2 dy2 (trapezoid rule in the loop parameter)."""
    p = np.asarray(loop.samples, dtype=float)
    _check_finite(p, "loop")
    dp = periodic_derivative(p, axis=0, method=method)
    return float(np.mean(p[:, 0] * dp[:, 1] + p[:, 2] * dp[:, 3]))


def plane_liouville_area(curve: SampledCurve2, method: str = "spectral") -> float:
    """Loop integral of x dy over a closed plane curve (its signed enclosed area)."""
    if not curve.closed:
        raise OpenCurve("plane_liouville_area needs a closed curve")
    p = curve.samples
    # centre first: harmless analytically, and it keeps rounding independent of translation
    p = p - p.mean(axis=0)
    dy = periodic_derivative(p[:, 1], method=method)
    return float(np.mean(p[:, 0] * dy))


# ---------------------------------------------------------------------------
# winding numbers


def _wrapped_increments(angles: np.ndarray) -> np.ndarray:
    d = np.diff(np.append(angles, angles[0]))
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def is_constant(points: np.ndarray) -> bool:
    scale = 1.0 + float(np.max(np.abs(points)))
    return diameter(points) <= CONSTANT_REL * scale


def rotation_number(curve: SampledCurve2) -> int:
    """Winding number of the discrete tangent direction (edge vectors)."""
    if not curve.closed:
        raise OpenCurve("rotation_number needs a closed curve")
    p = curve.samples
    if is_constant(p):
        return 0
    n = len(p)
    edges = np.roll(p, -1, axis=0) - p
    speed = np.linalg.norm(edges, axis=1) * n
    if float(speed.min()) < IMMERSION_REL * diameter(p):
        raise NotImmersed(f"discrete speed {speed.min():.3g} below the immersion threshold")
    ang = np.arctan2(edges[:, 1], edges[:, 0])
    turn = _wrapped_increments(ang)
    if np.any(np.abs(turn) > np.pi * (1.0 - 1e-9)):
        raise NotImmersed("tangent reverses between consecutive samples (cusp)")
    return int(round(turn.sum() / (2.0 * np.pi)))


def line_rotation_number(curve: SampledCurve2) -> float:
    """Winding of the unoriented tangent line, counted in full turns.

    Stationary samples are skipped, so a curve that runs back and forth along a
    segment gets 0 where :func:`rotation_number` would refuse it. For immersed
    curves it agrees with :func:`rotation_number`.
    """
    p = curve.samples
    if is_constant(p):
        return 0.0
    n = len(p)
    edges = np.roll(p, -1, axis=0) - p
    speed = np.linalg.norm(edges, axis=1) * n
    moving = speed >= IMMERSION_REL * diameter(p)
    ang2 = 2.0 * np.arctan2(edges[moving, 1], edges[moving, 0])
    return float(np.round(_wrapped_increments(ang2).sum() / (2.0 * np.pi)) / 2.0)


def _point_segment_distance(p: np.ndarray, q: np.ndarray) -> float:
    a = p
    b = np.roll(p, -1, axis=0)
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.clip(np.einsum("ij,ij->i", q - a, ab) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(closest - q, axis=1)))


def winding_number(curve: SampledCurve2, point: Sequence[float], tol: float | None = None) -> int:
    """Winding number of the closed polygon through the samples around ``point``."""
    p = curve.samples
    q = np.asarray(point, dtype=float)
    _check_finite(q, "point")
    if tol is None:
        tol = 1e-10 * max(diameter(p), 1.0)
    if _point_segment_distance(p, q) <= tol:
        raise PointOnCurve(f"point {tuple(q)} lies on the curve")
    d = p - q
    ang = np.arctan2(d[:, 1], d[:, 0])
    return int(round(_wrapped_increments(ang).sum() / (2.0 * np.pi)))


# ---------------------------------------------------------------------------
# Maslov index


def _as_complex_frame(v: np.ndarray) -> np.ndarray:
    return np.stack([v[..., 0] + 1j * v[..., 1], v[..., 2] + 1j * v[..., 3]], axis=-1)


def unitary_frame_det2(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """det^2 of the Hermitian Gram-Schmidt unitarization of the frame {u, v}.

    ``u`` and ``v`` are real 4-vectors in the last axis. For a Lagrangian
    plane the result depends only on the plane, not on the chosen basis.
    """
    a = _as_complex_frame(np.asarray(u, dtype=float))
    b = _as_complex_frame(np.asarray(v, dtype=float))
    aa = np.sum(np.abs(a) ** 2, axis=-1)
    bb = np.sum(np.abs(b) ** 2, axis=-1)
    ab = np.sum(np.conj(a) * b, axis=-1)
    gram = aa * bb - np.abs(ab) ** 2
    if np.any(gram <= GRAM_TOL * aa * bb):
        raise DegenerateFrame("tangent frame is degenerate along the loop")
    e1 = a / np.sqrt(aa)[..., None]
    w = b - (np.sum(np.conj(e1) * b, axis=-1))[..., None] * e1
    e2 = w / np.linalg.norm(w, axis=-1)[..., None]
    det = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]
    return det**2


def maslov_index(surface: LagrangianSurface, loop_in_grid: Iterable[tuple[int, int]]) -> int:
    """Maslov index of a closed path of grid points ``(i_s, j_t)`` on the surface.

    Consecutive path entries should be grid neighbours (or close enough that the
    tangent plane turns by well under a quarter turn between them).
    """
    path = np.asarray(list(loop_in_grid), dtype=int)
    if path.ndim != 2 or path.shape[1] != 2 or len(path) < 2:
        raise ValueError("loop_in_grid must be a sequence of (i, j) index pairs")
    ds, dt = surface.tangents()
    i, j = path[:, 0] % surface.n_s, path[:, 1]
    if surface.kind == "torus":
        j = j % surface.n_t
    d2 = unitary_frame_det2(ds[i, j], dt[i, j])
    ang = np.angle(d2)
    return int(round(_wrapped_increments(ang).sum() / (2.0 * np.pi)))


def s_path(n_s: int, j: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n_s)]


def t_path(n_t: int, i: int) -> list[tuple[int, int]]:
    return [(i, j) for j in range(n_t)]


def reversed_path(path: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    return list(path)[::-1]


# ---------------------------------------------------------------------------
# standard tori


def sample_clifford(r: float, N: int) -> LagrangianSurface:
    """The torus |z1| = |z2| = r."""
    if not r > 0:
        raise NonPositiveRadius(f"radius must be positive, got {r}")
    s = np.arange(N) / N
    S, T = np.meshgrid(s, s, indexing="ij")
    grid = np.stack(
        [r * np.cos(2 * np.pi * S), r * np.sin(2 * np.pi * S), r * np.cos(2 * np.pi * T), r * np.sin(2 * np.pi * T)],
        axis=-1,
    )
    return make_surface(grid, "torus", s, 1.0, {"family": "clifford", "r": float(r)})


def sample_chekanov(r: float, N: int) -> LagrangianSurface:
    """The exotic monotone torus ((e^x + i e^-x y) cos th, (e^x + i e^-x y) sin th), x^2 + y^2 = r^2.

    s runs around the circle (x, y), t is th / 2 pi.
    """
    if not r > 0:
        raise NonPositiveRadius(f"radius must be positive, got {r}")
    s = np.arange(N) / N
    S, T = np.meshgrid(s, s, indexing="ij")
    x = r * np.cos(2 * np.pi * S)
    y = r * np.sin(2 * np.pi * S)
    w = np.exp(x) + 1j * np.exp(-x) * y
    c, sn = np.cos(2 * np.pi * T), np.sin(2 * np.pi * T)
    grid = np.stack([w.real * c, w.imag * c, w.real * sn, w.imag * sn], axis=-1)
    meta = {"family": "chekanov", "r": float(r), "monotonicity_factor": float(np.pi * r * r / 2.0)}
    return make_surface(grid, "torus", s, 1.0, meta)


def circle_loop(r: float, N: int, center: Sequence[float] = (0.0, 0.0, 0.0, 0.0), plane: int = 1, turns: int = 1) -> SampledLoop4:
    """Round circle of radius r in the (x1, y1) or (x2, y2) plane."""
    th = 2 * np.pi * turns * np.arange(N) / N
    pts = np.tile(np.asarray(center, dtype=float), (N, 1))
    k = 0 if plane == 1 else 2
    pts[:, k] += r * np.cos(th)
    pts[:, k + 1] += r * np.sin(th)
    return SampledLoop4(pts)


def circle_curve(r: float, N: int, center: Sequence[float] = (0.0, 0.0), turns: int = 1) -> SampledCurve2:
    th = 2 * np.pi * turns * np.arange(N) / N
    return SampledCurve2(np.column_stack([center[0] + r * np.cos(th), center[1] + r * np.sin(th)]))


def converged(coarse: float, fine: float, scale: float = 1.0, floor_rel: float = 1e-12) -> bool:
    """Refinement check: the error at least halves, or both sit at rounding level."""
    return fine <= 0.5 * coarse or fine <= floor_rel * max(scale, 1e-300)
