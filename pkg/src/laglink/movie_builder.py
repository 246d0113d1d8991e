"""Lagrangian movies and the surfaces they sweep out.

A movie is a family of closed plane curves ``gamma_t`` in the (x1, y1) plane
together with a base height ``z0(t)``. Lifting puts the curve at
``(x, y, z, t)`` with ``z_s = -(x_s y_t - x_t y_s)``, which makes the swept
surface Lagrangian; closing ``z`` up around each frame requires the enclosed
area of the frames to stay constant.

:func:`lift_closed` is the same construction along a closed core curve
``Gamma(u)`` in the (x2, y2) plane instead of the straight line ``x2 = 0``,
which is how the tori here are assembled.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree
from shapely.geometry import LinearRing

from .errors import (
    AlphaTooSmall,
    BadHeight,
    BadParams,
    ClosureDefectExceeded,
    DeltaTooSmall,
    MovieInvalid,
)
from .geom_core import (
    IMMERSION_REL,
    LagrangianSurface,
    SampledCurve2,
    SampledLoop4,
    diameter,
    is_constant,
    line_rotation_number,
    liouville_integral,
    make_surface,
    maslov_index,
    periodic_antiderivative,
    periodic_derivative,
    plane_liouville_area,
    rotation_number,
    s_path,
    t_path,
)
from .invariant_lattice import H1LatticeData
from .linking import PlanarDiskCylinder, crossings_along_path


# ---------------------------------------------------------------------------
# movies


@dataclass(frozen=True, eq=False)
class Movie:
    """``frames[k]`` is the curve at ``t_grid[k]``, sampled at s = i / N_s."""

    t_grid: np.ndarray
    frames: np.ndarray
    z0: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.t_grid, dtype=float)
        f = np.array(self.frames, dtype=float)
        z = np.array(self.z0, dtype=float)
        if f.ndim != 3 or f.shape[2] != 2 or f.shape[0] != t.shape[0]:
            raise MovieInvalid(f"frames must be (N_t, N_s, 2) matching t_grid, got {f.shape}")
        if z.shape != t.shape:
            raise MovieInvalid("z0 needs one value per t")
        if t.size < 3 or np.any(np.diff(t) <= 0):
            raise MovieInvalid("t_grid must be strictly increasing with at least 3 entries")
        if f.shape[1] < 8:
            raise MovieInvalid("frames need at least 8 samples")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(f)) and np.all(np.isfinite(z))):
            raise MovieInvalid("movie contains non-finite values")
        for a in (t, f, z):
            a.setflags(write=False)
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "frames", f)
        object.__setattr__(self, "z0", z)

    @property
    def n_s(self) -> int:
        return self.frames.shape[1]

    @property
    def n_t(self) -> int:
        return self.frames.shape[0]

    def frame(self, k: int) -> SampledCurve2:
        return SampledCurve2(self.frames[k])


@dataclass(frozen=True)
class ValidationReport:
    immersed: tuple[bool, ...]
    embedded: tuple[bool, ...]
    areas: tuple[float, ...]
    max_area_drift: float
    tol_area: float
    ok: bool

    def failures(self) -> list[str]:
        out = []
        bad_imm = [k for k, v in enumerate(self.immersed) if not v]
        bad_emb = [k for k, v in enumerate(self.embedded) if not v]
        if bad_imm:
            out.append(f"frames not immersed: {bad_imm[:10]}")
        if bad_emb:
            out.append(f"frames self-intersect: {bad_emb[:10]}")
        if self.max_area_drift > self.tol_area:
            out.append(f"area drift {self.max_area_drift:.3g} exceeds {self.tol_area:.3g}")
        return out


def frame_is_immersed(points: np.ndarray) -> bool:
    if is_constant(points):
        return False
    speed = np.linalg.norm(np.roll(points, -1, axis=0) - points, axis=1) * len(points)
    return bool(speed.min() >= IMMERSION_REL * diameter(points))


def frame_is_simple(points: np.ndarray) -> bool:
    return bool(LinearRing(points).is_simple)


def validate_movie(m: Movie, tol_area: float | None = None) -> ValidationReport:
    imm = tuple(frame_is_immersed(f) for f in m.frames)
    emb = tuple(frame_is_simple(f) for f in m.frames)
    areas = np.array([plane_liouville_area(SampledCurve2(f)) for f in m.frames])
    drift = float(np.max(np.abs(areas - areas[0])))
    if tol_area is None:
        tol_area = 1e-6 * max(float(np.max(np.abs(areas))), 1e-300)
    ok = all(imm) and all(emb) and drift <= tol_area
    return ValidationReport(imm, emb, tuple(float(a) for a in areas), drift, float(tol_area), ok)


def _closure_tolerance(z: np.ndarray, frames: np.ndarray) -> float:
    # relative to the largest height, floored by the frame size so z = 0 movies work
    return 1e-6 * max(float(np.max(np.abs(z))), diameter(frames.reshape(-1, 2)))


def lift(m: Movie, closure_tol: float | None = None) -> LagrangianSurface:
    """Lift a movie to the cylinder (x, y, z, t); see the module docstring."""
    rep = validate_movie(m)
    if not (all(rep.immersed) and all(rep.embedded)):
        raise MovieInvalid("; ".join(rep.failures()))
    x, y = m.frames[..., 0], m.frames[..., 1]
    xs = periodic_derivative(x, axis=1)
    ys = periodic_derivative(y, axis=1)
    xt = np.gradient(x, m.t_grid, axis=0, edge_order=2)
    yt = np.gradient(y, m.t_grid, axis=0, edge_order=2)
    f = -(xs * yt - xt * ys)
    closure = np.abs(f.mean(axis=1))
    z = m.z0[:, None] + periodic_antiderivative(f, axis=1)
    tol = _closure_tolerance(z, m.frames) if closure_tol is None else closure_tol
    if float(closure.max()) > tol:
        raise ClosureDefectExceeded(
            f"s-closure defect {closure.max():.3g} exceeds {tol:.3g}: frame area is not constant in t"
        )
    tt = np.broadcast_to(m.t_grid[:, None], x.shape)
    grid = np.stack([x, y, z, tt], axis=-1).transpose(1, 0, 2)
    return make_surface(
        grid, "cylinder", m.t_grid, metadata={"closure_defect": float(closure.max())}, frames_simple=all(rep.embedded)
    )


def closure_profile(m: Movie) -> np.ndarray:
    """Per-frame s-closure defect (signed) of the lift, without raising."""
    x, y = m.frames[..., 0], m.frames[..., 1]
    xs = periodic_derivative(x, axis=1)
    ys = periodic_derivative(y, axis=1)
    xt = np.gradient(x, m.t_grid, axis=0, edge_order=2)
    yt = np.gradient(y, m.t_grid, axis=0, edge_order=2)
    return -(xs * yt - xt * ys).mean(axis=1)


def lift_closed(
    frames: np.ndarray,
    core: np.ndarray,
    q0: np.ndarray,
    u_period: float,
    closure_tol: float | None = None,
    metadata: dict[str, Any] | None = None,
    u_method: str = "central",
) -> LagrangianSurface:
    """Lagrangian torus swept by ``frames[k]`` (in the (x1, y1) plane) along a
    closed immersed core curve ``core[k]`` in the (x2, y2) plane.

    The (x2, y2) part is ``Gamma + h N`` with N the left normal of the core.
    The Lagrangian condition reads ``d/ds (h - kappa h^2 / 2) = g / |Gamma'|``
    with ``g = x_s y_u - x_u y_s``; ``q0`` is the value of ``h - kappa h^2/2``
    at s = 0. Samples in u are uniform with period ``u_period``. Pass
    ``u_method="spectral"`` when frames and core are smooth in u; spliced
    cores need the default central differences.
    """
    frames = np.asarray(frames, dtype=float)
    core = np.asarray(core, dtype=float)
    q0 = np.asarray(q0, dtype=float)
    nu, ns, _ = frames.shape
    hu = u_period / nu

    def du(a: np.ndarray) -> np.ndarray:
        return periodic_derivative(a, axis=0, method=u_method) / u_period

    x, y = frames[..., 0], frames[..., 1]
    xs = periodic_derivative(x, axis=1)
    ys = periodic_derivative(y, axis=1)
    g = xs * du(y) - du(x) * ys

    d1 = du(core)
    d2 = du(d1)
    speed = np.linalg.norm(d1, axis=1)
    if float(speed.min()) <= 0.0:
        raise BadParams("core curve is not immersed")
    tang = d1 / speed[:, None]
    normal = np.column_stack([-tang[:, 1], tang[:, 0]])
    kappa = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3

    rhs = g / speed[:, None]
    closure = np.abs(rhs.mean(axis=1))
    q = q0[:, None] + periodic_antiderivative(rhs, axis=1)
    disc = 1.0 - 2.0 * kappa[:, None] * q
    if float(disc.min()) <= 0.0:
        raise BadParams("normal displacement leaves the tubular neighbourhood of the core")
    h = 2.0 * q / (1.0 + np.sqrt(disc))
    x2y2 = core[:, None, :] + h[..., None] * normal[:, None, :]
    tol = (
        1e-6 * max(float(np.max(np.abs(h))), diameter(frames.reshape(-1, 2)))
        if closure_tol is None
        else closure_tol
    )
    if float(closure.max()) > tol:
        raise ClosureDefectExceeded(f"s-closure defect {closure.max():.3g} exceeds {tol:.3g}")
    grid = np.concatenate([frames, x2y2], axis=-1).transpose(1, 0, 2)
    meta = {"closure_defect": float(closure.max())}
    meta.update(metadata or {})
    simple = all(frame_is_simple(f) for f in frames)
    return make_surface(grid, "torus", np.arange(nu) * hu, u_period, meta, frames_simple=simple, t_method=u_method)


# ---------------------------------------------------------------------------
# the linked cylinder


def smoothstep(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x**2)


def smoothstep_prime(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    inside = (x > 0.0) & (x < 1.0)
    return np.where(inside, 30.0 * x**2 * (1.0 - x) ** 2, 0.0)


@dataclass(frozen=True)
class LinkedCylinderParams:
    """Radii r1 > r2 > 0, offset D, transition extent T.

    ``D`` defaults to ``2 (r1 + r2)``; ``T`` defaults to ``max(D + 2, D/2 + 3)``.
    ``t_max`` bounds the sampled t range of the standalone movie (default T + 2).
    """

    r1: float
    r2: float
    D: float | None = None
    T: float | None = None
    resolution: tuple[int, int] = (256, 256)
    t_max: float | None = None

    @property
    def offset(self) -> float:
        return 2.0 * (self.r1 + self.r2) if self.D is None else float(self.D)

    @property
    def transition(self) -> float:
        if self.T is not None:
            return float(self.T)
        return max(self.offset + 2.0, 0.5 * self.offset + 3.0)

    @property
    def height(self) -> float:
        """Plateau of |z0| while the moving frame can meet the r1-disk."""
        return self.r1 + self.r2 + 1.0


class CylinderSchedule:
    """Frame centre c(t) and base height z0(t) of the linked cylinder.

    For t >= 0: z0 = t on [0, 1], rises to the plateau H on [1, 2], the centre
    slides from 0 to D on [2, T - 1] while z0 = H, and z0 drops back to 0 on
    [T - 1, T]. c is even in t and z0 is odd.
    """

    def __init__(self, p: LinkedCylinderParams):
        self.D = p.offset
        self.T = p.transition
        self.H = p.height
        self.r2 = p.r2
        self.t_slide = self.T - 3.0

    def center(self, t: np.ndarray) -> np.ndarray:
        a = np.abs(np.asarray(t, dtype=float))
        return self.D * smoothstep((a - 2.0) / self.t_slide)

    def center_rate(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        return np.sign(t) * self.D / self.t_slide * smoothstep_prime((a - 2.0) / self.t_slide)

    def z0(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        a = np.abs(t)
        up = a + smoothstep(a - 1.0) * (self.H - a)
        down = self.H * (1.0 - smoothstep(a - (self.T - 1.0)))
        out = np.where(a <= 1.0, a, np.where(a <= 2.0, up, np.where(a < self.T - 1.0, self.H, down)))
        return np.sign(t) * out

    def min_plateau_clearance(self) -> float:
        return self.H - self.r2 * 1.875 * self.D / self.t_slide


def _check_cylinder_params(p: LinkedCylinderParams) -> CylinderSchedule:
    if not (p.r2 > 0 and p.r1 > p.r2):
        raise BadParams(f"need r1 > r2 > 0, got r1={p.r1}, r2={p.r2}")
    if p.offset < 2.0 * (p.r1 + p.r2) * (1.0 - 1e-12):
        raise BadParams(f"D={p.offset} is below 2(r1 + r2) = {2 * (p.r1 + p.r2)}")
    if not p.transition > 3.0:
        raise BadParams(f"T={p.transition} leaves no room for the slide (need T > 3)")
    sched = CylinderSchedule(p)
    if sched.min_plateau_clearance() <= 0.05 * p.r1:
        raise BadParams("slide too fast for the height plateau; increase T")
    return sched


def linked_cylinder_movie(p: LinkedCylinderParams) -> Movie:
    sched = _check_cylinder_params(p)
    ns, nt = p.resolution
    t_max = sched.T + 2.0 if p.t_max is None else float(p.t_max)
    t = np.linspace(-t_max, t_max, nt)
    return _cylinder_frames(sched, t, ns)


def _cylinder_frames(sched: CylinderSchedule, t: np.ndarray, ns: int) -> Movie:
    s = np.arange(ns) / ns
    c = sched.center(t)
    x = c[:, None] + sched.r2 * np.cos(2 * np.pi * s)[None, :]
    y = np.broadcast_to(sched.r2 * np.sin(2 * np.pi * s)[None, :], x.shape)
    return Movie(t, np.stack([x, y], axis=-1), sched.z0(t))


def standard_cylinder_movie(a: float, b: float, r: float, t: np.ndarray, ns: int) -> Movie:
    """Constant circle of radius r about (a, b) with z0(t) = 0."""
    t = np.asarray(t, dtype=float)
    s = np.arange(ns) / ns
    f = np.column_stack([a + r * np.cos(2 * np.pi * s), b + r * np.sin(2 * np.pi * s)])
    return Movie(t, np.broadcast_to(f, (t.size, ns, 2)), np.zeros_like(t))


@dataclass(frozen=True)
class CylinderContract:
    tail_deviation: float
    min_distance_to_circle_cylinder: float
    crossings: int
    crossing_total: int
    clearance_ok: bool

    @property
    def ok(self) -> bool:
        return self.tail_deviation <= 1e-9 and self.clearance_ok and self.crossings == 1


def linked_cylinder_contract(surface: LagrangianSurface, p: LinkedCylinderParams) -> CylinderContract:
    """Numerical check of the three linked-cylinder properties on a lift.

    tail: agreement with the cylinder over the circle of radius r2 about (D, 0)
    for |t| >= T; avoidance: distance to {x1^2 + y1^2 = r1^2, x2 = 0} over the
    whole grid; crossing: the s = 0 curve meets the solid cylinder
    {x1^2 + y1^2 <= r1^2, x2 = 0} once.
    """
    g = surface.grid
    t = surface.t_values
    T, D = p.transition, p.offset
    s = np.arange(surface.n_s) / surface.n_s
    tail = np.abs(t) >= T
    dev = 0.0
    if np.any(tail):
        ref = np.stack(
            [
                np.broadcast_to((D + p.r2 * np.cos(2 * np.pi * s))[:, None], (surface.n_s, tail.sum())),
                np.broadcast_to((p.r2 * np.sin(2 * np.pi * s))[:, None], (surface.n_s, tail.sum())),
                np.zeros((surface.n_s, tail.sum())),
                np.broadcast_to(t[tail][None, :], (surface.n_s, tail.sum())),
            ],
            axis=-1,
        )
        dev = float(np.max(np.abs(g[:, tail, :] - ref)))
    rho = np.hypot(g[..., 0], g[..., 1])
    dist = float(np.min(np.hypot(rho - p.r1, g[..., 2])))
    model = PlanarDiskCylinder(0.0, 0.0, p.r1)
    rec = crossings_along_path(g[0, :, :], model, closed=False)
    return CylinderContract(dev, dist, len(rec), int(sum(c.sign for c in rec)), dist > 0.01 * p.r1)


# ---------------------------------------------------------------------------
# closing up


@dataclass(frozen=True)
class CloseUpParams:
    """``alpha`` is the height of the return segment, ``delta`` the truncation.

    ``delta`` defaults to T + 5; ``resolution`` to the cylinder's.
    """

    alpha: float = 10.0
    delta: float | None = None
    resolution: tuple[int, int] | None = None


def stadium_core(x_left: float, x_right: float, y_half: float, n: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Counterclockwise stadium in the (x2, y2) plane, uniform in arclength.

    Starts at (x_left, y_half) and runs down the left side first. Returns the
    points, the label of each sample (0 left side, 1 bottom cap, 2 right side,
    3 top cap) and the perimeter.
    """
    w = x_right - x_left
    rc = 0.5 * w
    xc = 0.5 * (x_left + x_right)
    lside = 2.0 * y_half
    lcap = np.pi * rc
    perim = 2.0 * lside + 2.0 * lcap
    u = np.arange(n) * perim / n
    pts = np.empty((n, 2))
    lab = np.empty(n, dtype=int)
    b1, b2, b3 = lside, lside + lcap, 2 * lside + lcap
    m = u < b1
    pts[m] = np.column_stack([np.full(m.sum(), x_left), y_half - u[m]])
    lab[m] = 0
    m = (u >= b1) & (u < b2)
    ph = np.pi + (u[m] - b1) / rc
    pts[m] = np.column_stack([xc + rc * np.cos(ph), -y_half + rc * np.sin(ph)])
    lab[m] = 1
    m = (u >= b2) & (u < b3)
    pts[m] = np.column_stack([np.full(m.sum(), x_right), -y_half + (u[m] - b2)])
    lab[m] = 2
    m = u >= b3
    ph = (u[m] - b3) / rc
    pts[m] = np.column_stack([xc + rc * np.cos(ph), y_half + rc * np.sin(ph)])
    lab[m] = 3
    return pts, lab, perim


@dataclass(frozen=True, eq=False)
class ClosedUpTorus:
    """A closed Lagrangian torus with its meridian sigma and longitude tau.

    ``geometry`` records the frame centre/radius on the return part and the
    stadium dimensions; ``spanning`` is the catalog solid torus it bounds (when
    one is known) and ``validity`` the |y2| bound inside which that model is
    exact.
    """

    surface: LagrangianSurface
    sigma: SampledLoop4
    tau: SampledLoop4
    area_sigma: float
    area_tau: float
    maslov_sigma: int
    maslov_tau: int
    sigma_column: int
    disk_family_heights: tuple[float, float]
    geometry: dict[str, float]
    spanning: PlanarDiskCylinder | None = None
    validity: float | None = None
    tau_rotation: tuple[float, int] = (0.0, 1)

    def lattice(self) -> H1LatticeData:
        return H1LatticeData((self.maslov_sigma, self.maslov_tau), (self.area_sigma, self.area_tau), "close_up")


def _torus_loops(surface: LagrangianSurface, sigma_col: int, sigma: SampledLoop4) -> dict[str, Any]:
    tau = surface.t_loop(0)
    return {
        "tau": tau,
        "area_sigma": liouville_integral(sigma),
        "area_tau": liouville_integral(tau),
        "maslov_sigma": maslov_index(surface, s_path(surface.n_s, sigma_col)),
        "maslov_tau": maslov_index(surface, t_path(surface.n_t, 0)),
    }


def close_up(cyl_params: LinkedCylinderParams, cu: CloseUpParams) -> ClosedUpTorus:
    """Close the linked cylinder into a torus (the moving component).

    The truncated cylinder runs down the line x2 = 0 for |y2| <= delta + 1; a
    return tube of constant frames about (D, 0) runs up x2 = alpha, and two
    semicircular caps join them. Frames are constant on the caps, so the
    caps are exactly Lagrangian and no smoothing band is needed.
    """
    sched = _check_cylinder_params(cyl_params)
    p = cyl_params
    T = sched.T
    delta = T + 5.0 if cu.delta is None else float(cu.delta)
    alpha = float(cu.alpha)
    if alpha <= np.pi * p.r2**2:
        raise AlphaTooSmall(f"alpha={alpha} must exceed pi r2^2 = {np.pi * p.r2 ** 2:.6g}")
    bump = sched.H + p.r2 * 1.875 * sched.D / sched.t_slide
    if alpha <= bump + p.r2:
        raise AlphaTooSmall(f"alpha={alpha} does not clear the height bump {bump:.6g}")
    if delta < T + 2.0:
        raise DeltaTooSmall(f"delta={delta} must be at least T + 2 = {T + 2}")
    ns, nu = cu.resolution or p.resolution
    yh = delta + 1.0
    core, lab, perim = stadium_core(0.0, alpha, yh, nu)
    s = np.arange(ns) / ns
    cen = np.full(nu, sched.D)
    q0 = np.zeros(nu)
    on_a = lab == 0
    t_a = core[on_a, 1]
    cen[on_a] = sched.center(t_a)
    q0[on_a] = sched.z0(t_a)
    frames = np.stack(
        [
            cen[:, None] + p.r2 * np.cos(2 * np.pi * s)[None, :],
            np.broadcast_to(p.r2 * np.sin(2 * np.pi * s)[None, :], (nu, ns)),
        ],
        axis=-1,
    )
    meta = {"family": "close_up", "r": p.r2, "D": sched.D, "T": T, "alpha": alpha, "delta": delta}
    surf = lift_closed(frames, core, q0, perim, metadata=meta)
    # meridian at y2 = delta: exactly on the torus, the column nearest it carries the grid loop
    sigma = SampledLoop4(
        np.column_stack([sched.D + p.r2 * np.cos(2 * np.pi * s), p.r2 * np.sin(2 * np.pi * s), np.zeros(ns), np.full(ns, delta)])
    )
    col = int(np.argmin(np.where(on_a, np.abs(core[:, 1] - delta), np.inf)))
    loops = _torus_loops(surf, col, sigma)
    tau: SampledLoop4 = loops["tau"]
    rot = (line_rotation_number(tau.projection(1)), rotation_number(tau.projection(2)))
    return ClosedUpTorus(
        surface=surf,
        sigma=sigma,
        tau=tau,
        area_sigma=loops["area_sigma"],
        area_tau=loops["area_tau"],
        maslov_sigma=loops["maslov_sigma"],
        maslov_tau=loops["maslov_tau"],
        sigma_column=col,
        disk_family_heights=(0.0, alpha),
        geometry={"r": p.r2, "D": sched.D, "T": T, "alpha": alpha, "delta": delta, "perimeter": perim},
        tau_rotation=rot,
    )


def close_up_partner(cyl_params: LinkedCylinderParams, cu: CloseUpParams) -> ClosedUpTorus:
    """The fixed component: the round cylinder of radius r1 over the origin,
    truncated at |y2| <= delta1 + 1 and closed on the x2 < 0 side.

    ``delta1 = max(delta + 2T, delta + alpha/2 + 3)`` so that every loop of the
    moving component stays inside the box where the solid cylinder
    {x1^2 + y1^2 <= r1^2, x2 = 0} is an exact spanning model.
    """
    sched = _check_cylinder_params(cyl_params)
    p = cyl_params
    T = sched.T
    delta = T + 5.0 if cu.delta is None else float(cu.delta)
    alpha = float(cu.alpha)
    delta1 = max(delta + 2.0 * T, delta + 0.5 * alpha + 3.0)
    ns, nu = cu.resolution or p.resolution
    yh = delta1 + 1.0
    core, lab, perim = stadium_core(-alpha, 0.0, yh, nu)
    s = np.arange(ns) / ns
    f = np.column_stack([p.r1 * np.cos(2 * np.pi * s), p.r1 * np.sin(2 * np.pi * s)])
    frames = np.broadcast_to(f, (nu, ns, 2))
    meta = {"family": "close_up_partner", "r": p.r1, "alpha": alpha, "delta": delta1}
    surf = lift_closed(frames, core, np.zeros(nu), perim, metadata=meta)
    sigma = SampledLoop4(np.column_stack([f, np.zeros(ns), np.zeros(ns)]))
    on_b = lab == 2
    col = int(np.argmin(np.where(on_b, np.abs(core[:, 1]), np.inf)))
    loops = _torus_loops(surf, col, sigma)
    tau: SampledLoop4 = loops["tau"]
    rot = (line_rotation_number(tau.projection(1)), rotation_number(tau.projection(2)))
    return ClosedUpTorus(
        surface=surf,
        sigma=sigma,
        tau=tau,
        area_sigma=loops["area_sigma"],
        area_tau=loops["area_tau"],
        maslov_sigma=loops["maslov_sigma"],
        maslov_tau=loops["maslov_tau"],
        sigma_column=col,
        disk_family_heights=(0.0, -alpha),
        geometry={"r": p.r1, "D": 0.0, "T": T, "alpha": alpha, "delta": delta1, "perimeter": perim},
        spanning=PlanarDiskCylinder(0.0, 0.0, p.r1),
        validity=delta1 - 1.0,
        tau_rotation=rot,
    )


@dataclass(frozen=True, eq=False)
class LinkedPair:
    L1: ClosedUpTorus
    L2: ClosedUpTorus
    cylinder: LinkedCylinderParams
    close: CloseUpParams


def linked_pair(
    area1: float,
    area2: float,
    resolution: tuple[int, int] = (256, 256),
    alpha: float = 10.0,
    delta: float | None = None,
) -> LinkedPair:
    """The linked pair with A2(L1) = area1 > A2(L2) = area2 > 0."""
    if not (area1 > area2 > 0):
        raise BadParams(f"need area1 > area2 > 0, got {area1}, {area2}")
    r1 = float(np.sqrt(area1 / np.pi))
    r2 = float(np.sqrt(area2 / np.pi))
    p = LinkedCylinderParams(r1, r2, resolution=resolution)
    cu = CloseUpParams(alpha=alpha, delta=delta, resolution=resolution)
    return LinkedPair(close_up_partner(p, cu), close_up(p, cu), p, cu)


# ---------------------------------------------------------------------------
# flat disks


@dataclass(frozen=True, eq=False)
class FlatDisk:
    points: np.ndarray
    boundary: SampledLoop4
    area: float
    boundary_distance: float
    grid_spacing: float


def flat_disk_family(t: ClosedUpTorus, height: float, s: float, n_radial: int = 16, n_angular: int = 256) -> FlatDisk:
    """The flat disk of radius r about (D, 0) in the (x1, y1) plane at
    x2 = height, y2 = delta + s. Both allowed heights put its boundary on the
    torus."""
    heights = t.disk_family_heights
    if not any(abs(height - h) <= 1e-12 * max(1.0, abs(h)) for h in heights):
        raise BadHeight(f"height {height} is not one of {heights}")
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    r, D, delta = t.geometry["r"], t.geometry["D"], t.geometry["delta"]
    th = 2 * np.pi * np.arange(n_angular) / n_angular
    rho = np.linspace(0.0, r, n_radial)
    R, TH = np.meshgrid(rho, th, indexing="ij")
    pts = np.stack([D + R * np.cos(TH), R * np.sin(TH), np.full_like(R, height), np.full_like(R, delta + s)], axis=-1)
    bnd = SampledLoop4(pts[-1])
    g = t.surface.grid
    tree = cKDTree(g.reshape(-1, 4))
    dist = float(tree.query(bnd.samples)[0].max())
    sp_s = np.linalg.norm(np.roll(g, -1, axis=0) - g, axis=-1).max()
    sp_t = np.linalg.norm(np.roll(g, -1, axis=1) - g, axis=-1).max()
    return FlatDisk(pts, bnd, liouville_integral(bnd), dist, float(max(sp_s, sp_t)))


# ---------------------------------------------------------------------------
# area adjustment


def _spiral_coil(p: np.ndarray, direction: np.ndarray, R: float, turns: int, sign: float, lift: float, per_turn: int) -> np.ndarray:
    """Planar spiral in (x1, y1) starting at p, shrinking from radius R to R/2,
    with connectors raised in x2 so the coil never meets itself."""
    n = turns * per_turn
    th = 2 * np.pi * turns * np.arange(n + 1) / n
    rad = R * (1.0 - 0.5 * th / th[-1])
    e1 = -direction
    e2 = sign * np.array([-e1[1], e1[0]])
    centre = p[:2] - R * e1
    xy = centre + rad[:, None] * (np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2)
    spiral = np.column_stack([xy, np.full(n + 1, p[2] - lift), np.full(n + 1, p[3])])
    k = 8
    down = np.column_stack([np.repeat(p[None, :2], k, 0), p[2] - lift * np.arange(k) / k, np.full(k, p[3])])
    inner = spiral[-1, :2]
    up = np.column_stack([np.repeat(inner[None], k, 0), p[2] - lift + 2 * lift * np.arange(1, k + 1) / k, np.full(k, p[3])])
    back_xy = inner + (p[:2] - inner) * (np.arange(1, k + 1) / k)[:, None]
    back = np.column_stack([back_xy, np.full(k, p[2] + lift), np.full(k, p[3])])
    return np.vstack([down, spiral[1:], up, back])


def adjust_loop_area(loop: SampledLoop4, target: float, index: int = 0, radius: float | None = None) -> SampledLoop4:
    """Insert a small planar coil at sample ``index`` so the loop's Liouville
    integral becomes ``target`` (to 1e-8).

    The coil spirals in the (x1, y1) plane at a slightly lowered x2, and comes
    back raised in x2 before rejoining the loop at the next sample, so the
    result stays embedded. Its size is calibrated against the same quadrature
    that :func:`liouville_integral` uses.
    """
    pts = np.asarray(loop.samples, dtype=float)
    need = target - liouville_integral(loop)
    scale = max(diameter(pts), 1.0)
    if abs(need) <= 1e-12 * scale**2:
        return loop
    n = len(pts)
    p = pts[index]
    nxt = pts[(index + 1) % n]
    tangent = (nxt - pts[index - 1])[:2]
    tn = np.linalg.norm(tangent)
    # start the coil perpendicular to the loop's planar motion
    direction = np.array([0.0, 1.0]) if tn == 0 else np.array([-tangent[1], tangent[0]]) / tn
    if radius is None:
        radius = 0.05 * scale
    sign = float(np.sign(need))
    # the spiral encloses (7/12) pi R^2 per turn
    turns = max(1, int(np.ceil(abs(need) / (7.0 / 12.0 * np.pi * radius**2))))
    per_turn = 64
    lift = 0.05 * radius

    def build(R: float) -> np.ndarray:
        coil = _spiral_coil(p, direction, R, turns, sign, lift, per_turn)
        return np.vstack([pts[: index + 1], coil, pts[index + 1 :]])

    def resid(R: float) -> float:
        return liouville_integral(SampledLoop4(build(R))) - target

    r_guess = np.sqrt(abs(need) / (7.0 / 12.0 * np.pi * turns))
    lo, hi = 0.0, 2.0 * r_guess
    while np.sign(resid(hi)) == np.sign(resid(lo)):
        hi *= 2.0
        if hi > 1e3 * scale:
            raise RuntimeError("coil calibration failed to bracket the target area")
    R = brentq(resid, lo, hi, xtol=1e-15 * scale, rtol=1e-15, maxiter=200)
    return SampledLoop4(build(R))
