"""Starshaped hypersurfaces as radial graphs and their integral geometry.

A surface is stored as a positive radial function on a uniform parameter
grid: N periodic samples of r(theta) on [0, 2pi) for a plane curve
(dim 1), or N+1 samples of r(phi) on [0, pi] for the profile of an
axisymmetric surface (dim 2). Curvatures, support function and area
weights come from sixth-order centered difference stencils (periodic
wrap for dim 1, even ghost reflection at the poles for dim 2);
quermassintegrals from trapezoid (dim 1) or composite Simpson (dim 2)
quadrature. The parallel principal curvature at the poles is assigned
its smooth limit, the meridian value; the sin(phi) area weight vanishes
there, so the choice does not touch any integral.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import comb, gamma, pi

import numpy as np

from .symfunc import cnk

__all__ = [
    "ShapeError",
    "RadialGraph",
    "PointwiseGeometry",
    "ConvexityReport",
    "make_shape",
    "sphere",
    "ellipse",
    "ellipsoid_of_revolution",
    "perturbed_sphere",
    "compute_geometry",
    "quermass_sigma",
    "quermass_minkowski",
    "quermass_vector",
    "iso_ratio",
    "iso_ratio_ball",
    "unit_ball_quermass",
    "sphere_area",
    "kconvex_report",
    "roundness",
    "refine",
    "embed",
    "export_snapshot",
]

MIN_NODES = 16

# sixth-order centered first/second derivative stencils, offsets -3..3
_D1 = np.array([-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0]) / 60.0
_D2 = np.array([2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0]) / 180.0


class ShapeError(ValueError):
    """Invalid shape parameters or a degenerate radial function."""


@dataclass(frozen=True)
class RadialGraph:
    """Radial function of a starshaped hypersurface on a uniform grid.

    dim 1: r has N samples of r(theta), theta_j = 2*pi*j/N, periodic.
    dim 2: r has N+1 samples of r(phi), phi_j = pi*j/N, axisymmetric,
    with an even profile at both poles. N must be even and >= 16.
    """

    dim: int
    r: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ShapeError(f"dim must be 1 or 2, got {self.dim}")
        arr = np.array(self.r, dtype=float)
        if arr.ndim != 1:
            raise ShapeError("radial samples must form a one-dimensional array")
        if not np.all(np.isfinite(arr)):
            raise ShapeError("radial samples contain non-finite values")
        if np.min(arr) <= 0.0:
            j = int(np.argmin(arr))
            raise ShapeError(f"radial function not positive at node {j}: r={arr[j]}")
        n_int = arr.size if self.dim == 1 else arr.size - 1
        if n_int < MIN_NODES or n_int % 2 != 0:
            raise ShapeError(f"need an even number of intervals >= {MIN_NODES}, got {n_int}")
        arr.setflags(write=False)
        object.__setattr__(self, "r", arr)

    @property
    def num_intervals(self) -> int:
        return self.r.size if self.dim == 1 else self.r.size - 1

    @property
    def h(self) -> float:
        return (2.0 * pi if self.dim == 1 else pi) / self.num_intervals

    @property
    def param(self) -> np.ndarray:
        if self.dim == 1:
            return 2.0 * pi * np.arange(self.r.size) / self.r.size
        return pi * np.arange(self.r.size) / (self.r.size - 1)

    def scaled(self, s: float) -> "RadialGraph":
        if s <= 0.0:
            raise ShapeError("scale factor must be positive")
        return RadialGraph(self.dim, s * self.r)


@dataclass(frozen=True)
class PointwiseGeometry:
    """Per-node geometric data of a radial graph.

    kappa holds the principal curvatures, one column per direction
    (dim 2: meridian then parallel). sigma holds sigma_0..sigma_n of
    kappa. dmu are full quadrature weights: their sum is the surface
    measure.
    """

    dim: int
    param: np.ndarray
    h: float
    r: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    w: np.ndarray
    u: np.ndarray
    kappa: np.ndarray
    sigma: np.ndarray
    dmu: np.ndarray

    @property
    def area(self) -> float:
        return float(np.sum(self.dmu))


@dataclass(frozen=True)
class ConvexityReport:
    """Minimum of each sigma_m over the surface and the resulting flag."""

    k: int
    min_sigma: np.ndarray  # sigma_1..sigma_k minima over nodes
    status: str  # "strict" | "nonstrict" | "violated"

    @property
    def strict(self) -> bool:
        return self.status == "strict"


# ---------------------------------------------------------------------------
# shape constructors


def sphere(radius: float, dim: int = 1, num: int = 256) -> RadialGraph:
    if radius <= 0.0:
        raise ShapeError("sphere radius must be positive")
    size = num if dim == 1 else num + 1
    return RadialGraph(dim, np.full(size, float(radius)))


def ellipse(a: float, b: float, num: int = 256, center=(0.0, 0.0)) -> RadialGraph:
    """Plane ellipse x^2/a^2 + y^2/b^2 = 1 as a radial graph about `center`.

    The center must lie inside the ellipse; the radial function solves
    the quadratic for the ray-boundary intersection, which reduces to
    r = a*b/sqrt(b^2 cos^2 + a^2 sin^2) for a centered ellipse.
    """
    if a <= 0.0 or b <= 0.0:
        raise ShapeError("ellipse semi-axes must be positive")
    cx, cy = float(center[0]), float(center[1])
    if cx * cx / (a * a) + cy * cy / (b * b) >= 1.0:
        raise ShapeError("star center lies outside the ellipse")
    th = 2.0 * pi * np.arange(num) / num
    ct, st = np.cos(th), np.sin(th)
    qa = ct * ct / (a * a) + st * st / (b * b)
    qb = 2.0 * (cx * ct / (a * a) + cy * st / (b * b))
    qc = cx * cx / (a * a) + cy * cy / (b * b) - 1.0
    r = (-qb + np.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)
    return RadialGraph(1, r)


def ellipsoid_of_revolution(a: float, c: float, num: int = 256) -> RadialGraph:
    """Spheroid with equatorial semi-axis a and polar semi-axis c."""
    if a <= 0.0 or c <= 0.0:
        raise ShapeError("spheroid semi-axes must be positive")
    phi = pi * np.arange(num + 1) / num
    r = a * c / np.sqrt(c * c * np.sin(phi) ** 2 + a * a * np.cos(phi) ** 2)
    return RadialGraph(2, r)


def perturbed_sphere(
    radius: float,
    eps: float,
    mode: int | None = None,
    dim: int = 1,
    num: int = 256,
    seed: int | None = None,
) -> RadialGraph:
    """Sphere with a relative radial perturbation of amplitude eps.

    A single cosine mode when `mode` is given, otherwise random harmonics
    drawn from `seed` and normalized so the perturbation never exceeds
    eps in absolute value. dim 2 uses cos(l*phi) modes only, which are
    Chebyshev polynomials in cos(phi) and hence smooth at the poles.
    """
    if radius <= 0.0:
        raise ShapeError("sphere radius must be positive")
    if eps < 0.0:
        raise ShapeError("perturbation amplitude must be nonnegative")
    if dim == 1:
        x = 2.0 * pi * np.arange(num) / num
    else:
        x = pi * np.arange(num + 1) / num
    if mode is not None:
        if mode < 1:
            raise ShapeError("perturbation mode must be >= 1")
        bump = np.cos(mode * x)
    else:
        rng = np.random.default_rng(seed)
        modes = np.arange(2, 6) if dim == 1 else np.arange(2, 5)
        ca = rng.normal(size=modes.size)
        cb = rng.normal(size=modes.size) if dim == 1 else np.zeros(modes.size)
        norm = np.sum(np.abs(ca)) + np.sum(np.abs(cb))
        bump = sum(
            (ca[i] * np.cos(l * x) + cb[i] * np.sin(l * x)) / norm
            for i, l in enumerate(modes)
        )
    r = radius * (1.0 + eps * bump)
    if np.min(r) <= 0.0:
        raise ShapeError("perturbation destroys starshapedness (min r <= 0)")
    return RadialGraph(dim, r)


_SHAPES = {
    "sphere": lambda p, dim, num, seed: sphere(p["radius"], dim, num),
    "ellipse": lambda p, dim, num, seed: ellipse(
        p["a"], p["b"], num, center=(p.get("cx", 0.0), p.get("cy", 0.0))
    ),
    "ellipsoid_of_revolution": lambda p, dim, num, seed: ellipsoid_of_revolution(
        p["a"], p["c"], num
    ),
    "perturbed_sphere": lambda p, dim, num, seed: perturbed_sphere(
        p["radius"], p["eps"], p.get("mode"), dim, num, seed
    ),
}


def make_shape(spec, dim: int, num: int) -> RadialGraph:
    """Build a RadialGraph from a config-style description.

    `spec` is a mapping with keys `type`, `params` and optionally `seed`.
    """
    kind = spec.get("type")
    if kind not in _SHAPES:
        raise ShapeError(f"unknown shape type {kind!r}; expected one of {sorted(_SHAPES)}")
    if kind == "ellipse" and dim != 1:
        raise ShapeError("ellipse is a dim-1 shape")
    if kind == "ellipsoid_of_revolution" and dim != 2:
        raise ShapeError("ellipsoid_of_revolution is a dim-2 shape")
    params = dict(spec.get("params", {}))
    try:
        return _SHAPES[kind](params, dim, num, spec.get("seed"))
    except KeyError as exc:
        raise ShapeError(f"shape {kind!r} is missing parameter {exc.args[0]!r}") from None


# ---------------------------------------------------------------------------
# derivatives and pointwise geometry


def _stencil_derivatives(pad: np.ndarray, h: float):
    # pad carries 3 ghost nodes on each side
    f = pad[3:-3]
    a1 = pad[4:-2] - pad[2:-4]
    a2 = pad[5:-1] - pad[1:-5]
    a3 = pad[6:] - pad[:-6]
    s1 = pad[4:-2] + pad[2:-4]
    s2 = pad[5:-1] + pad[1:-5]
    s3 = pad[6:] + pad[:-6]
    d1 = (45.0 * a1 - 9.0 * a2 + a3) / (60.0 * h)
    d2 = (270.0 * s1 - 27.0 * s2 + 2.0 * s3 - 490.0 * f) / (180.0 * h * h)
    return d1, d2


def _periodic_derivatives(f: np.ndarray, h: float):
    return _stencil_derivatives(np.concatenate([f[-3:], f, f[:3]]), h)


def _even_reflect_derivatives(f: np.ndarray, h: float):
    # ghost nodes by even reflection about both endpoints
    return _stencil_derivatives(np.concatenate([f[3:0:-1], f, f[-2:-5:-1]]), h)


def _simpson_weights(n_int: int, h: float) -> np.ndarray:
    w = np.ones(n_int + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


@dataclass(frozen=True)
class _GridKit:
    """Static per-grid data shared by every geometry evaluation."""

    dim: int
    size: int
    h: float
    param: np.ndarray
    sin: np.ndarray | None
    cos: np.ndarray | None
    area_weight: np.ndarray  # h for dim 1, simpson * 2 pi sin(phi) for dim 2


_KIT_CACHE: dict = {}


def _grid_kit(dim: int, size: int) -> _GridKit:
    key = (dim, size)
    kit = _KIT_CACHE.get(key)
    if kit is None:
        if dim == 1:
            param = 2.0 * pi * np.arange(size) / size
            h = 2.0 * pi / size
            kit = _GridKit(dim, size, h, param, None, None, np.full(size, h))
        else:
            n_int = size - 1
            param = pi * np.arange(size) / n_int
            h = pi / n_int
            sin, cos = np.sin(param), np.cos(param)
            kit = _GridKit(dim, size, h, param, sin, cos,
                           _simpson_weights(n_int, h) * (2.0 * pi) * sin)
        if len(_KIT_CACHE) > 64:
            _KIT_CACHE.clear()
        _KIT_CACHE[key] = kit
    return kit


def _pointwise(kit: _GridKit, r: np.ndarray) -> PointwiseGeometry:
    rmin = float(np.min(r))
    if not rmin > 0.0:
        raise ShapeError(f"radial function not positive (min r = {rmin})")
    if kit.dim == 1:
        r1, r2 = _periodic_derivatives(r, kit.h)
    else:
        r1, r2 = _even_reflect_derivatives(r, kit.h)
    w2 = r * r + r1 * r1
    w = np.sqrt(w2)
    u = r * r / w
    k_rad = (r * r + 2.0 * r1 * r1 - r * r2) / (w2 * w)
    if kit.dim == 1:
        kappa = k_rad[:, None]
        sig = np.empty((r.size, 2))
        sig[:, 0] = 1.0
        sig[:, 1] = k_rad
        dmu = kit.area_weight * w
    else:
        kappa = np.empty((r.size, 2))
        kappa[:, 0] = k_rad
        kappa[1:-1, 1] = (r[1:-1] * kit.sin[1:-1] - r1[1:-1] * kit.cos[1:-1]) / (
            w[1:-1] * r[1:-1] * kit.sin[1:-1]
        )
        kappa[0, 1] = k_rad[0]
        kappa[-1, 1] = k_rad[-1]
        sig = np.empty((r.size, 3))
        sig[:, 0] = 1.0
        sig[:, 1] = kappa[:, 0] + kappa[:, 1]
        sig[:, 2] = kappa[:, 0] * kappa[:, 1]
        dmu = kit.area_weight * (r * w)
    if not np.all(np.isfinite(sig)):
        bad = int(np.argwhere(~np.isfinite(sig))[0][0])
        raise ValueError(f"non-finite curvature data at node {bad}")
    return PointwiseGeometry(
        dim=kit.dim, param=kit.param, h=kit.h, r=r, r1=r1, r2=r2, w=w, u=u,
        kappa=kappa, sigma=sig, dmu=dmu,
    )


def compute_geometry(g: RadialGraph) -> PointwiseGeometry:
    """All pointwise geometric data of a radial graph.

    Returns per-node derivatives, w = sqrt(r^2 + r'^2), principal
    curvatures, support function u = r^2/w, quadrature weights dmu and
    the table sigma_0..sigma_n of the curvatures.

    dim 1 curvature: (r^2 + 2 r'^2 - r r'') / w^3.
    dim 2: the same expression is the meridian curvature of the profile,
    and (r sin - r' cos) / (w r sin) the parallel one; both reduce to
    1/R on a sphere and coincide at the poles.

    Raises ShapeError on r <= 0 and ValueError if non-finite values
    propagate into any output field.
    """
    return _pointwise(_grid_kit(g.dim, g.r.size), g.r)


# ---------------------------------------------------------------------------
# quermassintegrals and ratios


def quermass_sigma(geo: PointwiseGeometry, m: int) -> float:
    """V_{n+1-m} from the curvature-integral definition.

    V_{n+1-m} = C_{n,m} * integral of sigma_{m-1} over the surface,
    with C_{n,m} = sigma_m(I)/sigma_{m-1}(I). Valid for 1 <= m <= n;
    the top integral V_{n+1} has no index here and is only reachable
    through the Minkowski form.
    """
    n = geo.dim
    if not 1 <= m <= n:
        raise ValueError(f"sigma-form index m={m} out of range 1..{n}")
    return cnk(n, m) * float(np.sum(geo.sigma[:, m - 1] * geo.dmu))


def quermass_minkowski(geo: PointwiseGeometry, m: int) -> float:
    """V_{n+1-m} from the Minkowski form: integral of u * sigma_m.

    m = 0 gives V_{n+1} = (n+1) * volume of the enclosed domain.
    """
    n = geo.dim
    if not 0 <= m <= n:
        raise ValueError(f"Minkowski-form index m={m} out of range 0..{n}")
    return float(np.sum(geo.u * geo.sigma[:, m] * geo.dmu))


def quermass_vector(geo: PointwiseGeometry) -> np.ndarray:
    """V_{n+1}, V_n, ..., V_1: index m=0 via the Minkowski form, the rest
    via the curvature integrals."""
    n = geo.dim
    out = np.empty(n + 1)
    out[0] = quermass_minkowski(geo, 0)
    for m in range(1, n + 1):
        out[m] = quermass_sigma(geo, m)
    return out


def sphere_area(n: int) -> float:
    """Measure of the unit n-sphere in R^{n+1}."""
    return 2.0 * pi ** ((n + 1) / 2.0) / gamma((n + 1) / 2.0)


def unit_ball_quermass(n: int, m: int) -> float:
    """V_{n+1-m} of the unit ball: binom(n, m) * |S^n|."""
    if not 0 <= m <= n:
        raise ValueError(f"index m={m} out of range 0..{n}")
    return comb(n, m) * sphere_area(n)


def iso_ratio(geo: PointwiseGeometry, k: int) -> float:
    """Scale-invariant ratio V_{n+1-k}^{1/(n+1-k)} / V_{n-k}^{1/(n-k)}.

    k = 0 pairs the Minkowski-form volume integral with the surface
    measure. k = n is rejected: the lower exponent 1/(n-k) degenerates.
    """
    n = geo.dim
    if not 0 <= k <= n - 1:
        raise ValueError(f"iso ratio index k={k} out of range 0..{n - 1}")
    v_hi = quermass_minkowski(geo, 0) if k == 0 else quermass_sigma(geo, k)
    v_lo = quermass_sigma(geo, k + 1)
    return v_hi ** (1.0 / (n + 1 - k)) / v_lo ** (1.0 / (n - k))


def iso_ratio_ball(n: int, k: int) -> float:
    """iso_ratio of the round ball, in closed form."""
    if not 0 <= k <= n - 1:
        raise ValueError(f"iso ratio index k={k} out of range 0..{n - 1}")
    v_hi = unit_ball_quermass(n, k)
    v_lo = unit_ball_quermass(n, k + 1)
    return v_hi ** (1.0 / (n + 1 - k)) / v_lo ** (1.0 / (n - k))


def kconvex_report(geo: PointwiseGeometry, k: int, tol_cone: float = 1e-10) -> ConvexityReport:
    """Minimum of sigma_1..sigma_k over the surface with a convexity flag.

    strict: all minima positive. nonstrict: within -tol_cone (scaled by
    the degree-m power of the curvature magnitude) of zero. violated
    otherwise.
    """
    n = geo.dim
    if not 1 <= k <= n:
        raise ValueError(f"convexity level k={k} out of range 1..{n}")
    mins = geo.sigma[:, 1 : k + 1].min(axis=0)
    scale = max(1.0, float(np.max(np.abs(geo.kappa))))
    floor = -tol_cone * scale ** np.arange(1, k + 1)
    if np.all(mins > 0.0):
        status = "strict"
    elif np.all(mins >= floor):
        status = "nonstrict"
    else:
        status = "violated"
    return ConvexityReport(k=k, min_sigma=mins, status=status)


def roundness(g: RadialGraph) -> float:
    """(max r - min r) / mean r; zero exactly for centered spheres."""
    r = g.r
    if g.dim == 1:
        mean = float(np.mean(r))
    else:
        mean = float((0.5 * r[0] + np.sum(r[1:-1]) + 0.5 * r[-1]) / (r.size - 1))
    return float((np.max(r) - np.min(r)) / mean)


# ---------------------------------------------------------------------------
# resampling and export


def _fft_resample_periodic(f: np.ndarray, out_size: int) -> np.ndarray:
    size = f.size
    spec = np.fft.rfft(f)
    out = np.zeros(out_size // 2 + 1, dtype=complex)
    out[: size // 2 + 1] = spec * (out_size / size)
    out[size // 2] *= 0.5  # old Nyquist bin becomes an ordinary pair
    return np.fft.irfft(out, out_size)


def refine(g: RadialGraph, factor: int) -> RadialGraph:
    """Resample onto a grid `factor` times finer by trigonometric
    interpolation (dim 2 through the even periodic extension of the
    profile)."""
    if factor != int(factor) or factor < 2:
        raise ValueError(f"refinement factor must be an integer >= 2, got {factor}")
    factor = int(factor)
    if g.dim == 1:
        r_new = _fft_resample_periodic(g.r, g.r.size * factor)
    else:
        ext = np.concatenate([g.r, g.r[-2:0:-1]])  # even mirror, period 2N
        fine = _fft_resample_periodic(ext, ext.size * factor)
        r_new = fine[: g.num_intervals * factor + 1]
    if np.min(r_new) <= 0.0:
        raise ShapeError("refinement produced a nonpositive radius")
    return RadialGraph(g.dim, r_new)


def embed(g: RadialGraph) -> np.ndarray:
    """Embedded sample points: (N, 2) curve points for dim 1, meridian
    (rho, z) points for dim 2."""
    t = g.param
    if g.dim == 1:
        return np.stack([g.r * np.cos(t), g.r * np.sin(t)], axis=1)
    return np.stack([g.r * np.sin(t), g.r * np.cos(t)], axis=1)


def export_snapshot(geo: PointwiseGeometry, k: int, path) -> None:
    """Write one surface snapshot as CSV.

    Columns: grid_coordinate, r, kappa_1[, kappa_2], u, sigma_k.
    """
    n = geo.dim
    if not 1 <= k <= n:
        raise ValueError(f"snapshot sigma level k={k} out of range 1..{n}")
    header = ["grid_coordinate", "r", "kappa_1"]
    if n == 2:
        header.append("kappa_2")
    header += ["u", "sigma_k"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(geo.r.size):
            row = [geo.param[i], geo.r[i], geo.kappa[i, 0]]
            if n == 2:
                row.append(geo.kappa[i, 1])
            row += [geo.u[i], geo.sigma[i, k]]
            writer.writerow([repr(float(v)) for v in row])
