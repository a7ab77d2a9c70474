"""Time integration of the expanding curvature-ratio flow on radial graphs.

The raw flow moves the surface at normal speed sigma_{k-1}/sigma_k of the
principal curvatures; in the radial gauge this is d r/dt = F * w / r at
every grid node. The normalized variant subtracts r(t) * u * nu, chosen so
that the quermassintegral V_{n-k} stays constant, which in the radial gauge
is an extra -r(t) * r term. Stepping is classical RK4 with geometry
recomputed at every stage; the accumulated log-scale integral of r(t) is
advanced with the same stage weights so that e^{-log_scale} times the raw
trajectory reproduces the normalized one to integration order.

Step-size control is accept/reject: a step is accepted when the radius
stays positive, strict k-convexity holds, and (in conserving modes) the
per-step drift of the conserved quermassintegral stays under
tol_conserve * dt. The working dt doubles after ten straight acceptances
and is clamped by a heuristic parabolic stability cap
cfl * h^2 * min(sigma_k^2 / (sigma_{k-1} * max kappa)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from math import exp

import numpy as np

from . import geometry as geomod
from .geometry import (
    PointwiseGeometry,
    RadialGraph,
    ShapeError,
    compute_geometry,
    iso_ratio,
    quermass_minkowski,
    quermass_sigma,
    roundness,
)
from .symfunc import cnk

__all__ = [
    "MODES",
    "FlowConfig",
    "FlowState",
    "TrajectoryRecord",
    "FlowError",
    "ConeExitError",
    "speed_raw",
    "normalization_rt",
    "volume_scale_rate",
    "radial_rhs",
    "stability_cap",
    "initial_state",
    "step",
    "run",
    "rescale_state",
]

MODES = ("raw", "normalized", "rescaled_raw")

DT_UNDERFLOW_FRACTION = 1e-12
DOUBLE_AFTER = 10
MAX_STEPS = 5_000_000


class ConeExitError(RuntimeError):
    """Curvatures left the Garding cone at some node."""


class FlowError(RuntimeError):
    """Terminal integration failure; carries the partial record and state."""

    def __init__(self, reason: str, record: "TrajectoryRecord", state: "FlowState"):
        super().__init__(reason)
        self.reason = reason
        self.record = record
        self.state = state


DEFAULT_CFL = 0.05


@dataclass(frozen=True)
class FlowConfig:
    n: int
    k: int
    mode: str = "raw"
    t_max: float = 1.0
    dt_init: float = 1e-3
    dt_max: float = 1.0
    sample_every: int = 10
    # per-step guard; the trajectory-level conservation checks are tighter
    tol_conserve: float = 1e-5
    tol_round: float = 0.0  # 0 disables the roundness stop
    cfl_coefficient: float = DEFAULT_CFL
    cone_tol: float = 1e-10
    grid_n: int | None = None

    def __post_init__(self):
        if self.n not in (1, 2):
            raise ValueError(f"n must be 1 or 2, got {self.n}")
        if not 1 <= self.k <= self.n:
            raise ValueError(f"flow degree k={self.k} out of range 1..{self.n}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "normalized" and self.k > self.n - 1:
            raise ValueError(
                f"normalized mode needs k <= n-1 (r(t) degenerates at k=n); "
                f"got k={self.k}, n={self.n}; use rescaled_raw instead"
            )
        if self.dt_init <= 0.0 or self.dt_max <= 0.0 or self.dt_init > self.dt_max:
            raise ValueError("need 0 < dt_init <= dt_max")
        if self.t_max <= 0.0:
            raise ValueError("t_max must be positive")
        if self.sample_every < 1:
            raise ValueError("sample_every must be >= 1")
        if self.cfl_coefficient <= 0.0:
            raise ValueError("cfl_coefficient must be positive")


@dataclass(frozen=True)
class FlowState:
    t: float
    graph: RadialGraph
    log_scale: float
    geo: PointwiseGeometry = field(compare=False, repr=False)
    last_dt: float = 0.0
    accepted: int = 0
    rejections: int = 0


def initial_state(graph: RadialGraph) -> FlowState:
    return FlowState(t=0.0, graph=graph, log_scale=0.0, geo=compute_geometry(graph))


def speed_raw(geo: PointwiseGeometry, k: int) -> np.ndarray:
    """Normal speed sigma_{k-1}/sigma_k per node; positive on strictly
    k-convex data. Raises ConeExitError naming the worst node otherwise."""
    if not 1 <= k <= geo.dim:
        raise ValueError(f"flow degree k={k} out of range 1..{geo.dim}")
    sk = geo.sigma[:, k]
    if np.min(sk) <= 0.0:
        j = int(np.argmin(sk))
        raise ConeExitError(f"sigma_{k} <= 0 at node {j}: {sk[j]:.6e}")
    return geo.sigma[:, k - 1] / sk


def normalization_rt(geo: PointwiseGeometry, k: int) -> float:
    """Normalization constant r(t) holding V_{n-k} fixed.

    r(t) = int(sigma_{k+1} sigma_{k-1} / sigma_k) / (C_{n,k+1} int sigma_k);
    scale invariant. Only defined for k <= n-1: at k = n both numerator
    and the constant vanish identically.
    """
    n = geo.dim
    if not 1 <= k <= n - 1:
        raise ValueError(f"normalization constant needs 1 <= k <= n-1, got k={k}")
    sk = geo.sigma[:, k]
    if np.min(sk) <= 0.0:
        j = int(np.argmin(sk))
        raise ConeExitError(f"sigma_{k} <= 0 at node {j}: {sk[j]:.6e}")
    num = float(np.sum(geo.sigma[:, k + 1] * geo.sigma[:, k - 1] / sk * geo.dmu))
    den = cnk(n, k + 1) * float(np.sum(sk * geo.dmu))
    return num / den


def volume_scale_rate(geo: PointwiseGeometry, k: int) -> float:
    """Log-derivative rate holding the top quermassintegral V_{n+1} fixed.

    Equals int(F dmu) / int(u dmu); used as the rescaling rate for the
    k = n flow where r(t) is unavailable.
    """
    f = speed_raw(geo, k)
    return float(np.sum(f * geo.dmu)) / quermass_minkowski(geo, 0)


def _scale_rate(geo: PointwiseGeometry, k: int) -> float:
    if k <= geo.dim - 1:
        return normalization_rt(geo, k)
    return volume_scale_rate(geo, k)


def _rhs_and_rate(geo: PointwiseGeometry, mode: str, k: int):
    f = speed_raw(geo, k)
    drdt = f * geo.w / geo.r
    rate = _scale_rate(geo, k)
    if mode == "normalized":
        drdt = drdt - rate * geo.r
    return drdt, rate


def radial_rhs(geo: PointwiseGeometry, mode: str, k: int) -> np.ndarray:
    """Radial-gauge right-hand side d r/dt per node.

    raw / rescaled_raw: F * w / r. normalized: F * w / r - r(t) * r,
    using u * w / r = r to reduce the support-function term.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    return _rhs_and_rate(geo, mode, k)[0]


def stability_cap(geo: PointwiseGeometry, k: int, cfl: float) -> float:
    """Heuristic parabolic step cap cfl * h^2 * min(sigma_k^2 /
    (sigma_{k-1} * max kappa)); a stability guard, not an error bound."""
    kmax = geo.kappa.max(axis=1)
    expr = geo.sigma[:, k] ** 2 / (geo.sigma[:, k - 1] * kmax)
    lo = float(np.min(expr))
    if not np.isfinite(lo) or lo <= 0.0:
        raise ConeExitError("stability cap undefined: nonpositive curvature data")
    return cfl * geo.h * geo.h * lo


def _strictly_kconvex(geo: PointwiseGeometry, k: int) -> tuple[bool, str]:
    mins = geo.sigma[:, 1 : k + 1].min(axis=0)
    if np.all(mins > 0.0):
        return True, ""
    m = int(np.argmin(mins > 0.0)) + 1
    return False, f"sigma_{m} min {mins[m - 1]:.6e}"


def _conserved_value(geo: PointwiseGeometry, log_scale: float, config: FlowConfig) -> float | None:
    """Quantity the conserving modes must hold fixed, in the rescaled gauge."""
    if config.mode == "raw":
        return None
    n, k = config.n, config.k
    if config.mode == "normalized":
        return quermass_sigma(geo, k + 1)
    if k <= n - 1:
        return exp(-(n - k) * log_scale) * quermass_sigma(geo, k + 1)
    return exp(-(n + 1) * log_scale) * quermass_minkowski(geo, 0)


def _attempt(state: FlowState, dt: float, config: FlowConfig):
    """One RK4 trial step; returns (new_state, None) or (None, reason)."""
    r0 = state.graph.r
    dim = state.graph.dim
    kit = geomod._grid_kit(dim, r0.size)
    try:
        k1, q1 = _rhs_and_rate(state.geo, config.mode, config.k)
        geo2 = geomod._pointwise(kit, r0 + 0.5 * dt * k1)
        k2, q2 = _rhs_and_rate(geo2, config.mode, config.k)
        geo3 = geomod._pointwise(kit, r0 + 0.5 * dt * k2)
        k3, q3 = _rhs_and_rate(geo3, config.mode, config.k)
        geo4 = geomod._pointwise(kit, r0 + dt * k3)
        k4, q4 = _rhs_and_rate(geo4, config.mode, config.k)
        r_new = r0 + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        graph_new = RadialGraph(dim, r_new)
        geo_new = geomod._pointwise(kit, graph_new.r)
    except (ShapeError, ConeExitError, ValueError) as exc:
        return None, str(exc)
    ok, why = _strictly_kconvex(geo_new, config.k)
    if not ok:
        return None, f"k-convexity lost: {why}"
    log_new = state.log_scale + (dt / 6.0) * (q1 + 2.0 * q2 + 2.0 * q3 + q4)
    v_old = _conserved_value(state.geo, state.log_scale, config)
    if v_old is not None:
        v_new = _conserved_value(geo_new, log_new, config)
        if abs(v_new - v_old) > config.tol_conserve * dt * abs(v_old):
            return None, (
                f"conservation drift {abs(v_new - v_old) / abs(v_old):.3e} "
                f"exceeds {config.tol_conserve:.1e} * dt"
            )
    new_state = FlowState(
        t=state.t + dt,
        graph=graph_new,
        log_scale=log_new,
        geo=geo_new,
        last_dt=dt,
        accepted=state.accepted + 1,
        rejections=state.rejections,
    )
    return new_state, None


def step(state: FlowState, dt: float, config: FlowConfig):
    """Single trial step: the new FlowState on acceptance, None on rejection."""
    return _attempt(state, dt, config)[0]


def rescale_state(state: FlowState) -> RadialGraph:
    """Graph rescaled by e^{-log_scale}; identity at t = 0."""
    if state.log_scale == 0.0:
        return state.graph
    return state.graph.scaled(exp(-state.log_scale))


@dataclass
class TrajectoryRecord:
    """Sampled time series of one flow run.

    Columns: t, dt, log_scale, the quermassintegrals V_{n+1}..V_1 of the
    recorded graph (rescaled for mode rescaled_raw, the evolving graph
    otherwise), the iso ratios I_0..I_{n-1}, the normalization rate r_t,
    roundness of the rescaled graph and the minimum of sigma_k.
    """

    n: int
    k: int
    mode: str
    columns: tuple
    rows: list
    stop_reason: str = ""
    final_state: FlowState | None = None

    def column(self, name: str) -> np.ndarray:
        try:
            idx = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r}; have {self.columns}") from None
        return np.array([row[idx] for row in self.rows])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.columns)
            for row in self.rows:
                writer.writerow([repr(float(v)) for v in row])


def record_columns(n: int) -> tuple:
    cols = ["t", "dt", "log_scale"]
    cols += [f"V{j}" for j in range(n + 1, 0, -1)]
    cols += [f"I{m}" for m in range(n)]
    cols += ["r_t", "roundness_rescaled", "min_sigma_k"]
    return tuple(cols)


def _record_row(state: FlowState, config: FlowConfig) -> tuple:
    n, k = config.n, config.k
    geo = state.geo
    scale = exp(-state.log_scale) if config.mode == "rescaled_raw" else 1.0
    vees = [quermass_minkowski(geo, 0) * scale ** (n + 1)]
    vees += [quermass_sigma(geo, m) * scale ** (n + 1 - m) for m in range(1, n + 1)]
    isos = [iso_ratio(geo, m) for m in range(n)]
    rate = _scale_rate(geo, k)
    row = [state.t, state.last_dt, state.log_scale]
    row += vees + isos
    row += [rate, roundness(state.graph), float(np.min(geo.sigma[:, k])) / scale**k]
    return tuple(row)


def run(config: FlowConfig, initial: RadialGraph, observer=None,
        record_samples: bool = True) -> TrajectoryRecord:
    """Integrate the flow from `initial` to t_max or until the rescaled
    graph is round to tol_round.

    Samples every `sample_every` accepted steps plus the final state.
    `observer(state)` is called at each sample. record_samples=False keeps
    only the first and final record rows (observers still fire), for
    callers that collect their own series. Raises ValueError when the
    initial surface is not strictly k-convex and FlowError on cone exit
    or dt underflow, with the partial record attached.
    """
    if initial.dim != config.n:
        raise ValueError(f"config n={config.n} does not match graph dim={initial.dim}")
    if config.grid_n is not None and initial.num_intervals != config.grid_n:
        raise ValueError(
            f"config grid_n={config.grid_n} does not match graph N={initial.num_intervals}"
        )
    state = initial_state(initial)
    ok, why = _strictly_kconvex(state.geo, config.k)
    if not ok:
        raise ValueError(f"initial surface is not strictly {config.k}-convex: {why}")
    record = TrajectoryRecord(
        n=config.n, k=config.k, mode=config.mode,
        columns=record_columns(config.n), rows=[_record_row(state, config)],
    )
    observed_t = state.t
    if observer is not None:
        observer(state)

    def finish(reason: str) -> TrajectoryRecord:
        if record.rows[-1][0] != state.t:
            record.rows.append(_record_row(state, config))
        if observer is not None and observed_t != state.t:
            observer(state)
        record.stop_reason = reason
        record.final_state = state
        return record

    dt_work = config.dt_init
    dt_floor = DT_UNDERFLOW_FRACTION * config.dt_init
    streak = 0
    since_sample = 0
    t_end = config.t_max
    eps_t = 1e-14 * max(1.0, t_end)
    for _ in range(MAX_STEPS):
        if state.t >= t_end - eps_t:
            return finish("t_max")
        if config.tol_round > 0.0 and roundness(state.graph) < config.tol_round:
            return finish("round")
        cap = stability_cap(state.geo, config.k, config.cfl_coefficient)
        dt_eff = min(dt_work, config.dt_max, cap, t_end - state.t)
        new_state, reason = _attempt(state, dt_eff, config)
        if new_state is None:
            dt_work = 0.5 * dt_eff
            streak = 0
            state = replace(state, rejections=state.rejections + 1)
            if dt_work < dt_floor:
                raise FlowError(f"dt underflow after rejection: {reason}", finish("dt_underflow"), state)
            continue
        state = new_state
        streak += 1
        since_sample += 1
        if streak >= DOUBLE_AFTER:
            dt_work = 2.0 * dt_eff
            streak = 0
        if since_sample >= config.sample_every:
            since_sample = 0
            if record_samples:
                record.rows.append(_record_row(state, config))
            if observer is not None:
                observed_t = state.t
                observer(state)
    raise FlowError("step budget exhausted", finish("max_steps"), state)
