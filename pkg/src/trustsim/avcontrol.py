"""Ego control: route following, shaped PID, obstacle avoidance, motion cues."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ControllerConfig, HazardConfig, PidGains
from .geometry import Polyline, wrap_angle


@dataclass(frozen=True)
class EgoState:
    x: float
    y: float
    speed: float
    heading: float
    accel_long: float
    accel_lat: float
    route_s: float

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("ego speed must be >= 0")


@dataclass(frozen=True)
class ControlCommand:
    accel: float  # m/s^2, negative brakes
    steer: float  # rad


@dataclass(frozen=True)
class Setpoints:
    target_speed: float
    target_heading: float


@dataclass(frozen=True)
class MotionCue:
    pitch_deg: float
    roll_deg: float
    clamped: bool


class RouteLostError(RuntimeError):
    """Ego drifted beyond the lateral recovery threshold of its route."""


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def follow_path(ego: EgoState, route, speed_cap: float | None = None,
                cfg: ControllerConfig | None = None,
                s_hint: float | None = None) -> Setpoints:
    """Setpoints toward a lookahead point on the route (built from the network).

    Target speed is the segment speed limit, lowered by `speed_cap` when a
    hazard or post-event stop imposes one.
    """
    cfg = cfg or ControllerConfig()
    hint = ego.route_s if s_hint is None else s_hint
    s_proj, lateral = route.path.project(ego.x, ego.y, s_hint=hint)
    if lateral > cfg.route_lost_m:
        raise RouteLostError(f"ego is {lateral:.1f} m off route (limit {cfg.route_lost_m} m)")
    s = route.path.unwrap(s_proj, hint)
    lookahead = _clamp(cfg.lookahead_gain * ego.speed, cfg.lookahead_min_m, cfg.lookahead_max_m)
    px, py = route.path.point_at(s + lookahead)
    heading = math.atan2(py - ego.y, px - ego.x)
    target = route.limit_at(s)
    if speed_cap is not None:
        target = min(target, speed_cap)
    return Setpoints(target_speed=max(target, 0.0), target_heading=heading)


class ChannelPid:
    """One PID channel with anti-windup and slew-rate command shaping."""

    def __init__(self, gains: PidGains):
        self.gains = gains
        self.reset()

    def reset(self) -> None:
        self._integral = 0.0
        self._prev_error: float | None = None
        self._prev_out = 0.0

    @property
    def integral(self) -> float:
        return self._integral

    def step(self, error: float, dt: float) -> float:
        if not dt > 0:
            raise ValueError("dt must be > 0")
        g = self.gains
        deriv = 0.0 if self._prev_error is None else (error - self._prev_error) / dt
        probe = g.kp * error + g.ki * self._integral + g.kd * deriv
        # conditional integration: never wind further into saturation
        pushing = (probe >= g.out_max and error > 0) or (probe <= g.out_min and error < 0)
        if not pushing:
            self._integral = _clamp(self._integral + error * dt,
                                    -g.integral_limit, g.integral_limit)
        raw = g.kp * error + g.ki * self._integral + g.kd * deriv
        limited = _clamp(raw, g.out_min, g.out_max)
        shaped = _clamp(limited, self._prev_out - g.slew_rate * dt,
                        self._prev_out + g.slew_rate * dt)
        self._prev_error = error
        self._prev_out = shaped
        return shaped


class VehicleController:
    """Speed + steering PID pair; single-owner state advanced by the sim loop."""

    def __init__(self, cfg: ControllerConfig | None = None):
        self.cfg = cfg or ControllerConfig()
        self.speed_pid = ChannelPid(self.cfg.speed)
        self.steer_pid = ChannelPid(self.cfg.steer)

    def reset(self) -> None:
        self.speed_pid.reset()
        self.steer_pid.reset()

    def step(self, ego: EgoState, setpoints: Setpoints, dt: float) -> ControlCommand:
        accel = self.speed_pid.step(setpoints.target_speed - ego.speed, dt)
        steer = self.steer_pid.step(wrap_angle(setpoints.target_heading - ego.heading), dt)
        return ControlCommand(accel=accel, steer=steer)


def pid_step(controller: VehicleController, ego: EgoState, setpoints: Setpoints,
             dt: float) -> ControlCommand:
    return controller.step(ego, setpoints, dt)


@dataclass
class StepResponse:
    t: np.ndarray
    v: np.ndarray
    command: np.ndarray
    overshoot_frac: float
    settling_time_s: float | None


def simulate_speed_step(cfg: ControllerConfig | None = None, v_from: float = 0.0,
                        v_to: float = 10.0, duration_s: float = 15.0,
                        dt: float = 1.0 / 90.0, band: float = 0.02) -> StepResponse:
    """Closed-loop speed step on the bundled plant (integrator with command shaping).

    Telemetry includes overshoot fraction and the 2%-band settling time.
    """
    cfg = cfg or ControllerConfig()
    pid = ChannelPid(cfg.speed)
    n = int(round(duration_s / dt)) + 1
    t = np.arange(n) * dt
    v = np.empty(n)
    u = np.zeros(n)
    v[0] = v_from
    for k in range(1, n):
        u[k] = pid.step(v_to - v[k - 1], dt)
        v[k] = max(v[k - 1] + u[k] * dt, 0.0)
    return StepResponse(t=t, v=v, command=u,
                        overshoot_frac=step_overshoot(v, v_from, v_to),
                        settling_time_s=step_settling_time(t, v, v_from, v_to, band))


def step_overshoot(v: np.ndarray, v_from: float, v_to: float) -> float:
    span = v_to - v_from
    if span == 0:
        return 0.0
    return max(0.0, float((np.max(v) - v_to) / span))


def step_settling_time(t: np.ndarray, v: np.ndarray, v_from: float, v_to: float,
                       band: float) -> float | None:
    tol = abs(band * (v_to - v_from))
    outside = np.abs(v - v_to) > tol
    if not outside.any():
        return float(t[0])
    last = int(np.nonzero(outside)[0][-1])
    if last + 1 >= len(t):
        return None
    return float(t[last + 1])


# ---------------------------------------------------------------------------
# avoidance


@dataclass(frozen=True)
class AvoidanceDecision:
    speed_cap: float | None
    detour: Polyline | None
    emergency: bool
    assessed_ids: tuple[str, ...]

    def cap(self, base: float | None = None) -> float | None:
        if self.speed_cap is None:
            return base
        return self.speed_cap if base is None else min(base, self.speed_cap)


_NO_AVOIDANCE = AvoidanceDecision(None, None, False, ())


def plan_avoidance(ego: EgoState, hazards, route, ego_radius: float,
                   cfg: HazardConfig | None = None) -> AvoidanceDecision:
    """Speed cap / detour / emergency stop for the worst active hazard.

    Speed reduction wins when the predicted gap at the reduced profile stays
    above the safety margin; otherwise auxiliary waypoints steer around the
    predicted obstacle position, rejoining the route afterward.
    """
    cfg = cfg or HazardConfig()
    assessed = tuple(h.object_id for h in hazards if h.collision_point is not None)
    active = [h for h in hazards if h.warning_active and h.collision_point is not None]
    if not active:
        return AvoidanceDecision(None, None, False, assessed)
    worst = max(active, key=lambda h: h.severity)
    v = ego.speed
    dist = worst.distance_to_collision
    margin = cfg.safety_margin_m
    a_req = v * v / (2.0 * max(dist - margin, 0.1))
    if a_req > cfg.emergency_decel:
        return AvoidanceDecision(0.0, None, True, assessed)

    cap = math.sqrt(2.0 * cfg.comfort_decel * max(dist - margin, 0.0))
    obstacle = worst.obstacle
    if obstacle is not None and not _slowdown_clears(ego, obstacle, route, ego_radius, cfg):
        detour = _build_detour(ego, obstacle, route, cfg)
        if detour is not None:
            return AvoidanceDecision(min(cap, max(v, cfg.min_plan_speed)), detour,
                                     False, assessed)
        return AvoidanceDecision(0.0, None, True, assessed)
    return AvoidanceDecision(cap, None, False, assessed)


def _slowdown_clears(ego: EgoState, obstacle, route, ego_radius: float,
                     cfg: HazardConfig) -> bool:
    dt = cfg.predict_dt_s
    n = int(cfg.horizon_s / dt) + 1
    tgrid = np.arange(n) * dt
    speeds = np.maximum(ego.speed - cfg.comfort_decel * tgrid, cfg.min_plan_speed)
    s = ego.route_s + np.concatenate([[0.0], np.cumsum(speeds[:-1]) * dt])
    path = route.path
    if path.closed:
        s_mod = np.mod(s, path.length)
    else:
        s_mod = np.clip(s, 0.0, path.length)
    ex = np.interp(s_mod, path.cum, path.points[:, 0])
    ey = np.interp(s_mod, path.cum, path.points[:, 1])
    ox = obstacle.x + obstacle.vx * tgrid
    oy = obstacle.y + obstacle.vy * tgrid
    gap = np.hypot(ex - ox, ey - oy) - (ego_radius + obstacle.radius)
    return bool(np.min(gap) >= cfg.safety_margin_m)


def _build_detour(ego: EgoState, obstacle, route, cfg: HazardConfig) -> Polyline | None:
    path = route.path
    s_obs, _ = path.project(obstacle.x, obstacle.y, s_hint=ego.route_s)
    s_obs = path.unwrap(s_obs, ego.route_s)
    if s_obs <= ego.route_s:
        return None
    h = path.heading_at(s_obs)
    px, py = path.point_at(s_obs)
    # side of the obstacle relative to travel direction: >0 left, <0 right
    side = math.cos(h) * (obstacle.y - py) - math.sin(h) * (obstacle.x - px)
    lateral = cfg.lateral_offset_m if side <= 0.0 else -cfg.lateral_offset_m
    s_in = max(ego.route_s + 2.0, s_obs - 12.0)
    s_out = s_obs + 10.0
    mid = path.offset_section(s_in, s_out, lateral, step=5.0)
    start = path.point_at(min(ego.route_s, s_in - 4.0))
    end = path.point_at(s_out + 8.0)
    pts = np.vstack([start, mid, end])
    keep = np.ones(len(pts), dtype=bool)
    keep[1:] = np.hypot(*(np.diff(pts, axis=0).T)) > 0.5
    return Polyline(pts[keep])


# ---------------------------------------------------------------------------
# motion platform cues


def tilt_coordination(accel_long: float, accel_lat: float,
                      cfg: ControllerConfig | None = None) -> MotionCue:
    """Platform angles whose gravity component mimics the sustained accelerations."""
    cfg = cfg or ControllerConfig()
    pitch = math.degrees(math.asin(_clamp(accel_long / cfg.gravity, -1.0, 1.0)))
    roll = math.degrees(math.asin(_clamp(accel_lat / cfg.gravity, -1.0, 1.0)))
    limit = cfg.platform_max_deg
    clamped = abs(pitch) > limit or abs(roll) > limit
    return MotionCue(pitch_deg=_clamp(pitch, -limit, limit),
                     roll_deg=_clamp(roll, -limit, limit), clamped=clamped)
