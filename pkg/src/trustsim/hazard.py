"""Collision prediction, warning distance, hazard index and warning presentation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .config import HazardConfig
from .scenario import ActorKind, ActorState, WorldState, query_objects_within

GREEN = (0, 255, 0)
RED = (255, 0, 0)

SIGN_KINDS = (ActorKind.TRAFFIC_LIGHT, ActorKind.ROAD_SIGN)


class Audio(str, Enum):
    NONE = "none"
    DANGER_ALERT = "danger_alert"
    SIGN_CHIME = "sign_chime"


@dataclass(frozen=True)
class ReactionModel:
    reaction_time_s: float = 1.5
    assumed_decel: float = 6.0

    def __post_init__(self):
        if not (self.reaction_time_s > 0 and self.assumed_decel > 0):
            raise ValueError("reaction time and assumed deceleration must be > 0")


@dataclass(frozen=True)
class HazardAssessment:
    object_id: str
    collision_point: tuple[float, float] | None
    distance_to_collision: float
    warning_distance: float
    ratio: float
    severity: float
    warning_active: bool
    tti_s: float | None = None
    obstacle: ActorState | None = None


@dataclass(frozen=True)
class WarningState:
    color: tuple[int, int, int]
    flash_hz: float
    audio: Audio


def collision_radius(actor: ActorState) -> float:
    """Effective footprint radius for disc-overlap collision checks.

    Mean of the half extents; the circumscribed circle is too conservative
    laterally (adjacent-lane traffic would register as colliding).
    """
    return (actor.length + actor.width) / 4.0


def warning_distance(speed: float, model: ReactionModel | None = None) -> float:
    """Speed-dependent warning distance: reaction travel plus braking distance."""
    if speed < 0:
        raise ValueError("speed must be >= 0")
    model = model or ReactionModel()
    return speed * model.reaction_time_s + speed * speed / (2.0 * model.assumed_decel)


def hazard_ratio(distance: float, d_warn: float) -> float:
    if distance < 0:
        raise ValueError("distance must be >= 0")
    if d_warn < 0:
        raise ValueError("warning distance must be >= 0")
    if d_warn == 0.0:
        return 1.0
    return min(max(distance / d_warn, 0.0), 1.0)


def hazard_severity(distance: float, d_warn: float) -> float:
    """Danger in [0, 1]: complement of the distance / warning-distance ratio."""
    if distance < 0:
        raise ValueError("distance must be >= 0")
    if d_warn == 0.0:
        return 0.0  # no motion, no threat
    return 1.0 - hazard_ratio(distance, d_warn)


def color_code(severity: float, exponent: float = 3.0) -> tuple[int, int, int]:
    """Green-to-red gradient; the hazard severity drives an exponential blend."""
    if not 0.0 <= severity <= 1.0:
        raise ValueError(f"severity must be in [0, 1], got {severity}")
    u = math.expm1(exponent * severity) / math.expm1(exponent)
    r = round(RED[0] * u + GREEN[0] * (1.0 - u))
    g = round(RED[1] * u + GREEN[1] * (1.0 - u))
    b = round(RED[2] * u + GREEN[2] * (1.0 - u))
    return (r, g, b)


def predict_collision(ego_traj, obstacle_traj, dt: float, ego_radius: float = 0.0,
                      obstacle_radius: float = 0.0):
    """Earliest sample where the swept extent discs touch, or None.

    Both trajectories must be sampled at the same dt over the same horizon.
    Returns ((x, y), tti_s); the point splits the center segment by radius.
    """
    ego = np.asarray(ego_traj, dtype=np.float64)
    obs = np.asarray(obstacle_traj, dtype=np.float64)
    if ego.shape != obs.shape:
        raise ValueError("trajectories must share sampling (same shape)")
    idx = int(_kernels.first_contact(ego, obs[None, :, :],
                                     np.array([ego_radius + obstacle_radius]))[0])
    if idx < 0:
        return None
    pe, po = ego[idx], obs[idx]
    total = ego_radius + obstacle_radius
    w = ego_radius / total if total > 0 else 0.5
    point = pe + (po - pe) * w
    return (float(point[0]), float(point[1])), idx * dt


def warning_state(assessment: HazardAssessment, object_kind: ActorKind,
                  sign_event: bool = False, newly_active: bool = False,
                  cfg: HazardConfig | None = None) -> WarningState:
    """Presentation state: color from severity, flash rate, audio cue.

    The danger alert fires on the rising edge only (caller latches it);
    the chime is reserved for signs/lights.
    """
    cfg = cfg or HazardConfig()
    color = color_code(assessment.severity, cfg.color_exponent)
    if assessment.warning_active:
        audio = Audio.DANGER_ALERT if newly_active else Audio.NONE
        return WarningState(color=color, flash_hz=cfg.flash_high_hz, audio=audio)
    if sign_event and object_kind in SIGN_KINDS:
        return WarningState(color=color, flash_hz=cfg.flash_low_hz, audio=Audio.SIGN_CHIME)
    return WarningState(color=color, flash_hz=0.0, audio=Audio.NONE)


def assess_world(world: WorldState, route, ego_radius: float,
                 detection_diameter: float = 150.0,
                 cfg: HazardConfig | None = None,
                 model: ReactionModel | None = None) -> list[HazardAssessment]:
    """Per-object collision prediction for everything inside the detection circle.

    The ego is predicted along its route at current speed; obstacles follow a
    constant-velocity model. `route` may be the active detour.
    """
    cfg = cfg or HazardConfig()
    model = model or ReactionModel(cfg.reaction_time_s, cfg.assumed_decel)
    ego = world.ego
    objects = query_objects_within(world, (ego.x, ego.y), detection_diameter)
    if not objects:
        return []

    dt = cfg.predict_dt_s
    n = int(round(cfg.horizon_s / dt)) + 1
    tgrid = np.arange(n) * dt
    s_proj, _ = route.path.project(ego.x, ego.y, s_hint=ego.route_s)
    s0 = route.path.unwrap(s_proj, ego.route_s)
    ego_path = route.path.sample(s0, ego.speed, n, dt)

    m = len(objects)
    obs_paths = np.empty((m, n, 2))
    radii = np.empty(m)
    for i, obj in enumerate(objects):
        obs_paths[i, :, 0] = obj.x + obj.vx * tgrid
        obs_paths[i, :, 1] = obj.y + obj.vy * tgrid
        radii[i] = ego_radius + collision_radius(obj)
    hits = _kernels.first_contact(ego_path, obs_paths, radii)

    d_warn = warning_distance(ego.speed, model)
    out: list[HazardAssessment] = []
    for i, obj in enumerate(objects):
        idx = int(hits[i])
        if idx < 0:
            out.append(HazardAssessment(
                object_id=obj.id, collision_point=None,
                distance_to_collision=math.inf, warning_distance=d_warn,
                ratio=1.0, severity=0.0, warning_active=False, obstacle=obj))
            continue
        pe, po = ego_path[idx], obs_paths[i, idx]
        total = radii[i]
        w = ego_radius / total if total > 0 else 0.5
        point = (float(pe[0] + (po[0] - pe[0]) * w), float(pe[1] + (po[1] - pe[1]) * w))
        dist = math.hypot(point[0] - ego.x, point[1] - ego.y)
        ratio = hazard_ratio(dist, d_warn)
        out.append(HazardAssessment(
            object_id=obj.id, collision_point=point, distance_to_collision=dist,
            warning_distance=d_warn, ratio=ratio, severity=1.0 - ratio if d_warn > 0 else 0.0,
            warning_active=dist < d_warn, tti_s=idx * dt, obstacle=obj))
    return out
