"""HUD annotations: bounding boxes, labels, nav lines, and the OMN/SEL policies.

OMN shows every dynamic object inside the detection circle; SEL keeps only
the objects that currently shape the vehicle's behavior. Both always carry
the ego navigation line and the road center line.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace

from .config import HazardConfig, HudConfig
from .hazard import HazardAssessment, WarningState, warning_state
from .scenario import ActorKind, ActorState, WorldState

POLICIES = ("OMN", "SEL")

KIND_LABEL = {
    ActorKind.EGO_CAR: "Car",
    ActorKind.TRAFFIC_CAR: "Car",
    ActorKind.SCOOTER: "Scooter",
    ActorKind.PEDESTRIAN: "Pedestrian",
    ActorKind.DOG: "Dog",
    ActorKind.BALL: "Ball",
    ActorKind.STATIC_OBJECT: "Object",
    ActorKind.TRAFFIC_LIGHT: "TrafficLight",
    ActorKind.ROAD_SIGN: "RoadSign",
}

# objects the vehicle can trace a planned path for
_CAR_KINDS = (ActorKind.TRAFFIC_CAR, ActorKind.EGO_CAR)

_PRECEDING_RANGE_M = 60.0
_PRECEDING_LATERAL_M = 2.5


@dataclass(frozen=True)
class Cue:
    object_id: str
    kind: ActorKind
    box: tuple  # four footprint corners (x, y) plus height
    height: float
    label: str
    icon_id: str
    warning: WarningState
    distance_m: float
    speed_kmh: float | None
    nav_line: tuple | None
    faces_ego: bool = True


@dataclass(frozen=True)
class CueSet:
    t: float
    policy: str
    cues: tuple[Cue, ...]
    ego_nav_line: tuple
    road_center_line: tuple

    def ids(self) -> set[str]:
        return {c.object_id for c in self.cues}


def footprint_box(actor: ActorState) -> tuple:
    hl, hw = actor.length / 2.0, actor.width / 2.0
    c, s = math.cos(actor.heading), math.sin(actor.heading)
    corners = []
    for dx, dy in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw)):
        corners.append((actor.x + dx * c - dy * s, actor.y + dx * s + dy * c))
    return tuple(corners)


def _label(actor: ActorState, distance: float) -> tuple[str, float | None]:
    base = KIND_LABEL[actor.kind]
    speed = actor.speed
    if actor.dynamic and speed > 0.05:
        kmh = speed * 3.6
        return f"{base} {round(distance)}m {round(kmh)}km/h", kmh
    return f"{base} {round(distance)}m", None


def _nav_line(actor: ActorState, length: float) -> tuple | None:
    if actor.kind not in _CAR_KINDS:
        return None
    if actor.route is not None:
        pts = actor.route.path.sample(actor.route_s, 1.0, int(length) + 1, 1.0)
        return tuple((float(x), float(y)) for x, y in pts)
    if actor.speed > 0.05:
        ux, uy = actor.vx / actor.speed, actor.vy / actor.speed
        return ((actor.x, actor.y), (actor.x + ux * length, actor.y + uy * length))
    return None


def build_candidates(world: WorldState, assessments: list[HazardAssessment],
                     flags: dict[str, tuple[bool, bool]] | None = None,
                     hud_cfg: HudConfig | None = None,
                     hazard_cfg: HazardConfig | None = None) -> list[Cue]:
    """One candidate cue per assessed object inside the detection circle.

    `flags` maps object id to (sign_event, newly_active) for this tick.
    """
    hud_cfg = hud_cfg or HudConfig()
    hazard_cfg = hazard_cfg or HazardConfig()
    flags = flags or {}
    ego = world.ego
    actors = {a.id: a for a in world.actors}
    radius = hud_cfg.detection_diameter_m / 2.0
    cues: list[Cue] = []
    for hz in assessments:
        actor = actors.get(hz.object_id)
        if actor is None:
            continue
        dist = math.hypot(actor.x - ego.x, actor.y - ego.y)
        if dist > radius:
            continue
        sign_event, newly_active = flags.get(actor.id, (False, False))
        warn = warning_state(hz, actor.kind, sign_event=sign_event,
                             newly_active=newly_active, cfg=hazard_cfg)
        label, kmh = _label(actor, dist)
        cues.append(Cue(
            object_id=actor.id, kind=actor.kind, box=footprint_box(actor),
            height=actor.height, label=label, icon_id=actor.kind.value.lower(),
            warning=warn, distance_m=dist, speed_kmh=kmh,
            nav_line=_nav_line(actor, hud_cfg.nav_line_length_m)))
    return cues


def _is_preceding(actor: ActorState, ego, route) -> bool:
    s_obj, lateral = route.path.project(actor.x, actor.y, s_hint=ego.route_s)
    if lateral > _PRECEDING_LATERAL_M:
        return False
    s_obj = route.path.unwrap(s_obj, ego.route_s)
    ahead = s_obj - ego.route_s
    return 0.0 < ahead <= _PRECEDING_RANGE_M


def select_cues(candidates: list[Cue], world: WorldState,
                assessments: list[HazardAssessment], policy: str, route,
                assessed_ids: tuple[str, ...] = (),
                hud_cfg: HudConfig | None = None) -> CueSet:
    """Filter candidates under a policy; pure in its arguments.

    OMN: all dynamic objects, current-section signs/lights, statics only when
    their warning is active; nav lines for every displayed car.
    SEL: cars only when preceding the ego or crossing its trajectory, anything
    else only when its warning is active; car nav lines only while the vehicle
    is actually assessing that car; signs/lights and ego lines as in OMN.
    """
    if policy not in POLICIES:
        raise ValueError(f"policy must be one of {POLICIES}, got {policy!r}")
    hud_cfg = hud_cfg or HudConfig()
    ego = world.ego
    actors = {a.id: a for a in world.actors}
    hz_by_id = {h.object_id: h for h in assessments}
    section = route.section_at(ego.route_s)

    kept: list[Cue] = []
    for cue in candidates:
        actor = actors[cue.object_id]
        hz = hz_by_id.get(cue.object_id)
        warning = bool(hz and hz.warning_active)
        if actor.kind in (ActorKind.TRAFFIC_LIGHT, ActorKind.ROAD_SIGN):
            if actor.road_section is not None and actor.road_section != section:
                continue
            kept.append(cue)
            continue
        if not actor.dynamic:
            if warning:
                kept.append(cue)
            continue
        if policy == "OMN":
            kept.append(cue)
            continue
        # SEL
        if actor.kind is ActorKind.TRAFFIC_CAR:
            crossing = bool(hz and hz.collision_point is not None)
            if crossing or warning or _is_preceding(actor, ego, route):
                if cue.object_id not in assessed_ids:
                    cue = replace(cue, nav_line=None)
                kept.append(cue)
            continue
        if warning:
            kept.append(cue)

    s0 = ego.route_s
    nav = route.path.sample(s0, 1.0, int(hud_cfg.nav_line_length_m) + 1, 1.0)
    half = hud_cfg.center_line_length_m / 2.0
    center = route.path.sample(s0 - half, 1.0, int(hud_cfg.center_line_length_m) + 1, 1.0)
    return CueSet(
        t=world.t, policy=policy, cues=tuple(kept),
        ego_nav_line=tuple((float(x), float(y)) for x, y in nav),
        road_center_line=tuple((float(x), float(y)) for x, y in center))


# ---------------------------------------------------------------------------
# cue log statistics

CUE_LOG_HEADER = ("t", "policy", "object_id", "kind", "distance_m", "speed_kmh",
                  "severity", "flash_hz", "audio", "has_nav_line")


@dataclass
class CueCountStats:
    per_tick: dict[str, list[tuple[float, int]]]
    mean: dict[str, float]


def cue_count_stats(source) -> CueCountStats:
    """Per-tick cue counts and their means per policy from a cue log.

    `source` is a cue-log path or an iterable of (t, policy) pairs.
    """
    counts: dict[str, dict[float, int]] = {}
    ticks: dict[str, set[float]] = {}

    def add(t: float, policy: str, n: int = 1):
        counts.setdefault(policy, {})
        ticks.setdefault(policy, set()).add(t)
        counts[policy][t] = counts[policy].get(t, 0) + n

    if isinstance(source, (str, bytes)) or hasattr(source, "read"):
        fh = open(source, "r", encoding="utf-8", newline="") if isinstance(source, (str, bytes)) else source
        with fh:
            reader = csv.DictReader(fh)
            rows = 0
            for row in reader:
                rows += 1
                t = float(row["t"])
                policy = row["policy"]
                if row.get("object_id") == "":
                    add(t, policy, 0)  # tick marker with zero cues
                else:
                    add(t, policy, 1)
            if rows == 0:
                raise ValueError("empty cue log")
    else:
        empty = True
        for t, policy in source:
            empty = False
            add(float(t), policy, 1)
        if empty:
            raise ValueError("empty cue log")

    per_tick = {p: sorted(d.items()) for p, d in counts.items()}
    mean = {p: (sum(n for _, n in rows) / len(rows) if rows else 0.0)
            for p, rows in per_tick.items()}
    return CueCountStats(per_tick=per_tick, mean=mean)
