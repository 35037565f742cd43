"""World model: waypoint network, scripted actors and events, deterministic stepping.

Scenario files are the section/record format described in the README:
``[meta]`` key-values, ``[network]`` node/edge records, ``[actors]`` actor
records, ``[events]`` staged event records. ``load_scenario`` validates and
returns a :class:`ScenarioDef`; ``step_world`` advances a :class:`WorldState`
by one fixed tick and is fully deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources

import numpy as np

from .avcontrol import ControlCommand, EgoState
from .config import ConfigError, parse_kv, split_sections
from .geometry import Polyline, wrap_angle

MAX_ACTOR_SPEED = 60.0
PLANT_ACCEL_MIN = -8.5
PLANT_ACCEL_MAX = 3.0
PLANT_STEER_MAX = 0.55
DEFAULT_WHEELBASE = 2.8


class ActorKind(str, Enum):
    EGO_CAR = "EgoCar"
    TRAFFIC_CAR = "TrafficCar"
    SCOOTER = "Scooter"
    PEDESTRIAN = "Pedestrian"
    DOG = "Dog"
    BALL = "Ball"
    STATIC_OBJECT = "StaticObject"
    TRAFFIC_LIGHT = "TrafficLight"
    ROAD_SIGN = "RoadSign"


EVENT_IDS = ("Dog", "Ball", "Scooter", "Car1", "Car2", "Man1", "Man2")

EVENT_KIND = {
    "Dog": ActorKind.DOG,
    "Ball": ActorKind.BALL,
    "Scooter": ActorKind.SCOOTER,
    "Car1": ActorKind.TRAFFIC_CAR,
    "Car2": ActorKind.TRAFFIC_CAR,
    "Man1": ActorKind.PEDESTRIAN,
    "Man2": ActorKind.PEDESTRIAN,
}

DEFAULT_EXTENT = {
    ActorKind.EGO_CAR: (4.5, 1.8, 1.5),
    ActorKind.TRAFFIC_CAR: (4.4, 1.8, 1.5),
    ActorKind.SCOOTER: (1.8, 0.7, 1.6),
    ActorKind.PEDESTRIAN: (0.5, 0.5, 1.75),
    ActorKind.DOG: (0.9, 0.3, 0.5),
    ActorKind.BALL: (0.25, 0.25, 0.25),
    ActorKind.STATIC_OBJECT: (1.0, 1.0, 1.0),
    ActorKind.TRAFFIC_LIGHT: (0.3, 0.3, 6.0),
    ActorKind.ROAD_SIGN: (0.3, 0.3, 2.4),
}


class ScenarioValidationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# network


@dataclass(frozen=True)
class Waypoint:
    id: str
    x: float
    y: float
    speed_limit: float


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    lane_id: str
    road_section: str


class WaypointNetwork:
    def __init__(self, nodes: dict[str, Waypoint], edges: tuple[Edge, ...]):
        self.nodes = nodes
        self.edges = edges
        self.edge_map = {(e.src, e.dst): e for e in edges}
        for node in nodes.values():
            if not node.speed_limit > 0:
                raise ScenarioValidationError(f"node {node.id}: speed limit must be > 0")
        for e in edges:
            for nid in (e.src, e.dst):
                if nid not in nodes:
                    raise ScenarioValidationError(f"edge {e.src}->{e.dst}: unknown node {nid!r}")

    def route(self, node_ids: list[str], closed: bool) -> "EgoRoute":
        """Build a drivable route along existing edges; validates connectivity."""
        ids = list(node_ids)
        if closed and ids[0] != ids[-1]:
            ids.append(ids[0])
        pts, limits, sections = [], [], []
        for a, b in zip(ids[:-1], ids[1:]):
            edge = self.edge_map.get((a, b))
            if edge is None:
                raise ScenarioValidationError(f"route is not connected: no edge {a}->{b}")
            pts.append((self.nodes[a].x, self.nodes[a].y))
            limits.append(min(self.nodes[a].speed_limit, self.nodes[b].speed_limit))
            sections.append(edge.road_section)
        pts.append((self.nodes[ids[-1]].x, self.nodes[ids[-1]].y))
        return EgoRoute(Polyline(pts, closed=closed), tuple(limits), tuple(sections))


class EgoRoute:
    """Route geometry plus per-segment speed limits and road sections."""

    def __init__(self, path: Polyline, limits: tuple[float, ...], sections: tuple[str, ...]):
        if len(limits) != len(path.points) - 1:
            raise ValueError("one speed limit per route segment required")
        self.path = path
        self.limits = limits
        self.sections = sections

    def _segment(self, s: float) -> int:
        if self.path.closed:
            s = s % self.path.length
        s = min(max(s, 0.0), self.path.length)
        i = int(np.searchsorted(self.path.cum, s, side="right")) - 1
        return min(max(i, 0), len(self.limits) - 1)

    def limit_at(self, s: float) -> float:
        return self.limits[self._segment(s)]

    def section_at(self, s: float) -> str:
        return self.sections[self._segment(s)]


# ---------------------------------------------------------------------------
# actors


@dataclass(frozen=True)
class ActorScript:
    """Motion program: polyline with per-segment speeds, optional mid-path dwell."""

    path: Polyline
    speeds: tuple[float, ...]
    dwell_after_m: float = 0.0
    dwell_s: float = 0.0
    loop: bool = False
    despawn_after_s: float | None = None

    def __post_init__(self):
        if len(self.speeds) != len(self.path.points) - 1:
            raise ValueError("one speed per script segment required")
        if self.dwell_s > 0.0 and self.loop:
            raise ValueError("dwell is only supported on non-looping scripts")

    @property
    def duration_s(self) -> float:
        if self.loop:
            return math.inf
        total = self.dwell_s
        for seg_len, v in zip(np.diff(self.path.cum), self.speeds):
            if v <= 0:
                return math.inf
            total += seg_len / v
        return total

    def _segment(self, s_norm: float) -> int:
        i = int(np.searchsorted(self.path.cum, s_norm, side="right")) - 1
        return min(max(i, 0), len(self.speeds) - 1)

    def speed_at(self, s: float) -> float:
        s_norm = s % self.path.length if self.loop else min(s, self.path.length)
        return self.speeds[self._segment(s_norm)]

    def advance(self, s: float, dwell_left: float, dt: float) -> tuple[float, float, float]:
        """Advance arc position by dt; returns (s, dwell_left, instantaneous speed)."""
        remaining = dt
        speed_now = 0.0
        length = self.path.length
        dwell_pending = self.dwell_s > 0.0 and dwell_left > 0.0
        while remaining > 1e-12:
            if dwell_pending and s >= self.dwell_after_m - 1e-9:
                used = min(dwell_left, remaining)
                dwell_left -= used
                remaining -= used
                dwell_pending = dwell_left > 0.0
                speed_now = 0.0
                continue
            if self.loop:
                s_norm = s % length
            else:
                if s >= length - 1e-9:
                    return length, dwell_left, 0.0
                s_norm = s
            i = self._segment(s_norm)
            v = self.speeds[i]
            if v <= 0.0:
                return s, dwell_left, 0.0
            target = float(self.path.cum[i + 1])
            if dwell_pending and s_norm < self.dwell_after_m <= target:
                target = self.dwell_after_m
            gap = target - s_norm
            step = v * remaining
            if step >= gap - 1e-12:
                remaining -= gap / v
                s = s - s_norm + target
            else:
                s += step
                remaining = 0.0
            speed_now = v
        return s, dwell_left, speed_now


@dataclass(frozen=True)
class ActorState:
    id: str
    kind: ActorKind
    x: float
    y: float
    vx: float
    vy: float
    heading: float
    length: float
    width: float
    height: float
    dynamic: bool
    route: ActorScript | None = None
    route_s: float = 0.0
    dwell_left: float = 0.0
    age_s: float = 0.0
    road_section: str | None = None
    cycle: tuple[float, float, float] | None = None
    cycle_offset: float = 0.0

    def __post_init__(self):
        if min(self.length, self.width, self.height) <= 0:
            raise ScenarioValidationError(f"actor {self.id}: extent components must be > 0")
        if math.hypot(self.vx, self.vy) > MAX_ACTOR_SPEED + 1e-9:
            raise ScenarioValidationError(f"actor {self.id}: speed exceeds {MAX_ACTOR_SPEED} m/s")
        if not self.dynamic and (self.vx != 0.0 or self.vy != 0.0):
            raise ScenarioValidationError(f"actor {self.id}: static actors must have zero velocity")

    @property
    def radius(self) -> float:
        return math.hypot(self.length, self.width) / 2.0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


def light_phase(cycle: tuple[float, float, float], offset: float, t: float) -> str:
    g, y, r = cycle
    ph = (t + offset) % (g + y + r)
    if ph < g:
        return "green"
    if ph < g + y:
        return "yellow"
    return "red"


# ---------------------------------------------------------------------------
# events


@dataclass(frozen=True)
class EventSpec:
    event_id: str
    trigger_time_s: float
    mode: str  # intercept | cutin | parallel
    params: tuple[tuple[str, float], ...]
    stop_delay_s: float = 0.0
    post_event_stop_s: float = 0.0

    def param(self, key: str, default: float | None = None) -> float:
        for k, v in self.params:
            if k == key:
                return v
        if default is None:
            raise ScenarioValidationError(f"event {self.event_id}: missing parameter {key!r}")
        return default

    @property
    def actor_id(self) -> str:
        return f"ev_{self.event_id}"


def stage_event(event: EventSpec, ego: EgoState, route: EgoRoute) -> ActorState:
    """Materialize an event's scripted actor relative to the ego's current pose.

    Spawns are staged on the ego's predicted route position so encounters
    happen at the intended geometry regardless of accumulated timing drift.
    """
    kind = EVENT_KIND[event.event_id]
    ext = DEFAULT_EXTENT[kind]
    path_obj = route.path
    v_e = max(ego.speed, 3.0)
    s0 = ego.route_s

    if event.mode == "intercept":
        speed = event.param("speed")
        tti = event.param("tti")
        lead = event.param("lead", 0.0)
        overshoot = event.param("overshoot", 20.0)
        s_cross = s0 + v_e * tti
        cx, cy = path_obj.point_at(s_cross)
        h = path_obj.heading_at(s_cross)
        left = (-math.sin(h), math.cos(h))
        sign = -1.0 if event.param("from_right", 1.0) >= 0.5 else 1.0
        # approach direction: from the given side toward (and past) the route
        d = (-sign * left[0], -sign * left[1])
        approach = speed * (tti + lead)
        start = (cx - d[0] * approach, cy - d[1] * approach)
        end = (cx + d[0] * overshoot, cy + d[1] * overshoot)
        script = ActorScript(
            Polyline([start, end]), (speed,),
            dwell_after_m=event.param("dwell_frac", 0.0) * approach,
            dwell_s=event.param("dwell", 0.0),
            despawn_after_s=event.param("despawn", 20.0),
        )
    elif event.mode == "cutin":
        ahead = event.param("ahead")
        side_offset = event.param("side_offset", 3.5)
        merge = event.param("merge_ahead", 18.0)
        exit_ahead = event.param("exit_ahead", 30.0)
        speed_in = event.param("speed_in")
        speed_out = event.param("speed_out")
        a = _offset_point(path_obj, s0 + ahead, side_offset)
        b = path_obj.point_at(s0 + ahead + merge)
        c = path_obj.point_at(s0 + ahead + merge + exit_ahead)
        script = ActorScript(Polyline([a, b, c]), (speed_in, speed_out),
                             despawn_after_s=event.param("despawn", 20.0))
    elif event.mode == "parallel":
        back = event.param("back", 10.0)
        lateral = event.param("lateral", 3.0)
        length = event.param("length", 120.0)
        speed = event.param("speed")
        pts = path_obj.offset_section(s0 - back, s0 - back + length, lateral)
        script = ActorScript(Polyline(pts), (speed,) * (len(pts) - 1),
                             despawn_after_s=event.param("despawn", 20.0))
    else:
        raise ScenarioValidationError(f"event {event.event_id}: unknown mode {event.mode!r}")

    x0, y0 = script.path.point_at(0.0)
    h0 = script.path.heading_at(0.0)
    v0 = script.speeds[0]
    return ActorState(
        id=event.actor_id, kind=kind, x=x0, y=y0,
        vx=v0 * math.cos(h0), vy=v0 * math.sin(h0), heading=h0,
        length=ext[0], width=ext[1], height=ext[2], dynamic=True,
        route=script, dwell_left=script.dwell_s)


def _offset_point(path: Polyline, s: float, lateral: float) -> tuple[float, float]:
    px, py = path.point_at(s)
    h = path.heading_at(s)
    return (px - math.sin(h) * lateral, py + math.cos(h) * lateral)


# ---------------------------------------------------------------------------
# scenario definition + world state


@dataclass
class ScenarioDef:
    name: str
    duration_s: float
    tick_dt: float
    rng_seed: int
    network: WaypointNetwork
    ego_start: EgoState
    ego_extent: tuple[float, float, float]
    ego_route: EgoRoute
    actors: tuple[ActorState, ...]
    events: tuple[EventSpec, ...]

    def event(self, event_id: str) -> EventSpec:
        for ev in self.events:
            if ev.event_id == event_id:
                return ev
        raise KeyError(event_id)

    def stop_cap_at(self, t: float) -> float | None:
        """Post-event halt: returns 0.0 while inside any event's stop window."""
        for ev in self.events:
            if ev.post_event_stop_s <= 0:
                continue
            start = ev.trigger_time_s + ev.stop_delay_s
            if start <= t < start + ev.post_event_stop_s:
                return 0.0
        return None


@dataclass(frozen=True)
class WorldState:
    t: float
    ego: EgoState
    actors: tuple[ActorState, ...]
    lights: tuple[tuple[str, str], ...]
    active_events: frozenset[str]


def make_initial_world(scenario: ScenarioDef) -> WorldState:
    t0 = 0.0
    lights = tuple((a.id, light_phase(a.cycle, a.cycle_offset, t0))
                   for a in scenario.actors if a.cycle is not None)
    return WorldState(t=t0, ego=scenario.ego_start, actors=scenario.actors,
                      lights=lights, active_events=frozenset())


def _step_actor(act: ActorState, dt: float) -> ActorState | None:
    if act.route is None or not act.dynamic:
        return act
    age = act.age_s + dt
    script = act.route
    if script.despawn_after_s is not None and age > script.duration_s + script.despawn_after_s:
        return None
    s, dwell_left, v = script.advance(act.route_s, act.dwell_left, dt)
    x, y = script.path.point_at(s)
    if v > 0.0:
        h = script.path.heading_at(s)
        vx, vy = v * math.cos(h), v * math.sin(h)
    else:
        h = act.heading
        vx = vy = 0.0
    return replace(act, x=x, y=y, vx=vx, vy=vy, heading=h,
                   route_s=s, dwell_left=dwell_left, age_s=age)


def step_world(world: WorldState, scenario: ScenarioDef, control: ControlCommand,
               *, wheelbase: float = DEFAULT_WHEELBASE) -> WorldState:
    """Advance one tick. Saturating dynamics; deterministic given inputs."""
    dt = scenario.tick_dt
    t2 = world.t + dt

    ego = world.ego
    a = min(max(control.accel, PLANT_ACCEL_MIN), PLANT_ACCEL_MAX)
    steer = min(max(control.steer, -PLANT_STEER_MAX), PLANT_STEER_MAX)
    v2 = min(max(ego.speed + a * dt, 0.0), MAX_ACTOR_SPEED)
    h2 = wrap_angle(ego.heading + (v2 / wheelbase) * math.tan(steer) * dt)
    x2 = ego.x + v2 * math.cos(h2) * dt
    y2 = ego.y + v2 * math.sin(h2) * dt
    ego2 = EgoState(
        x=x2, y=y2, speed=v2, heading=h2,
        accel_long=(v2 - ego.speed) / dt,
        accel_lat=v2 * wrap_angle(h2 - ego.heading) / dt,
        route_s=ego.route_s + v2 * dt)

    actors: list[ActorState] = []
    for act in world.actors:
        stepped = _step_actor(act, dt)
        if stepped is not None:
            actors.append(stepped)

    active = set(world.active_events)
    for ev in scenario.events:
        crossed = world.t < ev.trigger_time_s <= t2 or (world.t == 0.0 and ev.trigger_time_s == 0.0)
        if crossed and ev.event_id not in active:
            actors.append(stage_event(ev, world.ego, scenario.ego_route))
            active.add(ev.event_id)

    lights = tuple((a.id, light_phase(a.cycle, a.cycle_offset, t2))
                   for a in actors if a.cycle is not None)
    return WorldState(t=t2, ego=ego2, actors=tuple(actors),
                      lights=lights, active_events=frozenset(active))


def query_objects_within(world: WorldState, center: tuple[float, float],
                         diameter: float) -> list[ActorState]:
    """Actors whose center lies within diameter/2 of center; ego is excluded."""
    if not diameter > 0:
        raise ValueError("diameter must be > 0")
    cx, cy = center
    r = diameter / 2.0
    return [a for a in world.actors if math.hypot(a.x - cx, a.y - cy) <= r]


# ---------------------------------------------------------------------------
# parsing


def _tokens(line: str, lineno: int) -> tuple[list[str], dict[str, str]]:
    pos: list[str] = []
    kv: dict[str, str] = {}
    for tok in line.split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            if not k or not v:
                raise ConfigError(f"malformed field {tok!r}", lineno)
            kv[k.lower()] = v
        else:
            if kv:
                raise ConfigError(f"positional token {tok!r} after key=value fields", lineno)
            pos.append(tok)
    return pos, kv


def _parse_network(lines) -> WaypointNetwork:
    nodes: dict[str, Waypoint] = {}
    edges: list[Edge] = []
    for lineno, line in lines:
        pos, kv = _tokens(line, lineno)
        if kv:
            raise ConfigError("network records take positional fields only", lineno)
        if not pos:
            continue
        rec, args = pos[0], pos[1:]
        if rec == "node":
            if len(args) != 4:
                raise ConfigError("node needs: id x y speed_limit", lineno)
            nid = args[0]
            if nid in nodes:
                raise ConfigError(f"duplicate node id {nid!r}", lineno)
            try:
                nodes[nid] = Waypoint(nid, float(args[1]), float(args[2]), float(args[3]))
            except ValueError as exc:
                raise ConfigError(str(exc), lineno) from None
        elif rec == "edge":
            if len(args) != 4:
                raise ConfigError("edge needs: from to lane section", lineno)
            edges.append(Edge(args[0], args[1], args[2], args[3]))
        else:
            raise ConfigError(f"unknown network record {rec!r}", lineno)
    try:
        return WaypointNetwork(nodes, tuple(edges))
    except ScenarioValidationError as exc:
        raise ScenarioValidationError(f"[network] {exc}") from None


def _parse_points(spec: str, lineno: int) -> list[tuple[float, float]]:
    pts = []
    for part in spec.split(";"):
        part = part.strip().strip("()")
        if not part:
            continue
        try:
            xs, ys = part.split(",")
            pts.append((float(xs), float(ys)))
        except ValueError:
            raise ConfigError(f"bad point {part!r} (expected x,y)", lineno) from None
    if len(pts) < 2:
        raise ConfigError("point route needs at least 2 points", lineno)
    return pts


def _parse_actor(lineno: int, line: str, network: WaypointNetwork):
    pos, kv = _tokens(line, lineno)
    if len(pos) != 3 or pos[0] != "actor":
        raise ConfigError("actor needs: actor <id> <Kind> key=value...", lineno)
    aid = pos[1]
    try:
        kind = ActorKind(pos[2])
    except ValueError:
        raise ConfigError(f"unknown actor kind {pos[2]!r}", lineno) from None

    def fget(key, default):
        try:
            return float(kv[key]) if key in kv else default
        except ValueError as exc:
            raise ConfigError(f"field {key!r}: {exc}", lineno) from None

    ext = DEFAULT_EXTENT[kind]
    length = fget("length", ext[0])
    width = fget("width", ext[1])
    height = fget("height", ext[2])
    dynamic = bool(int(kv.get("dynamic", "1" if kind in (
        ActorKind.EGO_CAR, ActorKind.TRAFFIC_CAR, ActorKind.SCOOTER, ActorKind.PEDESTRIAN,
        ActorKind.DOG, ActorKind.BALL) else "0")))

    route_spec = kv.get("route")
    script = None
    route_nodes: list[str] | None = None
    loop = bool(int(kv.get("loop", "0")))
    start_s = fget("start_s", 0.0)
    speed = fget("speed", 0.0)
    if route_spec:
        if ">" in route_spec or route_spec in network.nodes:
            route_nodes = route_spec.split(">")
        else:
            pts = _parse_points(route_spec, lineno)
            path = Polyline(pts, closed=loop)
            script = ActorScript(path, (speed,) * (len(path.points) - 1), loop=loop)
    cycle = None
    if "cycle" in kv:
        parts = kv["cycle"].split(":")
        if len(parts) != 3:
            raise ConfigError("cycle needs green:yellow:red seconds", lineno)
        cycle = tuple(float(p) for p in parts)

    x, y = fget("x", 0.0), fget("y", 0.0)
    heading = fget("heading", 0.0)
    if kind is ActorKind.EGO_CAR:
        return ("ego", aid, x, y, heading, (length, width, height), route_nodes, loop, lineno)

    if route_nodes is not None:
        # non-ego actors on network routes share the route geometry
        ego_route = network.route(route_nodes, closed=loop)
        path = ego_route.path
        script = ActorScript(path, (speed,) * (len(path.points) - 1), loop=loop)
    s0 = start_s
    if script is not None:
        x, y = script.path.point_at(s0)
        heading = script.path.heading_at(s0)
        vx, vy = speed * math.cos(heading), speed * math.sin(heading)
    else:
        vx, vy = fget("vx", 0.0), fget("vy", 0.0)
    try:
        actor = ActorState(
            id=aid, kind=kind, x=x, y=y, vx=vx if dynamic else 0.0, vy=vy if dynamic else 0.0,
            heading=heading, length=length, width=width, height=height, dynamic=dynamic,
            route=script, route_s=s0, road_section=kv.get("section"),
            cycle=cycle, cycle_offset=fget("offset", 0.0))
    except ScenarioValidationError as exc:
        raise ConfigError(str(exc), lineno) from None
    return ("actor", actor)


_EVENT_FLOAT_KEYS = ("trigger", "speed", "tti", "lead", "overshoot", "dwell", "dwell_frac",
                     "despawn", "ahead", "side_offset", "merge_ahead", "exit_ahead",
                     "speed_in", "speed_out", "back", "lateral", "length",
                     "stop_delay", "stop")


def _parse_event(lineno: int, line: str) -> EventSpec:
    pos, kv = _tokens(line, lineno)
    if len(pos) != 2 or pos[0] != "event":
        raise ConfigError("event needs: event <EventId> key=value...", lineno)
    eid = pos[1]
    if eid not in EVENT_IDS:
        raise ConfigError(f"unknown event id {eid!r} (expected one of {', '.join(EVENT_IDS)})",
                          lineno)
    if "trigger" not in kv:
        raise ConfigError(f"event {eid}: missing trigger=", lineno)
    mode = kv.get("mode", "intercept")
    params = []
    for key, value in kv.items():
        if key in ("mode", "side"):
            continue
        if key not in _EVENT_FLOAT_KEYS:
            raise ConfigError(f"event {eid}: unknown field {key!r}", lineno)
        try:
            params.append((key, float(value)))
        except ValueError as exc:
            raise ConfigError(f"event {eid} field {key!r}: {exc}", lineno) from None
    side = kv.get("side", "right")
    if side not in ("left", "right"):
        raise ConfigError(f"event {eid}: side must be left or right", lineno)
    params.append(("from_right", 1.0 if side == "right" else 0.0))
    spec = EventSpec(
        event_id=eid, trigger_time_s=float(kv["trigger"]), mode=mode,
        params=tuple(params),
        stop_delay_s=float(kv.get("stop_delay", 0.0)),
        post_event_stop_s=float(kv.get("stop", 0.0)))
    if spec.post_event_stop_s < 0:
        raise ConfigError(f"event {eid}: stop must be >= 0", lineno)
    return spec


def load_scenario(text: str, name: str = "scenario") -> ScenarioDef:
    """Parse and validate a scenario file's text."""
    sections = split_sections(text)
    meta = parse_kv(sections.get("meta", []))
    duration = float(meta.get("duration_s", 720.0))
    if not duration > 0:
        raise ScenarioValidationError("duration_s must be > 0")
    if "tick_dt" in meta:
        tick_dt = float(meta["tick_dt"])
    else:
        tick_dt = 1.0 / float(meta.get("tick_hz", 90.0))
    if not tick_dt > 0:
        raise ScenarioValidationError("tick rate must be > 0")
    rng_seed = int(meta.get("rng_seed", 0))
    name = meta.get("name", name)

    network = _parse_network(sections.get("network", []))

    ego_rec = None
    actors: list[ActorState] = []
    seen_ids: set[str] = set()
    for lineno, line in sections.get("actors", []):
        parsed = _parse_actor(lineno, line, network)
        if parsed[0] == "ego":
            if ego_rec is not None:
                raise ConfigError("more than one EgoCar actor", lineno)
            ego_rec = parsed
        else:
            actor = parsed[1]
            if actor.id in seen_ids:
                raise ConfigError(f"duplicate actor id {actor.id!r}", lineno)
            seen_ids.add(actor.id)
            actors.append(actor)
    if ego_rec is None:
        raise ScenarioValidationError("scenario has no EgoCar actor")
    _, ego_id, ex, ey, eh, ego_extent, route_nodes, loop, ego_lineno = ego_rec
    if ego_id in seen_ids:
        raise ConfigError(f"duplicate actor id {ego_id!r}", ego_lineno)
    if not route_nodes:
        raise ScenarioValidationError("EgoCar requires a network node route")
    ego_route = network.route(route_nodes, closed=loop)
    s0, _ = ego_route.path.project(ex, ey)
    ego_start = EgoState(x=ex, y=ey, speed=0.0, heading=eh,
                         accel_long=0.0, accel_lat=0.0, route_s=s0)

    events: list[EventSpec] = []
    seen_events: set[str] = set()
    for lineno, line in sections.get("events", []):
        spec = _parse_event(lineno, line)
        if spec.event_id in seen_events:
            raise ScenarioValidationError(f"event {spec.event_id} appears more than once")
        seen_events.add(spec.event_id)
        if not 0.0 <= spec.trigger_time_s <= duration:
            raise ScenarioValidationError(
                f"event {spec.event_id}: trigger {spec.trigger_time_s} outside [0, {duration}]")
        events.append(spec)
    events.sort(key=lambda e: e.trigger_time_s)

    return ScenarioDef(
        name=name, duration_s=duration, tick_dt=tick_dt, rng_seed=rng_seed,
        network=network, ego_start=ego_start, ego_extent=ego_extent,
        ego_route=ego_route, actors=tuple(actors), events=tuple(events))


def load_scenario_file(path: str) -> ScenarioDef:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scenario(fh.read(), name=path)


def bundled_scenario_text(name: str = "paper") -> str:
    fname = {"paper": "paper_scenario.scn"}.get(name)
    if fname is None:
        raise KeyError(f"no bundled scenario named {name!r}")
    return resources.files("trustsim.data").joinpath(fname).read_text(encoding="utf-8")


def load_bundled_scenario(name: str = "paper") -> ScenarioDef:
    return load_scenario(bundled_scenario_text(name), name=name)
