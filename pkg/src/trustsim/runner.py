"""Simulation loop: control, hazards, HUD policies, and run logging.

`simulate` yields one record per tick; `run_and_log` drives it and writes the
CSV logs (state, hazard, cues, motion, events). All outputs are deterministic
for a given scenario and flags.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .avcontrol import (AvoidanceDecision, ControlCommand, EgoState, MotionCue, Setpoints,
                        VehicleController, follow_path, plan_avoidance, tilt_coordination)
from .config import Config
from .hazard import HazardAssessment, assess_world, warning_state
from .hud import CUE_LOG_HEADER, CueSet, build_candidates, select_cues
from .scenario import (ActorKind, EgoRoute, ScenarioDef, WorldState, make_initial_world,
                       step_world)


@dataclass
class TickRecord:
    world: WorldState
    assessments: list[HazardAssessment]
    decision: AvoidanceDecision
    setpoints: Setpoints
    control: ControlCommand
    motion: MotionCue
    cue_sets: dict[str, CueSet]
    flags: dict[str, tuple[bool, bool]]
    detour_active: bool


def _ego_radius(scenario: ScenarioDef) -> float:
    length, width, _ = scenario.ego_extent
    return (length + width) / 4.0


class Simulation:
    """Single-owner mutable state for one run (controller, detour, latches)."""

    def __init__(self, scenario: ScenarioDef, config: Config | None = None,
                 policies: tuple[str, ...] = ("OMN",)):
        self.scenario = scenario
        self.config = config or Config()
        self.policies = policies
        self.controller = VehicleController(self.config.controller)
        self.world = make_initial_world(scenario)
        self.ego_radius = _ego_radius(scenario)
        self._detour_route: EgoRoute | None = None
        self._detour_s = 0.0
        self._prev_warn: dict[str, bool] = {}
        self._seen_signs: set[str] = set()
        self._prev_light_phase: dict[str, str] = dict(self.world.lights)
        self._light_s = self._project_lights()

    def _project_lights(self) -> dict[str, float]:
        out = {}
        path = self.scenario.ego_route.path
        for actor in self.scenario.actors:
            if actor.kind is ActorKind.TRAFFIC_LIGHT:
                s, _ = path.project(actor.x, actor.y)
                out[actor.id] = s
        return out

    def _light_cap(self, world: WorldState) -> float | None:
        cfg = self.config.hazard
        route = self.scenario.ego_route
        ego = world.ego
        phases = dict(world.lights)
        section = route.section_at(ego.route_s)
        cap = None
        for light_id, s_l in self._light_s.items():
            phase = phases.get(light_id)
            if phase not in ("red", "yellow"):
                continue
            actor = next(a for a in world.actors if a.id == light_id)
            if actor.road_section is not None and actor.road_section != section:
                continue
            length = route.path.length
            ds = (s_l - ego.route_s) % length if route.path.closed else s_l - ego.route_s
            if 2.0 < ds <= cfg.light_stop_range_m:
                v = math.sqrt(2.0 * cfg.comfort_decel * max(ds - cfg.light_stop_gap_m, 0.0))
                cap = v if cap is None else min(cap, v)
        return cap

    def _update_flags(self, world: WorldState,
                      assessments: list[HazardAssessment]) -> dict[str, tuple[bool, bool]]:
        flags: dict[str, tuple[bool, bool]] = {}
        phases = dict(world.lights)
        diameter = self.config.hud.detection_diameter_m
        ego = world.ego
        for actor in world.actors:
            sign_event = False
            if actor.kind is ActorKind.ROAD_SIGN:
                if (actor.id not in self._seen_signs
                        and math.hypot(actor.x - ego.x, actor.y - ego.y) <= diameter / 2.0):
                    self._seen_signs.add(actor.id)
                    sign_event = True
            elif actor.kind is ActorKind.TRAFFIC_LIGHT:
                phase = phases.get(actor.id)
                if phase is not None and phase != self._prev_light_phase.get(actor.id):
                    sign_event = True
            if sign_event:
                flags[actor.id] = (True, False)
        self._prev_light_phase = phases
        for hz in assessments:
            newly = hz.warning_active and not self._prev_warn.get(hz.object_id, False)
            self._prev_warn[hz.object_id] = hz.warning_active
            if newly:
                sign_event = flags.get(hz.object_id, (False, False))[0]
                flags[hz.object_id] = (sign_event, True)
        return flags

    def tick(self) -> TickRecord:
        from dataclasses import replace

        scenario, config = self.scenario, self.config
        world = self.world
        # keep route progress synced to the projected arc position: the
        # dead-reckoned odometer undercounts when corners are cut
        base = scenario.ego_route.path
        s_proj, _ = base.project(world.ego.x, world.ego.y, s_hint=world.ego.route_s)
        s_true = base.unwrap(s_proj, world.ego.route_s)
        if s_true != world.ego.route_s:
            world = replace(world, ego=replace(world.ego, route_s=s_true))
            self.world = world
        ego = world.ego

        if self._detour_route is not None:
            s_proj, _ = self._detour_route.path.project(ego.x, ego.y, s_hint=self._detour_s)
            self._detour_s = s_proj
            if s_proj >= self._detour_route.path.length - config.controller.lookahead_min_m:
                self._detour_route = None
        route = self._detour_route or scenario.ego_route
        s_hint = self._detour_s if self._detour_route is not None else ego.route_s

        assessments = []
        if world.actors:
            assessments = assess_world(world, route, self.ego_radius,
                                       config.hud.detection_diameter_m, config.hazard)
        decision = plan_avoidance(ego, assessments, route, self.ego_radius, config.hazard)
        if decision.detour is not None and self._detour_route is None:
            base = scenario.ego_route
            limit = base.limit_at(ego.route_s)
            section = base.section_at(ego.route_s)
            nseg = len(decision.detour.points) - 1
            self._detour_route = EgoRoute(decision.detour, (limit,) * nseg, (section,) * nseg)
            s_proj, _ = self._detour_route.path.project(ego.x, ego.y)
            self._detour_s = s_proj
            route = self._detour_route
            s_hint = s_proj

        cap = decision.speed_cap
        for extra in (scenario.stop_cap_at(world.t), self._light_cap(world)):
            if extra is not None:
                cap = extra if cap is None else min(cap, extra)

        setpoints = follow_path(ego, route, speed_cap=cap, cfg=config.controller,
                                s_hint=s_hint)
        control = self.controller.step(ego, setpoints, scenario.tick_dt)
        motion = tilt_coordination(ego.accel_long, ego.accel_lat, config.controller)

        flags = self._update_flags(world, assessments)
        candidates = build_candidates(world, assessments, flags, config.hud, config.hazard)
        cue_sets = {policy: select_cues(candidates, world, assessments, policy,
                                        scenario.ego_route, decision.assessed_ids, config.hud)
                    for policy in self.policies}

        record = TickRecord(world=world, assessments=assessments, decision=decision,
                            setpoints=setpoints, control=control, motion=motion,
                            cue_sets=cue_sets, flags=flags,
                            detour_active=self._detour_route is not None)
        self.world = step_world(world, scenario, control)
        return record


def simulate(scenario: ScenarioDef, config: Config | None = None,
             policies: tuple[str, ...] = ("OMN",), max_ticks: int | None = None):
    """Yield one TickRecord per tick over the scenario duration."""
    sim = Simulation(scenario, config, policies)
    n = int(round(scenario.duration_s / scenario.tick_dt))
    if max_ticks is not None:
        n = min(n, max_ticks)
    for _ in range(n):
        yield sim.tick()


# ---------------------------------------------------------------------------
# logging


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def run_and_log(scenario: ScenarioDef, out_dir: str, config: Config | None = None,
                policies: tuple[str, ...] = ("OMN",), log_decimate: int = 1,
                max_ticks: int | None = None) -> dict[str, str]:
    """Run the scenario and write the CSV logs into out_dir.

    Returns the map of log name -> path. `log_decimate` thins the state log
    only; hazard/cue/motion logs stay per-tick.
    """
    config = config or Config()
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, f"{name}.csv")
             for name in ("state", "hazard", "cues", "motion", "events")}

    state_rows = ["t,actor_id,kind,x,y,vx,vy,heading"]
    hazard_rows = ["t,object_id,distance,d_warn,severity,warning_active,flash_hz,audio"]
    cue_rows = [",".join(CUE_LOG_HEADER)]
    motion_rows = ["t,pitch_deg,roll_deg,clamped"]
    event_rows = ["event_id,t_s"]

    seen_events: set[str] = set()
    cfg_hazard = config.hazard
    for k, rec in enumerate(simulate(scenario, config, policies, max_ticks=max_ticks)):
        world = rec.world
        ts = _fmt(world.t)
        if k % log_decimate == 0:
            ego = world.ego
            state_rows.append(
                f"{ts},ego,EgoCar,{_fmt(ego.x)},{_fmt(ego.y)},"
                f"{_fmt(ego.speed * math.cos(ego.heading))},"
                f"{_fmt(ego.speed * math.sin(ego.heading))},{_fmt(ego.heading)}")
            for a in world.actors:
                state_rows.append(f"{ts},{a.id},{a.kind.value},{_fmt(a.x)},{_fmt(a.y)},"
                                  f"{_fmt(a.vx)},{_fmt(a.vy)},{_fmt(a.heading)}")

        actors = {a.id: a for a in world.actors}
        for hz in rec.assessments:
            kind = actors[hz.object_id].kind
            sign_event, newly = rec.flags.get(hz.object_id, (False, False))
            warn = warning_state(hz, kind, sign_event=sign_event, newly_active=newly,
                                 cfg=cfg_hazard)
            dist = "inf" if math.isinf(hz.distance_to_collision) else _fmt(hz.distance_to_collision)
            hazard_rows.append(
                f"{ts},{hz.object_id},{dist},{_fmt(hz.warning_distance)},"
                f"{_fmt(hz.severity)},{int(hz.warning_active)},"
                f"{warn.flash_hz:g},{warn.audio.value}")

        for policy, cue_set in rec.cue_sets.items():
            if not cue_set.cues:
                cue_rows.append(f"{ts},{policy},,,,,,,,")
                continue
            for cue in cue_set.cues:
                speed = "" if cue.speed_kmh is None else f"{cue.speed_kmh:.1f}"
                hz = next((h for h in rec.assessments if h.object_id == cue.object_id), None)
                sev = _fmt(hz.severity) if hz else _fmt(0.0)
                cue_rows.append(
                    f"{ts},{policy},{cue.object_id},{cue.kind.value},"
                    f"{cue.distance_m:.1f},{speed},{sev},{cue.warning.flash_hz:g},"
                    f"{cue.warning.audio.value},{int(cue.nav_line is not None)}")

        motion_rows.append(f"{ts},{_fmt(rec.motion.pitch_deg)},{_fmt(rec.motion.roll_deg)},"
                           f"{int(rec.motion.clamped)}")

        for event_id in world.active_events - seen_events:
            seen_events.add(event_id)
            event_rows.append(f"{event_id},{_fmt(scenario.event(event_id).trigger_time_s)}")

    event_rows[1:] = sorted(event_rows[1:], key=lambda r: float(r.split(",")[1]))
    for name, rows in (("state", state_rows), ("hazard", hazard_rows), ("cues", cue_rows),
                       ("motion", motion_rows), ("events", event_rows)):
        with open(paths[name], "w", encoding="utf-8", newline="") as fh:
            fh.write("\n".join(rows) + "\n")
    return paths
