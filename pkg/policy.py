"""
Three-phase adaptive grasping policy

Phase 0 straightens the fingers and fully extends the palm. Phase 1
pre-shapes the palm around a rough object estimate. Phase 2 ramps every
finger until its bend sensor reports contact, then holds.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from config import PALM_MAX_MM, PALM_MIN_MM
from graspsim import (
    FailureReason,
    GraspOutcome,
    ObjectSpec,
    Scene,
    approach_feasible,
    fingers_for,
    fixed_configuration,
    is_oversize,
    object_from_table,
)
from gripper import Gripper, N_ACTUATORS
from kinematics import (
    PalmConfiguration,
    ShapeClass,
    ShapeTemplate,
    TemplateKind,
    classify_palm,
    template_configuration,
)
from sensing import detect_channel
from utils.logger import get_logger
from utils.validators import ParameterError, ValidationError, validate_float

logger = get_logger(__name__)

PHASE_ORDER = ("Init", "Reconfigure", "Envelop", "Hold", "Done", "Failed")


class GraspState(Enum):
    INIT = "Init"
    RECONFIGURE = "Reconfigure"
    ENVELOP = "Envelop"
    HOLD = "Hold"
    DONE = "Done"
    FAILED = "Failed"

    @property
    def rank(self) -> int:
        return PHASE_ORDER.index(self.value)

    @property
    def terminal(self) -> bool:
        return self in (GraspState.DONE, GraspState.FAILED)


class PhaseTransitionError(ValidationError):
    """A grasp attempt tried to move backwards through its phases"""
    pass


@dataclass
class GraspPhase:
    state: GraspState = GraspState.INIT
    tick: int = 0
    finger_contacts: List[bool] = field(default_factory=lambda: [False] * N_ACTUATORS)
    contact_ticks: List[Optional[int]] = field(default_factory=lambda: [None] * N_ACTUATORS)
    detection_ticks: List[Optional[int]] = field(default_factory=lambda: [None] * N_ACTUATORS)
    saturated: List[bool] = field(default_factory=lambda: [False] * N_ACTUATORS)
    dropped: List[bool] = field(default_factory=lambda: [False] * N_ACTUATORS)
    held_ticks: int = 0
    failure_reason: Optional[FailureReason] = None
    transitions: List[Tuple[str, int]] = field(default_factory=lambda: [("Init", 0)])

    def advance(self, new_state: GraspState, tick: int) -> None:
        if self.state.terminal or new_state.rank <= self.state.rank:
            raise PhaseTransitionError(f"Cannot move from {self.state.value} to {new_state.value}")
        if new_state is GraspState.DONE and self.state is not GraspState.HOLD:
            raise PhaseTransitionError("Done is only reachable from Hold")
        self.state = new_state
        self.tick = tick
        self.transitions.append((new_state.value, tick))

    def fail(self, reason: FailureReason, tick: int) -> None:
        self.failure_reason = reason
        self.advance(GraspState.FAILED, tick)

    def mark_contact(self, i: int, tick: int, detected_at: Optional[int] = None) -> None:
        """tick is when the finger latched; detected_at is the sample the rise was found at."""
        if not self.finger_contacts[i]:
            self.finger_contacts[i] = True
            self.contact_ticks[i] = tick
            self.detection_ticks[i] = tick if detected_at is None else detected_at

    @property
    def contact_count(self) -> int:
        return sum(self.finger_contacts)

    def to_dict(self) -> dict:
        return {
            "state": self.state.value,
            "tick": self.tick,
            "finger_contacts": list(self.finger_contacts),
            "contact_ticks": list(self.contact_ticks),
            "detection_ticks": list(self.detection_ticks),
            "saturated": list(self.saturated),
            "dropped": list(self.dropped),
            "held_ticks": self.held_ticks,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
            "transitions": [list(t) for t in self.transitions],
        }


@dataclass(frozen=True)
class ObjectEstimate:
    footprint_width: float
    footprint_depth: float
    shape_hint: Optional[TemplateKind] = None

    def __post_init__(self):
        validate_float(self.footprint_width, "footprint_width", min_value=0.0)
        validate_float(self.footprint_depth, "footprint_depth", min_value=0.0)


@dataclass(frozen=True)
class Verdict:
    success: bool
    failure_reason: Optional[FailureReason] = None


def estimate_object(obj: ObjectSpec, hint: Optional[TemplateKind] = None) -> ObjectEstimate:
    """Footprint of the cross-section; the hint defaults to the object's own template shape."""
    width, depth = obj.footprint
    if hint is None and obj.shape in {k.value for k in TemplateKind}:
        hint = TemplateKind(obj.shape)
    return ObjectEstimate(footprint_width=width, footprint_depth=depth, shape_hint=hint)


def phase0_init(gripper: Gripper) -> Gripper:
    gripper.set_palm_setpoints([gripper.palm_curve.maximum] * N_ACTUATORS)
    gripper.set_finger_setpoints([0.0] * N_ACTUATORS)
    return gripper


def phase1_plan(est: ObjectEstimate, clearance: float = 16.0,
                template_min_aspect: float = 1.3) -> PalmConfiguration:
    """
    Pre-shape the palm around an estimate

    Each template parameter is the object extent plus 2*clearance, clamped to
    the actuator range. Kite and Trapezoid plans first stretch the width to
    at least template_min_aspect times the depth.

    Returns:
        PalmConfiguration whose sides are the palm length setpoints
    """
    clearance = validate_float(clearance, "Clearance", min_value=0.0)
    kind = est.shape_hint or TemplateKind.RECTANGLE
    width, depth = est.footprint_width, est.footprint_depth
    if kind in (TemplateKind.KITE, TemplateKind.TRAPEZOID):
        width = max(width, template_min_aspect * depth)

    raw_x, raw_y = width + 2 * clearance, depth + 2 * clearance
    if est.footprint_width > PALM_MAX_MM and est.footprint_depth > PALM_MAX_MM:
        logger.warning(f"Object estimate {est.footprint_width}x{est.footprint_depth} mm exceeds the palm "
                       f"range on both axes; attempting anyway")
    elif raw_x > PALM_MAX_MM or raw_y > PALM_MAX_MM:
        logger.debug(f"Clearance clamped to the palm range ({raw_x:.1f}x{raw_y:.1f} mm requested)")
    x = min(max(raw_x, PALM_MIN_MM), PALM_MAX_MM)
    y = min(max(raw_y, PALM_MIN_MM), PALM_MAX_MM)
    return template_configuration(ShapeTemplate(kind, x, y))


def _settle_palm(gripper: Gripper, tolerance: float, max_ticks: int, log: Optional[list], state: str) -> bool:
    for _ in range(max_ticks):
        if gripper.palm_settled(tolerance):
            return True
        _record(log, gripper.tick(), state)
    return gripper.palm_settled(tolerance)


def _record(log: Optional[list], snapshot, state: str) -> None:
    if log is not None:
        record = snapshot.to_dict()
        record["phase"] = state
        log.append(record)


def phase2_envelop(gripper: Gripper, threshold: float = 5.0, inflate_step: float = 0.5,
                   max_ticks: int = 1500, kernel: int = 5, phase: Optional[GraspPhase] = None,
                   log: Optional[list] = None) -> GraspPhase:
    """
    Ramp the fingers until each detects contact or saturates

    The sensing pipeline reruns on each finger's stream since the ramp
    started; a detection latches that finger's valve on Hold. The contact tick
    is the tick the latch takes effect; the sample where the rise was found
    is kept beside it as the detection tick.
    """
    if phase is None:
        phase = GraspPhase()
        phase.advance(GraspState.RECONFIGURE, gripper.tick_count)
    phase.advance(GraspState.ENVELOP, gripper.tick_count)

    start = gripper.tick_count
    streams: List[List[float]] = [[] for _ in range(N_ACTUATORS)]
    gripper.start_ramp(inflate_step)
    for _ in range(max_ticks):
        snapshot = gripper.tick()
        _record(log, snapshot, GraspState.ENVELOP.value)
        for i in range(N_ACTUATORS):
            streams[i].append(snapshot.sensor[i])
            if gripper.latched[i]:
                continue
            index = detect_channel(streams[i], threshold, kernel)
            if index is not None:
                gripper.latch(i)
                phase.mark_contact(i, snapshot.tick, start + index)
                logger.debug(f"Finger {i} contact detected at tick {start + index}, latched at {snapshot.tick}")
        phase.saturated = [gripper.saturated(i) for i in range(N_ACTUATORS)]
        if all(gripper.latched[i] or phase.saturated[i] for i in range(N_ACTUATORS)):
            break

    phase.tick = gripper.tick_count
    if phase.contact_count == 0:
        phase.fail(FailureReason.TIMEOUT, gripper.tick_count)
    return phase


def hold_phase(gripper: Gripper, phase: GraspPhase, hold_ticks: int, log: Optional[list] = None) -> GraspPhase:
    """Keep the latched fingers for hold_ticks, re-checking every contact each tick."""
    phase.advance(GraspState.HOLD, gripper.tick_count)
    for _ in range(hold_ticks):
        _record(log, gripper.tick(), GraspState.HOLD.value)
        phase.held_ticks += 1
        lost = [i for i in range(N_ACTUATORS) if phase.finger_contacts[i] and not gripper.in_contact(i)]
        if lost:
            for i in lost:
                phase.dropped[i] = True
            logger.info(f"Contact lost on finger(s) {lost} after {phase.held_ticks} hold ticks")
            break
    phase.tick = gripper.tick_count
    return phase


def grasp_success(phase: GraspPhase, hold_ticks: int, majority: int = 3) -> Verdict:
    """Majority of contacts, all of them persisting through the whole hold window."""
    if phase.failure_reason is not None:
        return Verdict(False, phase.failure_reason)
    if phase.contact_count < majority:
        return Verdict(False, FailureReason.INSUFFICIENT_CONTACTS)
    if any(phase.dropped[i] for i in range(N_ACTUATORS) if phase.finger_contacts[i]):
        return Verdict(False, FailureReason.SLIP)
    if phase.held_ticks < hold_ticks:
        return Verdict(False, FailureReason.TIMEOUT)
    return Verdict(True, None)


@dataclass
class GraspRun:
    mode: str
    object_name: str
    palm: PalmConfiguration
    phase: GraspPhase
    outcome: GraspOutcome
    log: List[dict]
    seed: Optional[int]
    palm_shape: str = ShapeClass.GENERAL.value

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "object": self.object_name,
            "seed": self.seed,
            "palm": self.palm.to_dict(),
            "palm_shape": self.palm_shape,
            "phase": self.phase.to_dict(),
            "outcome": self.outcome.to_dict(),
            "ticks": len(self.log),
        }


def plan_for_mode(mode: str, obj: Optional[ObjectSpec], run_config) -> PalmConfiguration:
    """'adaptive' plans around the object; 'fixed:<name>' uses a baseline configuration."""
    policy, gs = run_config.policy, run_config.graspsim
    text = str(mode).strip()
    if text.lower() == "adaptive":
        if obj is None:
            raise ParameterError("Adaptive mode needs an object to estimate")
        return phase1_plan(estimate_object(obj), policy["clearance_mm"], policy["template_min_aspect"])
    if text.lower().startswith("fixed:"):
        return fixed_configuration(text.split(":", 1)[1], policy["clearance_mm"],
                                   policy["template_min_aspect"], gs["kite_cross_fraction"])
    raise ParameterError(f"Unknown grasp mode '{mode}'; use 'adaptive' or 'fixed:<configuration>'")


def _outcome(gripper: Gripper, phase: GraspPhase, feasible: bool, verdict: Verdict) -> GraspOutcome:
    points, distances = [], []
    scene = gripper.scene
    fingers = fingers_for(scene.palm, gripper.finger_params) if scene is not None else []
    for i in range(N_ACTUATORS):
        d = gripper.contact_distances[i]
        distances.append(d)
        if phase.finger_contacts[i] and fingers and d is not None:
            (ox, oy), (ux, uy) = fingers[i].origin, fingers[i].direction
            points.append((ox + d * ux, oy + d * uy))
        else:
            points.append(None)
    return GraspOutcome(
        feasible_approach=feasible,
        contacts=tuple(phase.finger_contacts),
        contact_points=tuple(points),
        distances=tuple(distances),
        success=verdict.success,
        failure_reason=verdict.failure_reason,
    )


def run_grasp(obj: Optional[ObjectSpec], mode: str, run_config, seed: Optional[int] = None,
              scene: Optional[Scene] = None) -> GraspRun:
    """
    Run phases 0 to 2 and the hold window end to end

    Args:
        obj: Object to grasp (None with an explicit scene or for an empty palm)
        mode: 'adaptive' or 'fixed:<configuration>'
        run_config: RunConfig
        seed: Sensor-noise seed (defaults to run_config.seed)
        scene: Explicit palm/object scene; overrides planning and placement

    Returns:
        GraspRun with the phase record, the outcome and the per-tick log
    """
    seed = run_config.seed if seed is None else seed
    policy, plant = run_config.policy, run_config.plant
    dt = plant["dt_s"]
    settle_ticks = int(round(policy["settle_timeout_s"] / dt))
    hold_ticks = int(round(policy["hold_s"] / dt))
    margin = run_config.graspsim["approach_margin_mm"]

    palm = scene.palm if scene is not None else plan_for_mode(mode, obj, run_config)
    shape = classify_palm(palm, run_config.kinematics).value
    gripper = Gripper(run_config, seed=seed)
    phase = GraspPhase()
    log: List[dict] = []
    name = obj.name if obj is not None else "scene"

    phase0_init(gripper)
    if not _settle_palm(gripper, policy["settle_tolerance_mm"], settle_ticks, log, GraspState.INIT.value):
        phase.fail(FailureReason.TIMEOUT, gripper.tick_count)
        return _finish(mode, name, palm, shape, phase, gripper, False, log, seed, hold_ticks, policy["majority"])

    phase.advance(GraspState.RECONFIGURE, gripper.tick_count)
    gripper.set_palm_setpoints(palm.sides)
    if not _settle_palm(gripper, policy["settle_tolerance_mm"], settle_ticks, log,
                        GraspState.RECONFIGURE.value):
        phase.fail(FailureReason.TIMEOUT, gripper.tick_count)
        return _finish(mode, name, palm, shape, phase, gripper, False, log, seed, hold_ticks, policy["majority"])

    if scene is None:
        scene = Scene.placed(palm, obj) if obj is not None else Scene.empty(palm)
    gripper.set_scene(scene)
    feasible = approach_feasible(palm, scene, margin) if scene.has_object else True
    if not feasible:
        reason = FailureReason.OVERSIZE if obj is not None and is_oversize(obj, margin) else FailureReason.NO_DESCEND
        logger.info(f"{name}: approach infeasible ({reason.value})")
        phase.fail(reason, gripper.tick_count)
        return _finish(mode, name, palm, shape, phase, gripper, False, log, seed, hold_ticks, policy["majority"])

    phase2_envelop(gripper, run_config.sensing["threshold"], policy["inflate_step_kpa"],
                   policy["max_envelop_ticks"], run_config.sensing["kernel"], phase, log)
    if phase.state is not GraspState.FAILED:
        if phase.contact_count < policy["majority"]:
            phase.fail(FailureReason.INSUFFICIENT_CONTACTS, gripper.tick_count)
        else:
            hold_phase(gripper, phase, hold_ticks, log)
    return _finish(mode, name, palm, shape, phase, gripper, True, log, seed, hold_ticks, policy["majority"])


def _finish(mode, name, palm, shape, phase, gripper, feasible, log, seed, hold_ticks, majority) -> GraspRun:
    verdict = grasp_success(phase, hold_ticks, majority)
    if not phase.state.terminal:
        if verdict.success:
            phase.advance(GraspState.DONE, gripper.tick_count)
        else:
            phase.fail(verdict.failure_reason, gripper.tick_count)
    logger.info(f"Grasp {name} ({mode}): {'success' if verdict.success else verdict.failure_reason.value} "
                f"with {phase.contact_count} contact(s) after {gripper.tick_count} ticks")
    return GraspRun(mode=mode, object_name=name, palm=palm, palm_shape=shape, phase=phase,
                    outcome=_outcome(gripper, phase, feasible, verdict), log=log, seed=seed)


def run_named_grasp(object_name: str, mode: str, run_config, seed: Optional[int] = None) -> GraspRun:
    gs = run_config.graspsim
    obj = object_from_table(object_name, gs["kite_cross_fraction"], gs["circle_segments"])
    return run_grasp(obj, mode, run_config, seed)
