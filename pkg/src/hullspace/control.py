"""FPS-style input mapping: mouse and key events to camera pose updates.

The mapping is modal: horizontal mouse motion drives the primary yaw plane
(x, z) normally and is rerouted to a higher rotation plane such as (x, w)
while a modifier combination is active. Vertical motion always drives the
pitch plane (y, z), and WASD translates along camera-frame axes. Every
routed event touches exactly one pose angle or the position vector, so
each physical gesture stays a single, predictable operation.

This module is pure state-to-state; callers should feed mouse deltas one
axis at a time (the wire decoder splits combined dx/dy packets) to keep
the one-event-one-parameter property observable.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .ga import CameraState, rotor_apply

__all__ = ["EventKind", "InputEvent", "ControlConfig", "apply_input"]


class EventKind(enum.Enum):
    MOUSE = "mouse"
    KEY = "key"
    MODIFIER = "modifier"


@dataclass(frozen=True)
class InputEvent:
    kind: EventKind
    dx: float = 0.0
    dy: float = 0.0
    key: str = ""
    modifier: str = ""  # active modifier combination, "" for none
    frame_dt: float = 1.0 / 60.0

    def __post_init__(self):
        if not (np.isfinite(self.dx) and np.isfinite(self.dy)):
            raise ValueError("mouse deltas must be finite")
        if self.frame_dt <= 0.0:
            raise ValueError("frame_dt must be positive")

    @classmethod
    def mouse(cls, dx=0.0, dy=0.0, modifier="", frame_dt=1.0 / 60.0) -> "InputEvent":
        return cls(EventKind.MOUSE, dx=dx, dy=dy, modifier=modifier, frame_dt=frame_dt)

    @classmethod
    def key_held(cls, key: str, frame_dt=1.0 / 60.0) -> "InputEvent":
        return cls(EventKind.KEY, key=key, frame_dt=frame_dt)

    @classmethod
    def modifier_changed(cls, held: bool) -> "InputEvent":
        return cls(EventKind.MODIFIER, modifier="ctrl" if held else "")


def _default_plane_map() -> dict[str, tuple[int, int]]:
    # no modifier: yaw in (x, z); LeftControl: rotation in (x, w).
    # Extra combinations extend toward higher axes: (x, u), (x, v), ...
    return {"": (0, 2), "ctrl": (0, 3)}


PITCH_PLANE = (1, 2)

# camera-frame translation directions, 3D FPS convention
_KEY_DIRECTIONS = {
    "w": (2, -1.0),  # forward is -z
    "s": (2, +1.0),
    "a": (0, -1.0),  # strafe left is -x
    "d": (0, +1.0),
}


@dataclass
class ControlConfig:
    mouse_sensitivity: float = 0.002  # radians per pixel
    move_speed: float = 3.0  # model units per second
    modifier_plane_map: dict[str, tuple[int, int]] = field(default_factory=_default_plane_map)

    def plane_for(self, modifier: str, dim: int) -> tuple[int, int] | None:
        plane = self.modifier_plane_map.get(modifier)
        if plane is None:
            return None
        i, j = plane
        if not (0 <= i < j < dim):
            raise ValueError(f"configured plane {plane} invalid for dimension {dim}")
        return plane


def apply_input(cam: CameraState, ev: InputEvent, cfg: ControlConfig) -> CameraState:
    """Advance the camera by one input event.

    Unmapped keys and unknown modifier combinations leave the camera
    untouched; modifier-change events only matter to the event source,
    which stamps the active combination onto subsequent mouse events.
    """
    if ev.kind is EventKind.MOUSE:
        pose = cam.pose
        if ev.dx != 0.0:
            plane = cfg.plane_for(ev.modifier, cam.dim)
            if plane is None:
                return cam
            pose = pose.with_angle(plane, pose.angle(plane) + ev.dx * cfg.mouse_sensitivity)
        if ev.dy != 0.0:
            pose = pose.with_angle(
                PITCH_PLANE, pose.angle(PITCH_PLANE) + ev.dy * cfg.mouse_sensitivity
            )
        if pose is cam.pose:
            return cam
        return cam.with_pose(pose)

    if ev.kind is EventKind.KEY:
        mapping = _KEY_DIRECTIONS.get(ev.key.lower())
        if mapping is None:
            return cam
        axis, sign = mapping
        base = np.zeros(cam.dim)
        base[axis] = sign
        direction = rotor_apply(cam.rotor, base)
        return cam.moved_to(cam.position + direction * cfg.move_speed * ev.frame_dt)

    return cam  # MODIFIER: no camera state change
