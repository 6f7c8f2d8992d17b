"""Control state machine: modal routing, orthogonality, camera-frame moves."""
import numpy as np
import pytest

from hullspace.control import ControlConfig, EventKind, InputEvent, apply_input
from hullspace.ga import CameraState, PoseParams, rotor_apply


def changed_parameters(before: CameraState, after: CameraState):
    """Count which pose angles / position changed between two states."""
    changed = []
    if not np.array_equal(before.position, after.position):
        changed.append("position")
    keys = set(before.pose.plane_angles) | set(after.pose.plane_angles)
    for k in sorted(keys):
        if before.pose.angle(k) != after.pose.angle(k):
            changed.append(k)
    return changed


@pytest.fixture()
def cam():
    return CameraState.identity(4)


@pytest.fixture()
def cfg():
    return ControlConfig(mouse_sensitivity=0.001, move_speed=2.0)


class TestMouseRouting:
    def test_zero_delta_unchanged(self, cam, cfg):
        out = apply_input(cam, InputEvent.mouse(0.0, 0.0), cfg)
        assert changed_parameters(cam, out) == []

    def test_dx_goes_to_xz_without_modifier(self, cam, cfg):
        out = apply_input(cam, InputEvent.mouse(dx=100.0), cfg)
        assert np.isclose(out.pose.angle((0, 2)), 0.1)
        assert changed_parameters(cam, out) == [(0, 2)]

    def test_dx_goes_to_xw_with_modifier(self, cam, cfg):
        out = apply_input(cam, InputEvent.mouse(dx=100.0, modifier="ctrl"), cfg)
        assert np.isclose(out.pose.angle((0, 3)), 0.1)
        assert out.pose.angle((0, 2)) == 0.0
        assert changed_parameters(cam, out) == [(0, 3)]

    def test_dy_goes_to_pitch(self, cam, cfg):
        out = apply_input(cam, InputEvent.mouse(dy=-30.0), cfg)
        assert np.isclose(out.pose.angle((1, 2)), -0.03)
        assert changed_parameters(cam, out) == [(1, 2)]

    def test_unknown_modifier_ignored(self, cam, cfg):
        out = apply_input(cam, InputEvent.mouse(dx=10.0, modifier="alt"), cfg)
        assert changed_parameters(cam, out) == []

    def test_modifier_round_trip_restores_pose(self, cam, cfg):
        a = apply_input(cam, InputEvent.mouse(dx=123.0, modifier="ctrl"), cfg)
        b = apply_input(a, InputEvent.mouse(dx=-123.0, modifier="ctrl"), cfg)
        assert abs(b.pose.angle((0, 3))) < 1e-12
        for k, v in b.pose.plane_angles.items():
            assert abs(v - cam.pose.angle(k)) < 1e-12

    def test_rotor_cache_tracks_pose(self, cam, cfg):
        from hullspace.ga import pose_to_rotor

        out = apply_input(cam, InputEvent.mouse(dx=50.0, modifier="ctrl"), cfg)
        assert np.array_equal(out.rotor.components, pose_to_rotor(out.pose).components)


class TestKeys:
    def test_w_moves_forward_minus_z(self, cam, cfg):
        out = apply_input(cam, InputEvent.key_held("w", frame_dt=0.5), cfg)
        assert np.allclose(out.position, [0, 0, -1.0, 0])
        assert changed_parameters(cam, out) == ["position"]

    def test_translation_is_camera_relative(self, cfg):
        cam = CameraState.create(np.zeros(4), PoseParams(4, {(0, 2): np.pi / 2}))
        out = apply_input(cam, InputEvent.key_held("w", frame_dt=1.0), cfg)
        # oracle: rotate the forward basis vector with the pose rotor
        forward = rotor_apply(cam.rotor, np.array([0.0, 0, -1, 0]))
        assert np.allclose(out.position, forward * cfg.move_speed, atol=1e-12)

    def test_strafe_keys(self, cam, cfg):
        a = apply_input(cam, InputEvent.key_held("a", frame_dt=0.25), cfg)
        d = apply_input(cam, InputEvent.key_held("d", frame_dt=0.25), cfg)
        assert np.allclose(a.position, [-0.5, 0, 0, 0])
        assert np.allclose(d.position, [0.5, 0, 0, 0])

    def test_unmapped_key_identity(self, cam, cfg):
        out = apply_input(cam, InputEvent.key_held("q"), cfg)
        assert changed_parameters(cam, out) == []

    def test_dt_scales_distance(self, cam, cfg):
        out = apply_input(cam, InputEvent.key_held("s", frame_dt=2.0), cfg)
        assert np.allclose(out.position, [0, 0, 4.0, 0])


class TestOrthogonality:
    def test_modifier_event_changes_nothing(self, cam, cfg):
        out = apply_input(cam, InputEvent.modifier_changed(True), cfg)
        assert changed_parameters(cam, out) == []

    def test_random_event_stream_one_change_each(self, cfg):
        rng = np.random.default_rng(0)
        cam = CameraState.identity(4)
        for _ in range(2000):
            roll = rng.integers(0, 4)
            if roll == 0:
                ev = InputEvent.mouse(dx=float(rng.normal()) * 40.0,
                                      modifier="ctrl" if rng.random() < 0.5 else "")
            elif roll == 1:
                ev = InputEvent.mouse(dy=float(rng.normal()) * 40.0)
            elif roll == 2:
                ev = InputEvent.key_held(str(rng.choice(["w", "a", "s", "d", "x"])))
            else:
                ev = InputEvent.modifier_changed(bool(rng.random() < 0.5))
            out = apply_input(cam, ev, cfg)
            assert len(changed_parameters(cam, out)) <= 1
            cam = out

    def test_invalid_event_values_rejected(self):
        with pytest.raises(ValueError):
            InputEvent.mouse(dx=np.nan)
        with pytest.raises(ValueError):
            InputEvent(EventKind.KEY, key="w", frame_dt=0.0)
