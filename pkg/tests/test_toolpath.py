import numpy as np
import pytest

from frik.errors import InvalidRotation, ParseError
from frik.liegroup import is_rotation, make_pose, rot_y, rot_z, so3_exp
from frik.toolpath import (
    ConeSpec,
    Toolpath,
    ToolpathTarget,
    assign_adhoc_orientation,
    cone_outward_normal,
    cone_surface_point,
    generate_cone_spiral,
    load_toolpath,
    save_toolpath,
)

BENCH_SPEC = ConeSpec(diameter=100.0, height=50.0, pitch=5.0, samples_per_rev=24)


def fd_surface_normal(spec: ConeSpec, azimuth: float, z: float, h: float = 1e-6) -> np.ndarray:
    """Central-difference normal of the parametric cone surface."""
    d_az = (
        cone_surface_point(spec, azimuth + h, z) - cone_surface_point(spec, azimuth - h, z)
    ) / (2 * h)
    d_z = (
        cone_surface_point(spec, azimuth, z + h) - cone_surface_point(spec, azimuth, z - h)
    ) / (2 * h)
    normal = np.cross(d_az, d_z)
    return normal / np.linalg.norm(normal)


# ---------------------------------------------------------------------------
# cone spiral generation
# ---------------------------------------------------------------------------


def test_cone_spec_validation():
    with pytest.raises(ValueError):
        ConeSpec(diameter=-1.0)
    with pytest.raises(ValueError):
        ConeSpec(samples_per_rev=4)
    with pytest.raises(ValueError):
        ConeSpec(pitch=0.0)


@pytest.mark.parametrize("spec", [BENCH_SPEC, ConeSpec(diameter=60, height=90, pitch=9, samples_per_rev=16, standoff=12.0)])
def test_targets_lie_on_cone_surface(spec):
    path = generate_cone_spiral(spec)
    surface_z = []
    for k, target in enumerate(path.targets):
        azimuth = 2.0 * np.pi * k / spec.samples_per_rev
        surface = target.pose[:3, 3] - spec.standoff * cone_outward_normal(spec, azimuth)
        z = surface[2]
        radius = np.hypot(surface[0], surface[1])
        expected = 0.5 * spec.diameter * (1.0 - z / spec.height)
        assert abs(radius - expected) < 1e-9
        surface_z.append(z)
    assert surface_z[0] == 0.0
    assert abs(surface_z[-1] - spec.height) < 1e-9  # spiral covers base to apex


def test_first_target_in_xz_plane():
    path = generate_cone_spiral(BENCH_SPEC)
    assert abs(path.targets[0].pose[1, 3]) < 1e-12


def test_revolution_count_from_height_and_pitch():
    spec = ConeSpec(diameter=100, height=50, pitch=25, samples_per_rev=8)
    path = generate_cone_spiral(spec)
    assert len(path) == 17  # two full revolutions, apex included


def test_approach_axis_is_inward_normal_fd_oracle():
    spec = BENCH_SPEC
    path = generate_cone_spiral(spec)
    for k in (0, 5, 37, len(path) - 20):
        target = path.targets[k]
        azimuth = 2.0 * np.pi * k / spec.samples_per_rev
        z = min(k * spec.pitch / spec.samples_per_rev, spec.height)
        z_mid = min(z, spec.height * 0.999)  # keep the FD stencil on the surface
        oracle = fd_surface_normal(spec, azimuth, z_mid)
        if oracle[2] < 0:  # orient outward (away from the axis)
            oracle = -oracle
        assert np.abs(cone_outward_normal(spec, azimuth) - oracle).max() < 1e-6
        assert np.abs(target.pose[:3, 2] + cone_outward_normal(spec, azimuth)).max() < 1e-12


def test_generated_frames_are_orthonormal():
    for target in generate_cone_spiral(BENCH_SPEC).targets:
        assert is_rotation(target.pose[:3, :3], tol=1e-10)


# ---------------------------------------------------------------------------
# ad hoc orientation assignment
# ---------------------------------------------------------------------------


def test_adhoc_identity_when_tool_axis_is_frame_z():
    pose = make_pose(np.eye(3), np.array([10.0, 0.0, 0.0]))
    path = Toolpath(targets=(ToolpathTarget(0, pose),))
    fixed = assign_adhoc_orientation(path)
    assert np.allclose(fixed.targets[0].pose[:3, 0], [1.0, 0.0, 0.0], atol=1e-15)
    assert fixed.orientation_fallbacks == ()


def test_adhoc_degenerate_axis_falls_back_to_y():
    # tool approach along the workpiece x-axis: x projects to nothing
    rotation = rot_y(np.pi / 2)  # z-axis -> x
    path = Toolpath(targets=(ToolpathTarget(0, make_pose(rotation, np.zeros(3))),))
    fixed = assign_adhoc_orientation(path)
    assert fixed.orientation_fallbacks == (0,)
    assert np.allclose(fixed.targets[0].pose[:3, 0], [0.0, 1.0, 0.0], atol=1e-12)


def test_adhoc_preserves_approach_axis_and_orthonormality():
    rng = np.random.default_rng(3)
    targets = []
    for k in range(1000):
        axis = rng.normal(size=3)
        axis /= np.linalg.norm(axis)
        rotation = so3_exp(rng.uniform(0, np.pi - 0.1) * axis)
        targets.append(ToolpathTarget(k, make_pose(rotation, rng.uniform(-100, 100, 3))))
    path = Toolpath(targets=tuple(targets))
    fixed = assign_adhoc_orientation(path)
    for before, after in zip(path.targets, fixed.targets):
        r = after.pose[:3, :3]
        assert np.array_equal(after.pose[:3, 2], before.pose[:3, 2])
        assert is_rotation(r, tol=1e-9)
        assert abs(r[:, 0] @ r[:, 2]) < 1e-12
    # adhoc on the cone benchmark never needs the fallback
    assert assign_adhoc_orientation(generate_cone_spiral(BENCH_SPEC)).orientation_fallbacks == ()


# ---------------------------------------------------------------------------
# file round trips
# ---------------------------------------------------------------------------


def test_save_load_round_trip(tmp_path):
    path = generate_cone_spiral(BENCH_SPEC).with_frame(
        make_pose(rot_z(0.5), np.array([10.0, -20.0, 30.0]))
    )
    file = tmp_path / "cone.json"
    save_toolpath(path, file)
    loaded = load_toolpath(file)
    assert len(loaded) == len(path)
    assert np.abs(loaded.frame - path.frame).max() < 1e-12
    for a, b in zip(path.targets, loaded.targets):
        assert np.abs(a.pose - b.pose).max() < 1e-12


def test_load_empty_file_is_parse_error(tmp_path):
    file = tmp_path / "empty.json"
    file.write_text("")
    with pytest.raises(ParseError):
        load_toolpath(file)


def test_load_single_identity_record(tmp_path):
    file = tmp_path / "one.json"
    file.write_text('{"targets": [{"k": 0, "pos_mm": [0, 0, 0], "quat": [0, 0, 0, 1]}]}')
    path = load_toolpath(file)
    assert len(path) == 1
    assert np.array_equal(path.targets[0].pose, np.eye(4))
    assert np.array_equal(path.frame, np.eye(4))


def test_load_rejects_bad_quaternion(tmp_path):
    file = tmp_path / "bad.json"
    file.write_text('{"targets": [{"k": 0, "pos_mm": [0, 0, 0], "quat": [0, 0, 0, 1.001]}]}')
    with pytest.raises(InvalidRotation):
        load_toolpath(file)


def test_load_accepts_rotation_matrix_field(tmp_path):
    file = tmp_path / "rot.json"
    file.write_text(
        '{"targets": [{"k": 0, "pos_mm": [1, 2, 3],'
        ' "rot": [[0, -1, 0], [1, 0, 0], [0, 0, 1]]}]}'
    )
    path = load_toolpath(file)
    assert np.allclose(path.targets[0].pose[:3, :3], rot_z(np.pi / 2), atol=1e-12)


def test_load_csv_variant(tmp_path):
    file = tmp_path / "path.csv"
    file.write_text(
        "k,x_mm,y_mm,z_mm,qx,qy,qz,qw\n"
        "0,1.5,2.5,3.5,0,0,0,1\n"
        "1,4.0,5.0,6.0,0,0,0.7071067811865476,0.7071067811865476\n"
    )
    path = load_toolpath(file)
    assert len(path) == 2
    assert np.allclose(path.targets[1].pose[:3, 3], [4.0, 5.0, 6.0])
    assert np.allclose(path.targets[1].pose[:3, :3], rot_z(np.pi / 2), atol=1e-9)


def test_load_csv_missing_column(tmp_path):
    file = tmp_path / "bad.csv"
    file.write_text("k,x_mm,y_mm\n0,1,2\n")
    with pytest.raises(ParseError):
        load_toolpath(file)


def test_target_indices_must_be_contiguous():
    pose = np.eye(4)
    with pytest.raises(ValueError):
        Toolpath(targets=(ToolpathTarget(1, pose),))


# ---------------------------------------------------------------------------
# frame handling
# ---------------------------------------------------------------------------


def test_reframing_is_rigid():
    path = generate_cone_spiral(BENCH_SPEC)
    rng = np.random.default_rng(9)

    def pairwise(positions):
        diff = positions[:, None, :] - positions[None, :, :]
        return np.linalg.norm(diff, axis=-1)

    frames = [
        make_pose(so3_exp(rng.normal(size=3)), rng.uniform(-1000, 1000, 3)) for _ in range(3)
    ]
    subset = slice(0, 40)
    base = pairwise(path.with_frame(frames[0]).base_positions()[subset])
    for frame in frames[1:]:
        other = pairwise(path.with_frame(frame).base_positions()[subset])
        assert np.abs(base - other).max() < 1e-9
