from functools import reduce

import numpy as np
import pytest

from frik.errors import DimensionMismatch, ParseError
from frik.liegroup import unskew
from frik.robot import (
    DHRow,
    RobotModel,
    forward_kinematics,
    geometric_jacobian,
    hessian_contract,
    irb4600,
    kinematic_hessian,
    load_robot,
    robot_to_dict,
)

# ---------------------------------------------------------------------------
# oracles: hand-assembled chain product and finite differences
# ---------------------------------------------------------------------------


def _rz4(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0, 0], [s, c, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1.0]])


def _rx4(t):
    c, s = np.cos(t), np.sin(t)
    return np.array([[1, 0, 0, 0], [0, c, -s, 0], [0, s, c, 0], [0, 0, 0, 1.0]])


def _tz4(d):
    out = np.eye(4)
    out[2, 3] = d
    return out


def _tx4(a):
    out = np.eye(4)
    out[0, 3] = a
    return out


def chain_product_oracle(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Per-matrix DH chain product assembled from elementary transforms."""
    mats = []
    for row, qi in zip(model.dh, q):
        theta = qi + row.theta_offset
        mats.extend([_rz4(theta), _tz4(row.d), _tx4(row.a), _rx4(row.alpha)])
    return reduce(np.matmul, mats, np.eye(4)) @ model.tool


def fd_jacobian(model: RobotModel, q: np.ndarray, h: float = 1e-6) -> np.ndarray:
    jac = np.zeros((6, model.n))
    base_rot = forward_kinematics(model, q)[:3, :3]
    for i in range(model.n):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        tp = forward_kinematics(model, qp)
        tm = forward_kinematics(model, qm)
        jac[:3, i] = (tp[:3, 3] - tm[:3, 3]) / (2 * h)
        dr = (tp[:3, :3] - tm[:3, :3]) / (2 * h)
        jac[3:, i] = unskew(dr @ base_rot.T)
    return jac


def fd_hessian(model: RobotModel, q: np.ndarray, h: float = 1e-6) -> np.ndarray:
    out = np.zeros((6, model.n, model.n))
    for j in range(model.n):
        qp, qm = q.copy(), q.copy()
        qp[j] += h
        qm[j] -= h
        out[:, :, j] = (geometric_jacobian(model, qp) - geometric_jacobian(model, qm)) / (2 * h)
    return out


def one_link(a=0.0, alpha=0.0, d=0.0, theta=0.0):
    return RobotModel(
        dh=(DHRow(a=a, alpha=alpha, d=d, theta_offset=theta),),
        joint_min=np.array([-np.pi]),
        joint_max=np.array([np.pi]),
    )


def random_in_limits(model, rng, count):
    return [rng.uniform(model.joint_min, model.joint_max) for _ in range(count)]


# ---------------------------------------------------------------------------
# forward kinematics
# ---------------------------------------------------------------------------


def test_trivial_one_link_identity():
    assert np.allclose(forward_kinematics(one_link(), np.zeros(1)), np.eye(4), atol=1e-15)


def test_fk_matches_chain_oracle_at_zero(model):
    assert np.abs(
        forward_kinematics(model, np.zeros(6)) - chain_product_oracle(model, np.zeros(6))
    ).max() < 1e-9


def test_fk_matches_chain_oracle_at_benchmark_start(model, q0_benchmark):
    assert np.abs(
        forward_kinematics(model, q0_benchmark) - chain_product_oracle(model, q0_benchmark)
    ).max() < 1e-9


def test_fk_matches_chain_oracle_random(model):
    rng = np.random.default_rng(5)
    for q in random_in_limits(model, rng, 25):
        assert np.abs(forward_kinematics(model, q) - chain_product_oracle(model, q)).max() < 1e-8


def test_fk_rejects_wrong_length(model):
    with pytest.raises(DimensionMismatch):
        forward_kinematics(model, np.zeros(5))


def test_fk_is_continuous(model, q0_benchmark):
    base = forward_kinematics(model, q0_benchmark)
    for delta in (1e-3, 1e-5, 1e-7):
        moved = forward_kinematics(model, q0_benchmark + delta)
        assert np.abs(moved - base).max() < 5000 * delta


def test_modified_convention_loads_and_runs():
    model = RobotModel(
        dh=(DHRow(a=100.0, alpha=-np.pi / 2, d=50.0), DHRow(a=0.0, alpha=0.0, d=200.0)),
        joint_min=np.array([-np.pi, -np.pi]),
        joint_max=np.array([np.pi, np.pi]),
        convention="modified",
    )
    q = np.array([0.3, -0.8])
    assert np.abs(geometric_jacobian(model, q) - fd_jacobian(model, q)).max() < 1e-5


# ---------------------------------------------------------------------------
# geometric Jacobian
# ---------------------------------------------------------------------------


def test_jacobian_single_revolute_with_offset_tcp():
    model = one_link(a=1000.0)
    jac = geometric_jacobian(model, np.zeros(1))
    assert np.allclose(jac[:, 0], [0.0, 1000.0, 0.0, 0.0, 0.0, 1.0], atol=1e-12)


def test_jacobian_matches_finite_differences(model):
    rng = np.random.default_rng(17)
    for q in random_in_limits(model, rng, 50):
        assert np.abs(geometric_jacobian(model, q) - fd_jacobian(model, q)).max() < 1e-5


def test_wrist_singularity_drops_rank(model):
    rng = np.random.default_rng(23)
    for _ in range(10):
        q = rng.uniform(model.joint_min, model.joint_max)
        q[4] = 0.0
        sv = np.linalg.svd(geometric_jacobian(model, q), compute_uv=False)
        assert sv[-1] / sv[0] < 1e-10


# ---------------------------------------------------------------------------
# kinematic Hessian
# ---------------------------------------------------------------------------


def test_hessian_one_link(model):
    link = one_link(a=500.0)
    q = np.array([0.4])
    h = kinematic_hessian(link, q)
    assert np.abs(h[3:, :, :]).max() < 1e-15
    assert np.abs(h - fd_hessian(link, q)).max() < 1e-4


def test_hessian_matches_finite_differences(model):
    rng = np.random.default_rng(29)
    for q in random_in_limits(model, rng, 25):
        assert np.abs(kinematic_hessian(model, q) - fd_hessian(model, q)).max() < 1e-4


def test_contract_zero_direction(model, q0_benchmark):
    h = kinematic_hessian(model, q0_benchmark)
    assert np.array_equal(hessian_contract(h, np.zeros(6)), np.zeros((6, 6)))


def test_contract_selects_slice(model, q0_benchmark):
    h = kinematic_hessian(model, q0_benchmark)
    for j in range(6):
        e = np.zeros(6)
        e[j] = 1.0
        assert np.array_equal(hessian_contract(h, e), h[:, :, j])


def test_contract_matches_directional_difference(model, q0_benchmark):
    rng = np.random.default_rng(31)
    h = kinematic_hessian(model, q0_benchmark)
    step = 1e-6
    for _ in range(5):
        dq = rng.normal(size=6)
        dq /= np.linalg.norm(dq)
        plus = geometric_jacobian(model, q0_benchmark + step * dq)
        minus = geometric_jacobian(model, q0_benchmark - step * dq)
        assert np.abs(hessian_contract(h, dq) - (plus - minus) / (2 * step)).max() < 1e-4


def test_contract_rejects_wrong_length(model, q0_benchmark):
    with pytest.raises(DimensionMismatch):
        hessian_contract(kinematic_hessian(model, q0_benchmark), np.zeros(5))


# ---------------------------------------------------------------------------
# model construction and file round trip
# ---------------------------------------------------------------------------


def test_limits_must_be_ordered():
    with pytest.raises(ValueError):
        RobotModel(
            dh=(DHRow(0, 0, 0),),
            joint_min=np.array([1.0]),
            joint_max=np.array([-1.0]),
        )


def test_robot_json_round_trip(tmp_path, model, q0_benchmark):
    import json

    file = tmp_path / "robot.json"
    file.write_text(json.dumps(robot_to_dict(model)))
    loaded = load_robot(file)
    assert loaded.n == model.n
    assert np.allclose(loaded.joint_min, model.joint_min)
    assert np.abs(
        forward_kinematics(loaded, q0_benchmark) - forward_kinematics(model, q0_benchmark)
    ).max() < 1e-12


def test_load_robot_rejects_garbage(tmp_path):
    file = tmp_path / "robot.json"
    file.write_text("{not json")
    with pytest.raises(ParseError):
        load_robot(file)
    file.write_text('{"dh": [{"a_mm": 1.0}]}')
    with pytest.raises(ParseError):
        load_robot(file)


def test_benchmark_start_is_within_limits(model, q0_benchmark):
    assert model.within_limits(q0_benchmark)


def test_tool_transform_offsets_tcp(tmp_path, model, q0_benchmark):
    import json

    tool = np.eye(4)
    tool[:3, 3] = [0.0, 0.0, 250.0]
    spec = robot_to_dict(model)
    spec["tool"] = tool.tolist()
    file = tmp_path / "with_tool.json"
    file.write_text(json.dumps(spec))
    tooled = load_robot(file)
    bare = forward_kinematics(model, q0_benchmark)
    offset = forward_kinematics(tooled, q0_benchmark)
    assert np.abs(offset - bare @ tool).max() < 1e-12
    # the Jacobian stays consistent about the shifted TCP point
    assert np.abs(geometric_jacobian(tooled, q0_benchmark) - fd_jacobian(tooled, q0_benchmark)).max() < 1e-5
