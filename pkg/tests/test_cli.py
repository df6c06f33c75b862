import json

import pytest

from conftest import MAP_FILE, ROBOT_FILE
from core.errors import ConfigError
from core.utils import load_model, normalize_angle, parse_floats
from main import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from models.robot import RobotDescription


def _run(capsys, *argv):
    code = main([str(arg) for arg in argv])
    return code, capsys.readouterr()


def test_fk_prints_the_end_effector_pose(capsys):
    code, out = _run(capsys, "fk", "--robot", ROBOT_FILE, "--q", "zero")
    assert code == EXIT_OK
    pose = json.loads(out.out)
    assert pose["xyz"] == pytest.approx([0.12 + 1.09545, 0.0, 0.81], abs=1e-3)


def test_fk_adds_the_twist_for_joint_velocities(capsys):
    code, out = _run(capsys, "fk", "--robot", ROBOT_FILE, "--q", "zero", "--qdot", "1,0,0,0,0,0,0")
    assert code == EXIT_OK
    twist = json.loads(out.out)["twist"]
    # the first joint turns about the world z axis
    assert twist["angular"] == pytest.approx([0.0, 0.0, 1.0], abs=1e-12)
    assert twist["linear"][2] == pytest.approx(0.0, abs=1e-12)


def test_ik_reports_json(capsys):
    code, out = _run(capsys, "ik", "--robot", ROBOT_FILE, "--xyz", "0.9,0.2,1.0", "--rpy", "0,1.5708,0")
    result = json.loads(out.out)
    assert "elapsed" not in result
    assert code == (EXIT_OK if result["status"] == "converged" else EXIT_FAILED)


def test_unreachable_ik_is_a_domain_failure(capsys):
    code, out = _run(capsys, "ik", "--robot", ROBOT_FILE, "--xyz", "50,0,0")
    assert code == EXIT_FAILED
    assert json.loads(out.out)["status"] == "unreachable"


def test_plan_base_compares_heuristics(capsys, tmp_path):
    code, out = _run(
        capsys, "plan-base", "--map", MAP_FILE, "--start", "1.0,0.5", "--goal", "2.8,0.5", "--out", tmp_path
    )
    assert code == EXIT_OK
    rows = json.loads(out.out)["comparison"]
    assert len(rows) == 4
    chosen = next(r for r in rows if r["connectivity"] == "eight" and r["heuristic"] == "euclidean")
    assert chosen["cost"] == pytest.approx(chosen["optimal_cost"])
    assert (tmp_path / "path.csv").is_file()
    assert "Heuristic comparison" in out.err


def test_plan_arm_writes_the_trajectory(capsys, tmp_path):
    code, out = _run(
        capsys, "plan-arm", "--robot", ROBOT_FILE, "--start", "tuck", "--goal", "ready", "--out", tmp_path, "--svg"
    )
    assert code == EXIT_OK
    assert json.loads(out.out)["duration"] > 0
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,q_0,v_0,a_0,q_1")
    assert (tmp_path / "trajectory.svg").is_file()


def test_unknown_subcommand_is_a_usage_error(capsys):
    assert _run(capsys, "teleport")[0] == EXIT_USAGE


def test_missing_robot_file_is_a_usage_error(capsys, tmp_path):
    code, out = _run(capsys, "fk", "--robot", tmp_path / "absent.json", "--q", "0,0,0,0,0,0,0")
    assert code == EXIT_USAGE
    assert "file not found" in out.err


def test_malformed_robot_file_names_the_line(capsys, tmp_path):
    bad = tmp_path / "robot.json"
    bad.write_text('{\n  "name": "arm",\n  "dh": [\n}\n')
    code, out = _run(capsys, "fk", "--robot", bad, "--q", "0")
    assert code == EXIT_USAGE
    assert f"{bad}:4" in out.err


def test_wrong_joint_count_is_a_usage_error(capsys):
    code, _ = _run(capsys, "fk", "--robot", ROBOT_FILE, "--q", "0,0")
    assert code == EXIT_USAGE


def test_robot_schema_version_is_checked(tmp_path):
    path = tmp_path / "robot.json"
    data = json.loads(ROBOT_FILE.read_text())
    data["schema_version"] = 2
    path.write_text(json.dumps(data))
    with pytest.raises(ConfigError) as info:
        load_model(path, RobotDescription)
    assert "schema_version" in str(info.value)


def test_parse_floats():
    assert parse_floats("0.1, 0.2,0") == [0.1, 0.2, 0.0]
    with pytest.raises(ConfigError):
        parse_floats("1,a")


def test_normalize_angle():
    assert normalize_angle(-3.141592653589793) == pytest.approx(3.141592653589793)
    assert normalize_angle(7.0) == pytest.approx(7.0 - 2 * 3.141592653589793)
    assert normalize_angle(0.5) == pytest.approx(0.5)
