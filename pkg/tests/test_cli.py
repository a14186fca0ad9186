import json
import math

import numpy as np
import pytest

from drplane.cli import (
    format_line,
    format_region,
    format_set,
    main,
    parse_line,
    parse_region,
    parse_set,
)
from drplane.geometry import Ellipse, Line, PSphere, Region


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_set_variants():
    assert isinstance(parse_set("ellipse:b=2"), Ellipse)
    assert isinstance(parse_set("psphere:p=0.5"), PSphere)
    circle = parse_set("circle")
    assert isinstance(circle, PSphere) and circle.p == 2.0
    with pytest.raises(ValueError):
        parse_set("square:s=1")


def test_spec_strings_round_trip():
    for s in (Ellipse(2.0), Ellipse(8.5), PSphere(0.5), PSphere(2.0), PSphere(4.0 / 3.0)):
        assert parse_set(format_set(s)) == s
    for L in (
        Line.from_slope_intercept(2.0, 0.0),
        Line.from_slope_intercept(-0.37, 1.25),
        Line.from_normal(0.0, 1.0, 2.0),
    ):
        assert parse_line(format_line(L)) == L
    r = Region(-4.0, 4.0, -1.5, 2.5)
    assert parse_region(format_region(r)) == r


def test_parse_line_variants():
    L = parse_line("slope=2")
    assert abs(L.signed_value(np.array([1.0, 2.0]))) <= 1e-12
    L2 = parse_line("slope=1,intercept=1")
    assert abs(L2.signed_value(np.array([0.0, 1.0]))) <= 1e-12
    L3 = parse_line("normal=0,1,2")
    assert abs(L3.signed_value(np.array([5.0, 2.0]))) <= 1e-12
    with pytest.raises(ValueError):
        parse_line("intercept=3")


def test_project_command_json(capsys):
    code, out, _ = run_cli(["project", "--set", "ellipse:b=2", "--point", "0,4"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["point"] == [0.0, 2.0]
    assert doc["multivalued"] is False


def test_project_line_target(capsys):
    code, out, _ = run_cli(["project", "--line", "slope=1,intercept=1", "--point", "3,2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert np.allclose(doc["point"], [2.0, 3.0], atol=1e-12)


def test_orbit_command(tmp_path, capsys):
    out_path = tmp_path / "orbit.json"
    code, _, _ = run_cli(
        ["orbit", "--set", "ellipse:b=2", "--line", "slope=2", "--start", "0.5,0.5",
         "--iters", "300", "--out", str(out_path)],
        capsys,
    )
    assert code == 0
    doc = json.loads(out_path.read_text())
    assert doc["terminated"] in ("Converged", "MaxIter", "Diverged")
    assert len(doc["points"]) == len(doc["step_norms"]) + 1
    # converged to a feasible point of E_2 and y=2x
    final = np.array(doc["points"][-1])
    s = 1.0 / math.sqrt(2.0)
    assert min(np.linalg.norm(final - [s, 2 * s]), np.linalg.norm(final + [s, 2 * s])) <= 1e-6


def test_stability_command(capsys):
    code, out, _ = run_cli(["stability", "--set", "ellipse:b=2", "--line", "slope=2"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert len(doc["certificates"]) == 2
    for cert in doc["certificates"]:
        assert abs(cert["eigen_modulus_sq"] - 0.36) <= 1e-9
        assert cert["locally_convergent"] is True


def test_diverge_command(capsys):
    code, out, _ = run_cli(
        ["diverge", "--set", "circle", "--line", "slope=0,intercept=2",
         "--start", "0.1,0.1", "--steps", "500"],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["monotone"] is True
    assert doc["min_functional_increment"] >= 1.0 - 1e-9


def test_diverge_feasible_is_domain_error(capsys):
    code, _, err = run_cli(
        ["diverge", "--set", "ellipse:b=2", "--line", "slope=2", "--start", "1,1"],
        capsys,
    )
    assert code == 1
    assert "error" in err


def test_scan_command(capsys):
    code, out, _ = run_cli(
        ["scan", "--set", "ellipse:b=2", "--line", "slope=2",
         "--region", "-4:4:-4:4", "--max-period", "2"],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    periods = sorted(p["period"] for p in doc["periodic_points"])
    assert periods == [1, 1, 2]
    two = [p for p in doc["periodic_points"] if p["period"] == 2][0]
    assert two["classification"] == "repelling"


def test_basins_command_and_reproducibility(tmp_path, capsys):
    args = [
        "basins", "--set", "ellipse:b=2", "--line", "slope=2",
        "--region", "-3:3:-3:3", "--res", "32x32", "--iters", "200",
        "--max-period", "2",
    ]
    p1, l1 = tmp_path / "a.ppm", tmp_path / "a.json"
    p2, l2 = tmp_path / "b.ppm", tmp_path / "b.json"
    assert run_cli(args + ["--out", str(p1), "--labels", str(l1), "--threads", "1"], capsys)[0] == 0
    assert run_cli(args + ["--out", str(p2), "--labels", str(l2), "--threads", "4"], capsys)[0] == 0
    assert p1.read_bytes() == p2.read_bytes()
    assert l1.read_text() == l2.read_text()
    doc = json.loads(l1.read_text())
    assert doc["width"] == 32 and len(doc["labels"]) == 1024
    assert p1.read_bytes().startswith(b"P6\n32 32\n255\n")


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["orbit", "--set", "ellipse:b=2"])  # missing required flags
    assert exc.value.code == 2


def test_domain_error_exit_1(capsys):
    code, _, err = run_cli(["project", "--set", "circle", "--point", "0,0"], capsys)
    assert code == 1
    assert "error" in err


def test_config_file_supplies_flags(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"set": "ellipse:b=2", "line": "slope=2", "point": "0,4"}))
    code, out, _ = run_cli(["--config", str(cfg), "project"], capsys)
    assert code == 0
    assert json.loads(out)["point"] == [0.0, 2.0]
    # explicit flag overrides config value
    code, out, _ = run_cli(["--config", str(cfg), "project", "--point", "2,0"], capsys)
    assert code == 0
    assert json.loads(out)["point"] == [1.0, 0.0]


def test_seventeen_digit_floats(capsys):
    code, out, _ = run_cli(["project", "--set", "ellipse:b=2", "--point", "0.1,0.7"], capsys)
    assert code == 0
    # a full-precision float appears (shortest repr would be shorter)
    doc = json.loads(out)
    x = doc["point"][0]
    assert out.count(format(x, ".17g")) >= 1
