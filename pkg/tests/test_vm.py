import json

import gmpy2
import numpy as np
import pytest

from grassmann_rg import cli
from grassmann_rg.vm import (
    ConfigError,
    ExperimentConfig,
    all_pass,
    build_covariance,
    constants,
    hypothesis_threshold,
    interaction_kernel,
    run,
    verdict_section,
    w_vectors,
)
from grassmann_rg.seminorms import triple_bar_norm

Q = gmpy2.mpq


def small(**kw):
    base = dict(x_a=["a"], x_c=["c"], w_vectors={"a": [1, 0], "c": [1, 1]}, trials=10)
    base.update(kw)
    return ExperimentConfig.from_dict(base)


def test_unit_vector_covariance():
    # parallel unit vectors give the elementary pairing on each colour
    cfg = small(w_vectors={"a": [1, 0], "c": [1, 0]})
    C = build_covariance(cfg)
    # colour-major sites: (0,a), (0,c), (1,a), (1,c)
    want = np.array([[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]])
    assert np.all(C.matrix == want)
    k = constants(cfg)
    assert k.b_sq == 4 and k.c == 1 and k.J == Q(1, 2)
    # orthogonal vectors give no pairing at all, and no finite threshold
    orth = small(w_vectors={"a": [1, 0], "c": [0, 1]})
    assert build_covariance(orth).is_zero()
    assert hypothesis_threshold(constants(orth), 2) == float("inf")
    with pytest.raises(ConfigError):
        interaction_kernel(orth, constants(orth))


def test_constants_from_vectors():
    cfg = ExperimentConfig.from_dict({"w_seed": 11})
    vecs = w_vectors(cfg)
    k = constants(cfg)
    norms_sq = {x: sum(v * v for v in vec) for x, vec in vecs.items()}
    assert k.b_sq == 4 * max(norms_sq.values())
    C = build_covariance(cfg)
    P = C.matrix
    n = len(cfg.points)
    assert k.c == max(sum(abs(P[i, j]) for j in range(n)) for i in range(n))
    # Cauchy-Schwarz: |C(x, x')| <= |w_x| |w_x'| <= b^2 / 4
    for i, x in enumerate(cfg.points):
        for j, y in enumerate(cfg.points):
            assert P[i, j] ** 2 <= norms_sq[x] * norms_sq[y] <= (k.b_sq / 4) ** 2
    # block structure: nothing within x_a or within x_c, nothing across colours
    assert P[0, 1] == 0 and P[2, 3] == 0
    assert np.all(C.matrix[:n, n:] == 0)


@pytest.mark.parametrize("bad", [
    {"n_colours": 1},
    {"x_a": ["a"], "x_c": ["a"]},
    {"mode": "interval"},
    {"unknown": 1},
    {"interaction": {"kind": "cubic"}},
    {"x_a": ["a"], "x_c": ["c"], "w_vectors": {"a": [1]}},
    {"x_a": ["a"], "x_c": ["c"], "w_vectors": {"a": [1], "c": [1, 2]}},
])
def test_config_errors(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict(bad)


def test_interaction_scaling():
    cfg = ExperimentConfig.from_dict({"interaction": {"kind": "random", "seed": 2, "target": "1/7"}})
    k = constants(cfg)
    W = interaction_kernel(cfg, k)
    assert triple_bar_norm(W, cfg.geometry()) == Q(1, 7)
    cfg2 = ExperimentConfig.from_dict({"interaction": {"kind": "random", "seed": 2, "threshold_fraction": "1/1000"}})
    W2 = interaction_kernel(cfg2, k)
    assert triple_bar_norm(W2, cfg2.geometry()) == hypothesis_threshold(k, 2) / 1000


def test_explicit_interaction():
    w = np.zeros((2,) * 4, dtype=int)
    w[0, 1, 0, 1] = 3
    cfg = small(interaction={"kind": "explicit", "w": w.tolist()})
    W = interaction_kernel(cfg, constants(cfg))
    assert W.shape == (4,) * 4 and W[0, 1, 2, 3] != 0
    with pytest.raises(ConfigError):
        interaction_kernel(small(interaction={"kind": "explicit", "w": [[1]]}), constants(cfg))


def test_zero_interaction_trivial_pass():
    cfg = small(interaction={"kind": "zero"})
    rep = run("theorem-x2", cfg)
    assert all_pass(rep)
    assert rep["norms"]["triple_bar_W"] == 0 and rep["norms"]["triple_bar_g"] == 0
    rg = run("rg-run", cfg)
    assert rg["components"] == {} and rg["triple_bar"] == {"W": 0.0, "W2": 0.0, "g": 0.0}


def test_theorem_x2_small_exact():
    rep = run("theorem-x2", small())
    names = [c["name"] for c in rep["checks"]]
    assert {"two-point", "four-point", "six-point"} <= set(names)
    assert all_pass(rep)
    assert rep["in_hypothesis"] and rep["colour_preserving"] == {"W2": True, "g": True}
    for c in rep["checks"]:
        if "lhs_exact" in c:
            assert (Q(c["lhs_exact"]) <= Q(c["rhs_exact"])) == (c["verdict"] == "PASS")


def test_out_of_hypothesis_flag(capsys):
    cfg = small(interaction={"kind": "random", "seed": 1, "target": 1}, mode="float")
    rep = run("theorem-x2", cfg)
    assert not rep["in_hypothesis"]
    assert all(c.get("flag") == "out_of_hypothesis" for c in rep["checks"] if "lhs" in c)
    assert "hypothesis" in capsys.readouterr().err


def test_determinism():
    cfg = small(seed=4)
    a, b = run("theorem-x2", cfg), run("theorem-x2", cfg)
    assert verdict_section(a) == verdict_section(b)
    c, d = run("verify-norms", cfg), run("verify-norms", cfg)
    assert verdict_section(c) == verdict_section(d)


def test_float_mode_runs():
    rep = run("rg-run", small(mode="float"))
    ex = run("rg-run", small())
    assert rep["triple_bar"]["W"] == pytest.approx(ex["triple_bar"]["W"], rel=1e-12)
    assert rep["logZ"] == pytest.approx(ex["logZ"], abs=1e-12)


def test_verify_commands_small():
    for cmd in ("verify-ladders", "verify-norms", "verify-config"):
        rep = run(cmd, small())
        assert all_pass(rep), (cmd, rep["checks"])


def test_cli_exit_codes(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"x_a": ["a"], "x_c": ["c"], "w_vectors": {"a": [1, 0], "c": [1, 1]}}))
    out = tmp_path / "rep.json"
    csv_path = tmp_path / "rep.csv"
    assert cli.main(["theorem-x2", "--config", str(cfg_path), "--out", str(out), "--csv", str(csv_path)]) == 0
    rep = json.loads(out.read_text())
    assert rep["command"] == "theorem-x2" and rep["checks"]
    assert "verdict" in csv_path.read_text().splitlines()[0]
    assert cli.main(["theorem-x2", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["bogus"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n_colours": 1}))
    assert cli.main(["rg-run", "--config", str(bad)]) == 2
    # a failing verdict gives exit code 1: slopes of g are cubic, not quadratic
    scal = tmp_path / "scal.json"
    scal.write_text(json.dumps({"x_a": ["a"], "x_c": ["c"], "w_vectors": {"a": [1, 1], "c": [1, 2]},
                                "scaling_lambdas": [0.0625, 0.03125, 0.015625]}))
    assert cli.main(["theorem-x2", "--config", str(scal), "--out", str(out)]) == 1


def test_cli_overrides(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["rg-run", "--mode", "float", "--seed", "3", "--rmax", "4", "--tol", "1e-6",
                     "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["mode"] == "float" and rep["seed"] == 3
    assert rep["truncation"]["r_max"] == 4
