import json

import pytest

from pinch.cli import (EXIT_CONFIG, EXIT_FAIL, EXIT_OK, ConfigError, RunConfig, load_config,
                       main, parse_config)

FAST = ["--L", "2", "--N", "200", "--fundamental-L", "3", "--fundamental-N", "60",
        "--fundamental-full-N", "30", "--nonidentity-L", "4", "--nonidentity-cap", "500",
        "--census-L", "4"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def payload(tmp_path, name):
    d = json.loads((tmp_path / f"{name}.json").read_text())
    d.pop("timestamp")
    return d


def test_config_parsing():
    cfg = parse_config("g1 = 1  # comment\n\nr = 6.5\nt = auto\nresolution = 32x4\n")
    assert cfg.r == 6.5 and cfg.t == "auto" and cfg.resolution == (32, 4)


@pytest.mark.parametrize("text, where", [
    ("r = 6\nnonsense\n", "cfg:2"),
    ("r = 6\nfoo = 1\n", "cfg:2"),
    ("seed = x\n", "cfg:1"),
])
def test_config_errors_name_the_line(text, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(text, source="cfg")


def test_validation_rejects_bad_values():
    for key, val in (("r", "-1"), ("blend_fraction", "1.5"), ("format", "gif"), ("pieces", "1")):
        with pytest.raises(ConfigError):
            load_config(overrides={key: val})


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(capsys, "build", "--config", str(tmp_path / "nope.cfg"))
    assert code == EXIT_CONFIG and "nope.cfg" in err


def test_malformed_config_file_exits_two(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("g1 = 1\ng2 = one\n")
    code, _, err = run(capsys, "build", "--config", str(cfg))
    assert code == EXIT_CONFIG and "bad.cfg:2" in err


def test_build_output_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "build", "--out", str(a))[0] == EXIT_OK
    assert run(capsys, "build", "--out", str(b))[0] == EXIT_OK
    pa, pb = payload(a, "build"), payload(b, "build")
    assert pa == pb
    assert pa["t"] == 256 and pa["rho_gamma_is_d"] and pa["relator_is_identity"]
    assert set(pa["generators"]) == {"a1", "b1", "a2", "b2"}


def test_classify_gamma(tmp_path, capsys):
    code, out, _ = run(capsys, "classify", "gamma", "--out", str(tmp_path))
    assert code == EXIT_OK
    d = payload(tmp_path, "classify")
    assert d["kind"] == "Parabolic"
    assert d["normal_form"] == [{"factor": 1, "word": "a1 b1 a1^-1 b1^-1", "d_exponent": 1}]


def test_classify_generator_is_loxodromic(tmp_path, capsys):
    assert run(capsys, "classify", "a2", "--out", str(tmp_path))[0] == EXIT_OK
    assert payload(tmp_path, "classify")["kind"] == "Loxodromic"


@pytest.mark.parametrize("word", ["a3", "q1"])
def test_classify_rejects_unknown_generators(tmp_path, capsys, word):
    code, _, err = run(capsys, "classify", word, "--out", str(tmp_path))
    assert code == EXIT_CONFIG and "word" in err


def test_verify_small(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "--out", str(tmp_path), *FAST)
    d = payload(tmp_path, "verify")
    assert code == EXIT_OK and d["passed"]
    assert [r["check_name"] for r in d["reports"]] == [
        "precisely_invariant_X1", "precisely_invariant_X2", "interactive_pair",
        "fundamental_set_Phi1", "fundamental_set_Phi2", "fundamental_set_Phi",
        "nonidentity_words", "parabolic_census"]


def test_toledo_small(tmp_path, capsys):
    code, _, _ = run(capsys, "toledo", "--out", str(tmp_path), "--resolution", "32x4")
    d = payload(tmp_path, "toledo")
    assert code == EXIT_OK and abs(d["tau"]) < 1e-2
    assert len(d["per_piece"]) == 7
    assert (tmp_path / "subdivision.csv").read_text().startswith("piece,integral,error\n")


def test_toledo_fails_on_impossible_tolerance(tmp_path, capsys):
    code, _, _ = run(capsys, "toledo", "--out", str(tmp_path), "--resolution", "16x2",
                     "--tau-tol", "1e-300")
    assert code == EXIT_FAIL


@pytest.mark.parametrize("fmt", ["csv", "png"])
def test_limitset(tmp_path, capsys, fmt):
    code, _, _ = run(capsys, "limitset", "--out", str(tmp_path), "--limit-L", "3",
                     "--format", fmt)
    assert code == EXIT_OK
    d = payload(tmp_path, "limitset")
    assert d["points"] == 438 and d["file"] == f"limitset.{fmt}"
    assert (tmp_path / d["file"]).stat().st_size > 0


def test_defaults():
    cfg = RunConfig().validate()
    assert (cfg.L, cfg.N, cfg.fundamental_L, cfg.census_L, cfg.limit_L) == (4, 10_000, 6, 6, 6)


@pytest.mark.slow
def test_verify_default_configuration(tmp_path, capsys):
    code, _, _ = run(capsys, "verify", "--out", str(tmp_path))
    d = payload(tmp_path, "verify")
    assert code == EXIT_OK and d["passed"]
    assert all(r["violations"] == 0 for r in d["reports"])


def test_toledo_default_configuration(tmp_path, capsys):
    assert run(capsys, "toledo", "--out", str(tmp_path))[0] == EXIT_OK
    assert abs(payload(tmp_path, "toledo")["tau"]) < 1e-2
