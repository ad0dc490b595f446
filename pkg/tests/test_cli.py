import json
import logging

import pytest

from cantor_rings.cli import main, parse_complex
from cantor_rings.cantor_exception import SpecError


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
    logging.getLogger("cantor_rings").setLevel(logging.NOTSET)


def test_presets(capsys):
    assert main(["presets"]) == 0
    listing = json.loads(capsys.readouterr().out)
    assert [entry["id"] for entry in listing] == ["fig1", "fig1-mcmullen", "fig4", "fig5"]
    assert listing[0]["signature"] == {"p": 1, "n": 4, "degrees": [5, 5, 5, 5]}


def test_synth_writes_out(tmp_path):
    out = tmp_path / "spec.json"
    assert main(["-o", str(out), "synth", "-p", "1", "-d", "5,5,5,5"]) == 0
    payload = json.loads(out.read_text("utf-8"))
    assert payload["spec"]["degrees"] == [5, 5, 5, 5]
    assert payload["budget"]["K"] == 5


def test_synth_then_audit(tmp_path, capsys):
    out = tmp_path / "spec.json"
    assert main(["-o", str(out), "synth", "-d", "4,5,6", "-p", "0"]) == 0
    assert main(["audit", "--spec", str(out)]) == 0
    assert json.loads(capsys.readouterr().out)["pass"]


def test_audit_fails_on_preset(capsys):
    assert main(["audit", "--preset", "fig1"]) == 2
    assert not json.loads(capsys.readouterr().out)["pass"]


def test_malformed_spec(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(
        json.dumps({"p": 1, "degrees": [5, 5], "params": [{"log10_mag": "x", "phase_rad": 0}]}),
        "utf-8",
    )
    assert main(["certify", "--spec", str(path)]) == 1
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["field"] == "/params/0/log10_mag"


def test_invalid_samples(capsys):
    assert main(["--samples", "100", "presets"]) == 1
    assert "samples" in capsys.readouterr().err


def test_certify_mcmullen(capsys):
    assert main(["certify", "--preset", "fig1-mcmullen"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["verdict"] == "Certified"
    assert report["signature"]["degrees"] == [3, 3]


def test_itinerary_escapes_at_origin(capsys):
    assert main(["itinerary", "--preset", "fig1-mcmullen", "--z", "0"]) == 0
    orbit = json.loads(capsys.readouterr().out)["orbits"][0]
    assert orbit["escaped"] == 0
    assert orbit["itinerary"] == ""


def test_locate_unknown_prefix(capsys):
    assert main(["locate", "--preset", "fig1-mcmullen", "--prefix", "7"]) == 2
    assert "error" in json.loads(capsys.readouterr().out)


def test_parabolic_pn(capsys):
    assert main(["parabolic", "pn", "--n", "2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["spec"]["kind"] == "pn"
    assert payload["report"]["verdict"] == "Certified"


def test_render_needs_out():
    assert main(["render", "--preset", "fig1-mcmullen"]) == 1


def test_render_png(tmp_path):
    out = tmp_path / "mcmullen.png"
    assert main(["render", "--preset", "fig1-mcmullen", "--px", "16", "--out", str(out)]) == 0
    assert out.read_bytes().startswith(b"\x89PNG")


def test_parse_complex():
    assert parse_complex("1+2i") == 1 + 2j
    assert parse_complex("-0.5") == -0.5
    with pytest.raises(SpecError):
        parse_complex("one")


@pytest.mark.parametrize(
    "flags, keys",
    [
        (["--fixed-check"], {"spec", "fixed_point"}),
        (["--critical"], {"spec", "critical"}),
        (["--certify"], {"spec", "report"}),
        (["--critical", "--fixed-check"], {"spec", "critical", "fixed_point"}),
        ([], {"spec", "fixed_point", "critical", "report"}),
    ],
)
def test_parabolic_sections(capsys, flags, keys):
    assert main(["parabolic", "pn", "--n", "2", *flags]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == keys


def test_parabolic_plambda_critical(capsys):
    assert main(["parabolic", "plambda", "--critical"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["critical"]["count_identity"]
    assert "report" not in payload


def test_misordered_spec_exits_with_field(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(
        json.dumps(
            {
                "kind": "family",
                "p": 1,
                "degrees": [5, 5, 5, 5],
                "params": [
                    {"log10_mag": -3.6, "phase_rad": 0.0},
                    {"log10_mag": -0.05, "phase_rad": 0.0},
                    {"log10_mag": -1.0, "phase_rad": 0.0},
                ],
            }
        )
    )
    assert main(["certify", "--spec", str(path)]) == 1
    error = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert error["field"] == "/params/2/log10_mag"
