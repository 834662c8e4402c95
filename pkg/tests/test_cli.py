import json

import pytest

from abflux import cli
from abflux.config import demo_config, parse_config
from abflux.errors import ConfigError


def _write(tmp_path, doc, name="run.json"):
    path = tmp_path / name
    path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
    return path


def _demo_doc(**updates):
    doc = json.loads(demo_config().model_dump_json())
    doc.update(updates)
    return doc


def test_malformed_json_exits_2_without_output(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["analyze", "--config", str(_write(tmp_path, "{not json")), "--out", str(out)])
    assert code == 2
    assert not out.exists()
    assert capsys.readouterr().out == ""


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_config(json.dumps(_demo_doc(surprise=1)))


def test_overlapping_disks_rejected(tmp_path):
    doc = _demo_doc(spectator={"center": [1.5, 0.0], "radius": 1.0, "B": 1.0})
    assert cli.main(["analyze", "--config", str(_write(tmp_path, doc))]) == 2


def test_analyze_circle_ii(capsys):
    assert cli.main(["analyze"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["classification"] == "SecondClass"
    assert doc["dirac_x1_x2"] == pytest.approx(1 / 36, rel=1e-15)
    assert doc["trap_size_ok"]


def test_analyze_blind_area(capsys):
    assert cli.main(["analyze", "--blind"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["classification"] == "Degenerate"
    assert "no way to establish dynamics" in doc["note"]
    assert doc["dirac_x1_x2"] is None


def test_spectrum_zero_levels(tmp_path, capsys):
    doc = _demo_doc(grid={"levels": 0})
    out = tmp_path / "out"
    assert cli.main(["spectrum", "--config", str(_write(tmp_path, doc)), "--out", str(out), "--format", "csv"]) == 0
    assert (out / "spectrum.csv").read_text().strip() == "n,analytic,numeric,relative_error,convergence_delta,gauge_deviation"
    assert json.loads((out / "spectrum.json").read_text())["table"] == []


def test_spectrum_blind_area_exits_2(capsys):
    assert cli.main(["spectrum", "--blind"]) == 2


def test_transmit_blind_area(tmp_path):
    doc = _demo_doc(receiver_region="InterveningRegion", channel={"message_length": 20})
    out = tmp_path / "out"
    assert cli.main(["transmit", "--config", str(_write(tmp_path, doc)), "--out", str(out)]) == 0
    report = json.loads((out / "channel_report.json").read_text())
    assert report["blind_area"]
    assert {f["symbol_out"] for f in report["frames"]} == {"NoSignal"}


def test_transmit_is_deterministic(tmp_path, monkeypatch):
    doc = _demo_doc(channel={"message_length": 200})
    cfg = _write(tmp_path, doc)
    texts = []
    for threads, name in (("1", "a"), ("3", "b")):
        monkeypatch.setenv("ABFLUX_THREADS", threads)
        assert cli.main(["transmit", "--config", str(cfg), "--out", str(tmp_path / name), "--format", "csv", "--seed", "7"]) == 0
        texts.append(((tmp_path / name / "channel_report.json").read_bytes(), (tmp_path / name / "frames.csv").read_bytes()))
    assert texts[0] == texts[1]
    report = json.loads(texts[0][0])
    assert report["symbol_error_rate"] == 0.0
    assert report["E0_jitter_stddev"] > 0
    assert report["seed"] == 7


def test_bad_thread_count(tmp_path, monkeypatch):
    monkeypatch.setenv("ABFLUX_THREADS", "many")
    doc = _demo_doc(channel={"message_length": 4})
    assert cli.main(["transmit", "--config", str(_write(tmp_path, doc))]) == 2


def test_ambiguous_region_exits_3(tmp_path):
    doc = _demo_doc(strays=[{"center": [5.0, 0.0], "radius": 0.5, "B": -36.0}], analysis={"samples": 64})
    assert cli.main(["analyze", "--config", str(_write(tmp_path, doc))]) == 3


def test_exit_codes_are_limited():
    from abflux import errors

    classes = [errors.AbfluxError, errors.ConfigError, errors.AmbiguousRegionError,
               errors.NumericalError, errors.DegenerateSystemError]
    assert {c.exit_code for c in classes} == {2, 3, 4}
