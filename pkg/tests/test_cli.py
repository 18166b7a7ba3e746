import pytest

from sdfmig.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_throughput_bundled_scenario(capsys):
    code, out, _ = run_cli(capsys, "throughput", "mjpeg_base")
    assert code == 0
    assert "scenario: mjpeg_base" in out
    assert "throughput: 13.91 f/s" in out


def test_throughput_freq_flag(capsys):
    code, out, _ = run_cli(capsys, "throughput", "mjpeg_base", "--freq", "200e6")
    assert code == 0
    assert "throughput: 27.83 f/s" in out


def test_check_ok(capsys):
    code, out, _ = run_cli(capsys, "check", "mjpeg_base")
    assert code == 0
    assert "validation: ok" in out


def test_check_deadlocked_scenario(tmp_path, capsys):
    bad = tmp_path / "dead.xml"
    bad.write_text("""<scenario name="dead">
  <application>
    <actor id="A" exec-time="2"/>
    <actor id="B" exec-time="3"/>
    <channel id="f" src="A" dst="B"/>
    <channel id="b" src="B" dst="A"/>
  </application>
</scenario>""")
    code, _, err = run_cli(capsys, "check", str(bad))
    assert code == 2
    assert "analysis failed" in err


def test_check_invalid_scenario(tmp_path, capsys):
    bad = tmp_path / "bad.xml"
    bad.write_text("""<scenario name="bad">
  <application>
    <actor id="A" exec-time="1"/>
    <channel id="c" src="A" dst="ghost"/>
  </application>
</scenario>""")
    code, _, err = run_cli(capsys, "check", str(bad))
    assert code == 1
    assert "invalid scenario" in err


def test_migrate_reports_gain(capsys):
    code, out, _ = run_cli(capsys, "migrate", "mjpeg_base", "--task", "IDCT")
    assert code == 0
    assert "throughput without migration (f/s): 13.91" in out
    assert "17.40" in out
    assert "3.49" in out


def test_migrate_csv(capsys):
    code, out, _ = run_cli(capsys, "migrate", "mjpeg_base", "--task", "IDCT",
                           "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "actor,fps_before,fps_after,gain_fps"
    assert lines[1] == "IDCT,13.91,17.40,3.49"


def test_migrate_unknown_task(capsys):
    code, _, err = run_cli(capsys, "migrate", "mjpeg_base", "--task", "nope")
    assert code == 3
    assert "nope" in err


def test_explore_ranking_and_determinism(capsys):
    code, out, _ = run_cli(capsys, "explore", "mjpeg_base", "--format", "csv")
    assert code == 0
    lines = out.strip().split("\n")
    assert lines[0] == "actor,fps_before,fps_after,gain_fps"
    assert len(lines) == 7  # 6 software actors + header
    gains = [float(line.split(",")[3]) for line in lines[1:]]
    assert gains == sorted(gains, reverse=True)
    actors = [line.split(",")[0] for line in lines[1:]]
    assert actors.index("IDCT") < actors.index("VLD")
    code2, out2, _ = run_cli(capsys, "explore", "mjpeg_base", "--format", "csv")
    assert out2 == out


def test_explore_text_orders_idct_before_vld(capsys):
    code, out, _ = run_cli(capsys, "explore", "mjpeg_base")
    assert code == 0
    assert out.index("IDCT") < out.index("VLD")


def test_usage_errors(capsys):
    assert run_cli(capsys, "migrate", "mjpeg_base")[0] == 3   # missing --task
    assert run_cli(capsys, "throughput", "no_such_scenario")[0] == 3
    assert run_cli(capsys, "throughput", "mjpeg_base", "--freq", "abc")[0] == 3


def test_explore_demo_scenario(capsys):
    code, out, _ = run_cli(capsys, "explore", "two_stage_demo", "--format", "csv")
    assert code == 0
    assert len(out.strip().split("\n")) == 3
