import json

from framesem.cli import run

from .paths import KB_DIR


def invoke(capsys, *argv):
    code = run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_prints_mr_and_trace(capsys):
    code, out, err = invoke(
        capsys, "analyze", "Tony was watching a tiger.", "--explain"
    )
    assert code == 0
    assert "instance VOLUNTARY-VISUAL-EVENT-1" in out
    assert "episodic-mem HUMAN-#17" in out
    assert "[parse]" in out and "[anchor]" in out


def test_analyze_parse_failure_exits_1(capsys):
    code, out, err = invoke(capsys, "analyze", "zorch the blorp")
    assert code == 1
    assert "zorch" in err


def test_generate_bicycle_color(capsys, tmp_path):
    code, out, err = invoke(capsys, "generate", str(KB_DIR / "mr" / "bicycle-color.mr"))
    assert code == 0
    assert out.splitlines()[0] == "The bicycle is blue."


def test_generate_missing_file_exits_2(capsys):
    code, out, err = invoke(capsys, "generate", "no-such-file.mr")
    assert code == 2


def test_learn_script_command(capsys):
    code, out, err = invoke(
        capsys, "learn-script", str(KB_DIR / "scenarios" / "gas-tank.kb")
    )
    assert code == 0
    assert "script FILL-GAS-TANK" in out
    assert "describe-back: Here's how you fill a gas tank." in out
    assert "persist: done" in out


def test_learn_script_not_learned_exits_1(capsys, tmp_path):
    scenario = (KB_DIR / "scenarios" / "grind-beans.kb").read_text()
    stripped = "\n".join(
        line for line in scenario.splitlines() if not line.startswith("  ANSWER")
    )
    path = tmp_path / "no-answer.kb"
    path.write_text(stripped + "\n")
    code, out, err = invoke(capsys, "learn-script", str(path))
    assert code == 1
    assert "missing-parent" in err


def test_consolidate_command_with_memory(capsys, tmp_path):
    memory = tmp_path / "memory.kb"
    memory.write_text(
        "instance HUMAN-#3\n  HAS-NAME Lou\n"
        "instance TOOLBOX-#1\ninstance HAMMER-#1\ninstance SCREWDRIVER-#1\n"
        "instance WRENCH-#1\n"
        "instance USE-OBJECT-#1\ninstance USE-OBJECT-#2\ninstance USE-OBJECT-#3\n"
        "instance RETURN-OBJECT-#1\n  AGENT HUMAN-#3\n  THEME HAMMER-#1\n"
        "  after-use USE-OBJECT-#1\n"
        "instance RETURN-OBJECT-#2\n  AGENT HUMAN-#3\n  THEME SCREWDRIVER-#1\n"
        "  after-use USE-OBJECT-#2\n"
        "instance RETURN-OBJECT-#3\n  AGENT HUMAN-#3\n  THEME WRENCH-#1\n"
        "  after-use USE-OBJECT-#3\n"
    )
    code, out, err = invoke(capsys, "consolidate", "--memory", str(memory))
    assert code == 0
    assert "THEME TOOL" in out
    assert "FREQUENCY always" in out


def test_plan_command(capsys):
    code, out, err = invoke(capsys, "plan", "MAKE-COFFEE")
    assert code == 0
    assert "[default]" in out
    assert "1. HEAT-WATER-#1" in out


def test_validate_command(capsys):
    code, out, err = invoke(capsys, "validate")
    assert code == 0
    assert "grind-v1: unknown concept GRIND" in out


def test_explain_lists_rejected_bindings_and_shapes(capsys):
    # need-v2 (the xcomp sense) cannot fit a plain transitive clause
    code, out, err = invoke(capsys, "analyze", "I need a cup of coffee.", "--explain")
    assert code == 0
    assert "rejected: need-v2" in out
    code, out, err = invoke(
        capsys, "generate", str(KB_DIR / "mr" / "bicycle-color.mr"), "--explain"
    )
    assert code == 0
    assert "[generate]" in out and "mismatch" in out


def test_json_trace_is_line_delimited_records(capsys):
    code, out, err = invoke(
        capsys, "analyze", "The bicycle is blue.", "--explain", "--json-trace"
    )
    assert code == 0
    json_lines = [l for l in out.splitlines() if l.startswith("{")]
    assert json_lines
    for line in json_lines:
        record = json.loads(line)
        assert {"stage", "inputs", "decision", "rejected", "cited"} <= set(record)


def test_missing_kb_dir_exits_2(capsys):
    code, out, err = invoke(capsys, "validate", "--kb", "/no/such/dir")
    assert code == 2
    assert "error" in err


def test_explicit_kb_and_memory_flags(capsys, tmp_path):
    code, out, err = invoke(
        capsys,
        "analyze",
        "Tony was watching a tiger.",
        "--kb",
        str(KB_DIR),
        "--memory",
        str(KB_DIR / "memory.kb"),
    )
    assert code == 0
    assert "episodic-mem HUMAN-#17" in out


def test_save_memory_writes_store(capsys, tmp_path):
    target = tmp_path / "after.kb"
    code, out, err = invoke(
        capsys,
        "analyze",
        "Tony was watching a tiger.",
        "--save-memory",
        str(target),
    )
    assert code == 0
    assert "instance TIGER-#1" in target.read_text()


def test_cli_invocations_are_byte_identical(capsys):
    invocations = [
        ("analyze", "Tony was watching a tiger.", "--explain"),
        ("analyze", "Mary needed to feed Spot before going out to dinner.", "--explain"),
        ("generate", str(KB_DIR / "mr" / "amused-by-color.mr"), "--explain"),
        ("learn-script", str(KB_DIR / "scenarios" / "clean-nozzle.kb"), "--explain"),
        ("plan", "MAKE-COFFEE"),
        ("validate",),
    ]
    for argv in invocations:
        first = invoke(capsys, *argv)
        second = invoke(capsys, *argv)
        assert first == second, argv
