import os
import subprocess
import sys

import pytest

from levy_sieve.cli import main
from levy_sieve.config import ConfigError, build_config, parse_text
from levy_sieve.estimate import PenaltyConfig

RISK = """\
# constant density with piecewise constants
experiment = risk
model.name = constant
model.lambda = 10
window.lo = 0.0
window.hi = 1.0
basis.k = 0
basis.mmax = 16
penalty.form = c
penalty.c = 2
penalty.c1 = 1
penalty.c2 = 1
t = 50
reps = 20
seed = 5
"""


def write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_parse_literals_and_bare_strings():
    raw = parse_text("a = 1\nb = 2.5  # note\nc = (1, 2)\nd = constant\ne = 'x'\nf = True\n\n")
    assert raw == {"a": 1, "b": 2.5, "c": (1, 2), "d": "constant", "e": "x", "f": True}


@pytest.mark.parametrize("text,key", [
    ("experiment = risk\nmodel.name = constant\n", "penalty.c"),
    ("experiment = risk\npenalty.c = 2\n", "model.name"),
    ("experiment = rate\nmodel.name = constant\npenalty.c = 2\n", "t.grid"),
    ("experiment = risk\nmodel.name = constant\npenalty.c = 2\nbogus = 1\n", "bogus"),
    ("experiment = risk\nmodel.name = constant\nmodel.slope = 1\npenalty.c = 2\n", "model.slope"),
    ("experiment = risk\nmodel.name = constant\npenalty.c = 2\nreps = many\n", "reps"),
    ("experiment = risk\nmodel.name = constant\npenalty.c = 2\nwindow.lo = 1\n", "window.hi"),
    ("experiment = risk\nmodel.name = constant\npenalty.c = 0.5\n", "penalty"),
    ("model.name = constant\n", "experiment"),
])
def test_errors_name_the_key(text, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        build_config(parse_text(text))


def test_duplicate_and_malformed_lines():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_text("a = 1\na = 2\n")
    with pytest.raises(ConfigError, match="line 2"):
        parse_text("a = 1\njunk\n")


def test_build_config_fields():
    cfg = build_config(parse_text(RISK), reps=7)
    assert cfg.reps == 7 and cfg.seed == 5 and cfg.mmax == 16 and cfg.T == 50.0
    assert cfg.penalty == PenaltyConfig("c", 2.0, 1.0, 1.0)
    assert cfg.model_params == {"lambda": 10}
    assert cfg.levy().constants.rho == 10.0


def test_unknown_experiment_lists_options(tmp_path, capsys):
    rc = main(["run", "--config", write(tmp_path, RISK.replace("= risk", "= sweep"))])
    err = capsys.readouterr().err
    assert rc != 0 and "risk, rate, concentration, discrete" in err


def test_missing_penalty_c_exits_nonzero(tmp_path, capsys):
    text = "".join(l + "\n" for l in RISK.splitlines() if not l.startswith("penalty.c "))
    rc = main(["run", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")])
    assert rc != 0 and "penalty.c" in capsys.readouterr().err


def test_missing_file(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.cfg")]) != 0


def test_risk_run_outputs(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--config", write(tmp_path, RISK), "--out", str(out)]) == 0
    lines = (out / "risk.csv").read_text().splitlines()
    assert lines[0] == "m,d_m,D_m,risk_mean,risk_se,bias_sq,chi_mean,pen_mean,select_freq"
    assert len(lines) == 1 + 16
    manifest = (out / "manifest.txt").read_text()
    assert "seed = 5" in manifest and "0.1.0" in manifest and "oracle_ratio" in manifest


def test_byte_identical_reruns(tmp_path):
    cfg = write(tmp_path, RISK)
    main(["run", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["run", "--config", cfg, "--out", str(tmp_path / "b"), "--threads", "3"])
    for f in ("risk.csv", "manifest.txt"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_concentration_run_and_na(tmp_path):
    out = tmp_path / "c"
    cfg = write(tmp_path, "experiment = concentration\nreps = 1000\nconcentration.u_grid = [1, 2]\n")
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    rows = (out / "concentration.csv").read_text().splitlines()
    assert rows[0].startswith("u,bound,threshold") and len(rows) == 3
    cfg = write(tmp_path, RISK.replace("reps = 20", "reps = 1"), "one.cfg")
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "r")]) == 0
    assert ",NA," in (tmp_path / "r" / "risk.csv").read_text()


def test_console_script_module_entry(tmp_path):
    cfg = write(tmp_path, "experiment = concentration\nreps = 100\n")
    res = subprocess.run([sys.executable, "-m", "levy_sieve.cli", "run", "--config", cfg,
                          "--out", str(tmp_path / "x")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert os.path.exists(tmp_path / "x" / "manifest.txt")
