import json
import subprocess
import sys

CLI = [sys.executable, "-m", "rankstats"]


def run_cli(*args, expect=0):
    proc = subprocess.run(CLI + list(args), capture_output=True, text=True)
    assert proc.returncode == expect, proc.stderr
    return proc


def test_rank_json():
    proc = run_cli("rank", "--q", "3", "--d", "133", "--output", "json")
    out = json.loads(proc.stdout)
    assert out["i_q"] == 9
    assert out["lower"] == 5 and out["upper"] == 9
    assert out["member"] is True
    assert out["terms"][-1] == [133, 108, 18, 6]


def test_rank_non_member_carries_unconditional_bounds():
    proc = run_cli("rank", "--q", "3", "--d", "35", "--output", "json")
    out = json.loads(proc.stdout)
    assert out["member"] is False
    assert out["dp_lower"] == 0
    assert out["phi_over_lambda_lower"] == 0


def test_rank_handles_shared_factor():
    proc = run_cli("rank", "--q", "3", "--d", "6", "--output", "json")
    out = json.loads(proc.stdout)
    assert out["i_q"] is None and out["member"] is False
    assert out["rejection"] == "shares-factor-with-p"
    assert out["dp_lower"] == 0


def test_member_command():
    proc = run_cli("member", "--p", "2", "--d", "7", "--output", "json")
    out = json.loads(proc.stdout)
    assert out["member"] is False
    assert out["rejection"] == "odd-order-obstruction"


def test_classify_command():
    proc = run_cli("classify", "--p", "3", "--r", "31", "--m", "5",
                   "--output", "json")
    out = json.loads(proc.stdout)
    assert out["k"] == 1 and out["in_R_p"] is True and out["in_Q_pm"] is True


def test_varpi_command():
    proc = run_cli("varpi", "--p", "3", "--x", "100", "--n", "4", "--d", "2",
                   "--output", "json")
    assert json.loads(proc.stdout)["count"] == 5


def test_usage_errors():
    run_cli("rank", "--q", "3", expect=2)            # missing --d
    run_cli("nonsense", expect=2)                    # unknown command
    run_cli("rank", "--q", "3", "--d", "x", expect=2)


def test_domain_error_json_on_stderr():
    proc = run_cli("rank", "--q", "6", "--d", "5", expect=1)
    err = json.loads(proc.stderr)
    assert err["error"]["type"] == "domain"
    assert proc.stdout == ""


def test_insufficient_input_error():
    proc = run_cli("construct", "--q", "3", "--mode", "direct", "--y", "9",
                   "--window", "2", "30", "--m", "2", expect=1)
    err = json.loads(proc.stderr)["error"]
    assert err["type"] == "insufficient-input"
    assert err["available"] == 1 and err["needed"] == 2
    assert "diagnostics" in err


def test_construct_and_verify_round_trip(tmp_path):
    proc = run_cli("construct", "--q", "2", "--mode", "direct", "--y", "16",
                   "--window", "5000", "10000", "--m", "1", "--output", "json")
    payload = json.loads(proc.stdout)
    assert [c["d"] for c in payload["certificates"]] == [8581]
    path = tmp_path / "certs.json"
    path.write_text(proc.stdout)
    ver = run_cli("verify", "--input", str(path), "--output", "json")
    assert json.loads(ver.stdout)["verified"] == 1


def test_verify_rejects_tampering(tmp_path):
    proc = run_cli("construct", "--q", "2", "--mode", "direct", "--y", "16",
                   "--window", "5000", "10000", "--m", "1", "--output", "json")
    payload = json.loads(proc.stdout)
    payload["certificates"][0]["i_q"] += 1
    path = tmp_path / "tampered.json"
    path.write_text(json.dumps(payload))
    bad = run_cli("verify", "--input", str(path), expect=1)
    err = json.loads(bad.stderr)["error"]
    assert err["type"] == "verification"
    assert err["clause"] == "recomputation-mismatch"


def test_config_file_defaults_and_override(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"p": 2, "d": 7, "output": "json"}))
    proc = run_cli("member", "--config", str(conf))
    assert json.loads(proc.stdout)["member"] is False
    # explicit flags win over the config file
    proc = run_cli("member", "--config", str(conf), "--d", "9")
    assert json.loads(proc.stdout)["member"] is True


def test_config_rejects_unknown_keys(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"p": 2, "bogus": 1}))
    run_cli("member", "--config", str(conf), "--d", "7", expect=2)


def test_census_threads_and_cache_byte_identical(tmp_path):
    base = ["census-rpk", "--p", "3", "--x", "20000", "--kmax", "4",
            "--output", "csv"]
    cold = run_cli(*base, "--cache-dir", str(tmp_path))
    warm = run_cli(*base, "--cache-dir", str(tmp_path))
    plain = run_cli(*base)
    threaded = run_cli(*base, "--threads", "4")
    assert cold.stdout == warm.stdout == plain.stdout == threaded.stdout
    assert (tmp_path / "primes-20000.tbl").exists()


def test_census_figure_written(tmp_path):
    fig = tmp_path / "rpk.png"
    run_cli("census-rpk", "--p", "3", "--x", "2000", "--output", "csv",
            "--figure", str(fig))
    assert fig.stat().st_size > 0


def test_survey_normal_requires_seed():
    run_cli("survey-normal", "--p", "3", "--x", "1000", "--sample-size", "10",
            expect=2)


def test_survey_normal_deterministic_bytes():
    args = ["survey-normal", "--p", "3", "--x", "5000", "--sample-size", "200",
            "--seed", "11", "--output", "csv"]
    a = run_cli(*args)
    b = run_cli(*args)
    assert a.stdout == b.stdout


def test_survey_average_csv():
    proc = run_cli("survey-average", "--q", "3", "--x", "50", "--output", "csv")
    lines = proc.stdout.strip().split("\n")
    assert lines[0] == "d,i_q"
    assert lines[1] == "1,1"


def test_census_q_and_np_commands():
    proc = run_cli("census-q", "--p", "3", "--m", "5", "--x", "5000",
                   "--output", "json")
    out = json.loads(proc.stdout)
    assert out["rows"][0]["predicted"] == {"num": 1, "den": 12}

    proc = run_cli("census-np", "--p", "3", "--x", "5000", "--k", "1",
                   "--output", "json")
    rows = json.loads(proc.stdout)["rows"]
    assert rows[0]["observed"] == rows[1]["observed"]
    assert rows[0]["class"] == "direct" and rows[1]["class"] == "inclusion-exclusion"


def test_verify_reads_stdin():
    proc = run_cli("construct", "--q", "2", "--mode", "direct", "--y", "20",
                   "--window", "2", "5000", "--m", "1", "--output", "json")
    certs = json.loads(proc.stdout)["certificates"]
    single = json.dumps(certs[0])
    ver = subprocess.run(CLI + ["verify", "--input", "-", "--output", "json"],
                         input=single, capture_output=True, text=True)
    assert ver.returncode == 0, ver.stderr
    assert json.loads(ver.stdout)["verified"] == 1


def test_config_list_values(tmp_path):
    conf = tmp_path / "conf.json"
    conf.write_text(json.dumps({"q": 2, "mode": "direct", "y": 16,
                                "window": [5000, 10000], "m": 1,
                                "output": "csv"}))
    proc = run_cli("construct", "--config", str(conf))
    assert proc.stdout.splitlines()[0] == "d,support,m_y,order,i_q,rank_lower,witness_exponent"
    assert proc.stdout.splitlines()[1].startswith("8581,8581,720720,660,14,10,330")


def test_member_table_output():
    proc = run_cli("member", "--p", "3", "--d", "10")
    assert "member" in proc.stdout and "True" in proc.stdout
