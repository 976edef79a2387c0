"""End-to-end checks of the rmprod executable: output stability, round
trips, exit codes and the verify report format."""
import json
import os
import subprocess
import sys
import tempfile

import jsonschema

EXE, SCHEMA = sys.argv[1], sys.argv[2]
failures = []


def run(*args):
    return subprocess.run([EXE, *args], capture_output=True, text=True)


def check(cond, what):
    print(("ok    " if cond else "FAIL  ") + what)
    if not cond:
        failures.append(what)


def parse_csv(text):
    lines = text.splitlines()
    assert lines[0].startswith("# meta: ")
    meta = json.loads(lines[0][len("# meta: "):])
    return meta, lines[1].split(","), [l.split(",") for l in lines[2:]]


sim = ["simulate", "--p", "1", "--s", "1", "--alpha", "pi/6", "--n", "20000",
       "--streams", "2", "--seed", "7"]
a, b = run(*sim), run(*sim)
check(a.returncode == 0 and a.stdout == b.stdout, "simulate output is byte-identical across runs")
c = run(*sim[:-1], "8")
check(c.stdout != a.stdout, "a different seed changes the output")

lyap = ["lyapunov", "--p", "1,2.5", "--s", "0.2:2:4", "--alpha=-pi/6"]
csv_run, json_run = run(*lyap), run(*lyap, "--format", "json")
check(csv_run.returncode == 0 and json_run.returncode == 0, "lyapunov runs in both formats")
meta, cols, rows = parse_csv(csv_run.stdout)
doc = json.loads(json_run.stdout)
check(doc["columns"] == cols, "csv and json headers agree")
check(len(doc["rows"]) == len(rows) == 8, "2 orders x 4 scales give 8 rows")
same = all(
    (cell is None and text == "nan")
    or (isinstance(cell, bool) and text == str(cell).lower())
    or (isinstance(cell, (int, float)) and not isinstance(cell, bool) and float(text) == cell)
    for jrow, crow in zip(doc["rows"], rows) for cell, text in zip(jrow, crow))
check(same, "csv and json cells agree")
check(meta["alpha"] == doc["meta"]["alpha"], "csv and json metadata agree")

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "d.json")
    r = run("density", "--p", "1", "--s", "1", "--alpha", "pi/20", "--grid-r", "60",
            "--grid-theta", "32", "--format", "json", "--out", path)
    check(r.returncode == 0 and r.stdout == "", "--out writes to a file and not stdout")
    with open(path) as f:
        d = json.load(f)
    check(d["meta"]["band_of_max_density"] == 0, "narrow cone peaks near the real axis")

    schema = json.load(open(SCHEMA))
    rep = os.path.join(tmp, "fault.json")
    r = run("verify", "--only", "1", "--fault-normalization", "1.01", "--out", rep)
    check(r.returncode == 1, "injected normalisation fault exits 1")
    fault = json.load(open(rep))
    jsonschema.validate(fault, schema)
    check(fault["passed"] is False and fault["checks"][0]["id"] == 1
          and fault["checks"][0]["passed"] is False, "check 1 reports the fault")

    rep = os.path.join(tmp, "ok.json")
    r = run("verify", "--only", "1,4,5", "--timings", "--out", rep)
    good = json.load(open(rep))
    check(r.returncode == 0, "verify on checks 1,4,5 exits 0")
    try:
        jsonschema.validate(good, schema)
        valid = True
    except jsonschema.ValidationError as e:
        print(e)
        valid = False
    check(valid, "verify report matches the schema")
    check([c["id"] for c in good["checks"]] == [1, 4, 5], "only the requested checks run")
    check(r.stderr.count("[PASS]") == 3, "one summary line per check")

check(run("lyapunov", "--bogus").returncode == 2, "unknown option exits 2")
check(run("lyapunov", "--p", "0").returncode == 2, "invalid parameter exits 2")
check(run("lyapunov", "--out", "/nonexistent/dir/x.csv").returncode == 2,
      "unwritable output exits 2")
check(run("simulate", "--alpha", "0", "--mode", "histogram").returncode == 2,
      "histogram on the half-line exits 2")
check(run("verify", "--only", "14").returncode == 2, "unknown check id exits 2")
check(run().returncode == 2, "missing subcommand exits 2")

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
