#!/usr/bin/env python3
"""Validate skolemcsp JSON reports against the shipped schema.

Each invocation runs twice and must produce byte-identical output. Emitted
SMT-LIB sentences must parse with z3.
Usage: check_reports.py <skolemcsp binary> <source dir>
"""
import json
import pathlib
import subprocess
import sys

import jsonschema

cli, src = sys.argv[1], pathlib.Path(sys.argv[2])
data = src / "tests" / "data"
corpus = src / "tests" / "corpus"
schema = json.loads((src / "schema" / "report.schema.json").read_text())
validator = jsonschema.Draft202012Validator(schema)

CASES = [
    (["eval", data / "q_term.circ"], None),
    (["eval", data / "q_term.circ", "--window", "32"], None),
    (["eval", data / "xy.circ", "--assign", "x=2,y=3"], None),
    (["member", "--b", "8"], data / "q_term.circ"),
    (["equiv", data / "xy.circ", data / "yx.circ", "--assign", "x=2,y=5"], None),
    (["csp", "solve", "--signature", "cap-cup-not"], data / "inst.csp"),
    (["csp", "solve", data / "plus.csp"], None),
    (["csp", "reduce", "--name", "csp2sc", data / "inst.csp"], None),
    (["csp", "reduce", "--name", "plus2times", data / "plus.csp"], None),
    (["csp", "reduce", "--name", "sat2capcup", data / "small.cnf"], None),
    (["csp", "reduce", "--name", "sc2csp-times", "--b", "6", data / "xy.circ"], None),
    (["csp", "reduce", "--name", "ef2csp", data / "xy.circ", data / "yx.circ"], None),
    (["circuit", "sat", "--b", "6", data / "xy.circ"], None),
    (["skolem", "compile", "--target-v", "3", data / "const3.circ"], None),
    (["skolem", "compile", "--target-v", "6", data / "xy.circ"], None),
    (["mulcsp", "solve", data / "powers.mul"], None),
    (["mulcsp", "gadget", "--name", "3sat-neq", data / "small.cnf"], None),
    (["mulcsp", "gadget", "--name", "const-u", "--u", "set:6,10", "--m", "6", data / "const6.mul"], None),
    (["mulcsp", "xi", "--u", "set:4,108,506250000"], None),
    (["analyze", "factor", "--n", "506250000"], None),
    (["analyze", "minexp", "--n", "108"], None),
    (["analyze", "divisors", "--n", "12"], None),
    (["analyze", "core", "--n", "12"], None),
    (["analyze", "core", "--n", "36"], None),
    (["analyze", "basis", "--u", "set:4,108"], None),
    (["analyze", "wnu", "--arity", "3"], None),
    (["testkit", "gen", "--kind", "circuit", "--seed", "7"], None),
    (["testkit", "gen", "--kind", "csp", "--seed", "7"], None),
    (["testkit", "gen", "--kind", "mul", "--seed", "7"], None),
    (["testkit", "gen", "--kind", "cnf", "--seed", "7"], None),
    (["corpus", "run", corpus], None),
]


def run(args, stdin):
    inp = stdin.read_bytes() if stdin else b""
    p = subprocess.run([cli, "--format", "json", *map(str, args)], input=inp, capture_output=True)
    if p.returncode != 0:
        raise SystemExit(f"{args}: exit {p.returncode}\n{p.stderr.decode()}")
    return p.stdout


failures = 0
smt2 = []
for args, stdin in CASES:
    out = run(args, stdin)
    if out != run(args, stdin):
        print(f"FAIL {args}: output differs between identical runs")
        failures += 1
        continue
    report = json.loads(out)
    errors = sorted(validator.iter_errors(report), key=lambda e: list(e.path))
    if errors:
        print(f"FAIL {args}: {errors[0].message} at {list(errors[0].path)}")
        failures += 1
        continue
    if report["command"] == "skolem compile":
        smt2.append(report["smt2"])
    print(f"ok   {' '.join(map(str, args))}")

# Corpus aggregation must not depend on the number of workers.
one = run(["corpus", "run", corpus, "--jobs", "1"], None)
four = run(["corpus", "run", corpus, "--jobs", "4"], None)
if one != four:
    print("FAIL corpus report depends on --jobs")
    failures += 1

try:
    import z3
except ImportError:
    z3 = None
if z3 is not None:
    for text in smt2:
        try:
            assertions = z3.parse_smt2_string(text)
        except z3.Z3Exception as e:
            print(f"FAIL z3 rejected emitted SMT-LIB: {e}")
            failures += 1
            continue
        if len(assertions) != 1:
            print(f"FAIL expected one assertion, z3 read {len(assertions)}")
            failures += 1
    print(f"z3 parsed {len(smt2)} sentences")
else:
    print("z3 not available; SMT-LIB parse check skipped")

sys.exit(1 if failures else 0)
