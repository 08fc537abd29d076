#!/usr/bin/env python3
"""End-to-end checks of the tubepose command line tool and its JSON outputs."""

import json
import math
import pathlib
import struct
import subprocess
import sys
import tempfile

import jsonschema

TOOL = pathlib.Path(sys.argv[1])
ROOT = pathlib.Path(sys.argv[2])
SCHEMAS = ROOT / "schemas"

failures = []


def check(name, cond, detail=""):
    print(("PASS " if cond else "FAIL ") + name + (f": {detail}" if detail and not cond else ""))
    if not cond:
        failures.append(name)


def run(*args, expect=0):
    proc = subprocess.run([str(TOOL), *map(str, args)], capture_output=True, text=True)
    if proc.returncode != expect:
        print(proc.stdout, proc.stderr)
    return proc


def validate(doc_path, schema_name):
    schema = json.loads((SCHEMAS / f"{schema_name}.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    try:
        jsonschema.validate(json.loads(pathlib.Path(doc_path).read_text()), schema)
        return True
    except jsonschema.ValidationError as e:
        print(e)
        return False


def ply_vertex_count(path):
    with open(path, "rb") as f:
        for raw in f:
            line = raw.decode("ascii").strip()
            if line.startswith("element vertex"):
                return int(line.split()[2])
            if line == "end_header":
                break
    return -1


def strip_timing(path):
    doc = json.loads(pathlib.Path(path).read_text())
    doc.pop("timing", None)
    return doc


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    example = ROOT / "configs" / "example-scene.json"

    check("example config validates", validate(example, "scene-config"))
    check("96-slot config validates", validate(ROOT / "configs" / "full-rack-96.json", "scene-config"))
    check("rack model validates", validate(ROOT / "configs" / "rack-model.json", "rack-model"))

    a, b = tmp / "a", tmp / "b"
    check("synth exits 0", run("synth", "--config", example, "--out-dir", a).returncode == 0)
    run("synth", "--config", example, "--out-dir", b)
    for name in ["scene.ply", "detections.json", "groundtruth.json", "rack-model.json"]:
        check(f"synth writes {name}", (a / name).exists())
        check(f"synth same seed byte-identical {name}", (a / name).read_bytes() == (b / name).read_bytes())
    gt = json.loads((a / "groundtruth.json").read_text())
    check("PLY point count equals ground-truth count", ply_vertex_count(a / "scene.ply") == gt["point_count"])
    check("detections validate", validate(a / "detections.json", "detections"))
    check("groundtruth validates", validate(a / "groundtruth.json", "groundtruth"))
    check("written rack model validates", validate(a / "rack-model.json", "rack-model"))

    c = tmp / "c"
    run("synth", "--config", example, "--out-dir", c, "--seed", "43")
    check("different seed changes the scene", (a / "scene.ply").read_bytes() != (c / "scene.ply").read_bytes())

    est = ["estimate", "--scene", a / "scene.ply", "--detections", a / "detections.json", "--rack", a / "rack-model.json"]
    r1, r2, dbg = tmp / "r1.json", tmp / "r2.json", tmp / "debug.ply"
    check("estimate exits 0", run(*est, "--out", r1, "--debug-cloud", dbg).returncode == 0)
    run(*est, "--out", r2)
    check("results validate", validate(r1, "results"))
    check("estimate deterministic apart from timing", strip_timing(r1) == strip_timing(r2))
    r3, r4 = tmp / "r3.json", tmp / "r4.json"
    run(*est, "--out", r3, "--no-timing")
    run(*est, "--out", r4, "--no-timing")
    check("estimate without timing byte-identical", r3.read_bytes() == r4.read_bytes())
    check("debug cloud has more points than the detections",
          ply_vertex_count(dbg) > sum(len(t["point_indices"]) for t in json.loads((a / "detections.json").read_text())["tubes"]))

    res = json.loads(r1.read_text())
    slots = {t["id"]: t["slot"] for t in gt["tubes"]}
    check("estimated slots match ground truth", all(t["slot"] == slots[t["id"]] for t in res["tubes"]))
    check("all tubes OK", all(t["status"] == "OK" for t in res["tubes"]))
    rigid = True
    for m in [res["rack"]["pose"]] + [t["pose"] for t in res["tubes"]]:
        rot = [row[:3] for row in m[:3]]
        for i in range(3):
            for j in range(3):
                dot = sum(rot[k][i] * rot[k][j] for k in range(3))
                rigid &= abs(dot - (1.0 if i == j else 0.0)) < 1e-9
        rigid &= m[3] == [0.0, 0.0, 0.0, 1.0]
    check("result matrices are rigid transforms", rigid)

    l2 = tmp / "l2.json"
    check("l2 residual mode runs", run(*est, "--out", l2, "--residual-mode", "l2").returncode == 0)
    check("bad residual mode is an input error", run(*est, "--out", l2, "--residual-mode", "l3", expect=2).returncode == 2)

    report = tmp / "report.json"
    proc = run("eval", "--results", r1, "--groundtruth", a / "groundtruth.json", "--json", report)
    check("eval exits 0", proc.returncode == 0)
    check("eval prints a table", "Rx(deg)" in proc.stdout and "tube1" in proc.stdout)
    check("error report validates", validate(report, "error-report"))
    rep = json.loads(report.read_text())
    check("report means under a degree", all(c["rx_deg"] < 1.0 and c["ry_deg"] < 1.0 for c in rep["classes"]))

    gt_self = tmp / "gt_as_results.json"
    doc = {"schema": "tubepose/results/v1", "rack": {"pose": gt["rack"]["pose"], "rmse": 0.0, "inlier_fraction": 1.0,
                                                     "hypothesis_index": 0},
           "tubes": [{"id": t["id"], "class_id": t["class_id"], "slot": t["slot"], "overlap_fraction": 1.0,
                      "alpha": t["alpha"], "beta": t["beta"], "pose": t["pose"], "residual": 0.0, "feasible": True,
                      "status": "OK", "message": ""} for t in gt["tubes"]]}
    gt_self.write_text(json.dumps(doc))
    zero = tmp / "zero.json"
    run("eval", "--results", gt_self, "--groundtruth", a / "groundtruth.json", "--json", zero)
    zr = json.loads(zero.read_text())
    check("zero-error input gives an all-zero table",
          all(c[k] == 0.0 for c in zr["classes"] for k in ["rx_deg", "ry_deg", "tx_mm", "ty_mm", "tz_mm"]))

    single = tmp / "single.json"
    doc1 = dict(doc, tubes=doc["tubes"][:1])
    single.write_text(json.dumps(doc1))
    gt1 = tmp / "gt1.json"
    gt1.write_text(json.dumps(dict(gt, tubes=gt["tubes"][:1])))
    proc = run("eval", "--results", single, "--groundtruth", gt1, "--json", tmp / "single_rep.json")
    check("single-tube input gives one class row", len(json.loads((tmp / "single_rep.json").read_text())["classes"]) == 1)

    missing = tmp / "missing.json"
    missing.write_text(json.dumps(dict(doc, tubes=doc["tubes"][1:])))
    proc = run("eval", "--results", missing, "--groundtruth", a / "groundtruth.json", expect=2)
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    check("unmatched tubes give E_IDENTITY_MISMATCH", proc.returncode == 2 and err["error"]["code"] == "E_IDENTITY_MISMATCH")

    det = json.loads((a / "detections.json").read_text())
    det["tubes"][0]["point_indices"].append(10**9)
    bad = tmp / "bad_detections.json"
    bad.write_text(json.dumps(det))
    proc = run("estimate", "--scene", a / "scene.ply", "--detections", bad, "--rack", a / "rack-model.json",
               "--out", tmp / "x.json", expect=2)
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    check("out-of-range detections exit 2 with E_DETECTIONS_RANGE",
          proc.returncode == 2 and err["error"]["code"] == "E_DETECTIONS_RANGE")

    det = json.loads((a / "detections.json").read_text())
    det["tubes"] = []
    empty = tmp / "empty_detections.json"
    empty.write_text(json.dumps(det))
    out = tmp / "rack_only.json"
    proc = run("estimate", "--scene", a / "scene.ply", "--detections", empty, "--rack", a / "rack-model.json", "--out", out)
    check("empty tube list gives rack pose only",
          proc.returncode == 0 and json.loads(out.read_text())["tubes"] == [] and validate(out, "results"))

    proc = run("estimate", "--scene", tmp / "nope.ply", "--detections", a / "detections.json", "--rack",
               a / "rack-model.json", "--out", tmp / "x.json", expect=2)
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    check("missing scene is an input error", proc.returncode == 2 and err["error"]["code"] == "E_IO")

    (tmp / "broken.json").write_text("{ not json")
    proc = run("estimate", "--scene", a / "scene.ply", "--detections", tmp / "broken.json", "--rack",
               a / "rack-model.json", "--out", tmp / "x.json", expect=2)
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    check("malformed JSON gives E_PARSE", proc.returncode == 2 and err["error"]["code"] == "E_PARSE")

    cfg = json.loads(example.read_text())
    cfg["tubes"][0]["alpha"] = 0.6
    infeasible = tmp / "infeasible.json"
    infeasible.write_text(json.dumps(cfg))
    proc = run("synth", "--config", infeasible, "--out-dir", tmp / "inf", expect=2)
    err = json.loads(proc.stderr.strip().splitlines()[-1])
    check("infeasible config names the offending tube",
          err["error"]["code"] == "E_INFEASIBLE_CONFIG" and cfg["tubes"][0]["id"] in err["error"]["message"])

    cfg = json.loads(example.read_text())
    cfg["tubes"][1]["slot"] = cfg["tubes"][0]["slot"]
    dup = tmp / "dup.json"
    dup.write_text(json.dumps(cfg))
    proc = run("synth", "--config", dup, "--out-dir", tmp / "dup", expect=2)
    check("duplicate slots are rejected", proc.returncode == 2)

    full = tmp / "full"
    check("96 tubes on a 96-slot rack", run("synth", "--config", ROOT / "configs" / "full-rack-96.json",
                                             "--out-dir", full).returncode == 0)
    fgt = json.loads((full / "groundtruth.json").read_text())
    check("all 96 slots occupied", sorted(t["slot"] for t in fgt["tubes"]) == list(range(96)))

    bench = tmp / "bench.json"
    proc = run("bench", "--random-scenes", "10", "--tubes", "2", "--json", bench)
    b = json.loads(bench.read_text())
    check("bench validates", proc.returncode == 0 and validate(bench, "bench-report"))
    check("bench has two positive rows",
          len(b["rows"]) == 2 and all(r["mean_seconds"] > 0 and r["std_seconds"] > 0 for r in b["rows"]))
    check("bench header states detection is omitted", "omitted" in proc.stdout and "omitted" in b["note"])
    check("10 scenes are not low confidence", b["low_confidence"] is False)
    bench1 = tmp / "bench1.json"
    run("bench", "--config", example, "--repetitions", "1", "--json", bench1)
    check("single sample is flagged low confidence", json.loads(bench1.read_text())["low_confidence"] is True)

sys.exit(1 if failures else 0)
