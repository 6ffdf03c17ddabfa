#!/usr/bin/env python3
# Copyright 2026 The TVAPF Planner Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Recompute summary.json from runlog.csv and instances.json.

Usage: check_summary.py OUT_DIR RESOLVED_SCENARIO_JSON

The resolved scenario is the output of `tvapf run --dry-run`.
"""

import csv
import json
import math
import sys

# runlog.csv prints 9 significant digits.
REL_TOL = 1e-6
ABS_TOL = 1e-6


def close(a, b, abs_tol=ABS_TOL):
    return math.isclose(a, b, rel_tol=REL_TOL, abs_tol=abs_tol)


def recompute(rows, instances, sc):
    L = sc["tracker"]["wheelbase"]
    dt = sc["sim"]["plant_step"]
    width = sc["path"]["lane_width"]
    right_edge = -0.5 * sc["path"]["lane_count"] * width
    lane0 = right_edge + 0.5 * width
    boundary = right_edge + width
    period = sc["planner"]["instance_period"]
    v_des = sc["ego"]["v_des"]
    limits = sorted(sc["path"]["speed_limit"])

    def v_bar(s):
        v = limits[0][1]
        for start, value in limits:
            if s >= start:
                v = value
        return min(v_des, v)

    out = {}
    v = [r["v"] for r in rows]
    yaw = [r["v"] * math.tan(r["delta"]) / L for r in rows]
    out["max_abs_a_lon"] = max(abs(r["a"]) for r in rows)
    # Jerk amplifies the CSV rounding by 1/dt.
    out["max_abs_jerk"] = max(abs(rows[i]["a"] - rows[i - 1]["a"]) / dt for i in range(1, len(rows)))
    out["max_abs_yaw_rate_deg"] = max(abs(w) for w in yaw) * 180.0 / math.pi
    out["max_abs_delta_deg"] = max(abs(r["delta"]) for r in rows) * 180.0 / math.pi
    out["max_abs_a_lat"] = max(abs(vi * w) for vi, w in zip(v, yaw))

    ids = sorted({k[:-2] for k in rows[0] if k.endswith("_x") and k not in ("ref_x", "err_x")})
    gap = math.inf
    for r in rows:
        for a in ids:
            ax, ay = r[a + "_x"], r[a + "_y"]
            if not math.isnan(ax):
                gap = min(gap, math.hypot(ax - r["x"], ay - r["y"]))
    out["min_actor_gap"] = gap

    ticks = [r for r in rows if r["tick"] == 1]
    out["tracking.ticks"] = len(ticks)
    out["tracking.max_abs_err_x"] = max(abs(r["x"] - r["ref_x"]) for r in ticks)
    out["tracking.max_abs_err_y"] = max(abs(r["y"] - r["ref_y"]) for r in ticks)
    sigma_zero = sc["tracker"]["sigma_zero"]
    out["tracking.sigma_zero_fraction"] = sum(r["sigma"] <= sigma_zero for r in ticks) / len(ticks)
    out["tracking.not_ok_ticks"] = sum(r["tracker_status"] != 0 for r in ticks)

    timeline = [{"t": i["t"], "label": i["label"]} for i in instances]
    out["decision_timeline"] = timeline
    first = next((i["t"] for i in instances if i["label"] == "Overtake"), -1.0)
    out["first_overtake"] = first
    out["safe_stops"] = sum(1 for i in instances if i["fallback"])
    solves = [i["stats"]["wall_time"] for i in instances]
    out["solve_time.instances"] = len(solves)
    out["solve_time.mean"] = sum(solves) / len(solves)
    out["solve_time.max"] = max(solves)

    dip_end = first + period if first >= 0 else rows[-1]["time"]
    window = [r for r in rows if r["time"] <= dip_end]
    peak = max(range(len(window)), key=lambda i: (window[i]["v"], -i))
    low = min(range(peak, len(window)), key=lambda i: (window[i]["v"], i))
    out["min_speed"] = window[low]["v"]
    out["min_speed_time"] = window[low]["time"]

    ret = -1.0
    if first >= 0:
        crossed = False
        for r in rows:
            if r["time"] < first:
                continue
            if not crossed:
                crossed = r["d"] > boundary
                continue
            if abs(r["d"] - lane0) <= 0.3 and abs(r["v"] - v_bar(r["s"])) <= 0.5:
                ret = r["time"]
                break
    out["return_time"] = ret
    return out


def lookup(summary, key):
    node = summary
    for part in key.split("."):
        node = node[part]
    return node


def main(argv):
    if len(argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    out_dir, resolved = argv[1], argv[2]
    with open(f"{out_dir}/runlog.csv", newline="") as f:
        rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(f)]
    with open(f"{out_dir}/instances.json") as f:
        instances = json.load(f)
    with open(f"{out_dir}/summary.json") as f:
        summary = json.load(f)
    with open(resolved) as f:
        sc = json.load(f)

    failures = 0
    for key, expected in recompute(rows, instances, sc).items():
        reported = lookup(summary, key)
        if isinstance(expected, list):
            ok = expected == reported
        elif key == "max_abs_jerk":
            ok = close(reported, expected, abs_tol=1e-6 / sc["sim"]["plant_step"])
        elif key == "min_actor_gap" and math.isinf(expected):
            ok = reported is None or math.isinf(reported)
        else:
            ok = close(reported, expected)
        if not ok:
            failures += 1
            print(f"MISMATCH {key}: summary {reported} recomputed {expected}")
    print(f"{'OK' if failures == 0 else 'FAILED'}: {failures} mismatches")
    return 0 if failures == 0 else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv))
