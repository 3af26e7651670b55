#!/usr/bin/env python3
"""Writes the satellite attitude control system models (independent and
dependent variants) to models/case2_*.json."""

import argparse
import json
from pathlib import Path

LAWS = {
    "A": {"type": "exponential", "rate": 1.36e-5},
    "B": {"type": "exponential", "rate": 1.03e-5},
    "C": {"type": "weibull", "shape": 6.02, "scale": 9.51e4},
    "D": {"type": "weibull", "shape": 5.03, "scale": 8.49e4},
    "E": {"type": "exponential", "rate": 1.11e-5},
    "F": {"type": "weibull", "shape": 7.11, "scale": 8.75e4},
    "G": {"type": "weibull", "shape": 6.93, "scale": 8.39e4},
    "H": {"type": "weibull", "shape": 6.17, "scale": 8.62e4},
}

FACTORS = {"H1": 0.13, "H2": 0.21, "H3": 0.16}


def build(dependent: bool) -> dict:
    nodes, marginals, rules = [], {}, {}

    def node(name, states):
        nodes.append({"name": name, "states": states})

    def component(name, law):
        node(name, 2)
        marginals[name] = {"law": law}

    # roots 1-58, in the numbering of the system figure
    parts = []
    for i in (1, 2):
        parts.append((f"star_sensor_{i}", [f"ss{i}_c{k}" for k in range(1, 5)], "AAAA"))
    for i in (1, 2, 3):
        parts.append((f"leveling_{i}", [f"li{i}_hs1_basic", f"li{i}_hs1_opt", f"li{i}_hs2_basic",
                                        f"li{i}_hs2_opt"], "BBCC"))
    for i in (1, 2, 3, 4):
        parts.append((f"sun_{i}", [f"sun{i}_cs1_basic", f"sun{i}_cs1_opt", f"sun{i}_cs2_basic",
                                   f"sun{i}_cs2_opt"], "DDEE"))
    for i in (1, 2, 3):
        parts.append((f"bearing_{i}", [f"bf{i}_c1", f"bf{i}_c2", f"bf{i}_hs3_basic",
                                       f"bf{i}_hs3_opt"], "FFGG"))
    for i in (1, 2, 3):
        parts.append((f"trestle1_{i}", [f"t1_{i}_c3", f"t1_{i}_c4"], "HH"))
    for i in (1, 2):
        parts.append((f"trestle2_{i}", [f"t2_{i}_c3", f"t2_{i}_c4"], "HH"))
    for _, comps, laws in parts:
        for c, law in zip(comps, laws):
            component(c, law)

    if dependent:
        for f, p in FACTORS.items():
            node(f, 2)
            marginals[f] = [1.0 - p, p]

    single = {
        "star_sensor": (2, "single_star_sensor"),
        "leveling": (4, "single_leveling_instrument"),
        "sun": (4, "single_sun_sensor"),
        "bearing": (4, "single_bearing_frame"),
        "trestle1": (3, "single_trestle_1"),
        "trestle2": (3, "single_trestle_2"),
    }
    for name, comps, _ in parts:
        kind = name.rsplit("_", 1)[0]
        states, builder = single[kind]
        node(name, states)
        parents = list(comps)
        if dependent and kind == "star_sensor":
            builder, parents = "single_star_sensor_ccf", ["H1"] + parents
        if dependent and kind == "trestle1":
            builder, parents = "single_trestle_1_ccf", ["H2", "H3"] + parents
        rules[name] = {"parents": parents, "builder": builder}

    def unit(name, states, builder, parents):
        node(name, states)
        rules[name] = {"parents": parents, "builder": builder}

    unit("star_sensor", 2, "star_sensor", ["star_sensor_1", "star_sensor_2"])
    unit("leveling_instrument", 4, "leveling_instrument", [f"leveling_{i}" for i in (1, 2, 3)])
    unit("sun_sensor", 4, "sun_sensor", [f"sun_{i}" for i in (1, 2, 3, 4)])
    unit("bearing_frame", 4, "bearing_frame", [f"bearing_{i}" for i in (1, 2, 3)])
    unit("trestle_1", 3, "trestle_1", [f"trestle1_{i}" for i in (1, 2, 3)])
    unit("trestle_2", 3, "trestle_2", ["trestle2_1", "trestle2_2"])
    unit("star_sensitive_horizon", 3, "star_sensitive_horizon", ["star_sensor", "leveling_instrument"])
    unit("attitude_sensor", 4, "attitude_sensor", ["star_sensitive_horizon", "sun_sensor"])
    unit("structure", 4, "structure", ["bearing_frame", "trestle_1", "trestle_2"])
    unit("attitude_control_system", 4, "attitude_control_system", ["attitude_sensor", "structure"])

    model = {
        "nodes": nodes,
        "laws": LAWS,
        "marginals": marginals,
        "rules": rules,
        "time_grid": {"t0": 0.0, "dt": 100.0, "steps": 1201},
        "reliability": {"min_state": 3},
    }
    if dependent:
        model["common_cause"] = [
            {"factor": "H1", "affected": ["star_sensor_1", "star_sensor_2"]},
            {"factor": "H2", "affected": ["trestle1_1", "trestle1_2", "trestle1_3"]},
            {"factor": "H3", "affected": ["trestle1_1", "trestle1_2", "trestle1_3"]},
        ]
    return model


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=Path(__file__).resolve().parent.parent / "models")
    args = ap.parse_args()
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for variant, dep in (("independent", False), ("dependent", True)):
        path = args.out_dir / f"case2_{variant}.json"
        path.write_text(json.dumps(build(dep), indent=1) + "\n")
        print(path)


if __name__ == "__main__":
    main()
