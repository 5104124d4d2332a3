#!/usr/bin/env python3
"""Writes the two-island toy dataset under data/sample.

Four representative weeks stand for the four seasons of a year, 31 inflow
years, 3 wind years. Numbers are invented but NZ-shaped: hydro-heavy south,
thermal and geothermal north, one HVDC link.
"""
import csv
import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "data" / "sample"
WEEKS = 4
YEARS = 31
WIND_YEARS = 3


def write(name, header, rows):
    with open(OUT / name, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def main():
    rng = random.Random(2024)
    OUT.mkdir(parents=True, exist_ok=True)

    week_s = 3600 * 168
    write("reservoirs.csv", ["reservoir", "capacity_m3", "initial_m3", "minimum_m3"], [
        ["taupo", 400 * week_s, 200 * week_s, 0],
        ["manapouri", 1200 * week_s, 600 * week_s, 100 * week_s],
        ["onslow", 300 * week_s, 0, 0],
    ])
    write("hydro.csv", ["generator", "region", "capacity_mw", "specific_power", "spill_capacity",
                        "from_reservoir", "to_reservoir"], [
        ["waikato", "NI", 900, 3.0, 2000, "taupo", ""],
        ["manapouri", "SI", 850, 1.3, 5000, "manapouri", ""],
        ["onslow_pump", "SI", 700, -7.027, 0, "", "onslow"],
        ["onslow_gen", "SI", 540, 5.417, 0, "onslow", ""],
    ])
    write("peakers.csv", ["peaker", "region", "capacity_mw", "cost_per_mwh"], [
        ["huntly", "NI", 1000, 90],
        ["whirinaki", "NI", 300, 300],
        ["green_peaker", "NI", 0, 200],
    ])
    write("lines.csv", ["line", "from", "to", "capacity_mw"], [["hvdc", "SI", "NI", 1050]])
    write("fixed_generation.csv", ["region", "generation_mw"], [["NI", 700]])

    season = [1.05, 1.0, 0.92, 0.98]  # winter peak in week 2 of the cycle
    demand = []
    for w in range(WEEKS):
        for h in range(168):
            daily = 1.0 + 0.18 * math.sin(2 * math.pi * (h % 24 - 7) / 24)
            weekend = 0.9 if h >= 120 else 1.0
            demand.append([w + 1, h + 1, round(2300 * season[w] * daily * weekend, 3),
                           round(1150 * season[w] * daily * weekend, 3)])
    write("demand.csv", ["week", "hour", "NI", "SI"], demand)

    inflows = []
    taupo_mean = [140, 170, 160, 120]
    mana_mean = [420, 380, 470, 520]
    for y in range(YEARS):
        wet = rng.lognormvariate(0, 0.25)
        for w in range(WEEKS):
            inflows.append([y + 1, w + 1, round(taupo_mean[w] * wet * rng.uniform(0.7, 1.3), 3),
                            round(mana_mean[w] * wet * rng.uniform(0.6, 1.4), 3), 0])
    write("inflows.csv", ["year", "week", "taupo", "manapouri", "onslow"], inflows)

    write("shares.csv", ["region", "share", "node"], [["wind_ni", 0.6, "NI"], ["wind_si", 0.4, "SI"]])
    wind = []
    for y in range(WIND_YEARS):
        for w in range(WEEKS):
            a, b = rng.uniform(0.2, 0.6), rng.uniform(0.2, 0.6)
            for h in range(168):
                a = min(1.0, max(0.0, a + rng.gauss(0, 0.06)))
                b = min(1.0, max(0.0, 0.5 * b + 0.5 * a + rng.gauss(0, 0.06)))
                wind.append([y + 1, w + 1, h + 1, round(a, 4), round(b, 4)])
    write("wind.csv", ["year", "week", "hour", "wind_ni", "wind_si"], wind)

    config = {
        "data": {
            "reservoirs": "reservoirs.csv",
            "hydro": "hydro.csv",
            "peakers": "peakers.csv",
            "lines": "lines.csv",
            "fixed_generation": "fixed_generation.csv",
            "demand": "demand.csv",
            "inflows": "inflows.csv",
            "wind": "wind.csv",
            "shares": "shares.csv",
        },
        "nodes": ["NI", "SI"],
        "annual_discount": 0.9,
        "stages_per_year": 4,
        "blocks": {"hours": [24, 60, 84]},
        "shedding": [
            {"name": "voluntary", "fraction": 0.05, "cost": 1000},
            {"name": "involuntary", "fraction": 0.95, "cost": 10000},
        ],
        "pump_pairs": [{"pump": "onslow_pump", "generator": "onslow_gen"}],
        "wind": {"grid_mw": {"min": 1000, "max": 5000, "points": 5}, "nominal_mw": 2500},
        "investment": {
            "candidates": [
                {"name": "wind", "kind": "wind-national",
                 "lcoe": {"lcoe": 65, "capacity_factor": 0.355}, "lifetime": 20},
                {"name": "green", "kind": "peaker", "target": "green_peaker", "overnight_cost": 600000},
                {"name": "hvdc_upgrade", "kind": "transmission-line", "target": "hvdc",
                 "overnight_cost": 900000, "upper_bound": 1000},
            ]
        },
        "enumeration": {"wind": [0, 500, 1000], "green": [0, 250]},
        "training": {"iterations": 60, "seed": 1, "eval_cadence": 10, "threads": 1},
        "simulation": {"mode": "historical", "cycles": 1, "seed": 1},
    }
    with open(OUT / "config.json", "w") as f:
        json.dump(config, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
