#!/usr/bin/env python3
"""Writes configs/reference.json: 12 datacenters in four regions, 1000 nodes
each over six A100/H100 node types, and 96 fifteen-minute series per site."""

import json
import math
import random
from pathlib import Path

GB = 1_000_000_000
MB = 1_000_000
EPOCHS = 96

MODELS = [
    {"model_id": "llama-7b", "param_count": 7_000_000_000, "bytes_per_param": 2, "kv_bytes_per_token": MB // 2},
    {"model_id": "llama-70b", "param_count": 70_000_000_000, "bytes_per_param": 2, "kv_bytes_per_token": 5 * MB // 2},
]

# type id, gpus, GB per gpu, node TDP W, load bandwidth GB/s, tok/s 7b, tok/s 70b
NODE_TYPES = [
    ("a100-40-x2", 2, 40, 1100.0, 16.0, 1800.0, 250.0),
    ("a100-80-x2", 2, 80, 1150.0, 16.0, 1900.0, 280.0),
    ("a100-80-x4", 4, 80, 2100.0, 24.0, 3600.0, 520.0),
    ("a100-80-x8", 8, 80, 4000.0, 32.0, 6800.0, 1000.0),
    ("h100-80-x4", 4, 80, 3400.0, 48.0, 7200.0, 1100.0),
    ("h100-80-x8", 8, 80, 6500.0, 64.0, 13500.0, 2100.0),
]

# location, region, UTC offset h, CI base kg/kWh, TOU base $/kWh, WI base L/kWh, solar share, CoP, D
SITES = [
    ("tokyo", "east-asia", 9, 0.46, 0.21, 1.8, 0.25, 4.2, 0.25),
    ("seoul", "east-asia", 9, 0.42, 0.11, 2.1, 0.20, 3.8, 0.30),
    ("singapore", "east-asia", 8, 0.41, 0.19, 2.6, 0.10, 3.1, 0.35),
    ("sydney", "oceania", 10, 0.68, 0.17, 2.9, 0.35, 4.0, 0.22),
    ("melbourne", "oceania", 10, 0.74, 0.15, 2.4, 0.30, 4.6, 0.24),
    ("auckland", "oceania", 12, 0.10, 0.14, 4.8, 0.10, 5.2, 0.20),
    ("virginia", "north-america", -5, 0.34, 0.09, 2.2, 0.15, 3.9, 0.28),
    ("oregon", "north-america", -8, 0.12, 0.07, 5.5, 0.20, 5.6, 0.21),
    ("texas", "north-america", -6, 0.39, 0.08, 1.6, 0.40, 3.3, 0.33),
    ("dublin", "western-europe", 0, 0.29, 0.24, 1.2, 0.10, 5.9, 0.20),
    ("frankfurt", "western-europe", 1, 0.35, 0.27, 1.7, 0.30, 4.4, 0.26),
    ("stockholm", "western-europe", 1, 0.03, 0.12, 6.0, 0.05, 5.8, 0.23),
]

REGIONS = ["east-asia", "oceania", "north-america", "western-europe"]

# Inter-region hop distances; three hops inside a region.
REGION_HOPS = {
    ("east-asia", "oceania"): 8,
    ("east-asia", "north-america"): 12,
    ("east-asia", "western-europe"): 14,
    ("oceania", "north-america"): 13,
    ("oceania", "western-europe"): 16,
    ("north-america", "western-europe"): 9,
}


def region_hops(a, b):
    if a == b:
        return 3
    return REGION_HOPS.get((a, b)) or REGION_HOPS[(b, a)]


def local_hour(epoch, utc_offset):
    return (epoch * 0.25 + utc_offset) % 24.0


def series(site, rng):
    _, _, off, ci0, tou0, wi0, solar, _, _ = site
    ci, tou, wi = [], [], []
    for e in range(EPOCHS):
        h = local_hour(e, off)
        sun = max(0.0, math.sin(math.pi * (h - 6.0) / 12.0)) if 6.0 <= h <= 18.0 else 0.0
        evening = math.exp(-((h - 19.0) ** 2) / 8.0)
        ci.append(round(ci0 * (1.0 - solar * sun + 0.15 * evening) * rng.uniform(0.97, 1.03), 5))
        peak = 1.0 + 0.6 * math.exp(-((h - 18.0) ** 2) / 10.0) + 0.2 * sun
        offpeak = 0.75 if h < 6.0 or h >= 23.0 else 1.0
        tou.append(round(tou0 * peak * offpeak, 5))
        wi.append(round(wi0 * (1.0 - 0.5 * solar * sun) * rng.uniform(0.95, 1.05), 5))
    return ci, tou, wi


def node_counts():
    # 1000 is not divisible by six: the first four types get 167 nodes.
    counts = {}
    for i, t in enumerate(NODE_TYPES):
        counts[t[0]] = 167 if i < 4 else 166
    assert sum(counts.values()) == 1000
    return counts


def main():
    rng = random.Random(20240601)
    node_types = [
        {
            "type_id": tid,
            "gpu_count": g,
            "gpu_mem_each": mem * GB,
            "tdp": tdp,
            "load_bandwidth": bw * GB,
            "throughput": {"llama-7b": t7, "llama-70b": t70},
        }
        for tid, g, mem, tdp, bw, t7, t70 in NODE_TYPES
    ]
    datacenters = []
    for site in SITES:
        ci, tou, wi = series(site, rng)
        datacenters.append(
            {
                "location_id": site[0],
                "region": site[1],
                "node_counts": node_counts(),
                "cop": site[7],
                "tou_series": tou,
                "ci_series": ci,
                "wi_series": wi,
                "blowdown_ratio": site[8],
                "ei_potable": 0.005,
                "ei_waste": 0.002,
            }
        )
    hop_matrix = [
        [0 if i == j else region_hops(a[1], b[1]) + abs(i - j) % 3 for j, b in enumerate(SITES)]
        for i, a in enumerate(SITES)
    ]
    hop_matrix = [[max(hop_matrix[i][j], hop_matrix[j][i]) for j in range(len(SITES))] for i in range(len(SITES))]
    origin_hops = {
        r: [region_hops(r, s[1]) - 2 + k % 3 if r == s[1] else region_hops(r, s[1]) + 1 for k, s in enumerate(SITES)]
        for r in REGIONS
    }
    config = {
        "models": MODELS,
        "node_types": node_types,
        "datacenters": datacenters,
        "topology": {"hop_matrix": hop_matrix, "media_latency": 0.01, "origin_hops": origin_hops},
        "power_ratios": {"on": 1.0, "idle": 0.3, "off": 0.0},
        "trace_gen": {"epochs": EPOCHS, "epoch_length_s": 900.0},
        "optimizer": {"gen": 30, "time_budget": 900.0, "seed": 0},
        "constants": {"h_water": 2.26, "idle_epochs_to_off": 1},
    }
    out = Path(__file__).resolve().parent.parent / "configs" / "reference.json"
    out.write_text(json.dumps(config, indent=1) + "\n")


if __name__ == "__main__":
    main()
