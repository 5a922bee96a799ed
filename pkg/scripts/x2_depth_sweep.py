"""Morse sets, Morse graph homology and persistent branches of x^2 over a depth range.

    python3 scripts/x2_depth_sweep.py --depths 3..8
"""
import argparse

from morse_persist.cli import parse_depths
from morse_persist.grid import Box
from morse_persist.pipeline import PipelineConfig, run_pipeline


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--map", default="x^2")
    ap.add_argument("--depths", default="3..8")
    args = ap.parse_args()
    lo, hi = parse_depths(args.depths)
    rep = run_pipeline(PipelineConfig("map", Box((0,), (1,)), lo, hi, map_text=args.map))

    print(f"{'depth':>5} {'sets':>5} {'edges':>6} {'H0':>3} {'H1':>3}")
    for lv in rep["levels"]:
        h = lv["homology"]
        print(f"{lv['depth']:>5} {len(lv['morse']['sets']):>5} {len(lv['morse']['order']):>6} {h['h0']:>3} {h['h1']:>3}")

    bars = rep["barcode"] or []
    for dim in (0, 1):
        full = sum(1 for b in bars if b["dim"] == dim and b["death"] is None)
        print(f"H{dim}: {sum(1 for b in bars if b['dim'] == dim)} bars, {full} never die")
    print("persistent Morse sets:", [p["cells"] for p in rep["persistent_morse_sets"] or []])


if __name__ == "__main__":
    main()
