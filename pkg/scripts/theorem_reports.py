#!/usr/bin/env python3
"""Run the theorem-a and theorem-b desk checks on every config in a directory."""
import argparse
from pathlib import Path

from horseshoe_lab.cli import run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default="configs")
    ap.add_argument("--output-dir", default="out/reports")
    args = ap.parse_args()
    status = 0
    for cfg in sorted(Path(args.configs).glob("*.json")):
        for cmd in ("theorem-a", "theorem-b"):
            code = run([cmd, str(cfg), "--output-dir", str(Path(args.output_dir) / cfg.stem), "--quiet"])
            print(f"{cfg.stem:16s} {cmd:10s} exit {code}")
            status = max(status, code)
    raise SystemExit(status)


if __name__ == "__main__":
    main()
