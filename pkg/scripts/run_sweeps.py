"""Write plot-ready CSV/JSON for every sweep config in scripts/configs.

    python3 scripts/run_sweeps.py [--out results] [--quick] [-j N]

``--quick`` cuts MC trials by 10x for a smoke run.
"""
import argparse
import dataclasses
from pathlib import Path

from irsnoma import cli

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("-j", "--workers", type=int)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for cfg_path in sorted((HERE / "configs").glob("*.ini")):
        cfg = cli.load_config(cfg_path)
        spec = cfg.sweep
        if args.quick and spec.mc is not None:
            spec = dataclasses.replace(spec, mc=dataclasses.replace(spec.mc, trials=max(1000, spec.mc.trials // 10)))
        rows = cli.run_sweep(spec, cfg.params, args.workers)
        stem = out / cfg_path.stem
        stem.with_suffix(".csv").write_text(cli.rows_to_csv(rows))
        stem.with_suffix(".json").write_text(cli.rows_to_json(rows))
        print(f"{cfg_path.name}: {len(rows)} rows -> {stem}.csv")


if __name__ == "__main__":
    main()
