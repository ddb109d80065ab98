"""Command-line driver for the clustering pipeline."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .pipeline import PipelineConfig, StageError, compare_variants, run_pipeline


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tmfgclust",
        description="TMFG construction and DBHT hierarchical clustering",
    )
    p.add_argument("--input", required=True, help="input file path")
    p.add_argument("--format", choices=["ucr", "matrix"], default="ucr",
                   help="input format: UCR text rows or a similarity matrix")
    p.add_argument("--variant", choices=["exact", "corr", "heap"], default="heap")
    p.add_argument("--prefix", type=int, default=1, metavar="P",
                   help="vertices inserted per round (exact/corr builders)")
    p.add_argument("--apsp", choices=["exact", "hub"], default="exact")
    p.add_argument("--hubs", type=int, default=None, metavar="H",
                   help="hub count for --apsp hub (default: ceil(sqrt(n)))")
    p.add_argument("--radius-factor", type=float, default=None, metavar="C",
                   help="truncated-search radius factor for --apsp hub")
    p.add_argument("--k", type=int, default=None,
                   help="cluster count for the flat cut (default: ground-truth classes)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker count (default: TMFGCLUST_WORKERS or cpu count)")
    p.add_argument("--out", default=None, metavar="DIR",
                   help="directory for dendrogram.txt, labels.txt and the report")
    p.add_argument("--report", choices=["json", "text"], default="json")
    p.add_argument("--compare", default=None, metavar="V1,V2,...",
                   help="run several variants (e.g. 'exact:1,heap') and compare edge sums")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = PipelineConfig(
            input_path=args.input,
            input_format=args.format,
            variant=args.variant,
            prefix_size=args.prefix,
            apsp_mode=args.apsp,
            hub_count=args.hubs,
            radius_factor=args.radius_factor,
            k=args.k,
            workers=args.workers,
            out_dir=args.out,
            report_format=args.report,
        )
        if args.compare:
            rows = compare_variants(config, args.compare.split(","))
            print(f"{'variant':<12} {'edge_sum':>14} {'delta_vs_exact1%':>17} "
                  f"{'ari':>8} {'total_s':>9}")
            for row in rows:
                rep = row["report"]
                ari = f"{rep.ari:.4f}" if rep.ari is not None else "-"
                print(f"{row['variant']:<12} {rep.edge_sum:>14.4f} "
                      f"{row['edge_sum_delta']:>17.4f} {ari:>8} {rep.total_seconds:>9.3f}")
            if args.out:
                out = Path(args.out)
                out.mkdir(parents=True, exist_ok=True)
                payload = [{"variant": r["variant"],
                            "edge_sum_delta": r["edge_sum_delta"],
                            "report": r["report"].to_dict()} for r in rows]
                (out / "comparison.json").write_text(json.dumps(payload, indent=2,
                                                                sort_keys=True) + "\n")
        else:
            report = run_pipeline(config)
            sys.stdout.write(report.to_json() if args.report == "json"
                             else report.to_text())
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
