"""Command-line entry point.

One subcommand per experiment plus `export`.  Every flag mirrors one field
of the flat JSON configuration (pass --config to load one; explicit flags
override it).  The default output directory comes from $CIRCLAW_OUT.

Exit codes: 0 on success, 1 when any asserted invariant failed during the
run, 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import (DEFAULT_OUT_ENV, EXPERIMENTS, ExperimentConfig,
                          RunResult, UsageError, export_figure1, run)
from .records import ResultStore

_UNSET = object()


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="flat JSON config; explicit flags override its fields")
    p.add_argument("--n", type=int, default=_UNSET)
    p.add_argument("--s", type=int, default=_UNSET)
    p.add_argument("--trials", type=int, default=_UNSET)
    p.add_argument("--seed", type=int, default=_UNSET)
    p.add_argument("--model", default=_UNSET,
                   help="row model: fixed | union | iid (smallball adds 'relation')")
    p.add_argument("--z", default=_UNSET, help="complex shift, e.g. '1+0.5j'")
    p.add_argument("--beta", default=_UNSET, help="radius as an exact fraction, e.g. '1/10'")
    p.add_argument("--a-exponent", dest="a_exponents", default=_UNSET,
                   help="comma ladder of exponents, e.g. '0.5,1,2'")
    p.add_argument("--t-ladder", dest="t_ladder", default=_UNSET,
                   help="comma ladder of tail thresholds, e.g. '3,4,5'")
    p.add_argument("--m-split", dest="m_split", type=int, default=_UNSET)
    p.add_argument("--n0", type=int, default=_UNSET)
    p.add_argument("--k", type=int, default=_UNSET)
    p.add_argument("--grid", type=int, default=_UNSET)
    p.add_argument("--samples", type=int, default=_UNSET)
    p.add_argument("--v", default=_UNSET,
                   help="multiset: '1,2,3' or planar '1,0;0,1'")
    p.add_argument("--delta", default=_UNSET)
    p.add_argument("--gap-file", dest="gap_file", default=_UNSET)
    p.add_argument("--out", default=_UNSET,
                   help=f"output directory (default ${DEFAULT_OUT_ENV})")
    p.add_argument("--workers", type=int, default=_UNSET)
    p.add_argument("--no-figures", dest="figures", action="store_const",
                   const=False, default=_UNSET)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="circlaw",
        description="experiments on random sign matrices with fixed row sums")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        _add_common(sp)
    ex = sub.add_parser("export", help="export eigenvalue CSVs from records")
    ex.add_argument("--records", required=True,
                    help="records.ndjson file or the directory holding it")
    ex.add_argument("--out", default=None)
    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        loaded = json.loads(Path(args.config).read_text())
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold one flat JSON object")
        data.update(loaded)
    for name in ("n", "s", "trials", "seed", "model", "z", "beta",
                 "a_exponents", "t_ladder", "m_split", "n0", "k", "grid",
                 "samples", "v", "delta", "gap_file", "out", "workers",
                 "figures"):
        val = getattr(args, name, _UNSET)
        if val is not _UNSET:
            data[name] = val
    for name in ("a_exponents", "t_ladder"):
        if isinstance(data.get(name), str):
            data[name] = tuple(float(x) for x in data[name].split(","))
    data["experiment"] = args.command
    return ExperimentConfig.from_dict(data)


def _print_summary(result: RunResult) -> None:
    print(f"records: {result.store_path}")
    width = max((len(k) for k in result.summary), default=0)
    for key, val in result.summary.items():
        print(f"  {key:<{width}} : {val}")
    print(f"invariants: {'ok' if result.ok else 'FAILED'}")


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "export":
            path = Path(args.records)
            store_path = path / "records.ndjson" if path.is_dir() else path
            if not store_path.exists():
                raise UsageError(f"no records at {store_path}")
            records = ResultStore(store_path).read_all()
            out = Path(args.out) if args.out else store_path.parent
            paths = export_figure1(records, out)
            for p in paths:
                print(p)
            return 0
        cfg = _config_from_args(args)
        result = run(cfg)
        _print_summary(result)
        return 0 if result.ok else 1
    except UsageError as exc:
        parser.error(str(exc))
        return 2  # pragma: no cover - parser.error raises SystemExit
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
