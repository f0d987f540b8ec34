"""Command-line front end.

    reliance-lens analyze  study.csv [--group-by participant] [--bootstrap 1000] [--table]
    reliance-lens compare  study.csv --baseline control [--table]
    reliance-lens simulate --acc 0.7 --p-adhere-correct 1 --p-adhere-wrong 0 --n 10 --out sim.csv
    reliance-lens oracle   --n 10 --acc-numerator 7
    reliance-lens plot     study.csv --baseline control --out framework.svg

Exit codes: 0 on success, 2 on usage errors, 1 on data or domain errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Sequence

from loguru import logger
from rich.console import Console
from rich.table import Table

from reliance_lens.bootstrap import bootstrap_intervals
from reliance_lens.config import TOLERANCE, Palette, Settings, parse_palette_pairs
from reliance_lens.errors import AiAccuracyMismatch, ConfigError, IngestError, RelianceLensError, UnknownCondition
from reliance_lens.ingest import (
    DataFormat,
    Schema,
    TrialRecord,
    aggregate,
    aggregate_by_participant,
    dump_dataset,
    group_by_condition,
    has_participants,
    load_dataset,
)
from reliance_lens.plot import PlotPoint, PlotSpec, PointStyle, render
from reliance_lens.report import (
    ConditionReport,
    build_compare_report,
    build_condition_report,
    compare_table,
    reports_table,
    to_json,
)
from reliance_lens.simulate import (
    RNG_NAME,
    BehaviorModel,
    Composition,
    SimConfig,
    check_against_envelope,
    enumerate_attainable,
    expected_profile,
    simulate,
    simulate_replications,
)

EXIT_OK = 0
EXIT_DATA_ERROR = 1
EXIT_USAGE = 2


def _uint64(value: str) -> int:
    try:
        parsed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
    if not 0 <= parsed < 2**64:
        raise argparse.ArgumentTypeError(f"must be an unsigned 64-bit integer: {value}")
    return parsed


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", type=DataFormat, choices=list(DataFormat), help="Dataset format (default: from suffix)")
    common.add_argument("--schema", type=Schema, choices=list(Schema), default=Schema.derived, help="Dataset schema")
    common.add_argument("--labels", help="Two-value label alphabet for the raw schema, e.g. 0,1")
    common.add_argument("--out", type=Path, help="Write output here instead of stdout")
    common.add_argument("--seed", type=_uint64, default=0, help="Seed for simulation and bootstrap")
    common.add_argument("--tolerance", type=float, default=TOLERANCE, help="Tolerance on fractions")
    common.add_argument("--log-level", default="WARNING", help="Diagnostic log level (stderr)")

    parser = argparse.ArgumentParser(
        prog="reliance-lens", description="Reliance behavior and accuracy in AI-assisted binary decisions"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    analyze = sub.add_parser("analyze", parents=[common], help="Per-condition reliance report")
    analyze.add_argument("input", type=Path)
    analyze.add_argument("--group-by", choices=["participant"], help="Also macro-average per participant")
    analyze.add_argument("--bootstrap", type=int, default=0, metavar="N", help="Bootstrap replicates for intervals")
    analyze.add_argument("--level", type=float, default=0.95, help="Bootstrap confidence level")
    analyze.add_argument("--table", action="store_true", help="Print a human-readable table")

    compare = sub.add_parser("compare", parents=[common], help="Compare conditions against a baseline")
    compare.add_argument("input", type=Path)
    compare.add_argument("--baseline", required=True)
    compare.add_argument("--quantity-threshold", type=float, default=0.05)
    compare.add_argument("--quality-threshold", type=float, default=0.05)
    compare.add_argument("--table", action="store_true", help="Print a human-readable table")

    sim = sub.add_parser("simulate", parents=[common], help="Generate a synthetic derived-schema dataset")
    sim.add_argument("--acc", type=float, required=True, help="AI accuracy in (0.5, 1]")
    sim.add_argument("--p-adhere-correct", type=float, required=True)
    sim.add_argument("--p-adhere-wrong", type=float, required=True)
    sim.add_argument("--n", type=int, required=True, help="Number of trials")
    sim.add_argument("--composition", type=Composition, choices=list(Composition), default=Composition.fixed)
    sim.add_argument("--condition", default="sim", help="Condition id written to the dataset")
    sim.add_argument("--replications", type=int, default=1)

    oracle = sub.add_parser("oracle", parents=[common], help="Enumerate attainable accuracies at small n")
    oracle.add_argument("--n", type=int, required=True)
    oracle.add_argument("--acc-numerator", type=int, required=True)

    plot = sub.add_parser("plot", parents=[common], help="Render the framework with conditions as SVG")
    plot.add_argument("input", type=Path)
    plot.add_argument("--baseline")
    plot.add_argument("--palette", action="append", default=[], metavar="KEY=COLOR")

    return parser


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format="<level>{level: <8}</level> {message}")


def _settings(args: argparse.Namespace) -> Settings:
    palette = Palette.from_env().with_overrides(parse_palette_pairs(getattr(args, "palette", [])))
    return Settings(
        tolerance=args.tolerance,
        seed=args.seed,
        quantity_threshold=getattr(args, "quantity_threshold", 0.05),
        quality_threshold=getattr(args, "quality_threshold", 0.05),
        palette=palette,
    )


def _labels(args: argparse.Namespace) -> tuple[str, str] | None:
    if not args.labels:
        return None
    labels = tuple(label.strip() for label in args.labels.split(","))
    if len(labels) != 2 or len(set(labels)) != 2 or not all(labels):
        raise ConfigError(f"--labels needs exactly two distinct labels, got {args.labels!r}")
    return labels  # type: ignore[return-value]


def _load(args: argparse.Namespace) -> list[TrialRecord]:
    return load_dataset(args.input, args.format, args.schema, _labels(args))


def _emit(payload: str | bytes, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(payload.decode("utf-8") if isinstance(payload, bytes) else payload)
        sys.stdout.flush()
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(payload.encode("utf-8") if isinstance(payload, str) else payload)
    logger.success(f"Wrote {out}")


def _reports(
    records: list[TrialRecord], settings: Settings, group_by: str | None = None, bootstrap: int = 0, level: float = 0.95
) -> list[ConditionReport]:
    participants = None
    if has_participants(records):
        participants = aggregate_by_participant(records)
        if group_by is None:
            logger.warning(
                "Dataset has a participant column: headline metrics pool trials across participants; "
                "macro averages are reported under 'participants'"
            )
    elif group_by == "participant":
        raise IngestError("--group-by participant needs a participant column on every row")
    else:
        tagged = sum(r.participant is not None for r in records)
        if tagged:
            logger.warning(
                f"Only {tagged}/{len(records)} rows name a participant: pooling trials per condition "
                f"and skipping participant macro averages"
            )

    intervals = {}
    if bootstrap:
        intervals = bootstrap_intervals(group_by_condition(records), bootstrap, settings.seed, level, settings.tolerance)

    return [
        build_condition_report(
            agg,
            settings,
            participants=participants.get(agg.condition_id) if participants else None,
            intervals=intervals.get(agg.condition_id),
        )
        for agg in aggregate(records)
    ]


def cmd_analyze(args: argparse.Namespace, settings: Settings) -> int:
    reports = _reports(_load(args), settings, args.group_by, args.bootstrap, args.level)
    if args.table:
        Console().print(reports_table(reports))
        if args.out:
            _emit(to_json(reports), args.out)
    else:
        _emit(to_json(reports), args.out)
    logger.success(f"Analyzed {len(reports)} condition(s)")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace, settings: Settings) -> int:
    reports = _reports(_load(args), settings)
    comparison = build_compare_report(reports, args.baseline, settings)
    if args.table:
        Console().print(compare_table(comparison))
        if args.out:
            _emit(to_json(comparison), args.out)
    else:
        _emit(to_json(comparison), args.out)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: Settings) -> int:
    model = BehaviorModel(args.p_adhere_correct, args.p_adhere_wrong)
    config = SimConfig(
        acc=args.acc,
        model=model,
        n_trials=args.n,
        seed=settings.seed,
        composition=args.composition,
        condition_id=args.condition,
    )
    if args.replications > 1:
        records = [r for replica in simulate_replications(config, args.replications) for r in replica]
    else:
        records = simulate(config)

    fmt = args.format or (DataFormat.from_path(args.out) if args.out else DataFormat.csv)
    _emit(dump_dataset(records, fmt), args.out)

    expected = expected_profile(config.acc, model)
    table = Table(title=f"Expected profile ({RNG_NAME}, seed {settings.seed})")
    for column in ("a_correct", "a_wrong", "o_correct", "o_wrong", "A", "Acc_final"):
        table.add_column(column, justify="right")
    table.add_row(*(f"{v:.4f}" for v in (*expected.as_tuple(), expected.adherence, expected.final_accuracy)))
    Console(stderr=True).print(table)
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, settings: Settings) -> int:
    result = enumerate_attainable(args.n, args.acc_numerator)
    rows = check_against_envelope(result, settings.tolerance)
    n = result.n

    def pct(count: float) -> str:
        return f"{count * 100 / n:.4g}%"

    table = Table(title=f"Attainable accuracy, n={n}, Acc_AI={args.acc_numerator}/{n}")
    for column in ("k", "A", "attainable Acc_final", "min", "max", "envelope", "verdict"):
        table.add_column(column, justify="left" if column == "attainable Acc_final" else "right")
    for row in rows:
        table.add_row(
            str(row.k),
            pct(row.k),
            "{" + ", ".join(pct(m) for m in row.attainable) + "}",
            pct(row.lo),
            pct(row.hi),
            f"[{row.envelope_lo * 100:.4g}%, {row.envelope_hi * 100:.4g}%]",
            "[green]PASS[/]" if row.passed else "[red]FAIL[/]",
        )
    Console().print(table)

    if args.out:
        payload = {
            "n": n,
            "acc_numerator": result.acc_numerator,
            "rows": [
                {
                    "k": row.k,
                    "attainable": list(row.attainable),
                    "min": row.lo,
                    "max": row.hi,
                    "envelope": [round(row.envelope_lo, 9), round(row.envelope_hi, 9)],
                    "verdict": "PASS" if row.passed else "FAIL",
                }
                for row in rows
            ],
        }
        _emit(json.dumps(payload, indent=2) + "\n", args.out)

    failed = [row.k for row in rows if not row.passed]
    if failed:
        logger.error(f"Oracle disagrees with the analytic envelope at k={failed}")
        return EXIT_DATA_ERROR
    return EXIT_OK


def cmd_plot(args: argparse.Namespace, settings: Settings) -> int:
    reports = _reports(_load(args), settings)
    acc = reports[0].ai_accuracy
    for report in reports[1:]:
        if abs(report.ai_accuracy - acc) > settings.tolerance:
            raise AiAccuracyMismatch(acc, report.ai_accuracy, settings.tolerance)

    ids = [r.condition_id for r in reports]
    if args.baseline is not None and args.baseline not in ids:
        raise UnknownCondition(args.baseline, ids)

    points = [
        PlotPoint(
            r.condition_id,
            r.adherence,
            r.final_accuracy,
            PointStyle.baseline if r.condition_id == args.baseline else PointStyle.treatment,
        )
        for r in reports
    ]
    arrows = []
    if args.baseline is not None:
        start = ids.index(args.baseline)
        arrows = [(start, i) for i in range(len(ids)) if i != start]

    # Profiles built from counts always lie inside the region; render re-validates.
    svg = render(PlotSpec(acc=acc, points=points, arrows=arrows, palette=settings.palette, tol=settings.tolerance))
    _emit(svg, args.out)
    return EXIT_OK


COMMANDS: dict[str, Callable[[argparse.Namespace, Settings], int]] = {
    "analyze": cmd_analyze,
    "compare": cmd_compare,
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "plot": cmd_plot,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    _configure_logging(args.log_level)
    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings)
    except RelianceLensError as e:
        logger.error(str(e))
        return EXIT_DATA_ERROR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
