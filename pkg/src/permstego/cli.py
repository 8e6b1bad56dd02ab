"""Command-line surface: embed, extract, analyze, experiment.

Subcommands
-----------
embed      --host H --msg M --kappa K --out Y [--key PASS] [--seq uniform|lsb]
           [--format i32|txt] [--msg-bits N]
extract    --host Y --kappa K [--key PASS] [--seq ...] [--out M] [--format ...]
analyze    --host H [--kappa K] [--seq ...] [--format ...]
experiment fig2|fig3|lsb [--n N] [--seed S] [--grid SPEC] [--out CSV] [--jobs J]

The stego container is just the permuted host in the host's own file format;
kappa, the partitioning sequence, and the key are the shared configuration,
so extraction is blind (the selector recomputes the encoder's partitioning
from the stego histogram).  --kappa takes a linear ratio or decibels with a
'db' suffix ("100" or "20db").  Keys are derived from the passphrase as in
permstego.coder.derive_key.  Exit codes: 0 ok, 1 I/O error, 2 capacity
exceeded, 3 infeasible constraint.

CSV conventions: comma separated, '.' decimal point, 12 significant digits,
header row, empty cell for not-applicable.  `analyze` emits one MetricsReport
row with the column order of permstego.analysis.REPORT_COLUMNS; `embed`
prints a stats line with columns capacity_bits,rho_emp,p_star,xi_emp,nu_emp.
Experiment CSVs use permstego.experiments.FIG2_COLUMNS / FIG3_COLUMNS.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .host import HostError, Message, capacity_bits, compute_histogram, load_host, save_host
from .coder import CapacityError, derive_key
from .partition import support_induced, partitioned_decode, partitioned_encode
from .analysis import REPORT_COLUMNS, compute_metrics, empirical_metrics, format_value, report_csv_row
from .selector import InfeasibleConstraintError, SelectionConstraint, select_partitioning
from .experiments import ExperimentConfig, rows_to_csv, run_experiment

EXIT_OK = 0
EXIT_IO = 1
EXIT_CAPACITY = 2
EXIT_INFEASIBLE = 3


def parse_kappa(text: str) -> float:
    text = text.strip().lower()
    if text.endswith("db"):
        return 10.0 ** (float(text[:-2]) / 10.0)
    return float(text)


def parse_grid(text: str | None):
    """Grid spec: comma list ("0.1,0.5,0.9") or start:stop:step range."""
    if text is None:
        return None
    if ":" in text:
        start, stop, step = (float(tok) for tok in text.split(":"))
        count = int(round((stop - start) / step)) + 1
        vals = [start + k * step for k in range(count)]
        return [round(v, 12) for v in vals if v <= stop + 1e-12]
    vals = [float(tok) for tok in text.split(",") if tok.strip()]
    return vals


def _key_for(args, q: int):
    if getattr(args, "key", None):
        return derive_key(args.key, q, t=args.key_length)
    return None


def cmd_embed(args) -> int:
    host = load_host(args.host, fmt=args.format)
    data = Path(args.msg).read_bytes()
    nbits = args.msg_bits if args.msg_bits is not None else 8 * len(data)
    message = Message.from_bytes(data, nbits=nbits)
    constraint = SelectionConstraint(parse_kappa(args.kappa), sequence=args.seq)
    sel = select_partitioning(host, constraint)
    x = host.samples
    part = support_induced(sel.partitioning, x)
    key = _key_for(args, sel.report.q)
    hist = compute_histogram(x)
    capacity = sum(capacity_bits(hist.counts[g]) for g in sel.partitioning.groups)
    try:
        y = partitioned_encode(x, part, message, key=key)
    except CapacityError:
        print(
            f"capacity exceeded: message is {nbits} bits, available capacity is {capacity} bits",
            file=sys.stderr,
        )
        return EXIT_CAPACITY
    save_host(args.out, y, fmt=args.format)
    emp = empirical_metrics(x, y, sel.report.rho_emp, value_bits=host.value_bits)
    print("capacity_bits,rho_emp,p_star,xi_emp,nu_emp")
    print(
        ",".join(
            [
                str(capacity),
                format_value(sel.report.rho_emp),
                str(sel.p_star),
                format_value(emp.xi_emp),
                format_value(emp.nu_emp),
            ]
        )
    )
    return EXIT_OK


def cmd_extract(args) -> int:
    stego = load_host(args.host, fmt=args.format)
    constraint = SelectionConstraint(parse_kappa(args.kappa), sequence=args.seq)
    sel = select_partitioning(stego, constraint)
    part = support_induced(sel.partitioning, stego.samples)
    key = _key_for(args, sel.report.q)
    message = partitioned_decode(stego.samples, part, key=key)
    payload = message.to_bytes()
    if args.out:
        Path(args.out).write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
    return EXIT_OK


def cmd_analyze(args) -> int:
    host = load_host(args.host, fmt=args.format)
    if args.kappa is not None:
        constraint = SelectionConstraint(parse_kappa(args.kappa), sequence=args.seq)
        sel = select_partitioning(host, constraint)
        report = sel.report
    else:
        report = compute_metrics(host)
    report.validate()
    print(",".join(REPORT_COLUMNS))
    print(",".join(report_csv_row(report)))
    return EXIT_OK


def cmd_experiment(args) -> int:
    cfg = ExperimentConfig(
        args.exp, n=args.n, seed=args.seed, grid=parse_grid(args.grid),
        out_path=args.out, jobs=args.jobs,
    )
    rows, columns = run_experiment(cfg)
    text = rows_to_csv(rows, columns)
    if cfg.out_path:
        Path(cfg.out_path).write_text(text)
        print(f"wrote {cfg.out_path} ({len(rows)} rows)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="permstego", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, kappa_required):
        p.add_argument("--host", required=True, help="host/stego file (.i32 or .txt)")
        p.add_argument("--format", choices=["i32", "txt"], default=None, help="override extension-based format")
        p.add_argument("--kappa", required=kappa_required, default=None, help="minimum xi_bar, linear or '<x>db'")
        p.add_argument("--seq", choices=["uniform", "lsb"], default="uniform", help="partitioning sequence")
        p.add_argument("--key", default=None, help="key passphrase")
        p.add_argument("--key-length", type=int, default=1, help="number of key permutations t")

    p = sub.add_parser("embed", help="embed a message under a distortion constraint")
    add_common(p, kappa_required=True)
    p.add_argument("--msg", required=True, help="message payload file")
    p.add_argument("--msg-bits", type=int, default=None, help="use only the first N bits of the payload")
    p.add_argument("--out", required=True, help="stego output path")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="blindly extract the embedded message")
    add_common(p, kappa_required=True)
    p.add_argument("--out", default=None, help="write payload here instead of stdout")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("analyze", help="emit the MetricsReport CSV row for a host")
    add_common(p, kappa_required=False)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("experiment", help="run a reproducible sweep and emit CSV")
    p.add_argument("exp", choices=["fig2", "fig3", "lsb"])
    p.add_argument("--n", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", default=None, help="comma list or start:stop:step")
    p.add_argument("--out", default=None, help="CSV output path")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for sweep points")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InfeasibleConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (OSError, HostError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
