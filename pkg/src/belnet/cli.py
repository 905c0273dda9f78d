"""Command-line driver.

Exit codes: 0 success, 1 parse/size/I-O error, 2 model infeasibility
(negative commonality or probability), 3 validation or verification failure.
"""

from __future__ import annotations

import argparse
import sys
from typing import IO

from .cpt import build_network_cpts, check_feasibility
from .errors import BelnetError, InfeasibleModelError, NetworkParseError, SizeGuardError
from .fusion import network_joint, write_joint_csv
from .network import Network, load_network, validate_structure
from .sampler import generate, write_csv
from .tables import (
    ValidationReport,
    commonality_to_mass,
    mass_to_commonality,
    validate_table,
)
from .verify import compare_empirical, exact_collapsed_joint


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleModelError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except (BelnetError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="belnet",
        description="Sampling from belief-function networks via extended-domain CPTs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check structure and tables")
    p.add_argument("path")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("transform", help="convert node tables between mass and commonality form")
    p.add_argument("path")
    p.add_argument("--to", choices=("m", "k"), required=True)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_transform)

    p = sub.add_parser("joint", help="exact joint mass function by conjunctive combination")
    p.add_argument("path")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_joint)

    p = sub.add_parser("cpt", help="build and dump the extended-domain CPTs")
    p.add_argument("path")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_cpt)

    p = sub.add_parser("sample", help="draw records and write them as CSV")
    p.add_argument("path")
    p.add_argument("-n", "--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("verify", help="compare a drawn sample against the exact distribution")
    p.add_argument("path")
    p.add_argument("-n", "--count", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--linf", type=float, default=0.01)
    p.set_defaults(func=_cmd_verify)

    return parser


def _out_stream(path: str | None):
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


def _structure_or_fail(net: Network) -> int | None:
    report = validate_structure(net)
    if not report.ok:
        print(report, file=sys.stderr)
        return 3
    return None


def _cmd_validate(args) -> int:
    net = load_network(args.path)
    report = ValidationReport()
    report.extend(validate_structure(net))
    for name in net.variables:
        report.extend(validate_table(net.node(name).table))
    print(report)
    return 0 if report.ok else 3


def _cmd_transform(args) -> int:
    net = load_network(args.path)
    stream, owned = _out_stream(args.output)
    try:
        _emit_network(net, args.to, stream)
    finally:
        if owned:
            stream.close()
    return 0


def _emit_network(net: Network, to_kind: str, stream: IO[str]) -> None:
    print(f"net {net.name}", file=stream)
    print("# all table rows written explicitly; absent rows default to 0", file=stream)
    for name in net.variables:
        print(f"var {name} : {' '.join(net.frame(name).values)}", file=stream)
    for a, b in net.edges:
        print(f"edge {a} -> {b}", file=stream)
    for name in net.variables:
        node = net.node(name)
        table = node.table
        if table.kind != to_kind:
            table = mass_to_commonality(table) if to_kind == "k" else commonality_to_mass(table)
        header = f"table {name} | {' '.join(node.parents)} kind={to_kind}".replace("  ", " ")
        print(header, file=stream)
        for cfg, child, v in table.items():
            left = str(child) if not cfg else f"{child} | {' '.join(str(c) for c in cfg)}"
            print(f"  {left} : {v:.9f}", file=stream)
        print("end", file=stream)


def _cmd_joint(args) -> int:
    net = load_network(args.path)
    joint, report = network_joint(net)
    stream, owned = _out_stream(args.output)
    try:
        write_joint_csv(joint, stream)
    finally:
        if owned:
            stream.close()
    print(report, file=sys.stderr)
    return 0


def _cmd_cpt(args) -> int:
    net = load_network(args.path)
    rc = _structure_or_fail(net)
    if rc is not None:
        return rc
    cpts = build_network_cpts(net)
    failures = ValidationReport()
    for name in net.variables:
        failures.extend(check_feasibility(cpts[name]))
    stream, owned = _out_stream(args.output)
    try:
        for name in net.variables:
            _emit_cpt(cpts[name], stream)
    finally:
        if owned:
            stream.close()
    if not failures.ok:
        print(failures, file=sys.stderr)
        return 3
    return 0


def _emit_cpt(cpt, stream: IO[str]) -> None:
    import csv as _csv

    print(f"# node {cpt.node}", file=stream)
    writer = _csv.writer(stream, lineterminator="\n")
    writer.writerow(list(cpt.parent_names) + [cpt.node, "p"])
    for r, cfg in enumerate(cpt.configs()):
        for c, child in enumerate(cpt.child_domain):
            writer.writerow(
                [str(v) for v in cfg] + [str(child), f"{cpt.probs[r, c]:.9f}"]
            )


def _cmd_sample(args) -> int:
    net = load_network(args.path)
    rc = _structure_or_fail(net)
    if rc is not None:
        return rc
    sample = generate(net, args.count, seed=args.seed)
    if args.output is None:
        write_csv(sample, sys.stdout)
    else:
        write_csv(sample, args.output)
    return 0


def _cmd_verify(args) -> int:
    net = load_network(args.path)
    rc = _structure_or_fail(net)
    if rc is not None:
        return rc
    cpts = build_network_cpts(net)
    sample = generate(net, args.count, seed=args.seed, cpts=cpts)
    exact = exact_collapsed_joint(net, cpts)
    report = compare_empirical(sample, exact, linf_threshold=args.linf)
    print(report)
    return 0 if report.passed else 3


if __name__ == "__main__":
    sys.exit(main())
