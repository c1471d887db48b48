"""Command-line entry point: `shiftadd <command> ...`."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from shiftadd.bdd import BddManager, NodeLimitExceeded, VarId, VarOrder
from shiftadd.circuits import SaddParams, build_sadd, output_bit
from shiftadd.fooling import (
    BalancedPartition, SaddMsbOracle, SUBFUNCTION_LIMIT, build_fooling_set,
    subfunction_count, sum_split_lower_bound, verify_fooling_set)
from shiftadd import harness
from shiftadd.harness import Target


def _order(params: SaddParams, text: str, seed: int) -> VarOrder:
    if text == 'natural':
        return VarOrder(tuple(params.variables()))
    if text == 'random':
        return harness.random_order(params, seed)
    order = VarOrder(tuple(VarId.parse(s) for s in text.split(',') if s.strip()))
    if set(order.permutation) != set(params.variables()):
        raise ValueError('order must list every variable exactly once')
    return order


def cmd_build(args) -> int:
    params = SaddParams(args.n, args.d_width)
    order = _order(params, args.order, args.seed)
    mgr = BddManager(order, node_cap=args.cap)
    out = build_sadd(mgr, params)
    roots = list(out.bits)
    names = [f's{i}' for i in range(out.width)]
    if Target(args.target) is Target.MSB_ONLY:
        roots = [output_bit(out, params.n - 1)]
        names = [f's{params.n - 1}']
    widths = mgr.level_widths(roots)
    print(f'order {order}')
    print(f'size {sum(widths.values())}')
    print(f'width {max(widths.values(), default=0)}')
    if args.widths:
        for level, w in widths.items():
            print(f'  level {level:3d} {order.permutation[level]!s:>4}: {w}')
    if args.dot:
        Path(args.dot).write_text(mgr.to_dot(roots, names), encoding='utf-8')
    return 0


def cmd_experiment(args) -> int:
    config = harness.ExperimentConfig(
        tuple(args.n), args.trials, args.seed, Target(args.target), node_cap=args.cap)
    result = harness.run_experiment(config, exhaustive=args.exhaustive, jobs=args.jobs)
    if args.out:
        out = Path(args.out)
        harness.emit_csv(result.records, out)
        summary = Path(args.summary) if args.summary else out.with_name(out.stem + '_summary.csv')
        harness.emit_summary_csv(result.summary, summary)
    print('n,min_size,min_width,lower_bound,completed,capped')
    for row in result.summary.values():
        print(f'{row.n},{row.min_size},{row.min_width},{row.lower_bound},'
              f'{row.completed},{row.capped}')
    status = 0
    for check in harness.compare_to_reference(result.summary):
        mark = 'ok' if check.within_factor else 'outside'
        print(f'reference n={check.n} {check.quantity}: observed {check.observed} '
              f'vs {check.reference} (x{check.ratio:.2f}, {mark})')
        if not check.above_bound:
            status = 1
    for line in harness.reference_diagnostics(result):
        print(line)
    return status


def cmd_verify_lemma(args) -> int:
    status = 0
    for n in args.n:
        report = harness.verify_lemma(n, args.mode, args.samples, args.seed, args.max_pairs)
        for line in report.lines():
            print(line)
        if not report.ok:
            status = 1
    return status


def cmd_bounds(args) -> int:
    print('n,lower_bound,reference')
    for row in harness.lower_bound_curve(args.n):
        ref = '' if row.reference is None else row.reference
        print(f'{row.n},{row.bound},{ref}')
    return 0


def cmd_fooling(args) -> int:
    partition = BalancedPartition.parse(args.n, args.partition)
    params = SaddParams(args.n, args.d_width)
    fs = build_fooling_set(partition, args.p, params.d_width)
    total, bound, holds = sum_split_lower_bound(partition)
    print(f'partition {partition}')
    print(f'split sum {total} (n^2/4 = {bound}, {"holds" if holds else "violated"})')
    if args.pairs or len(fs) <= 64:
        sys.stdout.write(fs.dumps())
    else:
        print(f'fooling set p={fs.p} pairs={len(fs)} (use --pairs to list)')
    oracle = SaddMsbOracle(params)
    check = verify_fooling_set(oracle, fs, args.max_pairs, args.seed)
    extra = f', checked {check.checked} sampled pairs' if check.sampled else ''
    print(f'valid {check.valid} (diagonal {check.diagonal}{extra})')
    if not check.valid:
        print(f'witness {check.witness}')
    if args.n + params.d_width <= SUBFUNCTION_LIMIT and len(fs) <= 1024:
        print(f'subfunctions {subfunction_count(oracle, partition, fs, params.d_width)}')
    return 0 if check.valid else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='shiftadd',
        description='BDD size experiments and fooling-set checks for A + (B >> D).')
    parser.add_argument('-v', '--verbose', action='count', default=0)
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('build', help='build one diagram and print its size and width')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--d-width', type=int)
    p.add_argument('--order', default='natural',
                   help='"natural", "random", or a comma-separated variable list')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--target', choices=[t.value for t in Target], default='all_outputs')
    p.add_argument('--cap', type=int, default=harness.DEFAULT_NODE_CAP)
    p.add_argument('--widths', action='store_true', help='print the width of every level')
    p.add_argument('--dot', help='write a Graphviz file')
    p.set_defaults(func=cmd_build)

    p = sub.add_parser('experiment', help='random variable orderings, minimum size and width')
    p.add_argument('--n', type=int, nargs='+', default=[2, 4, 8, 16])
    p.add_argument('--trials', type=int, default=50)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--target', choices=[t.value for t in Target], default='all_outputs')
    p.add_argument('--out', help='records CSV')
    p.add_argument('--summary', help='summary CSV (default: <out>_summary.csv)')
    p.add_argument('--cap', type=int, default=harness.DEFAULT_NODE_CAP)
    p.add_argument('--exhaustive', action='store_true',
                   help='try every ordering (at most 8 variables)')
    p.add_argument('--jobs', type=int, default=1)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser('verify-lemma', help='check fooling sets over balanced partitions')
    p.add_argument('--n', type=int, nargs='+', required=True)
    p.add_argument('--mode', choices=['exhaustive', 'sample'], default='exhaustive')
    p.add_argument('--samples', type=int, default=500)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--max-pairs', type=int, default=1024)
    p.set_defaults(func=cmd_verify_lemma)

    p = sub.add_parser('bounds', help='print the proven width bound per n')
    p.add_argument('--n', type=int, nargs='+', default=[2, 4, 8, 16])
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser('fooling', help='construct and verify the fooling set of a partition')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('partition', help='left side, e.g. "L=a1,b1"')
    p.add_argument('--p', type=int, help='shift (default: largest split)')
    p.add_argument('--d-width', type=int)
    p.add_argument('--pairs', action='store_true', help='list every pair')
    p.add_argument('--max-pairs', type=int, default=1024)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_fooling)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    level = logging.WARNING - 10 * args.verbose
    logging.basicConfig(level=max(level, logging.DEBUG), format='%(levelname)s %(message)s')
    try:
        return args.func(args)
    except (ValueError, OSError, NodeLimitExceeded, harness.BoundViolation) as e:
        print(f'error: {e}', file=sys.stderr)
        return 2


if __name__ == '__main__':
    sys.exit(main())
