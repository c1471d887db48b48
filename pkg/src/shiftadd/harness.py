"""Random-ordering size experiment and lower-bound sweeps.

Orderings are drawn per trial from CPython's `random.Random`
(Mersenne Twister) seeded with a sub-seed derived by SHA-256 from
`(seed, n, trial)`, then applied with `Random.shuffle` to the variable
list a0..a{n-1}, b0..b{n-1}, d0..d{w-1}. Trials are independent, so
serial and parallel runs give the same records.
"""
from __future__ import annotations

import csv
import enum
import hashlib
import itertools
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from shiftadd.bdd import BddManager, NodeLimitExceeded, VarId, VarOrder
from shiftadd.circuits import SaddParams, build_sadd, output_bit
from shiftadd.fooling import (
    HALF, SaddMsbOracle, build_fooling_set, enumerate_partitions,
    sample_partitions, sum_split_lower_bound, verify_fooling_set)


logger = logging.getLogger(__name__)

DEFAULT_NODE_CAP = 5_000_000
EXHAUSTIVE_ORDER_LIMIT = 8
EXHAUSTIVE_LEMMA_LIMIT = 6

# best-of-50 random orderings reported for operand widths 2, 4, 8, 16
REFERENCE_WIDTH = {2: 5, 4: 16, 8: 136, 16: 5851}
REFERENCE_SIZE = {2: 22, 4: 96, 8: 937, 16: 46761}
# reported "predicted lower bound" series; equals 2**(n/2 - 1), not 2**(n/4)
REFERENCE_BOUND = {2: 1, 4: 2, 8: 8, 16: 128}
REFERENCE_FACTOR = 2

RECORD_HEADER = ('n', 'trial', 'target', 'seed', 'size', 'width')
SUMMARY_HEADER = ('n', 'min_size', 'min_width', 'lower_bound')


class Target(str, enum.Enum):
    MSB_ONLY = 'msb_only'
    ALL_OUTPUTS = 'all_outputs'


class BoundViolation(RuntimeError):
    """A measured width is below the proven lower bound."""


def lower_bound(n: int) -> int:
    """`ceil(2 ** (n / 4))`, computed exactly."""
    k = math.isqrt(math.isqrt(1 << n))
    while k ** 4 < 1 << n:
        k += 1
    return k


@dataclass(frozen=True)
class ExperimentConfig:
    n_values: tuple[int, ...]
    trials: int = 50
    seed: int = 0
    target: Target = Target.ALL_OUTPUTS
    omega: Fraction = HALF
    node_cap: int | None = DEFAULT_NODE_CAP

    def __post_init__(self):
        object.__setattr__(self, 'n_values', tuple(self.n_values))
        object.__setattr__(self, 'target', Target(self.target))
        if not self.n_values:
            raise ValueError('n_values is empty')
        if any(n < 1 for n in self.n_values):
            raise ValueError(f'operand widths must be >= 1: {self.n_values}')
        if self.trials < 1:
            raise ValueError(f'trials must be >= 1, got {self.trials}')


@dataclass(frozen=True)
class ExperimentRecord:
    n: int
    trial: int
    ordering: tuple[VarId, ...]
    size: int
    width: int
    seed: int
    target: Target


@dataclass(frozen=True)
class SummaryRow:
    n: int
    min_size: int
    min_width: int
    lower_bound: int
    completed: int
    capped: int


@dataclass
class ExperimentResult:
    records: list[ExperimentRecord]
    summary: dict[int, SummaryRow]
    capped: list[tuple[int, int, int]] = field(default_factory=list)


def trial_seed(seed: int, n: int, trial: int) -> int:
    digest = hashlib.sha256(f'{seed}:{n}:{trial}'.encode()).digest()
    return int.from_bytes(digest[:8], 'big')


def random_order(params: SaddParams, sub_seed: int) -> VarOrder:
    variables = params.variables()
    random.Random(sub_seed).shuffle(variables)
    return VarOrder(tuple(variables))


def measure(params: SaddParams, order: VarOrder, target: Target,
            node_cap: int | None = None) -> tuple[int, int]:
    """`(dag_size, max level width)` of the target diagram under `order`."""
    mgr = BddManager(order, node_cap=node_cap)
    out = build_sadd(mgr, params)
    if Target(target) is Target.MSB_ONLY:
        roots = [output_bit(out, params.n - 1)]
    else:
        roots = list(out.bits)
    widths = mgr.level_widths(roots)
    return sum(widths.values()), max(widths.values(), default=0)


def _run_trial(task):
    n, trial, sub_seed, ordering, target, node_cap = task
    params = SaddParams(n)
    order = VarOrder(ordering) if ordering is not None else random_order(params, sub_seed)
    try:
        size, width = measure(params, order, target, node_cap)
    except NodeLimitExceeded:
        return n, trial, sub_seed, order.permutation, None, None
    return n, trial, sub_seed, order.permutation, size, width


def _tasks(config: ExperimentConfig, exhaustive: bool):
    for n in config.n_values:
        params = SaddParams(n)
        if exhaustive:
            if params.num_vars > EXHAUSTIVE_ORDER_LIMIT:
                raise ValueError(
                    f'exhaustive ordering search needs <= {EXHAUSTIVE_ORDER_LIMIT} '
                    f'variables, n={n} has {params.num_vars}')
            perms = itertools.permutations(params.variables())
            for trial, perm in enumerate(perms):
                yield n, trial, config.seed, perm, config.target, config.node_cap
        else:
            for trial in range(config.trials):
                yield (n, trial, trial_seed(config.seed, n, trial), None,
                       config.target, config.node_cap)


def run_experiment(config: ExperimentConfig, exhaustive: bool = False,
                   jobs: int = 1) -> ExperimentResult:
    """Measure the target diagram under random (or all) variable orders.

    Trials hitting `config.node_cap` are left out of the records and
    listed in `ExperimentResult.capped`; a width below the proven bound
    for the MSB target raises `BoundViolation`.
    """
    tasks = list(_tasks(config, exhaustive))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_run_trial, tasks, chunksize=4))
    else:
        results = []
        for task in tasks:
            results.append(_run_trial(task))
            n, trial, _, _, size, width = results[-1]
            logger.debug('n=%d trial=%d size=%s width=%s', n, trial, size, width)
    results.sort(key=lambda r: (config.n_values.index(r[0]), r[1]))
    records = []
    capped = []
    for n, trial, sub_seed, ordering, size, width in results:
        if size is None:
            logger.warning('n=%d trial=%d exceeded the node cap %s',
                           n, trial, config.node_cap)
            capped.append((n, trial, sub_seed))
            continue
        records.append(ExperimentRecord(
            n, trial, tuple(ordering), size, width, sub_seed, config.target))
    if config.target is Target.MSB_ONLY:
        for r in records:
            if r.width < lower_bound(r.n):
                raise BoundViolation(
                    f'n={r.n} trial={r.trial}: width {r.width} < {lower_bound(r.n)} '
                    f'under order {",".join(map(str, r.ordering))}')
    return ExperimentResult(records, summarize(records, capped), capped)


def summarize(records: Sequence[ExperimentRecord],
              capped: Sequence[tuple[int, int, int]] = ()) -> dict[int, SummaryRow]:
    summary = {}
    ns = list(dict.fromkeys([r.n for r in records] + [c[0] for c in capped]))
    for n in ns:
        rows = [r for r in records if r.n == n]
        n_capped = sum(1 for c in capped if c[0] == n)
        if not rows:
            raise NodeLimitExceeded(f'every trial for n={n} exceeded the node cap')
        summary[n] = SummaryRow(
            n, min(r.size for r in rows), min(r.width for r in rows),
            lower_bound(n), len(rows), n_capped)
    return summary


@dataclass(frozen=True)
class BoundRow:
    n: int
    bound: int
    reference: int | None


def lower_bound_curve(n_values: Iterable[int]) -> list[BoundRow]:
    """Proven width bound per `n`, next to the reported reference series."""
    return [BoundRow(n, lower_bound(n), REFERENCE_BOUND.get(n)) for n in n_values]


@dataclass(frozen=True)
class ReferenceCheck:
    n: int
    quantity: str
    observed: int
    reference: int
    ratio: float
    within_factor: bool
    above_bound: bool


def compare_to_reference(summary: dict[int, SummaryRow],
                         factor: float = REFERENCE_FACTOR) -> list[ReferenceCheck]:
    checks = []
    for n, row in summary.items():
        for quantity, observed, table in (
                ('width', row.min_width, REFERENCE_WIDTH),
                ('size', row.min_size, REFERENCE_SIZE)):
            if n not in table:
                continue
            ratio = observed / table[n]
            checks.append(ReferenceCheck(
                n, quantity, observed, table[n], ratio,
                1 / factor <= ratio <= factor, observed > row.lower_bound))
    return checks


def counting_variants(params: SaddParams, order: VarOrder) -> dict[str, tuple[int, int]]:
    """`(size, width)` of one ordering under several counting conventions."""
    mgr = BddManager(order)
    out = build_sadd(mgr, params)
    bits = list(out.bits)

    def sw(roots):
        w = mgr.level_widths(roots)
        return sum(w.values()), max(w.values(), default=0)

    shared = sw(bits)
    separate = [sw([f]) for f in bits]
    return {
        'all_outputs': shared,
        'all_outputs+terminals': (shared[0] + 2, shared[1]),
        'no_carry_out': sw(bits[:-1]),
        'msb_only': sw([bits[params.n - 1]]),
        'msb_only+terminals': (sw([bits[params.n - 1]])[0] + 2, sw([bits[params.n - 1]])[1]),
        'separate_outputs': (sum(s for s, _ in separate), max(w for _, w in separate)),
    }


def reference_diagnostics(result: ExperimentResult,
                          factor: float = REFERENCE_FACTOR) -> list[str]:
    """Explain reference mismatches by re-counting the best orderings."""
    lines = []
    checks = compare_to_reference(result.summary, factor)
    for n in sorted({c.n for c in checks if not c.within_factor}):
        best = min((r for r in result.records if r.n == n), key=lambda r: r.size)
        variants = counting_variants(SaddParams(n), VarOrder(best.ordering))
        lines.append(
            f'n={n}: minima outside x{factor} of the reference '
            f'(size {REFERENCE_SIZE.get(n)}, width {REFERENCE_WIDTH.get(n)}); '
            f'counting conventions for the smallest ordering (trial {best.trial}):')
        for name, (size, width) in variants.items():
            lines.append(f'  {name:24s} size={size} width={width}')
    return lines


@dataclass
class LemmaReport:
    n: int
    mode: str
    partitions: int = 0
    min_split: int | None = None
    min_pairs: int | None = None
    failures: list[str] = field(default_factory=list)
    sum_bound_failures: list[str] = field(default_factory=list)
    subsampled: int = 0
    max_pairs: int | None = None

    @property
    def ok(self) -> bool:
        return not self.failures and not self.sum_bound_failures

    def lines(self) -> list[str]:
        out = [
            f'n={self.n} mode={self.mode} partitions={self.partitions} '
            f'min_split={self.min_split} min_pairs={self.min_pairs} '
            f'lemma_failures={len(self.failures)} '
            f'sum_bound_failures={len(self.sum_bound_failures)}',
        ]
        if self.subsampled:
            out.append(
                f'  {self.subsampled} partitions had more than {self.max_pairs} pairs; '
                f'pairwise checks ran on a seeded subset of {self.max_pairs}')
        out.extend('  lemma: ' + f for f in self.failures[:10])
        out.extend('  sum bound: ' + f for f in self.sum_bound_failures[:10])
        return out


def verify_lemma(n: int, mode: str = 'exhaustive', samples: int = 500,
                 seed: int = 0, max_pairs: int | None = 1024) -> LemmaReport:
    """Build and check the fooling set for every (or sampled) partition."""
    if mode == 'exhaustive':
        if n > EXHAUSTIVE_LEMMA_LIMIT:
            raise ValueError(
                f'exhaustive sweep limited to n <= {EXHAUSTIVE_LEMMA_LIMIT}; use sample mode')
        partitions = enumerate_partitions(n)
    elif mode == 'sample':
        partitions = sample_partitions(n, samples, seed)
    else:
        raise ValueError(f'unknown mode {mode!r}')
    oracle = SaddMsbOracle(SaddParams(n))
    report = LemmaReport(n, mode, max_pairs=max_pairs)
    for partition in partitions:
        report.partitions += 1
        fs = build_fooling_set(partition)
        k = len(fs.split)
        report.min_split = k if report.min_split is None else min(report.min_split, k)
        report.min_pairs = len(fs) if report.min_pairs is None else min(report.min_pairs, len(fs))
        if len(fs) != 1 << k:
            report.failures.append(f'{partition}: {len(fs)} pairs for split size {k}')
        if 4 * k < n:
            report.failures.append(f'{partition}: split size {k} < n/4')
        check = verify_fooling_set(oracle, fs, max_pairs, seed)
        report.subsampled += check.sampled
        if not check.valid:
            report.failures.append(f'{partition} p={fs.p}: counterexample {check.witness}')
        elif check.diagonal not in (None, 1):
            report.failures.append(f'{partition} p={fs.p}: diagonal value {check.diagonal}')
        total, bound, holds = sum_split_lower_bound(partition)
        if not holds:
            report.sum_bound_failures.append(f'{partition}: sum {total} < {bound}')
    return report


def emit_csv(records: Iterable[ExperimentRecord], path) -> Path:
    """Write `n,trial,target,seed,size,width` rows."""
    path = Path(path)
    try:
        with path.open('w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(RECORD_HEADER)
            for r in records:
                writer.writerow((r.n, r.trial, Target(r.target).value, r.seed, r.size, r.width))
    except OSError as e:
        raise OSError(f'cannot write records to {path}: {e}') from e
    return path


def emit_summary_csv(summary: dict[int, SummaryRow], path) -> Path:
    """Write `n,min_size,min_width,lower_bound` rows."""
    path = Path(path)
    try:
        with path.open('w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(SUMMARY_HEADER)
            for row in summary.values():
                writer.writerow((row.n, row.min_size, row.min_width, row.lower_bound))
    except OSError as e:
        raise OSError(f'cannot write summary to {path}: {e}') from e
    return path
