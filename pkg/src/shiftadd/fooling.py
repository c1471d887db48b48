"""Fooling sets for the MSB of the shifted addition.

For a balanced partition `(L, R)` of the operand bits `A | B`, a shift
`p` aligns `a_i` with `b_{i+p}`. The pairs of aligned bits that are cut
by the partition can be assigned alternating values independently, and
every such choice yields an `(l, r)` pair of a fooling set for bit
`n - 1`. All indices here are 0-based, LSB first.
"""
from __future__ import annotations

import itertools
import math
import random
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping

import numpy as np

from shiftadd.bdd import (
    TRUE_NODE, Function, IncompleteAssignment, VarId, VarKind)
from shiftadd.circuits import SaddParams, from_assignment


ENUMERATION_LIMIT = 8
SUBFUNCTION_LIMIT = 20
HALF = Fraction(1, 2)

Assignment = Mapping[VarId, int]
BoolFunction = Callable[[Assignment], int]


class TooLarge(ValueError):
    """Exhaustive work requested beyond a guard."""


class NotApplicable(ValueError):
    """Assignment lies outside the family a formula is defined on."""


def key_vars(n: int) -> list[VarId]:
    """The partitioned variables: all bits of `A` and `B`."""
    return ([VarId(VarKind.A, i) for i in range(n)]
            + [VarId(VarKind.B, i) for i in range(n)])


def _sort(vs):
    return tuple(sorted(vs, key=lambda v: (v.kind.value, v.index)))


@dataclass(frozen=True)
class BalancedPartition:
    """Split of the key variables into `left` (L) and `right` (R)."""

    n: int
    left: frozenset[VarId]
    right: frozenset[VarId]
    omega: Fraction = HALF

    def __post_init__(self):
        object.__setattr__(self, 'left', frozenset(self.left))
        object.__setattr__(self, 'right', frozenset(self.right))
        object.__setattr__(self, 'omega', Fraction(self.omega))
        keys = set(key_vars(self.n))
        if self.left & self.right:
            raise ValueError('L and R overlap')
        if self.left | self.right != keys:
            stray = (self.left | self.right) - keys
            if stray:
                raise ValueError(
                    'not key variables: ' + ', '.join(map(str, _sort(stray))))
            raise ValueError(
                'L and R do not cover: '
                + ', '.join(map(str, _sort(keys - self.left - self.right))))
        if not 0 <= self.omega <= 1:
            raise ValueError(f'omega={self.omega} outside [0, 1]')
        lo, hi = _size_range(2 * self.n, self.omega)
        if not lo <= len(self.left) <= hi:
            raise ValueError(
                f'|L|={len(self.left)} not in [{lo}, {hi}] for omega={self.omega}')

    @classmethod
    def from_left(cls, n: int, left, omega=HALF) -> BalancedPartition:
        left = frozenset(VarId.parse(v) if isinstance(v, str) else v for v in left)
        return cls(n, left, frozenset(key_vars(n)) - left, omega)

    @classmethod
    def parse(cls, n: int, text: str, omega=HALF) -> BalancedPartition:
        """Parse `L=a1,b0,...`; R is the complement."""
        text = text.strip()
        side, _, names = text.partition('=')
        if side.strip().upper() != 'L' or not _:
            raise ValueError(f'expected "L=<vars>", got {text!r}')
        names = [s for s in names.split(',') if s.strip()]
        return cls.from_left(n, names, omega)

    def side(self, v: VarId) -> str:
        if v in self.left:
            return 'L'
        if v in self.right:
            return 'R'
        raise KeyError(v)

    def __str__(self):
        return 'L=' + ','.join(str(v) for v in _sort(self.left))


def _size_range(total, omega):
    x = total * Fraction(omega)
    return math.floor(x), math.ceil(x)


def enumerate_partitions(n: int, omega=HALF) -> Iterator[BalancedPartition]:
    """Every balanced partition of the `2n` key variables."""
    if n > ENUMERATION_LIMIT:
        raise TooLarge(
            f'enumerating partitions for n={n} > {ENUMERATION_LIMIT}; '
            'use sample_partitions')
    keys = key_vars(n)
    lo, hi = _size_range(2 * n, omega)
    for k in range(lo, hi + 1):
        for left in itertools.combinations(keys, k):
            yield BalancedPartition.from_left(n, left, omega)


def sample_partitions(n: int, count: int, seed: int, omega=HALF) -> Iterator[BalancedPartition]:
    """`count` partitions drawn uniformly from a seeded `random.Random`."""
    rng = random.Random(seed)
    keys = key_vars(n)
    lo, hi = _size_range(2 * n, omega)
    sizes = list(range(lo, hi + 1))
    weights = [math.comb(2 * n, k) for k in sizes]
    for _ in range(count):
        k = rng.choices(sizes, weights)[0] if len(sizes) > 1 else lo
        yield BalancedPartition.from_left(n, rng.sample(keys, k), omega)


def args_pairs(n: int, p: int) -> list[tuple[int, int]]:
    """Index pairs `(i, i + p)` of bits `a_i`, `b_{i+p}` added under shift `p`."""
    if not 0 <= p <= n:
        raise ValueError(f'shift p={p} outside [0, {n}]')
    return [(i, i + p) for i in range(n - p)]


@dataclass(frozen=True)
class SplitReport:
    n: int
    p: int
    args: tuple[tuple[int, int], ...]
    split: tuple[tuple[int, int], ...]
    sizes: Mapping[str, int]

    @property
    def meets_quarter_bound(self) -> bool:
        """Whether `|split| >= ceil(n / 4)`."""
        return len(self.split) >= math.ceil(self.n / 4)

    def dumps(self) -> str:
        fmt = lambda pairs: ' '.join(f'a{i}:b{j}' for i, j in pairs)
        sizes = ' '.join(f'{k}={self.sizes[k]}' for k in ('A_L', 'A_R', 'B_L', 'B_R'))
        return (
            f'split-report n={self.n} p={self.p}\n'
            f'sizes {sizes}\n'
            f'args {fmt(self.args)}'.rstrip() + '\n'
            + f'split {fmt(self.split)}'.rstrip() + '\n')


def split_pairs(partition: BalancedPartition, p: int) -> SplitReport:
    """Aligned pairs under shift `p` whose bits lie on opposite sides."""
    n = partition.n
    args = args_pairs(n, p)
    left = partition.left
    split = [
        (i, j) for i, j in args
        if (VarId(VarKind.A, i) in left) != (VarId(VarKind.B, j) in left)]
    a_left = sum(VarId(VarKind.A, i) in left for i in range(n))
    b_left = sum(VarId(VarKind.B, i) in left for i in range(n))
    sizes = {'A_L': a_left, 'A_R': n - a_left, 'B_L': b_left, 'B_R': n - b_left}
    return SplitReport(n, p, tuple(args), tuple(split), sizes)


def sum_split_lower_bound(partition: BalancedPartition) -> tuple[int, Fraction, bool]:
    """Total split size over all shifts, against `n**2 / 4`."""
    n = partition.n
    total = sum(len(split_pairs(partition, p).split) for p in range(n + 1))
    bound = Fraction(n * n, 4)
    return total, bound, total >= bound


def choose_p(partition: BalancedPartition) -> tuple[int, SplitReport]:
    """Shift with the largest split; smallest such shift on ties."""
    best = None
    for p in range(partition.n + 1):
        report = split_pairs(partition, p)
        if best is None or len(report.split) > len(best.split):
            best = report
    return best.p, best


class PairFamily(Sequence):
    """The `2**k` `(l, r)` pairs for `k` split aligned pairs, built on demand.

    Index bit `j` is the value given to `u` of the `j`-th split pair;
    its partner `v` gets the complement.
    """

    def __init__(self, partition: BalancedPartition, fixed: Mapping[VarId, int],
                 split_vars: Sequence[tuple[VarId, VarId]]):
        self.partition = partition
        self.fixed = dict(fixed)
        self.split_vars = tuple(split_vars)
        self._l_fixed = {v: b for v, b in self.fixed.items() if v in partition.left}
        self._r_fixed = {v: b for v, b in self.fixed.items() if v in partition.right}

    def __len__(self):
        return 1 << len(self.split_vars)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return [self[i] for i in range(*idx.indices(len(self)))]
        if idx < 0:
            idx += len(self)
        if not 0 <= idx < len(self):
            raise IndexError(idx)
        left = self.partition.left
        l = dict(self._l_fixed)
        r = dict(self._r_fixed)
        for j, (u, v) in enumerate(self.split_vars):
            bit = (idx >> j) & 1
            (l if u in left else r)[u] = bit
            (l if v in left else r)[v] = 1 - bit
        return l, r

    def packed(self, indices) -> tuple[np.ndarray, ...]:
        """Integer values of `A` and `B` carried by each side.

        Returns `(l_a, l_b, r_a, r_b)`, arrays aligned with `indices`;
        `l_a | r_a` is the full `A` of the combined assignment.
        """
        idx = np.asarray(indices, dtype=np.int64)
        dtype = np.int64 if self.partition.n < 62 else object
        left = self.partition.left
        out = {}
        for side, fixed in (('l', self._l_fixed), ('r', self._r_fixed)):
            for kind in (VarKind.A, VarKind.B):
                base = sum(b << v.index for v, b in fixed.items() if v.kind is kind)
                out[side, kind] = np.full(idx.shape, base, dtype=dtype)
        for j, (u, v) in enumerate(self.split_vars):
            bit = ((idx >> j) & 1).astype(dtype)
            out['l' if u in left else 'r', u.kind] += bit << u.index
            out['l' if v in left else 'r', v.kind] += (1 - bit) << v.index
        return (out['l', VarKind.A], out['l', VarKind.B],
                out['r', VarKind.A], out['r', VarKind.B])


@dataclass
class FoolingSet:
    """Shared context plus `(l, r)` pairs over `(L, R)`.

    `context` holds every fixed bit: key variables fixed by the
    construction and the shift amount bits. The `l` of each pair covers
    exactly `L` (its fixed bits included), `r` exactly `R`.
    """

    partition: BalancedPartition
    pairs: Sequence[tuple[dict, dict]]
    context: dict[VarId, int] = field(default_factory=dict)
    p: int | None = None
    split: tuple[tuple[int, int], ...] = ()

    def __len__(self):
        return len(self.pairs)

    @property
    def shift_context(self) -> dict[VarId, int]:
        """Context bits outside the partition (the shift amount)."""
        keys = self.partition.left | self.partition.right
        return {v: b for v, b in self.context.items() if v not in keys}

    def combine(self, l: Assignment, r: Assignment) -> dict[VarId, int]:
        """Total assignment `l . r` with the shift context applied."""
        x = dict(self.shift_context)
        x.update(l)
        x.update(r)
        return x

    def dumps(self) -> str:
        """Line format: header, sides, context, split, one pair per line."""
        left = _sort(self.partition.left)
        right = _sort(self.partition.right)
        lines = [f'fooling-set n={self.partition.n} p={self.p} '
                 f'omega={self.partition.omega} pairs={len(self.pairs)}',
                 'L ' + ' '.join(map(str, left)),
                 'R ' + ' '.join(map(str, right)),
                 ('context ' + ' '.join(
                     f'{v}={b}' for v, b in sorted(
                         self.context.items(),
                         key=lambda kv: (kv[0].kind.value, kv[0].index)))).rstrip(),
                 ('split ' + ' '.join(f'a{i}:b{j}' for i, j in self.split)).rstrip()]
        for l, r in self.pairs:
            lines.append('pair ' + ''.join(str(l[v]) for v in left)
                         + ' ' + ''.join(str(r[v]) for v in right))
        return '\n'.join(lines) + '\n'

    @classmethod
    def loads(cls, text: str) -> FoolingSet:
        """Parse the output of `dumps` (pairs are materialized)."""
        header = {}
        left = right = ()
        context = {}
        split = ()
        pairs = []
        for line in text.splitlines():
            word, _, rest = line.partition(' ')
            items = rest.split()
            if word == 'fooling-set':
                header = dict(item.split('=') for item in items)
            elif word == 'L':
                left = tuple(map(VarId.parse, items))
            elif word == 'R':
                right = tuple(map(VarId.parse, items))
            elif word == 'context':
                for item in items:
                    name, value = item.split('=')
                    context[VarId.parse(name)] = int(value)
            elif word == 'split':
                split = tuple(
                    tuple(int(s[1:]) for s in item.split(':')) for item in items)
            elif word == 'pair':
                lbits, rbits = (items + [''])[:2]
                pairs.append((
                    {v: int(c) for v, c in zip(left, lbits)},
                    {v: int(c) for v, c in zip(right, rbits)}))
            elif word:
                raise ValueError(f'unexpected line: {line!r}')
        partition = BalancedPartition(
            int(header['n']), frozenset(left), frozenset(right),
            Fraction(header.get('omega', '1/2')))
        p = None if header.get('p', 'None') == 'None' else int(header['p'])
        return cls(partition, pairs, context, p, split)


def build_fooling_set(partition: BalancedPartition, p: int | None = None,
                      d_width: int | None = None) -> FoolingSet:
    """Fooling set for bit `n - 1` of `A + (B >> D)`.

    With `m = n - p`, `u_i = a_i` and `v_i = b_{i+p}` for `i < m`.
    Fixed bits: `a_i = 1` for `i >= m`, `b_i = 0` for `i < p`,
    `D = p`, and `(u_i, v_i) = (1, 0)` for aligned pairs that are not
    split. Split pairs alternate, `u_i = not v_i`.
    """
    n = partition.n
    params = SaddParams(n, d_width)
    if p is None:
        p, report = choose_p(partition)
    else:
        report = split_pairs(partition, p)
    m = n - p
    split = set(report.split)
    fixed = {}
    for i in range(m, n):
        fixed[params.a(i)] = 1
    for i in range(p):
        fixed[params.b(i)] = 0
    split_vars = []
    for i, j in report.args:
        if (i, j) in split:
            split_vars.append((params.a(i), params.b(j)))
        else:
            fixed[params.a(i)] = 1
            fixed[params.b(j)] = 0
    context = dict(fixed)
    for i in range(params.d_width):
        context[params.d(i)] = (p >> i) & 1
    pairs = PairFamily(partition, fixed, split_vars)
    return FoolingSet(partition, pairs, context, p, report.split)


class SaddMsbOracle:
    """Integer reference for bit `n - 1`, callable on assignments.

    Also evaluates whole cross matrices of a built fooling set at once.
    """

    def __init__(self, params: SaddParams):
        self.params = params

    def __call__(self, x: Assignment) -> int:
        try:
            a, b, d = from_assignment(self.params, x)
        except KeyError as e:
            raise IncompleteAssignment(f'assignment has no value for {e.args[0]}') from None
        return ((a + (b >> d)) >> (self.params.n - 1)) & 1

    def cross_matrix(self, fs: FoolingSet, indices) -> np.ndarray | None:
        """`M[i, j] = f(l_i . r_j)`, or None if `fs` is not packable."""
        if not isinstance(fs.pairs, PairFamily):
            return None
        try:
            d = sum(fs.context[self.params.d(i)] << i for i in range(self.params.d_width))
        except KeyError as e:
            raise IncompleteAssignment(f'context has no value for {e.args[0]}') from None
        la, lb, ra, rb = fs.pairs.packed(indices)
        a = la[:, None] | ra[None, :]
        b = lb[:, None] | rb[None, :]
        return ((a + (b >> d)) >> (self.params.n - 1)) & 1


@dataclass
class FoolingCheck:
    valid: bool
    witness: tuple | None
    diagonal: int | None
    checked: int
    total: int
    sampled: bool

    def __bool__(self):
        return self.valid


def verify_fooling_set(f: BoolFunction, fs: FoolingSet, max_pairs: int | None = 1024,
                       seed: int = 0) -> FoolingCheck:
    """Check the fooling property of `fs` for `f`.

    Valid iff `f(l . r)` takes one value on every pair and, for any two
    distinct pairs, at least one of `f(l . r')`, `f(l' . r)` differs
    from it. Beyond `max_pairs` pairs a seeded random subset is checked.
    """
    total = len(fs.pairs)
    if max_pairs is not None and total > max_pairs:
        rng = random.Random(seed)
        indices = sorted(rng.sample(range(total), max_pairs))
        sampled = True
    else:
        indices = list(range(total))
        sampled = False
    k = len(indices)
    matrix = None
    cross = getattr(f, 'cross_matrix', None)
    if cross is not None:
        matrix = cross(fs, indices)
    if matrix is None:
        chosen = [fs.pairs[i] for i in indices]
        matrix = np.empty((k, k), dtype=np.int8)
        for i, (l, _) in enumerate(chosen):
            for j, (_, r) in enumerate(chosen):
                matrix[i, j] = f(fs.combine(l, r))
    matrix = np.asarray(matrix, dtype=np.int8)
    if k == 0:
        return FoolingCheck(True, None, None, 0, total, sampled)
    diag = np.diagonal(matrix)
    value = int(diag[0])
    bad = np.flatnonzero(diag != value)
    if bad.size:
        i = int(bad[0])
        return FoolingCheck(False, (fs.pairs[indices[0]], fs.pairs[indices[i]]),
                            value, k, total, sampled)
    # pair (i, j) fools iff M[i, j] != c or M[j, i] != c
    same = (matrix == value)
    both = same & same.T
    np.fill_diagonal(both, False)
    hits = np.argwhere(both)
    if hits.size:
        i, j = map(int, hits[0])
        return FoolingCheck(False, (fs.pairs[indices[i]], fs.pairs[indices[j]]),
                            value, k, total, sampled)
    return FoolingCheck(True, None, value, k, total, sampled)


def msb_case_formula(x: Assignment, fs: FoolingSet) -> int:
    """Bit `n - 1` for assignments obeying the fixed bits of `fs`.

    Above the aligned window every position propagates, so the MSB is
    the XOR of the top operand bits and the carry from the highest
    aligned position `k < n - 1` with `u_k == v_k` (that carry is
    `u_k`; it is 0 if every lower pair alternates).
    """
    if fs.p is None:
        raise NotApplicable('fooling set was not built for a shift')
    for v, bit in fs.context.items():
        if x.get(v, bit) != bit:
            raise NotApplicable(f'{v}={x[v]} contradicts the fixed value {bit}')
    n, p = fs.partition.n, fs.p
    m = n - p
    try:
        u = [x[VarId(VarKind.A, i)] for i in range(m)]
        v = [x[VarId(VarKind.B, i + p)] for i in range(m)]
        top_a = x[VarId(VarKind.A, n - 1)]
    except KeyError as e:
        raise IncompleteAssignment(f'assignment has no value for {e.args[0]}') from None
    top_s = v[n - 1] if p == 0 else 0
    carry = 0
    for k in range(min(m, n - 1) - 1, -1, -1):
        if u[k] == v[k]:
            carry = u[k]
            break
    return top_a ^ top_s ^ carry


def constrained_family(fs: FoolingSet) -> Iterator[dict[VarId, int]]:
    """Every total assignment agreeing with the context of `fs`.

    The bits of split pairs range freely (not only alternating).
    """
    free = [v for pair in fs.pairs.split_vars for v in pair] \
        if isinstance(fs.pairs, PairFamily) else []
    for bits in itertools.product((0, 1), repeat=len(free)):
        x = dict(fs.context)
        x.update(zip(free, bits))
        yield x


def subfunction_count(f: BoolFunction, partition: BalancedPartition, fs: FoolingSet,
                      d_width: int | None = None) -> int:
    """Distinct functions of the R variables left by fixing L to each `l`.

    The shift context of `fs` stays fixed. A valid fooling set forces at
    least `len(fs)` distinct subfunctions.
    """
    if d_width is None:
        d_width = len(fs.shift_context)
    right = _sort(partition.right)
    if len(right) + d_width > SUBFUNCTION_LIMIT:
        raise TooLarge(
            f'|R| + d_width = {len(right) + d_width} > {SUBFUNCTION_LIMIT}')
    points = list(itertools.product((0, 1), repeat=len(right)))
    seen = set()
    for l, _ in fs.pairs:
        table = tuple(
            f(fs.combine(l, dict(zip(right, bits)))) for bits in points)
        seen.add(table)
    return len(seen)


@dataclass(frozen=True)
class BoundaryWidth:
    level: int
    reached: int
    nodes_below: int


def boundary_width(f: Function, fs: FoolingSet) -> BoundaryWidth:
    """Nodes of `f` at the cut below the last variable of L.

    Requires an order that places every L variable above every R
    variable. Shift bits above the cut follow the context of `fs`.
    `reached` counts distinct nodes (terminals included) that the
    `l` halves lead to; `nodes_below` counts all internal nodes at or
    below the first R level.
    """
    mgr = f.manager
    level_of = mgr.order.level_of
    partition = fs.partition
    boundary = min(level_of[v] for v in partition.right)
    if max(level_of[v] for v in partition.left) > boundary:
        raise ValueError('order does not place all of L above all of R')
    perm = mgr.order.permutation
    shift = fs.shift_context
    reached = set()
    for l, _ in fs.pairs:
        u = f.node
        while u > TRUE_NODE and mgr._level[u] < boundary:
            var = perm[mgr._level[u]]
            bit = l[var] if var in l else shift[var]
            u = mgr._high[u] if bit else mgr._low[u]
        reached.add(u)
    widths = mgr.level_widths([f])
    below = sum(w for level, w in widths.items() if level >= boundary)
    return BoundaryWidth(boundary, len(reached), below)
