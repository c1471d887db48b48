"""Reduced ordered binary decision diagrams.

A plain ROBDD package: no complement edges, no garbage collection,
no dynamic reordering. Node counts therefore have a single meaning,
which is what the size and width measurements in this package need.

Internally nodes are integers indexing three parallel arrays
(`level`, `low`, `high`). Node 0 is the constant FALSE and node 1 the
constant TRUE; both sit at a pseudo-level below every variable.
The public API hands out `Function` objects that pair a node with the
manager owning it, so operands from different managers are rejected.
"""
from __future__ import annotations

import enum
import logging
from array import array
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple, Sequence


logger = logging.getLogger(__name__)

FALSE_NODE = 0
TRUE_NODE = 1
# keys of the unique table and caches pack node ids into one int
_SHIFT = 32
# memo tables are dropped wholesale beyond this many entries
DEFAULT_CACHE_LIMIT = 1 << 20


class BDDError(Exception):
    """Base class for errors raised by the BDD package."""


class OrderingViolation(BDDError):
    """A node would have a child at the same or a higher level."""


class DomainMismatch(BDDError):
    """Operands belong to different managers."""


class IncompleteAssignment(BDDError, KeyError):
    """An assignment lacks a variable needed for evaluation."""

    def __str__(self):
        return Exception.__str__(self)


class NodeLimitExceeded(BDDError):
    """The unique table grew past the configured node cap."""


class VarKind(enum.Enum):
    A = 'a'
    B = 'b'
    D = 'd'


class VarId(NamedTuple):
    """Input bit of the shifted adder; `index` 0 is the LSB."""

    kind: VarKind
    index: int

    def __str__(self):
        return f'{self.kind.value}{self.index}'

    @classmethod
    def parse(cls, name: str) -> VarId:
        """Parse names like `a0`, `b12`, `d1`."""
        name = name.strip()
        try:
            kind = VarKind(name[:1].lower())
            index = int(name[1:])
        except ValueError:
            raise ValueError(f'not a variable name: {name!r}') from None
        if index < 0:
            raise ValueError(f'negative bit index in {name!r}')
        return cls(kind, index)


def declare_vars(n: int, d_width: int) -> list[VarId]:
    """All `2 * n + d_width` variables: a0.., b0.., d0.. ."""
    return (
        [VarId(VarKind.A, i) for i in range(n)]
        + [VarId(VarKind.B, i) for i in range(n)]
        + [VarId(VarKind.D, i) for i in range(d_width)])


@dataclass(frozen=True)
class VarOrder:
    """Bijection between variables and levels (level 0 is the top)."""

    permutation: tuple[VarId, ...]
    level_of: Mapping[VarId, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        perm = tuple(self.permutation)
        object.__setattr__(self, 'permutation', perm)
        level_of = {v: i for i, v in enumerate(perm)}
        if len(level_of) != len(perm):
            raise ValueError('variable order contains duplicates')
        object.__setattr__(self, 'level_of', level_of)

    @classmethod
    def natural(cls, n: int, d_width: int) -> VarOrder:
        return cls(tuple(declare_vars(n, d_width)))

    def __len__(self):
        return len(self.permutation)

    def __str__(self):
        return ','.join(str(v) for v in self.permutation)


class Function:
    """Handle on a node of a `BddManager`.

    Supports `&`, `|`, `^` and `~`. Equality is node identity, which by
    canonicity is semantic equality within one manager.
    """

    __slots__ = ('manager', 'node')

    def __init__(self, manager: BddManager, node: int):
        self.manager = manager
        self.node = node

    def __eq__(self, other):
        if not isinstance(other, Function):
            return NotImplemented
        return self.manager is other.manager and self.node == other.node

    def __hash__(self):
        return hash((id(self.manager), self.node))

    def __repr__(self):
        return f'Function(node={self.node})'

    @property
    def level(self) -> int:
        return self.manager._level[self.node]

    @property
    def var(self) -> VarId | None:
        if self.node <= TRUE_NODE:
            return None
        return self.manager.order.permutation[self.level]

    @property
    def low(self) -> Function:
        return Function(self.manager, self.manager._low[self.node])

    @property
    def high(self) -> Function:
        return Function(self.manager, self.manager._high[self.node])

    @property
    def is_terminal(self) -> bool:
        return self.node <= TRUE_NODE

    def __invert__(self):
        return self.manager.apply('xor', self, self.manager.true)

    def __and__(self, other):
        return self.manager.apply('and', self, other)

    def __or__(self, other):
        return self.manager.apply('or', self, other)

    def __xor__(self, other):
        return self.manager.apply('xor', self, other)

    def __call__(self, assignment: Mapping[VarId, int]) -> int:
        return self.manager.eval(self, assignment)


# binary operators as 4-bit truth tables, bit (2 * f + g) is op(f, g)
OPERATORS = {
    'and': 0b1000,
    'or': 0b1110,
    'xor': 0b0110,
    'xnor': 0b1001,
    'nand': 0b0111,
    'nor': 0b0001,
    'implies': 0b1011,
    'diff': 0b0100,
}


class BddManager:
    """Hash-consed ROBDD node store over a fixed `VarOrder`.

    @param order: variable order; level `i` holds `order.permutation[i]`
    @param node_cap: raise `NodeLimitExceeded` once more than this many
        internal nodes exist (counts every node ever created, since
        nothing is collected)
    @param cache_limit: entries per memo table before it is cleared
    """

    def __init__(self, order: VarOrder, node_cap: int | None = None,
                 cache_limit: int = DEFAULT_CACHE_LIMIT):
        self.order = order
        self.node_cap = node_cap
        self.cache_limit = cache_limit
        nvars = len(order)
        self._terminal_level = nvars
        self._level = array('i', [nvars, nvars])
        self._low = array('q', [FALSE_NODE, TRUE_NODE])
        self._high = array('q', [FALSE_NODE, TRUE_NODE])
        self._unique: dict[int, int] = {}
        self._apply_cache: dict[int, int] = {}
        self._ite_cache: dict[int, int] = {}

    # built on demand: storing them would tie the manager into a reference
    # cycle and keep large tables alive until the cyclic collector runs
    @property
    def false(self) -> Function:
        return Function(self, FALSE_NODE)

    @property
    def true(self) -> Function:
        return Function(self, TRUE_NODE)

    def __len__(self):
        """Number of internal nodes in the unique table."""
        return len(self._unique)

    def __contains__(self, f):
        return isinstance(f, Function) and f.manager is self

    # node construction

    def mk(self, level: int, low: Function, high: Function) -> Function:
        self._check(low, high)
        return Function(self, self._mk_checked(level, low.node, high.node))

    def _mk_checked(self, level, low, high):
        if not 0 <= level < self._terminal_level:
            raise OrderingViolation(f'no variable at level {level}')
        lv = self._level
        if level >= lv[low] or level >= lv[high]:
            raise OrderingViolation(
                f'node at level {level} cannot have children at levels '
                f'{lv[low]} and {lv[high]}')
        return self._mk(level, low, high)

    def _mk(self, level, low, high):
        if low == high:
            return low
        key = (((level << _SHIFT) | low) << _SHIFT) | high
        u = self._unique.get(key)
        if u is not None:
            return u
        u = len(self._level)
        if self.node_cap is not None and u - 2 >= self.node_cap:
            raise NodeLimitExceeded(
                f'more than {self.node_cap} nodes in the unique table')
        self._level.append(level)
        self._low.append(low)
        self._high.append(high)
        self._unique[key] = u
        return u

    def var(self, v: VarId | str) -> Function:
        """Projection function of variable `v`."""
        if isinstance(v, str):
            v = VarId.parse(v)
        try:
            level = self.order.level_of[v]
        except KeyError:
            raise ValueError(f'variable {v} is not declared') from None
        return Function(self, self._mk(level, FALSE_NODE, TRUE_NODE))

    def constant(self, value: int | bool) -> Function:
        return self.true if value else self.false

    # operations

    def _check(self, *fs):
        for f in fs:
            if not isinstance(f, Function):
                raise TypeError(f'expected a Function, got {type(f).__name__}')
            if f.manager is not self:
                raise DomainMismatch('operand belongs to another manager')

    def apply(self, op: str, f: Function, g: Function) -> Function:
        """Combine `f` and `g` with a binary Boolean operator.

        `op` is a name from `OPERATORS` (`'and'`, `'or'`, `'xor'`, ...).
        """
        self._check(f, g)
        try:
            table = OPERATORS[op]
        except KeyError:
            raise ValueError(f'unknown operator {op!r}') from None
        return Function(self, self._apply(table, f.node, g.node))

    def _apply(self, table, f, g):
        if f <= TRUE_NODE and g <= TRUE_NODE:
            return (table >> (2 * f + g)) & 1
        # shortcuts keep the cache small for the common operators
        if table == 0b1000:
            if f == FALSE_NODE or g == FALSE_NODE:
                return FALSE_NODE
            if f == TRUE_NODE or f == g:
                return g
            if g == TRUE_NODE:
                return f
        elif table == 0b1110:
            if f == TRUE_NODE or g == TRUE_NODE:
                return TRUE_NODE
            if f == FALSE_NODE or f == g:
                return g
            if g == FALSE_NODE:
                return f
        elif table == 0b0110:
            if f == g:
                return FALSE_NODE
            if f == FALSE_NODE:
                return g
            if g == FALSE_NODE:
                return f
        if table in (0b1000, 0b1110, 0b0110, 0b1001) and f > g:
            f, g = g, f
        key = (((table << _SHIFT) | f) << _SHIFT) | g
        r = self._apply_cache.get(key)
        if r is not None:
            return r
        lv = self._level
        lf = lv[f]
        lg = lv[g]
        level = lf if lf < lg else lg
        if lf == level:
            f0, f1 = self._low[f], self._high[f]
        else:
            f0 = f1 = f
        if lg == level:
            g0, g1 = self._low[g], self._high[g]
        else:
            g0 = g1 = g
        r = self._mk(level, self._apply(table, f0, g0), self._apply(table, f1, g1))
        if len(self._apply_cache) >= self.cache_limit:
            self._apply_cache.clear()
        self._apply_cache[key] = r
        return r

    def ite(self, c: Function, t: Function, e: Function) -> Function:
        """If-then-else: `(c & t) | (~c & e)`."""
        self._check(c, t, e)
        return Function(self, self._ite(c.node, t.node, e.node))

    def _ite(self, f, g, h):
        if f == TRUE_NODE:
            return g
        if f == FALSE_NODE:
            return h
        if g == h:
            return g
        if g == TRUE_NODE and h == FALSE_NODE:
            return f
        if g == f:
            g = TRUE_NODE
        if h == f:
            h = FALSE_NODE
        key = (((f << _SHIFT) | g) << _SHIFT) | h
        r = self._ite_cache.get(key)
        if r is not None:
            return r
        lv = self._level
        lo = self._low
        hi = self._high
        lf, lg, lh = lv[f], lv[g], lv[h]
        level = min(lf, lg, lh)
        if lf == level:
            f0, f1 = lo[f], hi[f]
        else:
            f0 = f1 = f
        if lg == level:
            g0, g1 = lo[g], hi[g]
        else:
            g0 = g1 = g
        if lh == level:
            h0, h1 = lo[h], hi[h]
        else:
            h0 = h1 = h
        r = self._mk(level, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        if len(self._ite_cache) >= self.cache_limit:
            self._ite_cache.clear()
        self._ite_cache[key] = r
        return r

    def eval(self, f: Function, assignment: Mapping[VarId, int]) -> int:
        """Value of `f` under `assignment` (only path variables are read)."""
        self._check(f)
        u = f.node
        perm = self.order.permutation
        while u > TRUE_NODE:
            v = perm[self._level[u]]
            try:
                bit = assignment[v]
            except KeyError:
                raise IncompleteAssignment(
                    f'assignment has no value for {v}') from None
            u = self._high[u] if bit else self._low[u]
        return u

    def restrict(self, f: Function, values: Mapping[VarId, int]) -> Function:
        """Cofactor of `f` with the variables in `values` fixed."""
        self._check(f)
        fixed = {self.order.level_of[v]: int(bool(b)) for v, b in values.items()
                 if v in self.order.level_of}
        cache = {}

        def rec(u):
            if u <= TRUE_NODE:
                return u
            r = cache.get(u)
            if r is not None:
                return r
            level = self._level[u]
            if level in fixed:
                r = rec(self._high[u] if fixed[level] else self._low[u])
            else:
                r = self._mk(level, rec(self._low[u]), rec(self._high[u]))
            cache[u] = r
            return r

        return Function(self, rec(f.node))

    # measurements

    def reachable(self, roots: Iterable[Function]) -> set[int]:
        """Internal nodes reachable from `roots`."""
        roots = list(roots)
        self._check(*roots)
        seen = set()
        stack = [f.node for f in roots]
        lo = self._low
        hi = self._high
        while stack:
            u = stack.pop()
            if u <= TRUE_NODE or u in seen:
                continue
            seen.add(u)
            stack.append(lo[u])
            stack.append(hi[u])
        return seen

    def level_widths(self, roots: Iterable[Function]) -> dict[int, int]:
        """Map level -> number of reachable internal nodes at that level."""
        widths: dict[int, int] = {}
        lv = self._level
        for u in self.reachable(roots):
            widths[lv[u]] = widths.get(lv[u], 0) + 1
        return dict(sorted(widths.items()))

    def dag_size(self, roots: Iterable[Function]) -> int:
        """Number of reachable internal nodes of the shared DAG."""
        return len(self.reachable(roots))

    def max_width(self, roots: Iterable[Function]) -> int:
        return max(self.level_widths(roots).values(), default=0)

    def to_dot(self, roots: Sequence[Function], names: Sequence[str] | None = None) -> str:
        """Graphviz source; solid edges are high, dashed edges low."""
        roots = list(roots)
        nodes = sorted(self.reachable(roots), key=lambda u: (self._level[u], u))
        perm = self.order.permutation
        lines = ['digraph bdd {']
        for u in nodes:
            lines.append(f'  n{u} [label="{perm[self._level[u]]}"];')
        lines.append('  n0 [shape=box, label="0"];')
        lines.append('  n1 [shape=box, label="1"];')
        for u in nodes:
            lines.append(f'  n{u} -> n{self._high[u]};')
            lines.append(f'  n{u} -> n{self._low[u]} [style=dashed];')
        for i, f in enumerate(roots):
            name = names[i] if names else f'f{i}'
            lines.append(f'  r{i} [shape=plaintext, label="{name}"];')
            lines.append(f'  r{i} -> n{f.node};')
        lines.append('}')
        return '\n'.join(lines) + '\n'
