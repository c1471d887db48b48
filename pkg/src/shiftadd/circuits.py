"""Shifted addition `A + (B >> D)` as BDDs, plus an integer reference.

The shifter is a logarithmic multiplexer cascade with one stage per
bit of `D`; the adder is ripple-carry. Output bit `n` is the carry-out.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from shiftadd.bdd import BddManager, Function, VarId, VarKind, declare_vars


@dataclass(frozen=True)
class SaddParams:
    """Operand width `n` and shift-amount width `d_width`.

    `d_width` defaults to the smallest width that can encode a shift of
    `n`, i.e. `ceil(log2(n + 1))`.
    """

    n: int
    d_width: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f'operand width must be >= 1, got {self.n}')
        if self.d_width is None:
            object.__setattr__(self, 'd_width', self.n.bit_length())
        if (1 << self.d_width) <= self.n:
            raise ValueError(
                f'd_width={self.d_width} cannot encode shift {self.n}; '
                f'need at least {self.n.bit_length()} bits')

    @property
    def num_vars(self) -> int:
        return 2 * self.n + self.d_width

    def variables(self) -> list[VarId]:
        return declare_vars(self.n, self.d_width)

    def a(self, i: int) -> VarId:
        return VarId(VarKind.A, i)

    def b(self, i: int) -> VarId:
        return VarId(VarKind.B, i)

    def d(self, i: int) -> VarId:
        return VarId(VarKind.D, i)


def oracle_sadd(params: SaddParams, a: int, b: int, d: int) -> int:
    """`a + (b >> d)` with range checks; shifts >= n contribute 0."""
    n = params.n
    if not 0 <= a < 1 << n:
        raise ValueError(f'A={a} out of range for n={n}')
    if not 0 <= b < 1 << n:
        raise ValueError(f'B={b} out of range for n={n}')
    if not 0 <= d < 1 << params.d_width:
        raise ValueError(f'D={d} out of range for d_width={params.d_width}')
    return a + (b >> d)


def oracle_msb(params: SaddParams, a: int, b: int, d: int) -> int:
    """Bit `n - 1` of the shifted addition."""
    return (oracle_sadd(params, a, b, d) >> (params.n - 1)) & 1


def to_assignment(params: SaddParams, a: int, b: int, d: int) -> dict[VarId, int]:
    """Spread integer operands over their bit variables."""
    x = {}
    for i in range(params.n):
        x[params.a(i)] = (a >> i) & 1
        x[params.b(i)] = (b >> i) & 1
    for i in range(params.d_width):
        x[params.d(i)] = (d >> i) & 1
    return x


def from_assignment(params: SaddParams, x: Mapping[VarId, int]) -> tuple[int, int, int]:
    """Inverse of `to_assignment`; missing bits raise `KeyError`."""
    a = sum(x[params.a(i)] << i for i in range(params.n))
    b = sum(x[params.b(i)] << i for i in range(params.n))
    d = sum(x[params.d(i)] << i for i in range(params.d_width))
    return a, b, d


@dataclass(frozen=True)
class BitVecFn:
    """Multi-bit function as a tuple of BDD roots, index 0 = LSB."""

    bits: tuple[Function, ...]

    def __post_init__(self):
        managers = {id(f.manager) for f in self.bits}
        if len(managers) > 1:
            raise ValueError('all bits of a BitVecFn must share one manager')

    @property
    def width(self) -> int:
        return len(self.bits)

    @property
    def manager(self) -> BddManager:
        return self.bits[0].manager

    def value(self, assignment: Mapping[VarId, int]) -> int:
        return sum(f(assignment) << i for i, f in enumerate(self.bits))

    def __getitem__(self, m):
        return self.bits[m]

    def __len__(self):
        return len(self.bits)


def output_bit(f: BitVecFn, m: int) -> Function:
    """Root of output bit `m`."""
    if not 0 <= m < f.width:
        raise IndexError(f'bit {m} out of range for width {f.width}')
    return f.bits[m]


def _check_order(manager: BddManager, params: SaddParams):
    missing = [v for v in params.variables() if v not in manager.order.level_of]
    if missing:
        raise ValueError(
            'variable order lacks ' + ', '.join(str(v) for v in missing))


def build_shifter(manager: BddManager, params: SaddParams) -> BitVecFn:
    """Bits of `B >> D`, one multiplexer stage per bit of `D`."""
    _check_order(manager, params)
    n = params.n
    bits = [manager.var(params.b(i)) for i in range(n)]
    for j in range(params.d_width):
        d = manager.var(params.d(j))
        step = 1 << j
        bits = [
            manager.ite(d, bits[i + step] if i + step < n else manager.false, bits[i])
            for i in range(n)]
    return BitVecFn(tuple(bits))


def build_sadd(manager: BddManager, params: SaddParams) -> BitVecFn:
    """All `n + 1` bits of `A + (B >> D)` via ripple-carry."""
    shifted = build_shifter(manager, params)
    carry = manager.false
    out = []
    for i in range(params.n):
        a = manager.var(params.a(i))
        s = shifted.bits[i]
        out.append(a ^ s ^ carry)
        # majority(a, s, carry)
        carry = manager.ite(a, s | carry, s & carry)
    out.append(carry)
    return BitVecFn(tuple(out))


def build_msb(manager: BddManager, params: SaddParams) -> Function:
    """Bit `n - 1` of the shifted addition."""
    return output_bit(build_sadd(manager, params), params.n - 1)
