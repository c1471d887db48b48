import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftadd.bdd import BddManager, VarOrder
from shiftadd.circuits import (
    BitVecFn, SaddParams, build_msb, build_sadd, build_shifter, from_assignment,
    oracle_msb, oracle_sadd, output_bit, to_assignment)

from tests.oracles import robdd_level_widths, sadd_bits


def natural(params):
    return BddManager(VarOrder.natural(params.n, params.d_width))


def operand_space(params):
    return itertools.product(range(1 << params.n), range(1 << params.n),
                             range(1 << params.d_width))


def test_params_defaults():
    assert SaddParams(1).d_width == 1
    assert SaddParams(2).d_width == 2
    assert SaddParams(3).d_width == 2
    assert SaddParams(4).d_width == 3
    assert SaddParams(16).d_width == 5
    assert SaddParams(16).num_vars == 37


def test_params_invariants():
    with pytest.raises(ValueError):
        SaddParams(0)
    with pytest.raises(ValueError):
        SaddParams(4, 2)  # cannot encode a shift of 4
    assert SaddParams(4, 6).d_width == 6


def test_oracle_examples():
    p4 = SaddParams(4)
    assert oracle_sadd(p4, 3, 8, 2) == 5
    assert oracle_sadd(p4, 0, 0, 0) == 0
    assert oracle_sadd(p4, 15, 15, 0) == 30
    assert oracle_sadd(p4, 7, 15, 4) == 7
    assert oracle_sadd(p4, 7, 15, 7) == 7


def test_oracle_domain():
    p4 = SaddParams(4)
    for args in [(16, 0, 0), (0, -1, 0), (0, 0, 8)]:
        with pytest.raises(ValueError):
            oracle_sadd(p4, *args)


def test_assignment_roundtrip():
    params = SaddParams(5)
    for a, b, d in [(0, 0, 0), (31, 17, 7), (5, 30, 3)]:
        assert from_assignment(params, to_assignment(params, a, b, d)) == (a, b, d)


def test_shifter_examples():
    params = SaddParams(4)
    mgr = natural(params)
    s = build_shifter(mgr, params)
    assert s.width == 4
    assert s.value(to_assignment(params, 0, 8, 2)) == 2
    for b in range(16):
        assert s.value(to_assignment(params, 0, b, 0)) == b


def test_shifter_exhaustive_n4():
    params = SaddParams(4)
    mgr = natural(params)
    s = build_shifter(mgr, params)
    for _, b, d in operand_space(SaddParams(4)):
        assert s.value(to_assignment(params, 0, b, d)) == b // (1 << d)


@pytest.mark.parametrize('n', [1, 2, 3, 4, 5])
def test_shifter_zero_law(n):
    params = SaddParams(n)
    mgr = natural(params)
    s = build_shifter(mgr, params)
    for b in range(1 << n):
        for d in range(n, 1 << params.d_width):
            x = to_assignment(params, 0, b, d)
            assert all(f(x) == 0 for f in s.bits)


def test_sadd_examples():
    params = SaddParams(2)
    mgr = natural(params)
    out = build_sadd(mgr, params)
    assert out.width == 3
    assert out.value(to_assignment(params, 1, 2, 1)) == 2
    assert output_bit(out, 0)(to_assignment(params, 1, 0, 0)) == 1
    # 2 + (2 >> 1) = 3 = 0b11
    assert output_bit(out, 1)(to_assignment(params, 2, 2, 1)) == 1
    for b, d in itertools.product(range(4), range(4)):
        assert output_bit(out, 2)(to_assignment(params, 0, b, d)) == 0


def test_output_bit_range():
    params = SaddParams(2)
    out = build_sadd(natural(params), params)
    with pytest.raises(IndexError):
        output_bit(out, 3)
    with pytest.raises(IndexError):
        output_bit(out, -1)


@pytest.mark.parametrize('n', [1, 2, 3, 4, 5])
def test_sadd_matches_oracle(n):
    params = SaddParams(n)
    out = build_sadd(natural(params), params)
    for a, b, d in operand_space(params):
        x = to_assignment(params, a, b, d)
        assert out.value(x) == oracle_sadd(params, a, b, d)
        assert [f(x) for f in out.bits] == sadd_bits(n, a, b, d)


def test_msb_is_bit_n_minus_1():
    params = SaddParams(3)
    mgr = natural(params)
    msb = build_msb(mgr, params)
    assert msb == output_bit(build_sadd(mgr, params), 2)
    for a, b, d in operand_space(params):
        assert msb(to_assignment(params, a, b, d)) == oracle_msb(params, a, b, d)


def test_order_independence_n3():
    params = SaddParams(3)
    rng = random.Random(3)
    variables = params.variables()
    points = list(operand_space(params))
    reference = None
    sizes = set()
    for _ in range(25):
        rng.shuffle(variables)
        mgr = BddManager(VarOrder(tuple(variables)))
        out = build_sadd(mgr, params)
        values = [out.value(to_assignment(params, *pt)) for pt in points]
        if reference is None:
            reference = values
        assert values == reference
        sizes.add(mgr.dag_size(out.bits))
    assert len(sizes) > 1


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.randoms(use_true_random=False))
def test_sizes_match_subfunction_oracle(n, rnd):
    params = SaddParams(n)
    variables = params.variables()
    rnd.shuffle(variables)
    order = VarOrder(tuple(variables))
    mgr = BddManager(order)
    out = build_sadd(mgr, params)

    def bit(i):
        return lambda x: sadd_bits(n, *from_assignment(params, x))[i]

    funcs = [bit(i) for i in range(n + 1)]
    assert mgr.level_widths(out.bits) == robdd_level_widths(funcs, order.permutation)


def test_bitvec_single_manager():
    params = SaddParams(1)
    f = build_sadd(natural(params), params)
    g = build_sadd(natural(params), params)
    with pytest.raises(ValueError):
        BitVecFn((f.bits[0], g.bits[1]))


def test_missing_variable_in_order():
    params = SaddParams(2)
    mgr = BddManager(VarOrder.natural(2, 1))
    with pytest.raises(ValueError):
        build_sadd(mgr, params)
