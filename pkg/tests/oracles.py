"""Brute-force references that share no code with the BDD package."""
import itertools


def truth_table(func, order):
    """Values of `func` over all assignments, `order[0]` most significant."""
    table = []
    for bits in itertools.product((0, 1), repeat=len(order)):
        table.append(int(func(dict(zip(order, bits)))))
    return tuple(table)


def robdd_level_widths(funcs, order):
    """Node count per level of the shared reduced diagram of `funcs`.

    A node at level i is a distinct subfunction left after fixing the
    variables above i that still depends on the variable at level i.
    """
    tables = [truth_table(f, order) for f in funcs]
    k = len(order)
    widths = {}
    for level in range(k):
        span = 1 << (k - level)
        subs = set()
        for t in tables:
            for start in range(0, len(t), span):
                block = t[start:start + span]
                if block[:span // 2] != block[span // 2:]:
                    subs.add(block)
        if subs:
            widths[level] = len(subs)
    return widths


def sadd_bits(n, a, b, d):
    """Output bits of a + (b >> d) via schoolbook long addition."""
    s = [(b >> (i + d)) & 1 if i + d < n else 0 for i in range(n)]
    out = []
    carry = 0
    for i in range(n):
        x = ((a >> i) & 1) + s[i] + carry
        out.append(x & 1)
        carry = x >> 1
    out.append(carry)
    return out
