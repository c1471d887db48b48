"""ROBDDs for the shifted addition `A + (B >> D)` and its fooling-set lower bound."""
from shiftadd.bdd import (
    BDDError, BddManager, DomainMismatch, Function, IncompleteAssignment,
    NodeLimitExceeded, OrderingViolation, VarId, VarKind, VarOrder, declare_vars)
from shiftadd.circuits import (
    BitVecFn, SaddParams, build_msb, build_sadd, build_shifter, oracle_msb,
    oracle_sadd, output_bit)
from shiftadd.fooling import (
    BalancedPartition, FoolingSet, SaddMsbOracle, SplitReport, args_pairs,
    build_fooling_set, choose_p, enumerate_partitions, msb_case_formula,
    sample_partitions, split_pairs, subfunction_count, sum_split_lower_bound,
    verify_fooling_set)

__version__ = '0.1.0'
