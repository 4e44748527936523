"""Balanced partitions, balanced towers and the iterated tower constructions"""

from src.stacking.checkers import ConditionReport, check_pub, check_tub, check_wtub, column_sum_bounds
from src.stacking.greedy import greedy_order, greedy_stack, max_abs, partial_sums
from src.stacking.joint import JointApproximation, JointReport, joint_approximation_construct
from src.stacking.partition import PUBPartition, bins_for_eps, pub_partition, pub_partitions, value_classes
from src.stacking.schedule import ScheduleParams
from src.stacking.towers import (
    RefineResult,
    StripTower,
    TUBTower,
    WTUBTower,
    arrange_strips,
    level_refine,
    transfer_on_columns,
    tub_build,
    wtub_build,
)
from src.stacking.weak_mixing import (
    WeakMixingResult,
    descend,
    dyadic_refined,
    transfer_from_map,
    weak_mixing_coboundary,
)

__all__ = [
    "ConditionReport",
    "check_pub",
    "check_tub",
    "check_wtub",
    "column_sum_bounds",
    "greedy_order",
    "greedy_stack",
    "max_abs",
    "partial_sums",
    "ScheduleParams",
    "PUBPartition",
    "bins_for_eps",
    "pub_partition",
    "pub_partitions",
    "value_classes",
    "StripTower",
    "TUBTower",
    "WTUBTower",
    "RefineResult",
    "arrange_strips",
    "level_refine",
    "transfer_on_columns",
    "tub_build",
    "wtub_build",
    "WeakMixingResult",
    "descend",
    "dyadic_refined",
    "transfer_from_map",
    "weak_mixing_coboundary",
    "JointApproximation",
    "JointReport",
    "joint_approximation_construct",
]
