"""Measure-preserving transformations: rotations, simplex translations, rank-one machines"""

from src.transforms.base import ExplicitMap, Transform
from src.transforms.extension import FiniteExtension
from src.transforms.interval_map import PiecewiseTranslation
from src.transforms.rank_one import RankOneMachine, StackStep, cut_and_stack
from src.transforms.rotation import Rotation
from src.transforms.simplex import SimplexTranslation
from src.transforms.towers import Tower, rokhlin_tower

__all__ = [
    "Transform",
    "ExplicitMap",
    "PiecewiseTranslation",
    "Rotation",
    "SimplexTranslation",
    "RankOneMachine",
    "StackStep",
    "cut_and_stack",
    "FiniteExtension",
    "Tower",
    "rokhlin_tower",
]
