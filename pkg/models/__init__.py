from .dataset import Dataset, GroupPartition

__all__ = [
    "Dataset",
    "GroupPartition",
]
