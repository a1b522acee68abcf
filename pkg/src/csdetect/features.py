"""Registry of the 40 eye/head tracking feature dimensions.

The registry fixes canonical column names and ordering for the tracking CSV
format, groups the dimensions into 10 semantic groups (the unit of feature
ablation), and provides the named subsets used by the experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnknownSubset

N_FEATURES = 40

# (raw block, axis suffixes) in canonical column order. Blocks mirror the
# source recording layout; several blocks merge into one semantic group below.
_BLOCKS = [
    ("conv_dist", [""], "ConvDist"),
    ("pupil_diam", ["l", "r"], "PupilDiameter"),
    ("gaze_dir", ["l_x", "l_y", "l_z", "r_x", "r_y", "r_z"], "GazeDirHMD"),
    ("eye_open", ["l", "r"], "EyeOpenness"),
    ("pupil_pos", ["l_x", "l_y", "r_x", "r_y"], "PupilPosition"),
    ("eye_origin", ["l_x", "l_y", "l_z", "r_x", "r_y", "r_z"], "EyeOrigin"),
    ("cgaze_origin_hmd", ["x", "y", "z"], "CombinedGazeOrigin"),
    ("cgaze_dir_hmd", ["x", "y", "z"], "CombinedGazeDirection"),
    ("cgaze_origin_world", ["x", "y", "z"], "CombinedGazeOrigin"),
    ("cgaze_dir_world", ["x", "y", "z"], "CombinedGazeDirection"),
    ("head_quat", ["w", "x", "y", "z"], "HeadQuaternion"),
    ("head_euler", ["x", "y", "z"], "HeadEuler"),
]

GROUP_NAMES = (
    "ConvDist",
    "EyeOpenness",
    "PupilDiameter",
    "PupilPosition",
    "GazeDirHMD",
    "CombinedGazeOrigin",
    "CombinedGazeDirection",
    "EyeOrigin",
    "HeadQuaternion",
    "HeadEuler",
)


@dataclass(frozen=True)
class FeatureDescriptor:
    name: str        # canonical CSV column name
    block: str       # raw recording block the column came from
    group: str       # semantic group used for ablation
    index: int       # position in the 40-dim feature vector


@dataclass(frozen=True)
class FeatureSubset:
    name: str
    indices: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.indices)


class FeatureRegistry:
    """Fixed table of the 40 tracking dimensions and their semantic groups."""

    def __init__(self):
        descriptors = []
        for block, axes, group in _BLOCKS:
            for axis in axes:
                name = f"{block}_{axis}" if axis else block
                descriptors.append(
                    FeatureDescriptor(name, block, group, len(descriptors))
                )
        self.descriptors: tuple[FeatureDescriptor, ...] = tuple(descriptors)
        self.names: tuple[str, ...] = tuple(d.name for d in descriptors)
        self.groups: dict[str, tuple[int, ...]] = {
            g: tuple(d.index for d in descriptors if d.group == g)
            for g in GROUP_NAMES
        }
        assert len(self.descriptors) == N_FEATURES

    def __len__(self) -> int:
        return len(self.descriptors)

    def group(self, name: str) -> FeatureSubset:
        if name not in self.groups:
            raise UnknownSubset(f"group:{name}")
        return FeatureSubset(f"group:{name}", self.groups[name])

    def subset(self, name: str) -> FeatureSubset:
        """Resolve a named subset: head7, eye16, optimal23, all40 or group:<G>."""
        if name.startswith("group:"):
            return self.group(name[len("group:"):])
        if name not in _SUBSET_GROUPS:
            raise UnknownSubset(name)
        indices = sorted(
            i for g in _SUBSET_GROUPS[name] for i in self.groups[g]
        )
        return FeatureSubset(name, tuple(indices))


# Named subsets as unions of semantic groups. head7 covers the head-motion
# groups, eye16 the three strongest eye groups, optimal23 their union.
_SUBSET_GROUPS = {
    "head7": ("HeadQuaternion", "HeadEuler"),
    "eye16": ("PupilPosition", "EyeOrigin", "CombinedGazeOrigin"),
    "optimal23": (
        "PupilPosition",
        "EyeOrigin",
        "CombinedGazeOrigin",
        "HeadQuaternion",
        "HeadEuler",
    ),
    "all40": GROUP_NAMES,
}

_REGISTRY = None


def registry() -> FeatureRegistry:
    """The shared, immutable feature registry."""
    global _REGISTRY
    if _REGISTRY is None:
        _REGISTRY = FeatureRegistry()
    return _REGISTRY


def resolve_subset(name: str) -> FeatureSubset:
    return registry().subset(name)


def project(features: np.ndarray, subset: FeatureSubset) -> np.ndarray:
    """Restrict a 40-vector (or n x 40 matrix) to the subset's columns."""
    features = np.asarray(features)
    if features.shape[-1] != N_FEATURES:
        raise DimensionMismatch(
            f"expected trailing dimension {N_FEATURES}, got {features.shape[-1]}"
        )
    return features[..., list(subset.indices)]
