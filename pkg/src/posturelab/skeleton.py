"""25-joint body model: joint identifiers, bone topology, posture labels.

Joint and label index orders are frozen constants: feature vector layout and
confusion matrix layout depend on them, as does the dataset file format
(exact joint/label spellings are the wire contract).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import MissingJoint, NonFiniteCoordinate, UnknownLabel


class JointId(IntEnum):
    """The 25 tracked joints of the Kinect v2 body model, in canonical order."""

    SpineBase = 0
    SpineMid = 1
    Neck = 2
    Head = 3
    ShoulderLeft = 4
    ElbowLeft = 5
    WristLeft = 6
    HandLeft = 7
    ShoulderRight = 8
    ElbowRight = 9
    WristRight = 10
    HandRight = 11
    HipLeft = 12
    KneeLeft = 13
    AnkleLeft = 14
    FootLeft = 15
    HipRight = 16
    KneeRight = 17
    AnkleRight = 18
    FootRight = 19
    SpineShoulder = 20
    HandTipLeft = 21
    ThumbLeft = 22
    HandTipRight = 23
    ThumbRight = 24


NUM_JOINTS = 25

JOINT_NAMES: tuple[str, ...] = tuple(j.name for j in JointId)

# Spanning tree over the 25 joints, rooted at SpineBase. 24 (parent, child)
# bones; the standard Kinect v2 hierarchy.
BONES: tuple[tuple[JointId, JointId], ...] = (
    (JointId.SpineBase, JointId.SpineMid),
    (JointId.SpineMid, JointId.SpineShoulder),
    (JointId.SpineShoulder, JointId.Neck),
    (JointId.Neck, JointId.Head),
    (JointId.SpineShoulder, JointId.ShoulderLeft),
    (JointId.ShoulderLeft, JointId.ElbowLeft),
    (JointId.ElbowLeft, JointId.WristLeft),
    (JointId.WristLeft, JointId.HandLeft),
    (JointId.HandLeft, JointId.HandTipLeft),
    (JointId.WristLeft, JointId.ThumbLeft),
    (JointId.SpineShoulder, JointId.ShoulderRight),
    (JointId.ShoulderRight, JointId.ElbowRight),
    (JointId.ElbowRight, JointId.WristRight),
    (JointId.WristRight, JointId.HandRight),
    (JointId.HandRight, JointId.HandTipRight),
    (JointId.WristRight, JointId.ThumbRight),
    (JointId.SpineBase, JointId.HipLeft),
    (JointId.HipLeft, JointId.KneeLeft),
    (JointId.KneeLeft, JointId.AnkleLeft),
    (JointId.AnkleLeft, JointId.FootLeft),
    (JointId.SpineBase, JointId.HipRight),
    (JointId.HipRight, JointId.KneeRight),
    (JointId.KneeRight, JointId.AnkleRight),
    (JointId.AnkleRight, JointId.FootRight),
)


class PostureLabel(IntEnum):
    """The five posture classes, in the frozen confusion-matrix order."""

    Standing = 0
    Bending = 1
    Sitting = 2
    Walking = 3
    Crouching = 4


NUM_CLASSES = 5

LABEL_NAMES: tuple[str, ...] = tuple(c.name for c in PostureLabel)


def label_from_name(name: str, line: int | None = None) -> PostureLabel:
    try:
        return PostureLabel[name]
    except KeyError:
        raise UnknownLabel(name, line) from None


def joint_neighbors(j: JointId) -> tuple[JointId, ...]:
    """Neighbors of ``j`` in the bone tree, sorted by canonical index."""
    out = []
    for a, b in BONES:
        if a == j:
            out.append(b)
        elif b == j:
            out.append(a)
    return tuple(sorted(out))


def bone_pairs_at_joint(j: JointId) -> tuple[tuple[JointId, JointId], ...]:
    """All unordered pairs of bone-tree neighbors meeting at ``j``.

    Pairs come out lower-index-first, enumerated in lexicographic order.
    A leaf joint yields an empty tuple.
    """
    nbrs = joint_neighbors(j)
    return tuple(
        (nbrs[i], nbrs[k])
        for i in range(len(nbrs))
        for k in range(i + 1, len(nbrs))
    )


def adjacent_angle_triples() -> tuple[tuple[JointId, JointId, JointId], ...]:
    """The 29 (endpoint, vertex, endpoint) triples of adjacent bone segments.

    Emitted per vertex joint in canonical order, neighbor pairs in the
    bone_pairs_at_joint order. This sequence fixes the layout of the
    adjacent-segment angle features.
    """
    triples = []
    for j in JointId:
        for a, b in bone_pairs_at_joint(j):
            triples.append((a, j, b))
    return tuple(triples)


ADJACENT_ANGLE_TRIPLES = adjacent_angle_triples()


@dataclass(frozen=True)
class Skeleton:
    """One observed pose: 25 finite 3D joint positions (meters, camera frame).

    The positions array is (25, 3) float64 in canonical joint order and is
    frozen after construction, so skeletons are safe to share across tasks.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.shape != (NUM_JOINTS, 3):
            raise ValueError(f"positions must be (25, 3), got {pos.shape}")
        pos = np.ascontiguousarray(pos)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    def __getitem__(self, j: JointId) -> np.ndarray:
        return self.positions[int(j)]

    def transformed(
        self,
        rotation: np.ndarray | None = None,
        translation: Sequence[float] | np.ndarray | None = None,
        scale: float = 1.0,
    ) -> "Skeleton":
        """Apply scale, then rotation, then translation to every joint."""
        pos = self.positions * float(scale)
        if rotation is not None:
            pos = pos @ np.asarray(rotation, dtype=np.float64).T
        if translation is not None:
            pos = pos + np.asarray(translation, dtype=np.float64)
        return Skeleton(pos)


@dataclass(frozen=True)
class Observation:
    """A skeleton with its label (optional for prediction inputs) and capture metadata."""

    skeleton: Skeleton
    label: PostureLabel | None = None
    participant_id: str = ""
    orientation_deg: float = 0.0
    distance_m: float = 0.0


def validate_skeleton(
    raw: Mapping[str, Iterable[float]], line: int | None = None
) -> Skeleton:
    """Build a Skeleton from a name -> (x, y, z) mapping.

    Total: either returns a Skeleton satisfying its invariants or raises a
    typed error; extra keys beyond the 25 canonical names are ignored.

    Raises:
        MissingJoint: a canonical joint name is absent.
        NonFiniteCoordinate: a coordinate is NaN/inf, or not 3 numbers.
    """
    pos = np.empty((NUM_JOINTS, 3), dtype=np.float64)
    for j in JointId:
        if j.name not in raw:
            raise MissingJoint(j.name, line)
        coords = list(raw[j.name])
        if len(coords) != 3:
            raise NonFiniteCoordinate(j.name, "xyz", line)
        for axis, value in zip("xyz", coords):
            try:
                v = float(value)
            except (TypeError, ValueError):
                raise NonFiniteCoordinate(j.name, axis, line) from None
            if not math.isfinite(v):
                raise NonFiniteCoordinate(j.name, axis, line)
        pos[int(j)] = coords
    return Skeleton(pos)
