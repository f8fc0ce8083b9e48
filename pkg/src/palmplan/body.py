"""Box object model: corners, edges, faces and stable table placements.

Face indexing is fixed as 0:+x 1:-x 2:+y 3:-y 4:+z 5:-z (object frame).
Corners are indexed by sign bits, edges by sorted corner pairs; estimator
feature ids and planner contact anchors all refer to these indices.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core_types import PlanarPose, Pose3

_FACE_NORMALS = np.array(
    [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ]
)
# Reference tangent per face: maps to the world heading at yaw = 0.
_FACE_TANGENTS = np.array(
    [
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
    ]
)


@dataclass(frozen=True)
class Edge:
    point: np.ndarray
    direction: np.ndarray
    length: float
    corners: tuple[int, int]


@dataclass(frozen=True)
class Face:
    center: np.ndarray
    normal: np.ndarray
    tangent: np.ndarray
    corners: tuple[int, int, int, int]
    edges: tuple[int, int, int, int]
    half_size: tuple[float, float]


@dataclass(frozen=True)
class ObjectModel:
    """Rigid box centered on its COM with known mass and geometry."""

    half_extents: np.ndarray
    mass: float
    corners: np.ndarray = field(init=False, repr=False)
    edges: tuple[Edge, ...] = field(init=False, repr=False)
    faces: tuple[Face, ...] = field(init=False, repr=False)

    def __post_init__(self):
        h = np.asarray(self.half_extents, dtype=float).reshape(3)
        if np.any(h <= 0):
            raise ValueError("half extents must be positive")
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        h.flags.writeable = False
        object.__setattr__(self, "half_extents", h)

        corners = np.array(
            [s * h for s in itertools.product((-1.0, 1.0), repeat=3)]
        )
        corners.flags.writeable = False
        object.__setattr__(self, "corners", corners)

        edges = []
        for a, b in itertools.combinations(range(8), 2):
            diff = corners[b] - corners[a]
            if np.count_nonzero(np.abs(diff) > 1e-12) == 1:
                length = float(np.linalg.norm(diff))
                edges.append(
                    Edge(
                        point=corners[a],
                        direction=diff / length,
                        length=length,
                        corners=(a, b),
                    )
                )
        object.__setattr__(self, "edges", tuple(edges))

        faces = []
        for fi in range(6):
            n = _FACE_NORMALS[fi]
            t = _FACE_TANGENTS[fi]
            on_face = tuple(
                ci for ci in range(8) if abs(corners[ci] @ n - h @ np.abs(n)) < 1e-12
            )
            face_edges = tuple(
                ei
                for ei, e in enumerate(edges)
                if e.corners[0] in on_face and e.corners[1] in on_face
            )
            axes = [i for i in range(3) if abs(n[i]) < 0.5]
            faces.append(
                Face(
                    center=(h @ np.abs(n)) * n,
                    normal=n,
                    tangent=t,
                    corners=on_face,
                    edges=face_edges,
                    half_size=(float(h[axes[0]]), float(h[axes[1]])),
                )
            )
        object.__setattr__(self, "faces", tuple(faces))

    @property
    def stable_placements(self) -> list[int]:
        """Faces the box can rest on: COM must project inside the support patch."""
        stable = []
        for fi, face in enumerate(self.faces):
            proj = -face.center  # COM relative to the face center, along the face
            in_plane = proj - (proj @ face.normal) * face.normal
            t1 = face.tangent
            t2 = np.cross(face.normal, t1)
            if (
                abs(in_plane @ t1) <= face.half_size[0] + 1e-12
                and abs(in_plane @ t2) <= face.half_size[1] + 1e-12
            ):
                stable.append(fi)
        return stable

    def rest_height(self, face: int) -> float:
        return float(self.half_extents @ np.abs(self.faces[face].normal))

    def resting_pose(self, face: int, planar: PlanarPose) -> Pose3:
        """Pose with the given face flat on the table (z = 0 plane)."""
        f = self.faces[face]
        t2 = np.cross(f.normal, f.tangent)
        obj_basis = np.stack([f.tangent, t2, f.normal], axis=1)
        w1 = np.array([math.cos(planar.yaw), math.sin(planar.yaw), 0.0])
        wn = np.array([0.0, 0.0, -1.0])
        world_basis = np.stack([w1, np.cross(wn, w1), wn], axis=1)
        rot = world_basis @ obj_basis.T
        return Pose3.from_matrix(
            rot, np.array([planar.x, planar.y, self.rest_height(face)])
        )

    def placement_of(self, pose: Pose3) -> tuple[int, PlanarPose]:
        """Resting face (most downward outward normal) and planar pose."""
        rot = pose.rotation()
        downness = [float((rot @ f.normal)[2]) for f in self.faces]
        face = int(np.argmin(downness))
        t_world = rot @ self.faces[face].tangent
        yaw = math.atan2(t_world[1], t_world[0])
        return face, PlanarPose(float(pose.position[0]), float(pose.position[1]), yaw)

    def corner_world(self, pose: Pose3, idx: int) -> np.ndarray:
        return pose.apply(self.corners[idx])

    def edge_world(self, pose: Pose3, idx: int) -> tuple[np.ndarray, np.ndarray]:
        e = self.edges[idx]
        return pose.apply(e.point), pose.rotate(e.direction)

    def face_frame_world(self, pose: Pose3, face: int) -> Pose3:
        """Contact-style frame on a face: axis 0 = inward normal (into the box)."""
        f = self.faces[face]
        rot = pose.rotation()
        n_in = -(rot @ f.normal)
        t1 = rot @ f.tangent
        t2 = np.cross(n_in, t1)
        return Pose3.from_matrix(
            np.stack([n_in, t1, t2], axis=1), pose.apply(f.center)
        )
