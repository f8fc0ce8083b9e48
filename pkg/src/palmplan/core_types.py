"""Geometric and contact primitives shared by every other module.

Conventions used throughout the package:

* quaternions are stored in (w, x, y, z) order and kept normalized,
* contact frames have axis 0 along the inward normal (pointing into the
  object) and axes 1-2 tangential, right handed,
* wrenches are (force, torque) pairs; in a contact frame the force splits
  into the normal component ``f[0]`` and the tangential pair ``f[1:3]``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

QUAT_TOL = 1e-9
# Boundary-inclusive slack for cone / limit-surface membership tests.
MEMBERSHIP_TOL = 1e-9


def _as_vec(x, n: int) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(n)
    return v


def quat_normalize(q) -> np.ndarray:
    q = _as_vec(q, 4)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ValueError("zero-norm quaternion")
    return q / n


def quat_mul(a, b) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conj(q) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q, v) -> np.ndarray:
    """Rotate vector v by quaternion q (frame-to-world for a pose)."""
    w, x, y, z = q
    u = np.array([x, y, z])
    v = _as_vec(v, 3)
    return v + 2.0 * np.cross(u, np.cross(u, v) + w * v)


def quat_to_matrix(q) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def quat_from_matrix(m) -> np.ndarray:
    """Shepperd's method, stable for all rotation matrices."""
    m = np.asarray(m, dtype=float)
    tr = m[0, 0] + m[1, 1] + m[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    elif m[0, 0] >= m[1, 1] and m[0, 0] >= m[2, 2]:
        s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2
        q = np.array(
            [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
        )
    elif m[1, 1] >= m[2, 2]:
        s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2
        q = np.array(
            [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
        )
    else:
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2
        q = np.array(
            [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
        )
    return quat_normalize(q)


def quat_from_rotvec(r) -> np.ndarray:
    r = _as_vec(r, 3)
    angle = np.linalg.norm(r)
    if angle < 1e-12:
        return np.array([1.0, 0.5 * r[0], 0.5 * r[1], 0.5 * r[2]]) / math.sqrt(
            1.0 + 0.25 * angle * angle
        )
    axis = r / angle
    return np.concatenate([[math.cos(0.5 * angle)], math.sin(0.5 * angle) * axis])


def quat_to_rotvec(q) -> np.ndarray:
    q = quat_normalize(q)
    if q[0] < 0:
        q = -q
    v = q[1:4]
    s = np.linalg.norm(v)
    if s < 1e-12:
        return 2.0 * v
    angle = 2.0 * math.atan2(s, q[0])
    return angle * v / s


def quat_angle(qa, qb) -> float:
    """Great-circle angle between two orientations, in [0, pi]."""
    d = abs(float(np.dot(quat_normalize(qa), quat_normalize(qb))))
    return 2.0 * math.acos(min(1.0, d))


def quat_slerp(qa, qb, t: float) -> np.ndarray:
    qa = quat_normalize(qa)
    qb = quat_normalize(qb)
    if np.dot(qa, qb) < 0:
        qb = -qb
    d = min(1.0, max(-1.0, float(np.dot(qa, qb))))
    theta = math.acos(d)
    if theta < 1e-10:
        return quat_normalize(qa + t * (qb - qa))
    s = math.sin(theta)
    return quat_normalize(
        (math.sin((1 - t) * theta) / s) * qa + (math.sin(t * theta) / s) * qb
    )


def skew(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class Pose3:
    """Rigid-body pose: position in meters plus a unit quaternion (w,x,y,z)."""

    position: np.ndarray
    quaternion: np.ndarray

    def __post_init__(self):
        p = _as_vec(self.position, 3)
        q = quat_normalize(self.quaternion)
        p.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "quaternion", q)

    @staticmethod
    def identity() -> "Pose3":
        return Pose3(np.zeros(3), np.array([1.0, 0.0, 0.0, 0.0]))

    @staticmethod
    def from_matrix(rotation, position) -> "Pose3":
        return Pose3(np.asarray(position, dtype=float), quat_from_matrix(rotation))

    @staticmethod
    def from_vector(v) -> "Pose3":
        """Build from a 7-vector [x, y, z, qw, qx, qy, qz]."""
        v = _as_vec(v, 7)
        return Pose3(v[:3], v[3:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.quaternion])

    def rotation(self) -> np.ndarray:
        return quat_to_matrix(self.quaternion)

    def axis(self, i: int) -> np.ndarray:
        return self.rotation()[:, i]

    def compose(self, other: "Pose3") -> "Pose3":
        """self * other: apply other in this pose's frame."""
        return Pose3(
            self.position + quat_rotate(self.quaternion, other.position),
            quat_mul(self.quaternion, other.quaternion),
        )

    def inverse(self) -> "Pose3":
        qc = quat_conj(self.quaternion)
        return Pose3(-quat_rotate(qc, self.position), qc)

    def apply(self, point) -> np.ndarray:
        return self.position + quat_rotate(self.quaternion, point)

    def rotate(self, vec) -> np.ndarray:
        return quat_rotate(self.quaternion, vec)

    def with_delta(self, dpos, drot) -> "Pose3":
        """Perturb: rotate by rotation-vector drot about this pose's origin,
        then translate by dpos (both in world coordinates)."""
        dq = quat_from_rotvec(drot)
        return Pose3(self.position + _as_vec(dpos, 3), quat_mul(dq, self.quaternion))

    def interpolate(self, other: "Pose3", s: float) -> "Pose3":
        return Pose3(
            (1.0 - s) * self.position + s * other.position,
            quat_slerp(self.quaternion, other.quaternion, s),
        )

    def almost_equal(self, other: "Pose3", tol: float = 1e-9) -> bool:
        return (
            np.linalg.norm(self.position - other.position) <= tol
            and quat_angle(self.quaternion, other.quaternion) <= tol
        )


@dataclass(frozen=True)
class PlanarPose:
    """Pose of the object on the table: x, y in meters, yaw in radians."""

    x: float
    y: float
    yaw: float

    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])


@dataclass(frozen=True)
class Wrench:
    """Force/torque pair; components must be finite."""

    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        f = _as_vec(self.force, 3)
        t = _as_vec(self.torque, 3)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(t))):
            raise ValueError("wrench components must be finite")
        f.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "force", f)
        object.__setattr__(self, "torque", t)

    @staticmethod
    def zero() -> "Wrench":
        return Wrench(np.zeros(3), np.zeros(3))

    @staticmethod
    def from_vector(v) -> "Wrench":
        v = _as_vec(v, 6)
        return Wrench(v[:3], v[3:])

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])

    def __add__(self, other: "Wrench") -> "Wrench":
        return Wrench(self.force + other.force, self.torque + other.torque)

    def scaled(self, s: float) -> "Wrench":
        return Wrench(s * self.force, s * self.torque)


class Primitive(enum.Enum):
    """The four palm manipulation behaviors, in fixed search/tie-break order."""

    GRASP = "grasp"
    PUSH = "push"
    PIVOT = "pivot"
    PULL = "pull"


class ContactKind(enum.Enum):
    POINT = "point"
    PATCH = "patch"


@dataclass(frozen=True)
class PatchModel:
    """Ellipsoidal limit-surface parameters for a surface contact.

    ``ls_coefficient`` relates the peak frictional torque about the patch
    normal to the peak tangential force: tau_max = c * r * f_t_max.
    """

    characteristic_radius: float
    ls_coefficient: float = 0.6

    def __post_init__(self):
        if self.characteristic_radius <= 0 or self.ls_coefficient <= 0:
            raise ValueError("patch parameters must be positive")

    @property
    def torque_scale(self) -> float:
        return self.ls_coefficient * self.characteristic_radius


@dataclass(frozen=True)
class Contact:
    """A single contact: world frame (axis 0 = inward normal), type, friction."""

    frame: Pose3
    kind: ContactKind
    mu: float
    patch: PatchModel | None = None

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("friction coefficient must be positive")
        if self.kind is ContactKind.PATCH and self.patch is None:
            raise ValueError("patch contacts require a PatchModel")

    def normal_world(self) -> np.ndarray:
        return self.frame.axis(0)


def limit_surface_contains(
    patch: PatchModel, mu: float, f_n: float, f_t, tau_z: float
) -> bool:
    """Membership in the ellipsoidal limit surface scaled by the normal force.

    (|f_t| / (mu f_n))^2 + (tau_z / (c r mu f_n))^2 <= 1, boundary inclusive.
    """
    f_t = _as_vec(f_t, 2)
    if f_n < -MEMBERSHIP_TOL:
        return False
    denom = mu * max(f_n, 0.0)
    if denom <= MEMBERSHIP_TOL:
        return bool(
            np.linalg.norm(f_t) <= MEMBERSHIP_TOL and abs(tau_z) <= MEMBERSHIP_TOL
        )
    lhs = (np.linalg.norm(f_t) / denom) ** 2 + (tau_z / (patch.torque_scale * denom)) ** 2
    return bool(lhs <= 1.0 + MEMBERSHIP_TOL)


def cone_contains(contact: Contact, w: Wrench) -> bool:
    """Coulomb membership for a contact-frame wrench, boundary inclusive.

    Point contacts additionally require zero frictional torque; patch
    contacts require zero bending torque and limit-surface membership of
    the (tangential force, spin torque) pair.
    """
    f_n = float(w.force[0])
    f_t = w.force[1:3]
    if f_n < -MEMBERSHIP_TOL:
        return False
    if contact.kind is ContactKind.POINT:
        if np.linalg.norm(w.torque) > MEMBERSHIP_TOL:
            return False
        return bool(np.linalg.norm(f_t) <= contact.mu * max(f_n, 0.0) + MEMBERSHIP_TOL)
    if np.linalg.norm(w.torque[1:3]) > MEMBERSHIP_TOL:
        return False
    return limit_surface_contains(contact.patch, contact.mu, f_n, f_t, float(w.torque[0]))


def grasp_matrix(contact: Contact, reference: Pose3) -> np.ndarray:
    """Wrench transform from the contact frame to world about the reference origin.

    Returns G such that ``G.T @ w`` (w = [force, torque] in contact frame)
    is the equivalent world-frame wrench taken about ``reference.position``.
    """
    rot = contact.frame.rotation()
    r = contact.frame.position - reference.position
    gt = np.zeros((6, 6))
    gt[:3, :3] = rot
    gt[3:, :3] = skew(r) @ rot
    gt[3:, 3:] = rot
    return gt.T


@dataclass(frozen=True)
class FrictionConePoly:
    """Inner polyhedral approximation of a Coulomb cone with k evenly spaced edges."""

    mu: float
    num_facets: int
    edge_directions: np.ndarray = field(repr=False)

    def facet_halfspaces(self) -> np.ndarray:
        """Rows h with h @ f <= 0 describing the polyhedral cone (f contact-frame force).

        Together with f[0] >= 0 these half-spaces carve out exactly the conic
        hull of ``edge_directions``.
        """
        k = self.num_facets
        mid = 2.0 * np.pi * (np.arange(k) + 0.5) / k
        rows = np.zeros((k, 3))
        rows[:, 0] = -self.mu * math.cos(math.pi / k)
        rows[:, 1] = np.cos(mid)
        rows[:, 2] = np.sin(mid)
        return rows


def polyhedral_cone(mu: float, k: int) -> FrictionConePoly:
    """Inscribed polyhedral friction cone with k edges at angles 2*pi*j/k."""
    if k < 4:
        raise ValueError("need at least 4 cone edges")
    if mu <= 0:
        raise ValueError("friction coefficient must be positive")
    ang = 2.0 * np.pi * np.arange(k) / k
    edges = np.stack(
        [np.ones(k), mu * np.cos(ang), mu * np.sin(ang)], axis=1
    ) / math.sqrt(1.0 + mu * mu)
    edges.flags.writeable = False
    return FrictionConePoly(mu=mu, num_facets=k, edge_directions=edges)


def patch_halfspaces(
    patch: PatchModel, mu: float, k: int = 8, bands: int = 4
) -> np.ndarray:
    """Inner polyhedral approximation of the limit-surface ellipsoid.

    Returns rows (a1, a2, b, c) meaning a @ f_t + b * tau_z <= c * f_n.  The
    half-spaces describe the convex hull of points sampled on the ellipsoid
    at k tangential angles and bands+1 spin latitudes, so any force/torque
    satisfying them also satisfies exact limit-surface membership.
    """
    psi = -0.5 * np.pi + np.pi * np.arange(bands + 1) / bands
    mid = 2.0 * np.pi * (np.arange(k) + 0.5) / k
    c_half = math.cos(math.pi / k)
    rows = []
    for m in range(bands):
        p1, p2 = psi[m], psi[m + 1]
        mat = np.array(
            [[c_half * math.cos(p1), math.sin(p1)], [c_half * math.cos(p2), math.sin(p2)]]
        )
        a_coef, b_coef = np.linalg.solve(mat, np.ones(2))
        for ang in mid:
            rows.append(
                [
                    a_coef * math.cos(ang) / mu,
                    a_coef * math.sin(ang) / mu,
                    b_coef / (patch.torque_scale * mu),
                    1.0,
                ]
            )
    return np.array(rows)


def patch_vertices(patch: PatchModel, mu: float, k: int = 8, bands: int = 4) -> np.ndarray:
    """Vertices (f_n=1 slice) of the polyhedron described by patch_halfspaces.

    Rows are (f_t1, f_t2, tau_z) on the exact limit-surface boundary.
    """
    psi = -0.5 * np.pi + np.pi * np.arange(bands + 1) / bands
    ang = 2.0 * np.pi * np.arange(k) / k
    verts = []
    for p in psi:
        if abs(math.cos(p)) < 1e-12:
            verts.append([0.0, 0.0, patch.torque_scale * mu * math.sin(p)])
            continue
        for a in ang:
            verts.append(
                [
                    mu * math.cos(p) * math.cos(a),
                    mu * math.cos(p) * math.sin(a),
                    patch.torque_scale * mu * math.sin(p),
                ]
            )
    return np.array(verts)
