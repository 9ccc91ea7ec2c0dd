"""Wrench, structure matrix, stiffness and elastic energy of the spring network.

Sign conventions
----------------
``resultant_wrench`` returns the planar force and moment that the delta
spring forces (reading minus pretension) exert on the mobile frame, i.e.
the restoring wrench; its fourth entry is the pitch torque
``M_x = f7 b7 - f8 b8`` carried through load cells 7 and 8. Moments are
taken as ``det(R b_i, f_i)`` (lever arm first), which makes the planar part
equal to minus the gradient of the elastic energy.

``stiffness_matrix`` is the positive stiffness seen by the operator:
``-dW/dX`` on the planar block and ``dM_x/dtheta`` on the pitch entry.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometry
from .geometry import DeviceGeometry
from .kinematics import _force_array, _pose_array, guide_vectors, placement_sign


@dataclass(frozen=True)
class Wrench:
    fx: float
    fy: float
    mz: float
    mx: float

    def as_array(self) -> np.ndarray:
        return np.array([self.fx, self.fy, self.mz, self.mx])


def _unit_guides(pose, geom):
    vec, rb = guide_vectors(pose, geom)
    lengths = np.linalg.norm(vec, axis=-1)
    if np.any(lengths == 0):
        raise DegenerateGeometry("a guide length vanished (coincident attachment points)")
    return vec / lengths[..., None], rb, lengths


def _det(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def planar_structure_matrix(pose, geom: DeviceGeometry) -> np.ndarray:
    """3x6 block J; column i is +-[u_i, det(R b_i, u_i)]."""
    u, rb, _ = _unit_guides(pose, geom)
    cols = np.concatenate([u, _det(rb, u)[..., None]], axis=-1)
    return placement_sign(geom) * np.swapaxes(cols, -1, -2)


def structure_matrix(pose, geom: DeviceGeometry) -> np.ndarray:
    """4x8 block-diagonal J_s = diag(J, [b7, -b8]) so that W = J_s f."""
    js = np.zeros((4, 8))
    js[:3, :6] = planar_structure_matrix(pose, geom)
    js[3, 6:] = [geom.toe_lever, -geom.heel_lever]
    return js


def delta_forces(frame, geom: DeviceGeometry) -> np.ndarray:
    return _force_array(frame) - geom.pretension


def resultant_wrench(frame, pose, geom: DeviceGeometry) -> Wrench:
    u, rb, _ = _unit_guides(pose, geom)
    f = delta_forces(frame, geom)
    planar = placement_sign(geom) * f[:6, None] * u
    force = planar.sum(axis=0)
    mz = _det(rb, planar).sum()
    mx = f[6] * geom.toe_lever - f[7] * geom.heel_lever
    return Wrench(float(force[0]), float(force[1]), float(mz), float(mx))


def _structure_derivative(pose, geom):
    """dJ/dX as an array of shape (3, 6, 3): [row, guide, coordinate]."""
    u, rb, lengths = _unit_guides(pose, geom)
    jrb = np.stack([-rb[:, 1], rb[:, 0]], axis=-1)  # d(R b)/dyaw
    dvec = np.zeros((6, 3, 2))  # d(a - p - R b)/d(x, y, yaw)
    dvec[:, 0] = [-1.0, 0.0]
    dvec[:, 1] = [0.0, -1.0]
    dvec[:, 2] = -jrb
    proj = np.eye(2) - u[:, :, None] * u[:, None, :]
    du = np.einsum("iab,ikb->ika", proj, dvec) / lengths[:, None, None]
    drb = np.zeros((6, 3, 2))
    drb[:, 2] = jrb
    dm = _det(drb, u[:, None, :]) + _det(rb[:, None, :], du)
    out = np.empty((3, 6, 3))
    out[0] = du[..., 0]
    out[1] = du[..., 1]
    out[2] = dm
    return placement_sign(geom) * out


def stiffness_matrix(pose, frame, geom: DeviceGeometry) -> np.ndarray:
    """K_s = diag(J C J^T - (dJ/dX) f, K_p) for the delta-force state of ``frame``."""
    q = _pose_array(pose)
    f = delta_forces(frame, geom)
    J = planar_structure_matrix(q, geom)
    C = np.diag(geom.stiffness)
    K = J @ C @ J.T - np.einsum("rik,i->rk", _structure_derivative(q, geom), f[:6])
    m_x = f[6] * geom.toe_lever - f[7] * geom.heel_lever
    k7, k8 = geom.torsion_stiffness
    Ks = np.zeros((4, 4))
    Ks[:3, :3] = K
    Ks[3, 3] = k7 if m_x > 0 else k8
    return Ks


# ---------------------------------------------------------------------------
# energy


def elastic_energy(pose, geom: DeviceGeometry):
    """Elastic energy (N*cm) relative to the home pose.

    Each compression spring contributes 1/2 k (delta^2 - delta_0^2) plus the
    work of the pretension not explained by k * delta_0, which sums to
    ``sign * f0 * dL + 1/2 k dL^2``. Torsion springs add 1/2 K_p theta^2.
    Broadcasts over leading pose dimensions; a 3-vector pose has no pitch term.
    """
    q = _pose_array(pose)
    vec, _ = guide_vectors(q, geom)
    dl = np.linalg.norm(vec, axis=-1) - geom.home_lengths
    f0 = geom.pretension[:6]
    u = (placement_sign(geom) * f0 * dl + 0.5 * geom.stiffness * dl * dl).sum(axis=-1)
    if q.shape[-1] > 3:
        theta = q[..., 3]
        k7, k8 = geom.torsion_stiffness
        u = u + 0.5 * np.where(theta > 0, k7, k8) * theta * theta
    return u[()] if np.ndim(u) == 0 else u


def restoring_wrench(pose, geom: DeviceGeometry) -> Wrench:
    """Analytic -grad U: total spring forces on the frame and the torsional torque."""
    q = _pose_array(pose)
    u, rb, lengths = _unit_guides(q, geom)
    dl = lengths - geom.home_lengths
    mag = placement_sign(geom) * geom.pretension[:6] + geom.stiffness * dl
    planar = mag[:, None] * u
    force = planar.sum(axis=0)
    mz = _det(rb, planar).sum()
    theta = q[3] if q.shape[-1] > 3 else 0.0
    k7, k8 = geom.torsion_stiffness
    mx = -(k7 if theta > 0 else k8) * theta
    return Wrench(float(force[0]), float(force[1]), float(mz), float(mx))


@dataclass
class EnergyLandscape:
    x: np.ndarray
    y: np.ndarray
    yaw: np.ndarray
    energy: np.ndarray  # (nx, ny, nyaw), offset so the global minimum is 0
    minima: list  # [(x, y, yaw), ...] strict local minima
    plateaus: list  # non-strict candidates (ties with a neighbour)
    offset: float = 0.0

    def rows(self):
        """Yield (x_cm, y_cm, yaw_rad, energy) in C order of the grid."""
        for (i, j, k), e in np.ndenumerate(self.energy):
            yield self.x[i], self.y[j], self.yaw[k], e


def local_minima(values: np.ndarray):
    """Indices of strict and non-strict local minima over the full 3**d - 1 neighbourhood.

    Neighbours outside the grid are ignored.
    """
    padded = np.pad(values, 1, mode="constant", constant_values=np.inf)
    strict = np.ones(values.shape, dtype=bool)
    weak = np.ones(values.shape, dtype=bool)
    for shift in itertools.product((-1, 0, 1), repeat=values.ndim):
        if not any(shift):
            continue
        nb = padded[tuple(slice(1 + s, n + 1 + s) for s, n in zip(shift, values.shape))]
        strict &= values < nb
        weak &= values <= nb
    return np.argwhere(strict), np.argwhere(weak & ~strict)


def _axis(bounds, limit, n):
    if bounds is None:
        # mirror-exact samples: -v and v both present, home hit exactly for odd n
        return limit * np.linspace(-1.0, 1.0, n)
    return np.linspace(bounds[0], bounds[1], n)


def energy_scan(geom: DeviceGeometry, nx=51, ny=51, nyaw=25, x_range=None, y_range=None,
                yaw_range=None) -> EnergyLandscape:
    """Elastic energy over an (x, y, yaw) grid and its local minima."""
    if min(nx, ny, nyaw) < 21:
        raise ValueError("grid resolution must be at least 21 per axis")
    x = _axis(x_range, geom.x_limit, nx)
    y = _axis(y_range, geom.y_limit, ny)
    yaw = _axis(yaw_range, geom.yaw_limit, nyaw)
    X, Y, PHI = np.meshgrid(x, y, yaw, indexing="ij")
    energy = elastic_energy(np.stack([X, Y, PHI], axis=-1), geom)
    offset = float(energy.min())
    energy = energy - offset
    strict, weak = local_minima(energy)
    to_point = lambda idx: (float(x[idx[0]]), float(y[idx[1]]), float(yaw[idx[2]]))  # noqa: E731
    return EnergyLandscape(x, y, yaw, energy, [to_point(i) for i in strict],
                           [to_point(i) for i in weak], offset)
