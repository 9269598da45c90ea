"""SO(3) helpers: skew-symmetric matrices and body-to-inertial mapping.

Estimation runs entirely in the inertial frame; rotation matrices enter
only to map body-frame velocity measurements (e.g. from a DVL) into that
frame. Rotations are supplied as plain 3x3 arrays (row-major lists of 9
numbers in config files) and are validated, never integrated.
"""

import numpy as np

# Tolerances admit rotation matrices written out with ~12 significant digits.
ORTHONORMALITY_TOL = 1e-10
DETERMINANT_TOL = 1e-10


def as_vec3(a, name="vector"):
    """Coerce to a finite float array of shape (3,)."""
    v = np.asarray(a, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"{name} must have shape (3,), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite, got {v}")
    return v


def skew(a):
    """Skew-symmetric (cross-product) matrix of a 3-vector.

    For a = [a1, a2, a3]:

        S(a) = [  0  -a3   a2 ]
               [ a3    0  -a1 ]
               [-a2   a1    0 ]

    so that S(a) @ b == np.cross(a, b) for any b, and S(a).T == -S(a).
    """
    a = as_vec3(a)
    return np.array(
        [
            [0.0, -a[2], a[1]],
            [a[2], 0.0, -a[0]],
            [-a[1], a[0], 0.0],
        ]
    )


def check_rotation(R, name="rotation"):
    """Validate that R is a proper rotation matrix (orthonormal, det +1).

    Returns the matrix as a float array. Raises ValueError otherwise.
    """
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError(f"{name} must have shape (3, 3), got {R.shape}")
    defect = np.abs(R.T @ R - np.eye(3)).max()
    if defect > ORTHONORMALITY_TOL:
        raise ValueError(
            f"{name} is not orthonormal: max |R^T R - I| = {defect:.3e}"
        )
    det = np.linalg.det(R)
    if abs(det - 1.0) > DETERMINANT_TOL:
        raise ValueError(f"{name} must have determinant +1, got {det!r}")
    return R


def to_inertial(R, v_body):
    """Map a body-frame vector into the inertial frame: R @ v_body.

    R must be a valid rotation (checked); the Euclidean norm is preserved.
    """
    R = check_rotation(R)
    return R @ as_vec3(v_body, "v_body")


def rotation_from_axis_angle(axis, angle):
    """Rodrigues formula: rotation of `angle` radians about `axis`."""
    axis = as_vec3(axis, "axis")
    n = np.linalg.norm(axis)
    if n == 0.0:
        raise ValueError("axis must be nonzero")
    k = skew(axis / n)
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)
