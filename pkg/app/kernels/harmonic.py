# app/kernels/harmonic.py
"""Closed-form derivatives of the Newtonian potential E(x) = 1/(4 pi |x|)."""
import numpy as np

from app.utils.errors import PreconditionError

DELTA = np.eye(3)


def unit_and_radius(x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (3,):
        raise PreconditionError(f"points must have a trailing axis of length 3, got shape {x.shape}")
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise PreconditionError("harmonic potential derivatives are singular at x = 0")
    return x / r[..., None], r


def sym_delta_unit(n: np.ndarray) -> np.ndarray:
    """delta_hj n_k + delta_hk n_j + delta_jk n_h, indexed [..., j, h, k]."""
    d = DELTA
    return (np.einsum("hj,...k->...jhk", d, n)
            + np.einsum("hk,...j->...jhk", d, n)
            + np.einsum("jk,...h->...jhk", d, n))


def outer3(n: np.ndarray) -> np.ndarray:
    return np.einsum("...j,...h,...k->...jhk", n, n, n)


def harmonic_derivatives(x, order: int) -> np.ndarray:
    """
    order 0: E; 1: E_{x_j}; 2: R_jk = E_{x_j x_k}; 3: F_{j;h,k} = d_h d_j d_k E.

    Shapes: (...), (..., 3), (..., 3, 3), (..., 3, 3, 3). Rejects x = 0.
    """
    n, r = unit_and_radius(x)
    four_pi = 4.0 * np.pi
    if order == 0:
        return 1.0 / (four_pi * r)
    if order == 1:
        return -n / (four_pi * r ** 2)[..., None]
    if order == 2:
        nn = np.einsum("...j,...k->...jk", n, n)
        return (3.0 * nn - DELTA) / (four_pi * r ** 3)[..., None, None]
    if order == 3:
        return (3.0 * sym_delta_unit(n) - 15.0 * outer3(n)) / (four_pi * r ** 4)[..., None, None, None]
    raise PreconditionError(f"derivative order must be 0, 1, 2 or 3, got {order}")
