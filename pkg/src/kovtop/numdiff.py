"""Central finite differences with per-coordinate steps h_i = scale*(1+|y_i|)."""
import numpy as np

DEFAULT_SCALE = 1e-6


def central_jacobian(f, y, scale: float = DEFAULT_SCALE) -> np.ndarray:
    """Jacobian of a vector map f at y; column i from a central difference."""
    y = np.asarray(y, dtype=float)
    f0 = np.asarray(f(y), dtype=float)
    J = np.empty((f0.shape[0], y.shape[0]))
    for i in range(y.shape[0]):
        h = scale * (1.0 + abs(y[i]))
        up = y.copy()
        dn = y.copy()
        up[i] += h
        dn[i] -= h
        J[:, i] = (np.asarray(f(up), dtype=float) - np.asarray(f(dn), dtype=float)) / (2.0 * h)
    return J


def central_gradient(f, y, scale: float = DEFAULT_SCALE) -> np.ndarray:
    """Gradient of a scalar function f at y."""
    y = np.asarray(y, dtype=float)
    g = np.empty(y.shape[0])
    for i in range(y.shape[0]):
        h = scale * (1.0 + abs(y[i]))
        up = y.copy()
        dn = y.copy()
        up[i] += h
        dn[i] -= h
        g[i] = (f(up) - f(dn)) / (2.0 * h)
    return g
