import numpy as np

CENTER = 0.5


def view_angle(alpha):
    """Rotation angle and axis-swap flag of the rigid transform ``alpha`` in [0, 1)."""
    if not 0 <= alpha < 1:
        raise ValueError(f'Invalid alpha: {alpha}, must be in [0, 1)')
    swap = alpha >= 0.5
    phi = 4 * np.pi * (alpha - 0.5) if swap else 4 * np.pi * alpha
    return phi, swap


def rotate(xy, phi, center=CENTER):
    xy = np.asarray(xy, dtype=np.float64)
    if phi == 0:
        return xy.copy()
    cos, sin = np.cos(phi), np.sin(phi)
    x, y = xy[..., 0] - center, xy[..., 1] - center
    return np.stack([x * cos - y * sin + center,
                     x * sin + y * cos + center], -1)


def swap_axes(xy):
    xy = np.asarray(xy, dtype=np.float64)
    return xy[..., ::-1].copy()


def wrap_angle(beta):
    """Orientation modulo pi, in [0, pi)."""
    beta = float(np.mod(beta, np.pi))
    if beta >= np.pi:
        beta -= np.pi
    return beta


def transform_points(xy, alpha):
    phi, swap = view_angle(alpha)
    xy = rotate(xy, phi)
    return swap_axes(xy) if swap else xy


def inverse_transform_points(xy, alpha):
    phi, swap = view_angle(alpha)
    xy = swap_axes(xy) if swap else np.asarray(xy, dtype=np.float64)
    return rotate(xy, -phi)


def transform_orientation(beta, alpha):
    phi, swap = view_angle(alpha)
    beta = beta + phi
    # reflection across y = x maps a direction angle t to pi/2 - t
    return wrap_angle(np.pi / 2 - beta) if swap else wrap_angle(beta)


def inverse_transform_orientation(beta, alpha):
    phi, swap = view_angle(alpha)
    if swap:
        beta = np.pi / 2 - beta
    return wrap_angle(beta - phi)


def pairwise_distances(xy):
    xy = np.asarray(xy, dtype=np.float64)
    diff = xy[:, None, :] - xy[None, :, :]
    return np.sqrt((diff ** 2).sum(-1))
