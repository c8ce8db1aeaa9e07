"""Modified Shepp-Logan head phantom.

Each row of ``MODIFIED_SHEPP_LOGAN`` is one ellipse:
``(intensity, semi_axis_x, semi_axis_y, center_x, center_y, angle_deg)`` on the
square ``[-1, 1]^2`` with ``y`` pointing up. A pixel takes the sum of the
intensities of the ellipses that contain its center.
"""

import numpy as np

MODIFIED_SHEPP_LOGAN = np.array([
    [1.0, 0.69, 0.92, 0.0, 0.0, 0.0],
    [-0.8, 0.6624, 0.8740, 0.0, -0.0184, 0.0],
    [-0.2, 0.1100, 0.3100, 0.22, 0.0, -18.0],
    [-0.2, 0.1600, 0.4100, -0.22, 0.0, 18.0],
    [0.1, 0.2100, 0.2500, 0.0, 0.35, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, 0.1, 0.0],
    [0.1, 0.0460, 0.0460, 0.0, -0.1, 0.0],
    [0.1, 0.0460, 0.0230, -0.08, -0.605, 0.0],
    [0.1, 0.0230, 0.0230, 0.0, -0.606, 0.0],
    [0.1, 0.0230, 0.0460, 0.06, -0.605, 0.0],
])


def pixel_coordinates(size):
    """Pixel-center coordinates: column ``j`` -> x, row ``i`` -> y (top row is y=1)."""
    idx = np.arange(size, dtype=np.float64)
    x = (2.0 * idx - (size - 1)) / (size - 1)
    return x, -x


def inside_ellipse(x, y, ellipse):
    _, a, b, x0, y0, phi = ellipse
    phi = np.deg2rad(phi)
    c, s = np.cos(phi), np.sin(phi)
    dx = x - x0
    dy = y - y0
    return ((dx * c + dy * s) / a) ** 2 + ((dy * c - dx * s) / b) ** 2 <= 1.0


def shepp_logan(size, ellipses=MODIFIED_SHEPP_LOGAN):
    """``size x size`` phantom with values clipped to [0, 1]."""
    size = int(size)
    if size < 16:
        raise ValueError(f"phantom size must be >= 16, got {size}")
    xs, ys = pixel_coordinates(size)
    X, Y = np.meshgrid(xs, ys)
    img = np.zeros((size, size))
    for e in ellipses:
        img[inside_ellipse(X, Y, e)] += e[0]
    return np.clip(img, 0.0, 1.0)
