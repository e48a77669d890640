"""Line-of-sight indoor optical channel with a single ceiling LED.

Photodiodes face the ceiling, so the irradiance and incidence angles are
equal. Reflections are not modelled.
"""

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RoomGeometry:
    room: tuple = (5.0, 5.0, 3.0)
    led_position: tuple = (2.5, 2.5, 3.0)
    user_height: float = 0.85
    cell_radius: float = 1.8

    def __post_init__(self):
        if self.led_position[2] <= self.user_height:
            raise ValueError("LED must be mounted above the user plane")
        if self.cell_radius <= 0:
            raise ValueError("cell_radius must be positive")

    @property
    def vertical_separation(self):
        return self.led_position[2] - self.user_height


def lambertian_order(half_angle):
    """Lambertian mode number for a half-power semi-angle in degrees."""
    if not 0 < half_angle < 90:
        raise ValueError(f"half-power angle must lie in (0, 90) degrees, got {half_angle}")
    m = -math.log(2) / math.log(math.cos(math.radians(half_angle)))
    # absorb the ulp-level error of cos() so e.g. 60 degrees gives exactly 1
    return round(m, 12)


@dataclass(frozen=True)
class LedParams:
    power: float = 1.0
    half_angle: float = 60.0

    def __post_init__(self):
        if self.power <= 0:
            raise ValueError("LED power must be positive")
        lambertian_order(self.half_angle)

    @property
    def m(self):
        return lambertian_order(self.half_angle)


@dataclass(frozen=True)
class PdParams:
    area: float = 1e-4
    fov: float = 35.0
    responsivity: float = 0.4
    filter_gain: float = 1.0
    concentrator_gain: float = 1.0

    def __post_init__(self):
        if self.area <= 0 or self.responsivity <= 0:
            raise ValueError("PD area and responsivity must be positive")
        if not 0 < self.fov < 90:
            raise ValueError(f"FOV must lie in (0, 90) degrees, got {self.fov}")


@dataclass
class UserTerminal:
    position: tuple
    gain: float
    group: int = 0
    radial_distance: float = field(default=0.0, compare=False)


def los_gain(geometry, led, pd, user_xy):
    """Optical DC gain of the direct path to a PD at ``user_xy`` on the user plane.

    Accepts a single ``(x, y)`` pair or an ``(n, 2)`` array; returns a float or
    an array to match.
    """
    xy = np.asarray(user_xy, dtype=float)
    dx = xy[..., 0] - geometry.led_position[0]
    dy = xy[..., 1] - geometry.led_position[1]
    H = geometry.vertical_separation
    d2 = dx * dx + dy * dy + H * H
    cos_t = H / np.sqrt(d2)
    m = led.m
    h = ((m + 1) * pd.area / (2 * np.pi * d2)) * cos_t ** m \
        * pd.filter_gain * pd.concentrator_gain * cos_t
    # compare angles, not cosines, so a PD exactly at the FOV edge is still lit
    h = np.where(np.arccos(np.clip(cos_t, -1, 1)) <= np.radians(pd.fov), h, 0.0)
    return float(h) if h.ndim == 0 else h


def footprint_radius(geometry, pd):
    """Radius of the disc on the user plane inside the PD field of view."""
    return geometry.vertical_separation * math.tan(math.radians(pd.fov))


def sampling_radius(geometry, pd):
    return min(geometry.cell_radius, footprint_radius(geometry, pd))


def drop_users(rng, n, geometry, led, pd):
    """Drop ``n`` users uniformly over the lit part of the cell."""
    if n < 1:
        raise ValueError("need at least one user")
    # stay strictly inside the FOV cone so every user has a nonzero gain
    r_max = sampling_radius(geometry, pd) * (1 - 1e-12)
    r = r_max * np.sqrt(rng.random(n))
    theta = 2 * np.pi * rng.random(n)
    x = geometry.led_position[0] + r * np.cos(theta)
    y = geometry.led_position[1] + r * np.sin(theta)
    gains = los_gain(geometry, led, pd, np.column_stack([x, y]))
    return [
        UserTerminal((float(x[i]), float(y[i]), geometry.user_height), float(gains[i]),
                     radial_distance=float(r[i]))
        for i in range(n)
    ]


def form_groups(users):
    """Split users at the median gain: weak half is group 1, strong half group 2.

    Ties go by ascending distance from the LED axis, then input order. The
    terminals' ``group`` fields are set in place.
    """
    if len(users) % 2:
        raise ValueError(f"need an even number of users, got {len(users)}")
    order = sorted(range(len(users)),
                   key=lambda i: (users[i].gain, users[i].radial_distance, i))
    half = len(users) // 2
    weak = [users[i] for i in order[:half]]
    strong = [users[i] for i in order[half:]]
    for u in weak:
        u.group = 1
    for u in strong:
        u.group = 2
    return weak, strong


def noise_variance(N0, B):
    return N0 * B


def link_snr(h, P, pd, N0, B):
    """Electrical SNR ``(R h P)^2 / (N0 B)`` referenced to average optical power."""
    if P <= 0 or N0 <= 0 or B <= 0:
        raise ValueError("P, N0 and B must be positive")
    g = (pd.responsivity * np.asarray(h, dtype=float) * P) ** 2 / noise_variance(N0, B)
    return float(g) if g.ndim == 0 else g
