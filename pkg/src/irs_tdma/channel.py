"""Scenario geometry and channel synthesis.

The gNB-IRS link is a single LoS path with free-space loss. Each IRS-UE link
is a clustered ray model: ``n_clusters`` clusters of ``n_rays`` rays whose
departure and arrival azimuths scatter around the geometric bearing, with
complex Gaussian gains and a log-distance NLoS path loss. All arrays use
half-wavelength spacing and the geometry lives in the horizontal plane
(``height_offset`` adds an IRS-above-UE elevation if wanted).
"""
from dataclasses import dataclass, field, fields, replace
import math

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


def _pair(cast):
    def parse(value):
        if isinstance(value, (tuple, list)):
            parts = value
        else:
            parts = str(value).lower().replace("x", ",").split(",")
        if len(parts) != 2:
            raise ValueError(f"expected two components, got {value!r}")
        return tuple(cast(p) for p in parts)

    return parse


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError(f"expected an integer, got {text!r}")
    return int(value)


@dataclass(frozen=True)
class Scenario:
    """One Monte Carlo drop: geometry, arrays, link budget and seed.

    Defaults reproduce the full-size deployment (K=100, 40x80 IRS). UE
    positions are filled in by :func:`generate_scenario`. ``link_gain_db`` is
    a lumped gain added to the transmit power (0 by default); the desk
    profile uses it to keep a small IRS at the full-size operating SNR.
    """

    cell_radius: float = 167.0
    fov_deg: float = 120.0
    sector_boresight_deg: float = 0.0
    gnb_pos: tuple = (0.0, 0.0)
    irs_pos: tuple = (75.0, 100.0)
    K: int = 100
    n_g: tuple = (8, 8)
    n_u: int = 2
    n_i: tuple = (40, 80)
    tx_power_dbm: float = 33.0
    link_gain_db: float = 0.0
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 1e8
    carrier_hz: float = 28e9
    n_clusters: int = 4
    n_rays: int = 10
    angular_spread_deg: float = 5.0
    pathloss_exponent_nlos: float = 3.19
    height_offset: float = 0.0
    min_irs_distance: float = 1.0
    seed: int = 0
    ue_positions: np.ndarray = field(default=None, repr=False, compare=False)

    @property
    def n_irs(self):
        return self.n_i[0] * self.n_i[1]

    @property
    def n_gnb(self):
        return self.n_g[0] * self.n_g[1]

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.carrier_hz

    @property
    def signal_power(self):
        """Transmit power in watts, with ``link_gain_db`` folded in."""
        return 10 ** ((self.tx_power_dbm + self.link_gain_db - 30) / 10)

    @property
    def noise_power(self):
        return 10 ** ((self.noise_psd_dbm_hz - 30) / 10) * self.bandwidth_hz

    def validate(self):
        """List of human-readable problems; empty when the scenario is usable."""
        problems = []
        if not self.cell_radius > 0:
            problems.append("cell_radius: must be > 0")
        if not 0 < self.fov_deg <= 360:
            problems.append("fov_deg: must lie in (0, 360]")
        if self.K < 1:
            problems.append("K: must be >= 1")
        if min(self.n_g) < 1:
            problems.append("n_g: both dimensions must be >= 1")
        if self.n_u < 1:
            problems.append("n_u: must be >= 1")
        if min(self.n_i) < 1:
            problems.append("n_i: both dimensions must be >= 1")
        if not self.carrier_hz > 0:
            problems.append("carrier_hz: must be > 0")
        if not self.bandwidth_hz > 0:
            problems.append("bandwidth_hz: must be > 0")
        if self.n_clusters < 1 or self.n_rays < 1:
            problems.append("n_clusters/n_rays: must be >= 1")
        if self.angular_spread_deg < 0:
            problems.append("angular_spread_deg: must be >= 0")
        if not 0 <= self.seed < 2**64:
            problems.append("seed: must be an unsigned 64-bit integer")
        return problems


SCENARIO_PARSERS = {
    "cell_radius": float,
    "fov_deg": float,
    "sector_boresight_deg": float,
    "gnb_pos": _pair(float),
    "irs_pos": _pair(float),
    "K": _int,
    "n_g": _pair(_int),
    "n_u": _int,
    "n_i": _pair(_int),
    "tx_power_dbm": float,
    "link_gain_db": float,
    "noise_psd_dbm_hz": float,
    "bandwidth_hz": float,
    "carrier_hz": float,
    "n_clusters": _int,
    "n_rays": _int,
    "angular_spread_deg": float,
    "pathloss_exponent_nlos": float,
    "height_offset": float,
    "min_irs_distance": float,
    "seed": _int,
}
assert set(SCENARIO_PARSERS) == {f.name for f in fields(Scenario)} - {"ue_positions"}


def scenario_from_mapping(values, base=None):
    """Build a Scenario from ``{key: text}``; unknown keys raise ``KeyError``."""
    base = base or Scenario()
    kwargs = {}
    for key, text in values.items():
        if key not in SCENARIO_PARSERS:
            raise KeyError(key)
        try:
            kwargs[key] = SCENARIO_PARSERS[key](text)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"{key}: {exc}") from None
    return replace(base, **kwargs)


def load_scenario(text):
    """Parse ``key = value`` scenario text; unknown keys raise ``ConfigError``."""
    from .config import load_config

    return load_config(text, allowed="scenario").scenario


def _streams(seed):
    pos, chan = np.random.SeedSequence(int(seed)).spawn(2)
    return np.random.default_rng(pos), np.random.default_rng(chan)


def sample_sector(rng, n, radius, fov_deg, boresight_deg=0.0):
    """Uniform points in a circular sector centred at the origin."""
    r = radius * np.sqrt(rng.random(n))
    ang = np.deg2rad(boresight_deg + fov_deg * (rng.random(n) - 0.5))
    return np.column_stack((r * np.cos(ang), r * np.sin(ang)))


def generate_scenario(config):
    """Return ``config`` with UE positions drawn uniformly over the sector.

    Points closer than ``min_irs_distance`` to the IRS are redrawn so that
    every generated drop is buildable.
    """
    problems = config.validate()
    if problems:
        raise ValueError("invalid scenario: " + "; ".join(problems))
    rng, _ = _streams(config.seed)
    gnb = np.asarray(config.gnb_pos, dtype=float)
    irs = np.asarray(config.irs_pos, dtype=float)
    pts = gnb + sample_sector(rng, config.K, config.cell_radius, config.fov_deg, config.sector_boresight_deg)
    while True:
        bad = np.linalg.norm(pts - irs, axis=1) < config.min_irs_distance
        if not bad.any():
            break
        pts[bad] = gnb + sample_sector(
            rng, int(bad.sum()), config.cell_radius, config.fov_deg, config.sector_boresight_deg
        )
    return replace(config, ue_positions=pts)


def steering_vector_upa(rows, cols, azimuth, elevation):
    """Half-wavelength UPA response, row-major over (row, col).

    Entry ``(r, c)`` is ``exp(j*pi*(r*sin(el) + c*sin(az)*cos(el)))``.
    """
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    phase = np.pi * (r * np.sin(elevation) + c * np.sin(azimuth) * np.cos(elevation))
    return np.exp(1j * phase).ravel()


def _steering_many(rows, cols, azimuths, elevations):
    # columns are steering vectors, one per angle pair
    r = np.repeat(np.arange(rows), cols)[:, None]
    c = np.tile(np.arange(cols), rows)[:, None]
    az = np.asarray(azimuths)[None, :]
    el = np.asarray(elevations)[None, :]
    return np.exp(1j * np.pi * (r * np.sin(el) + c * np.sin(az) * np.cos(el)))


def free_space_gain(distance, carrier_hz):
    """Friis power gain ``(lambda / (4 pi d))**2`` between isotropic antennas."""
    lam = SPEED_OF_LIGHT / carrier_hz
    return (lam / (4 * np.pi * np.asarray(distance, dtype=float))) ** 2


def nlos_gain(distance, carrier_hz, exponent):
    """Log-distance loss anchored at free space 1 m: ``PL_FS(1m) * d**-exponent``."""
    return free_space_gain(1.0, carrier_hz) * np.asarray(distance, dtype=float) ** (-exponent)


def _bearing(src, dst):
    d = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    return np.arctan2(d[..., 1], d[..., 0])


@dataclass
class ChannelSet:
    h: np.ndarray
    g: list
    noise_power: float
    signal_power: float


def build_channels(scenario):
    """Synthesize ``H`` (N_I x N_g) and every ``G_k`` (N_U x N_I)."""
    if scenario.ue_positions is None:
        raise ValueError("scenario has no UE positions; call generate_scenario first")
    _, rng = _streams(scenario.seed)
    gnb = np.asarray(scenario.gnb_pos, dtype=float)
    irs = np.asarray(scenario.irs_pos, dtype=float)
    ues = np.asarray(scenario.ue_positions, dtype=float)

    d_gi = float(np.linalg.norm(irs - gnb))
    a_gnb = steering_vector_upa(*scenario.n_g, _bearing(gnb, irs), 0.0)
    a_irs = steering_vector_upa(*scenario.n_i, _bearing(irs, gnb), 0.0)
    h = math.sqrt(free_space_gain(d_gi, scenario.carrier_hz)) * np.outer(a_irs, a_gnb.conj())

    planar = np.linalg.norm(ues - irs, axis=1)
    if np.any(planar < scenario.min_irs_distance):
        k = int(np.argmin(planar))
        raise ValueError(f"UE {k} is collocated with the IRS (distance {planar[k]:.3g} m)")
    dist = np.hypot(planar, scenario.height_offset)
    elev = np.arctan2(scenario.height_offset, planar)
    aod = _bearing(irs, ues)
    aoa = _bearing(ues, irs)

    nc, nr = scenario.n_clusters, scenario.n_rays
    n_paths = nc * nr
    spread = np.deg2rad(scenario.angular_spread_deg)
    gains = np.sqrt(nlos_gain(dist, scenario.carrier_hz, scenario.pathloss_exponent_nlos) / n_paths)
    g_list = []
    for k in range(ues.shape[0]):
        # draw order is fixed and independent of array sizes
        c_dep = spread * rng.standard_normal(nc)
        c_arr = spread * rng.standard_normal(nc)
        r_dep = spread * rng.standard_normal((nc, nr))
        r_arr = spread * rng.standard_normal((nc, nr))
        alpha = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / math.sqrt(2)
        dep = (aod[k] + c_dep[:, None] + r_dep).ravel()
        arr = (aoa[k] + c_arr[:, None] + r_arr).ravel()
        a_tx = _steering_many(*scenario.n_i, dep, np.full(n_paths, -elev[k]))
        a_rx = _steering_many(1, scenario.n_u, arr, np.full(n_paths, elev[k]))
        g_list.append(gains[k] * (a_rx * alpha[None, :]) @ a_tx.conj().T)
    return ChannelSet(h=h, g=g_list, noise_power=scenario.noise_power, signal_power=scenario.signal_power)
