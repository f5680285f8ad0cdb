"""Per-UE IRS configuration and beamformer optimization.

For fixed beamformers the received amplitude is ``|sum_n v_n e^{j theta_n} u_n|``
with ``v = w_u^T G`` and ``u = H w_g``; it is maximized by co-phasing every
term. For a fixed configuration the best beamformers are the dominant
singular pair of the cascade ``G diag(e^{j theta}) H``. ``optimize_ue``
alternates the two.
"""
from dataclasses import dataclass, field
import logging

import numpy as np

from .linalg import SingularConvergenceError, apply_irs, as_matrix, top_singular_triplet

log = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def wrap_phase(theta):
    """Map angles onto the canonical interval ``[0, 2*pi)``."""
    t = np.mod(np.asarray(theta, dtype=np.float64), TWO_PI)
    # mod can round a tiny negative up to exactly 2*pi
    return np.where(t >= TWO_PI, 0.0, t)


def codebook(bits):
    n = 2 ** int(bits)
    return TWO_PI * np.arange(n) / n


def quantize(theta, bits):
    """Nearest codeword of the ``bits``-bit uniform phase codebook.

    Distance is circular; an exact tie goes to the smaller codeword index.
    """
    if bits < 1:
        raise ValueError("quantizer needs bits >= 1")
    n = 2 ** int(bits)
    step = TWO_PI / n
    x = wrap_phase(theta) / step
    lo = np.floor(x)
    frac = x - lo
    hi = lo + 1
    m = np.where(frac > 0.5, hi, lo)
    m = np.where((frac == 0.5) & (hi == n), 0.0, m)
    return np.mod(m, n) * step


def align_phases(v, u):
    """Co-phasing configuration ``theta_n = -(angle(v_n) + angle(u_n)) mod 2pi``.

    A zero entry has angle 0; its term vanishes whatever the phase.
    """
    v = np.asarray(v, dtype=np.complex128).ravel()
    u = np.asarray(u, dtype=np.complex128).ravel()
    if v.shape != u.shape:
        raise ValueError(f"length mismatch: {v.size} vs {u.size}")
    return wrap_phase(-(np.angle(v) + np.angle(u)))


def snr(g, h, w_u, w_g, theta, signal_power, noise_power):
    """Linear SNR ``|w_u^T G Phi H w_g|^2 sx / (||w_u||^2 sn)``."""
    w_u = np.asarray(w_u, dtype=np.complex128).ravel()
    w_g = np.asarray(w_g, dtype=np.complex128).ravel()
    cascade = apply_irs(g, theta, h)
    if cascade.shape != (w_u.size, w_g.size):
        raise ValueError(f"beamformer sizes {w_u.size}, {w_g.size} do not fit cascade {cascade.shape}")
    amp = w_u @ cascade @ w_g
    return float(abs(amp) ** 2 * signal_power / (np.vdot(w_u, w_u).real * noise_power))


@dataclass
class UeLink:
    """A UE with its beamformers and individually optimal configuration.

    ``coupling`` is ``v * u`` for the stored beamformers and ``scale`` the
    factor turning ``|sum coupling * e^{j theta}|^2`` into SNR, so the SNR of
    any configuration is cheap to re-evaluate.
    """

    ue_index: int
    g: np.ndarray
    w_u: np.ndarray
    w_g: np.ndarray
    phi_star: np.ndarray
    gamma_star: float
    iterations: int
    converged: bool = True
    coupling: np.ndarray = field(default=None, repr=False)
    scale: float = 1.0
    rates: list = field(default_factory=list, repr=False)

    def snr(self, theta):
        return float(abs(np.dot(self.coupling, np.exp(1j * np.asarray(theta)))) ** 2 * self.scale)

    @property
    def rate_star(self):
        return float(np.log2(1.0 + self.gamma_star))


def snr_matrix(links, thetas):
    """SNR of every UE (rows) under every configuration (columns)."""
    coupling = np.stack([l.coupling for l in links])
    scale = np.array([l.scale for l in links])
    phasors = np.exp(1j * np.atleast_2d(np.asarray(thetas, dtype=np.float64))).T
    return np.abs(coupling @ phasors) ** 2 * scale[:, None]


def _beamformers(g, h, theta):
    try:
        trip = top_singular_triplet(apply_irs(g, theta, h))
    except SingularConvergenceError as exc:
        trip = exc.triplet
    return trip.left.conj(), trip.right


def _link(ue_index, g, h, w_u, w_g, theta, signal_power, noise_power, iterations, converged, rates):
    v = w_u @ g
    u = h @ w_g
    scale = signal_power / (np.vdot(w_u, w_u).real * noise_power)
    coupling = v * u
    gamma = float(abs(np.dot(coupling, np.exp(1j * theta))) ** 2 * scale)
    return UeLink(ue_index, g, w_u, w_g, theta, gamma, iterations, converged, coupling, scale, rates)


def optimize_ue(g, h, signal_power, noise_power, bits=None, rate_tol=1e-4, max_iter=50,
                ue_index=0, quantize_inside=True):
    """Alternating beamformer / IRS optimization for one UE.

    Starting from the all-zero configuration, each iteration takes the
    dominant singular pair of the cascade as beamformers and then co-phases
    the IRS (quantizing if ``bits`` is given and ``quantize_inside``). It
    stops when the rate ``log2(1+SNR)`` moves by less than ``rate_tol`` or a
    quantized configuration repeats. The best iterate is returned;
    ``converged`` is False if ``max_iter`` ran out.

    With ``quantize_inside=False`` the continuous optimum is quantized once
    at the end, keeping its beamformers.
    """
    g, h = as_matrix(g), as_matrix(h)
    if rate_tol <= 0:
        raise ValueError("rate_tol must be positive")
    inner_bits = bits if quantize_inside else None
    theta = np.zeros(g.shape[1])
    prev = -np.inf
    best = None
    rates = []
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        w_u, w_g = _beamformers(g, h, theta)
        v = w_u @ g
        u = h @ w_g
        new = align_phases(v, u)
        if inner_bits is not None:
            new = quantize(new, inner_bits)
        gamma = abs(np.dot(v * u, np.exp(1j * new))) ** 2 * signal_power / noise_power
        rate = float(np.log2(1.0 + gamma))
        rates.append(rate)
        if best is None or rate >= best[0]:
            best = (rate, w_u, w_g, new)
        repeated = inner_bits is not None and np.array_equal(new, theta)
        theta = new
        if abs(rate - prev) < rate_tol or repeated:
            converged = True
            break
        prev = rate
    _, w_u, w_g, theta = best
    if bits is not None and not quantize_inside:
        theta = quantize(theta, bits)
    return _link(ue_index, g, h, w_u, w_g, theta, signal_power, noise_power, it, converged, rates)


def optimize_all(channels, bits=None, rate_tol=1e-4, max_iter=50, quantize_inside=True):
    """Run :func:`optimize_ue` for every UE of a :class:`~irs_tdma.channel.ChannelSet`."""
    links = [
        optimize_ue(g, channels.h, channels.signal_power, channels.noise_power, bits=bits,
                    rate_tol=rate_tol, max_iter=max_iter, ue_index=k, quantize_inside=quantize_inside)
        for k, g in enumerate(channels.g)
    ]
    slow = sum(1 for l in links if l.iterations > 10 or not l.converged)
    if links and slow / len(links) > 0.01:
        log.info("%d of %d UEs needed more than 10 alternation iterations", slow, len(links))
    return links
