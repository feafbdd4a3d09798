"""Geometry and line-of-sight channels for the IRS-aided link.

All arrays are uniform linear arrays laid along the global x-axis. Angles
are measured from the positive x-axis and folded into ``[0, pi]`` since a
ULA along x only sees ``cos(theta)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .signal_model import ScenarioConfig

__all__ = [
    "GeometryError",
    "ArraySpec",
    "NodeLayout",
    "IrsPhases",
    "ChannelSet",
    "LINKS",
    "steering_vector",
    "rank1_channel",
    "angles_from_layout",
    "path_gain",
    "irs_phases",
    "build_channels",
]

DEFAULT_WAVELENGTH = 0.1  # 3 GHz carrier

# (transmitter, receiver) node names for every physical link
LINKS = {
    "AI": ("alice", "irs"),
    "IB": ("irs", "bob"),
    "AB": ("alice", "bob"),
    "MI": ("mallory", "irs"),
    "MB": ("mallory", "bob"),
    "AM": ("alice", "mallory"),
    "IM": ("irs", "mallory"),
}


class GeometryError(ValueError):
    """Raised for coincident nodes or non-positive distances."""


@dataclass(frozen=True)
class ArraySpec:
    num_antennas: int
    wavelength: float = DEFAULT_WAVELENGTH
    element_spacing: float | None = None

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 1:
            raise ValueError(f"num_antennas must be a positive integer, got {self.num_antennas}")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2)
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")


@dataclass(frozen=True)
class NodeLayout:
    alice_pos: tuple[float, float] = (0.0, 0.0)
    irs_pos: tuple[float, float] = (50.0, 50.0)
    bob_pos: tuple[float, float] = (500.0, 0.0)
    mallory_pos: tuple[float, float] = (400.0, -50.0)

    def __post_init__(self):
        names = ("alice", "irs", "bob", "mallory")
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                if self.distance(a, b) <= 0:
                    raise GeometryError(f"degenerate geometry: {a} and {b} coincide")

    def position(self, node: str) -> np.ndarray:
        return np.asarray(getattr(self, f"{node}_pos"), dtype=float)

    def distance(self, a: str, b: str) -> float:
        return float(np.hypot(*(self.position(b) - self.position(a))))


@dataclass(frozen=True)
class IrsPhases:
    phases: np.ndarray
    mode: str = "random"

    def __post_init__(self):
        if self.mode not in ("random", "aligned", "fixed"):
            raise ValueError(f"unknown IRS phase mode {self.mode!r}")
        phases = np.mod(np.asarray(self.phases, dtype=float), 2 * np.pi)
        object.__setattr__(self, "phases", phases)

    @property
    def matrix(self) -> np.ndarray:
        """Diagonal reflection matrix ``diag(exp(j*phi))``."""
        return np.diag(np.exp(1j * self.phases))


@dataclass(frozen=True)
class ChannelSet:
    """Rank-1 link matrices (already conjugate-transposed), gains and IRS state.

    ``H_XY_h`` is the ``(rx, tx)`` matrix ``h(theta_r) h(theta_t)^H`` of link
    X->Y. ``angles`` holds the ``(theta_t, theta_r)`` pair for every link.
    """

    H_IB_h: np.ndarray
    H_AI_h: np.ndarray
    H_AB_h: np.ndarray
    H_MI_h: np.ndarray
    H_MB_h: np.ndarray
    g_AIB: float
    g_AB: float
    g_MIB: float
    g_MB: float
    theta: IrsPhases
    H_A1: np.ndarray
    H_M1: np.ndarray
    angles: dict = field(default_factory=dict)

    @property
    def Theta(self) -> np.ndarray:
        return self.theta.matrix

    @property
    def irs_to_bob(self) -> np.ndarray:
        """``H_IB^H Theta``, the known part of the reflected jamming path."""
        return self.H_IB_h * np.exp(1j * self.theta.phases)[None, :]

    @property
    def h_ib_rx(self) -> np.ndarray:
        """Bob's steering vector towards the IRS (left factor of ``H_IB^H``)."""
        u, s, _ = np.linalg.svd(self.H_IB_h)
        return u[:, 0] * np.exp(-1j * np.angle(u[0, 0]))


def steering_vector(theta: float, array: ArraySpec) -> np.ndarray:
    """Unit-norm ULA response ``h(theta)``.

    Element ``n`` (1-based) carries phase ``2*pi*Psi(n)`` with
    ``Psi(n) = -(n - (N+1)/2) * d * cos(theta) / lambda``, i.e. the phase
    reference sits at the array centre.
    """
    N = array.num_antennas
    n = np.arange(1, N + 1)
    psi = -(n - (N + 1) / 2) * array.element_spacing * np.cos(theta) / array.wavelength
    return np.exp(2j * np.pi * psi) / np.sqrt(N)


def rank1_channel(theta_r: float, theta_t: float, rx_array: ArraySpec, tx_array: ArraySpec) -> np.ndarray:
    """LoS channel ``h(theta_r) h(theta_t)^H`` of shape ``(N_r, N_t)``."""
    return np.outer(steering_vector(theta_r, rx_array), steering_vector(theta_t, tx_array).conj())


def _fold(dx: float, dy: float) -> float:
    return abs(float(np.arctan2(dy, dx)))


def angles_from_layout(layout: NodeLayout) -> dict[str, tuple[float, float]]:
    """Departure and arrival angle of each link, keyed as in :data:`LINKS`.

    The departure angle uses the displacement from transmitter to receiver,
    the arrival angle the displacement from receiver back to transmitter.
    """
    out = {}
    for link, (tx, rx) in LINKS.items():
        delta = layout.position(rx) - layout.position(tx)
        if not np.any(delta):
            raise GeometryError(f"degenerate geometry: {tx} and {rx} coincide")
        out[link] = (_fold(delta[0], delta[1]), _fold(-delta[0], -delta[1]))
    return out


def path_gain(distance: float, exponent: float = 2.0, ref_distance: float = 1.0) -> float:
    """Power-law path gain ``(ref_distance / distance) ** exponent``."""
    if distance <= 0:
        raise GeometryError(f"degenerate geometry: distance {distance} <= 0")
    return float((ref_distance / distance) ** exponent)


def irs_phases(mode: str, H_IB_h: np.ndarray, H_AI_h: np.ndarray, rng: np.random.Generator,
               fixed: np.ndarray | None = None) -> IrsPhases:
    M = H_IB_h.shape[1]
    if mode == "random":
        return IrsPhases(rng.uniform(0.0, 2 * np.pi, size=M), "random")
    if mode == "aligned":
        # co-phase every IRS element of the cascade at Bob's first antenna;
        # H_AI^H has identical columns up to scale, so one column suffices
        cascade = H_IB_h[0, :] * H_AI_h[:, 0]
        return IrsPhases(-np.angle(cascade), "aligned")
    if mode == "fixed":
        if fixed is None or len(fixed) != M:
            raise ValueError(f"fixed IRS mode needs {M} phases")
        return IrsPhases(np.asarray(fixed, dtype=float), "fixed")
    raise ValueError(f"unknown IRS phase mode {mode!r}")


def build_channels(config: ScenarioConfig, rng_seed: int | None = None) -> ChannelSet:
    """Assemble every link, gain and the equivalent channels ``H_A1``, ``H_M1``.

    Only the random IRS mode consumes randomness; ``rng_seed`` defaults to
    ``config.seed``.
    """
    seed = config.seed if rng_seed is None else rng_seed
    rng = np.random.default_rng(seed)
    layout = config.layout
    arrays = {"alice": config.alice, "bob": config.bob, "mallory": config.mallory, "irs": config.irs}
    angles = angles_from_layout(layout)

    def link(name):
        tx, rx = LINKS[name]
        theta_t, theta_r = angles[name]
        return rank1_channel(theta_r, theta_t, arrays[rx], arrays[tx])

    def gain(name):
        tx, rx = LINKS[name]
        return path_gain(layout.distance(tx, rx), config.path_loss_exponent, config.ref_distance)

    H_IB_h, H_AI_h, H_AB_h = link("IB"), link("AI"), link("AB")
    H_MI_h, H_MB_h = link("MI"), link("MB")
    g_AIB = gain("AI") * gain("IB")
    g_AB = gain("AB")
    g_MIB = gain("MI") * gain("IB")
    g_MB = gain("MB")

    theta = irs_phases(config.irs_mode, H_IB_h, H_AI_h, rng, config.irs_fixed_phases)
    Th = theta.matrix
    H_A1 = np.sqrt(g_AIB) * H_IB_h @ Th @ H_AI_h + np.sqrt(g_AB) * H_AB_h
    H_M1 = np.sqrt(g_MIB) * H_IB_h @ Th @ H_MI_h + np.sqrt(g_MB) * H_MB_h
    return ChannelSet(H_IB_h, H_AI_h, H_AB_h, H_MI_h, H_MB_h, g_AIB, g_AB, g_MIB, g_MB,
                      theta, H_A1, H_M1, angles)
