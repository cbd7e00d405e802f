"""Multi-path channel generation, steering vectors, and the lens-array DFT.

Channels follow the Saleh-Valenzuela geometric model with one LoS path of
unit magnitude and a configurable number of NLoS paths. The array is a
half-wavelength ULA with a symmetric element index, so the lens transform
is exactly a unitary spatial DFT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array with half-wavelength spacing."""

    n_antennas: int
    element_spacing_wavelengths: float = 0.5

    def __post_init__(self):
        if self.n_antennas < 2:
            raise ValueError(f"need at least 2 antennas, got {self.n_antennas}")
        if self.element_spacing_wavelengths != 0.5:
            raise ValueError("element spacing is fixed at half a wavelength")


@dataclass(frozen=True)
class PathComponent:
    gain: complex
    angle: float  # radians, in [-pi/2, pi/2]


@dataclass(frozen=True)
class BeamspaceTransform:
    """Unitary N x N spatial DFT whose columns are orthogonal beams."""

    matrix: np.ndarray
    beam_directions: np.ndarray  # spatial frequencies, spacing 1/N


@dataclass(frozen=True)
class ScenarioConfig:
    n_antennas: int = 256
    n_users: int = 16
    n_cells: int = 1
    seed: int | tuple = 0
    n_nlos: int = 2
    nlos_variance: float = 0.1


@dataclass
class ChannelRealization:
    """Per-(BS, cell) channel matrices plus the per-user path parameters.

    ``spatial[b, c]`` is the N_s x N matrix from BS ``b`` to the users of
    cell ``c``; ``paths[b][c][k]`` holds the path list behind row ``k``.
    """

    spatial: np.ndarray  # [n_cells, n_cells, n_users, N]
    paths: list
    n_cells: int

    def serving(self, cell: int) -> np.ndarray:
        return self.spatial[cell, cell]

    def cross(self, bs: int, cell: int) -> np.ndarray:
        return self.spatial[bs, cell]


def _steer(n: int, spatial_freq: float | np.ndarray) -> np.ndarray:
    """Array response at a given spatial frequency, unit norm.

    Element n (0-based) is exp(-j*2*pi*psi*(n - (N-1)/2)) / sqrt(N).
    """
    idx = np.arange(n) - (n - 1) / 2
    psi = np.atleast_1d(np.asarray(spatial_freq, dtype=float))
    out = np.exp(-2j * np.pi * np.outer(idx, psi)) / np.sqrt(n)
    return out[:, 0] if np.isscalar(spatial_freq) else out


def steering_vector(geometry: ArrayGeometry, angle: float) -> np.ndarray:
    """Steering vector of the ULA toward ``angle`` (radians)."""
    if not -np.pi / 2 <= angle <= np.pi / 2:
        raise ValueError(f"angle {angle} outside [-pi/2, pi/2]")
    psi = geometry.element_spacing_wavelengths * np.sin(angle)
    return _steer(geometry.n_antennas, float(psi))


def dft_matrix(geometry: ArrayGeometry) -> BeamspaceTransform:
    """Unitary spatial DFT of the lens array.

    Column m (1-based) is the steering vector at spatial frequency
    (m - (N+1)/2) / N; the grid covers the full range with spacing 1/N.
    """
    n = geometry.n_antennas
    psi = (np.arange(n) - (n - 1) / 2) / n
    return BeamspaceTransform(matrix=_steer(n, psi), beam_directions=psi)


def gen_user_channel(
    geometry: ArrayGeometry,
    rng: np.random.Generator,
    n_nlos: int = 2,
    nlos_variance: float = 0.1,
) -> tuple[np.ndarray, list[PathComponent]]:
    """Draw one user's 1 x N channel row and its path parameters.

    The LoS gain has unit magnitude and uniform phase; each NLoS gain is
    circularly symmetric complex Gaussian with the given variance; all
    angles are IID uniform on [-pi/2, pi/2].
    """
    if n_nlos < 0:
        raise ValueError("n_nlos must be non-negative")
    if nlos_variance <= 0:
        raise ValueError("nlos_variance must be positive")
    angles = rng.uniform(-np.pi / 2, np.pi / 2, size=1 + n_nlos)
    gains = np.empty(1 + n_nlos, dtype=complex)
    gains[0] = np.exp(1j * rng.uniform(0.0, 2 * np.pi))
    if n_nlos:
        gains[1:] = np.sqrt(nlos_variance / 2) * (
            rng.standard_normal(n_nlos) + 1j * rng.standard_normal(n_nlos)
        )
    row = np.zeros(geometry.n_antennas, dtype=complex)
    paths = []
    for g, theta in zip(gains, angles):
        row += g * steering_vector(geometry, theta).conj()
        paths.append(PathComponent(gain=complex(g), angle=float(theta)))
    return row, paths


def gen_scenario(config: ScenarioConfig) -> ChannelRealization:
    """Generate all (BS, cell) channel matrices from a seeded stream.

    Serving and cross-cell channels use the identical generative model;
    every (BS, cell, user) triple gets its own spawned substream so the
    realization is reproducible and users are independent.
    """
    if config.n_cells not in (1, 2):
        raise ValueError(f"unsupported cell count {config.n_cells}")
    geom = ArrayGeometry(config.n_antennas)
    k_c, n_s, n = config.n_cells, config.n_users, config.n_antennas
    children = iter(np.random.SeedSequence(config.seed).spawn(k_c * k_c * n_s))
    spatial = np.zeros((k_c, k_c, n_s, n), dtype=complex)
    paths = [[[None] * n_s for _ in range(k_c)] for _ in range(k_c)]
    for b in range(k_c):
        for c in range(k_c):
            for k in range(n_s):
                rng = np.random.default_rng(next(children))
                row, p = gen_user_channel(
                    geom, rng, config.n_nlos, config.nlos_variance
                )
                spatial[b, c, k] = row
                paths[b][c][k] = p
    return ChannelRealization(spatial=spatial, paths=paths, n_cells=k_c)


def to_beamspace(spatial: np.ndarray, transform: BeamspaceTransform) -> np.ndarray:
    """Beamspace channel H_tilde = H U."""
    if spatial.shape[-1] != transform.matrix.shape[0]:
        raise ValueError(
            f"dimension mismatch: channel has {spatial.shape[-1]} antennas, "
            f"transform is {transform.matrix.shape[0]} x {transform.matrix.shape[1]}"
        )
    return spatial @ transform.matrix
