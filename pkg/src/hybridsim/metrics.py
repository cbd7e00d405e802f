"""Achievable sum-rate, hardware power, and power efficiency.

SNR convention: the data-transmission noise variance is N_s / SNR_linear
under the total power constraint ||F||_F^2 = N_s, so with perfect-CSI ZF
the per-user SINR is |h_k f_k|^2 * SNR_linear / N_s exactly. Rates from
estimated-CSI precoders are always evaluated on the true channel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

ARCHITECTURES = ("fully_digital", "full_pahp", "lahp_adaptive")


@dataclass(frozen=True)
class PowerConstants:
    """Per-component consumption in milliwatts."""

    p_amplifier: float = 20.0
    p_phase_shifter: float = 30.0  # 4-bit
    p_splitter: float = 10.0
    p_combiner: float = 10.0
    p_rf_chain: float = 250.0
    p_switch: float = 5.0
    p_transmit: float = 2500.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value <= 0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class RateResult:
    sum_rate: float  # bits/s/Hz
    per_user_sinr: np.ndarray
    scenario: str = ""


def snr_db_to_noise_var(snr_db: float, n_users: int) -> float:
    """Noise variance for a given data SNR under the power convention."""
    return n_users / 10 ** (snr_db / 10)


def sum_rate(
    h_true: np.ndarray,
    precoder: np.ndarray,
    noise_var: float,
    interferers=None,
    scenario: str = "",
) -> RateResult:
    """Shannon sum-rate with intra-cell and optional cross-cell interference.

    ``interferers`` is a list of (cross_channel, cross_precoder) pairs,
    each contributing its full transmit interference to every user.
    """
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    if h_true.shape[1] != precoder.shape[0]:
        raise ValueError(
            f"dimension mismatch: channel {h_true.shape} vs precoder {precoder.shape}"
        )
    gains = h_true @ precoder
    signal = np.abs(np.diag(gains)) ** 2
    intra = np.sum(np.abs(gains) ** 2, axis=1) - signal
    cross = np.zeros(h_true.shape[0])
    for cross_channel, cross_precoder in interferers or ():
        if cross_channel.shape[1] != cross_precoder.shape[0]:
            raise ValueError("dimension mismatch in interferer pair")
        cross += np.sum(np.abs(cross_channel @ cross_precoder) ** 2, axis=1)
    sinr = signal / (intra + cross + noise_var)
    return RateResult(
        sum_rate=float(np.sum(np.log2(1 + sinr))),
        per_user_sinr=sinr,
        scenario=scenario,
    )


def hardware_power(
    arch: str, n: int, n_rf: int, constants: PowerConstants = PowerConstants()
) -> float:
    """Hardware power in milliwatts for one transmitter architecture.

    The fully digital BS uses one amplifier and one RF chain per antenna
    regardless of ``n_rf``.
    """
    if n <= 0 or n_rf <= 0:
        raise ValueError("n and n_rf must be positive")
    c = constants
    if arch == "fully_digital":
        return n * c.p_amplifier + n * c.p_rf_chain
    if arch == "full_pahp":
        per_branch = c.p_phase_shifter
    elif arch == "lahp_adaptive":
        per_branch = c.p_switch
    else:
        raise ValueError(f"unknown architecture {arch!r}")
    return (
        n * c.p_amplifier
        + n_rf * n * per_branch
        + n_rf * c.p_splitter
        + n * c.p_combiner
        + n_rf * c.p_rf_chain
    )


def power_efficiency(
    rate: float,
    arch: str,
    n: int,
    n_rf: int,
    constants: PowerConstants = PowerConstants(),
) -> float:
    """Rate per total consumed watt: rate / (transmit + hardware power)."""
    if rate < 0:
        raise ValueError("rate must be non-negative")
    total_watts = (constants.p_transmit + hardware_power(arch, n, n_rf, constants)) / 1000.0
    return rate / total_watts
