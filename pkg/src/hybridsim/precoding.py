"""Transmit precoders for the three architectures.

Fully digital and dimension-reduced zero forcing, the two-stage phased
array scheme with quantized phase shifters, the four beam selection rules
for the lens array, and the greedy OMP factorization of a target precoder
into steering atoms.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .estimation import DirectionDictionary


class ZFRegularizationWarning(UserWarning):
    """Raised as a warning when ZF needed a ridge to invert the Gram."""


@dataclass(frozen=True)
class PhaseCodebookConfig:
    """Phase-shifter resolution: phases restricted to {2*pi*k / 2**bits}.

    ``bits=None`` means unquantized (continuous) phases.
    """

    bits: int | None = 4

    @property
    def phase_step(self) -> float:
        return 2 * np.pi / 2**self.bits if self.bits is not None else np.pi / 16


@dataclass(frozen=True)
class BeamSet:
    indices: tuple

    def __post_init__(self):
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("beam indices must be distinct")

    def __len__(self):
        return len(self.indices)


@dataclass
class PrecoderPair:
    analog: np.ndarray  # [N x N_RF]
    digital: np.ndarray  # [N_RF x N_s]
    architecture: str

    @property
    def combined(self) -> np.ndarray:
        return self.analog @ self.digital


def zf_precoder(
    h_eff: np.ndarray,
    analog: np.ndarray | None = None,
    total_power: float | None = None,
) -> np.ndarray:
    """Zero-forcing digital stage D = H^H (H H^H)^-1, power normalized.

    Each column of the combined precoder (analog @ D when an analog
    stage is given) is scaled to the same norm, so every user gets
    equal transmit power and ||F||_F^2 = total_power (default N_s).
    Column scaling keeps H_eff @ D diagonal. A numerically singular
    Gram matrix gets a 1e-12 ridge and a warning so the caller can
    flag the trial.
    """
    n_users = h_eff.shape[0]
    if total_power is None:
        total_power = float(n_users)
    gram = h_eff @ h_eff.conj().T
    scale_ref = np.trace(gram).real / n_users
    if not np.isfinite(np.linalg.cond(gram)) or np.linalg.cond(gram) > 1e12:
        gram = gram + 1e-12 * max(scale_ref, 1.0) * np.eye(n_users)
        warnings.warn(
            "near-singular effective channel; ZF regularized",
            ZFRegularizationWarning,
            stacklevel=2,
        )
    digital = h_eff.conj().T @ np.linalg.inv(gram)
    combined = digital if analog is None else analog @ digital
    col_norms = np.linalg.norm(combined, axis=0, keepdims=True)
    # a degenerate (regularized) system can zero out a user's column;
    # that user simply gets no power rather than poisoning the scaling
    col_norms = np.where(col_norms > 0, col_norms, 1.0)
    digital = digital * (np.sqrt(total_power / n_users) / col_norms)
    return digital


def matched_codeword(
    h_row: np.ndarray, codebook: PhaseCodebookConfig = PhaseCodebookConfig()
) -> np.ndarray:
    """Phase-shifter codeword maximizing |h a| for one user.

    Over the codebook of all unit-modulus vectors with phases in the
    quantized set, the maximizer is the entrywise conjugate phase of the
    channel rounded to the nearest quantized phase.
    """
    n = h_row.shape[0]
    phases = np.angle(h_row.conj())
    if codebook.bits is not None:
        step = codebook.phase_step
        phases = np.round(phases / step) * step
    return np.exp(1j * phases) / np.sqrt(n)


def _next_best_codeword(
    h_row: np.ndarray, taken: list, codebook: PhaseCodebookConfig
) -> np.ndarray:
    """Best codeword not in ``taken``, searched by cheapest phase flips."""
    base = matched_codeword(h_row, codebook)
    step = codebook.phase_step
    candidates = [base]
    for n_idx in range(h_row.shape[0]):
        for sign in (1.0, -1.0):
            flipped = base.copy()
            flipped[n_idx] *= np.exp(1j * sign * step)
            candidates.append(flipped)
    candidates.sort(key=lambda a: -np.abs(h_row @ a))
    for cand in candidates:
        if not any(np.allclose(cand, t) for t in taken):
            return cand
    raise RuntimeError("no distinct codeword available")


def two_stage_full_pahp(
    h_est: np.ndarray,
    n_rf: int,
    codebook: PhaseCodebookConfig = PhaseCodebookConfig(),
) -> PrecoderPair:
    """Two-stage scheme: per-user analog beam, then ZF on H A.

    Stage one gives each user, in index order, the phase-shifter
    codeword maximizing its signal power (the quantized matched filter);
    a user whose codeword collides with an earlier one takes its best
    remaining codeword, found by single-phase flips. Stage two
    zero-forces the effective channel H A.
    """
    n_users, n = h_est.shape
    if n_rf != n_users:
        raise ValueError("two-stage scheme needs one RF chain per user")
    analog = np.zeros((n, n_rf), dtype=complex)
    taken: list = []
    for k in range(n_users):
        word = matched_codeword(h_est[k], codebook)
        if any(np.allclose(word, t) for t in taken):
            word = _next_best_codeword(h_est[k], taken, codebook)
        taken.append(word)
        analog[:, k] = word
    digital = zf_precoder(h_est @ analog, analog=analog)
    return PrecoderPair(analog=analog, digital=digital, architecture="full_pahp")


def _snr_to_noise_var(snr_db: float, n_users: int) -> float:
    return n_users / 10 ** (snr_db / 10)


def beam_subset_rate(
    beamspace: np.ndarray, beams, noise_var: float, ridge: float = 1e-9
) -> float:
    """ZF sum-rate of the dimension-reduced system on the given beams.

    Exact when the reduced channel has full row rank; below feasibility
    (fewer beams than users) a ridge-regularized precoder is evaluated
    with its residual interference, which keeps the greedy objective
    well defined at every step.
    """
    n_users = beamspace.shape[0]
    reduced = beamspace[:, list(beams)]
    gram = reduced @ reduced.conj().T
    if len(beams) >= n_users:
        try:
            inv = np.linalg.inv(gram)
            trace = np.trace(inv).real
            if trace > 0 and np.isfinite(trace):
                gain_sq = n_users / trace
                return n_users * np.log2(1 + gain_sq / noise_var)
        except np.linalg.LinAlgError:
            pass
    digital = reduced.conj().T @ np.linalg.inv(
        gram + ridge * np.eye(n_users)
    )
    norm = np.linalg.norm(digital)
    if norm > 0:
        digital *= np.sqrt(n_users) / norm
    g = reduced @ digital
    sig = np.abs(np.diag(g)) ** 2
    interf = np.sum(np.abs(g) ** 2, axis=1) - sig
    return float(np.sum(np.log2(1 + sig / (interf + noise_var))))


def select_beams_mm(beamspace_est: np.ndarray, n_rf: int) -> BeamSet:
    """Magnitude maximization: keep the N_RF strongest beamspace columns."""
    norms = np.linalg.norm(beamspace_est, axis=0)
    order = np.argsort(-norms, kind="stable")
    return BeamSet(indices=tuple(int(b) for b in order[:n_rf]))


def _greedy_extend(
    beamspace: np.ndarray,
    start: list,
    candidates: list,
    n_rf: int,
    noise_var: float,
) -> list:
    selected = list(start)
    pool = list(candidates)
    while len(selected) < n_rf and pool:
        best_rate, best = -np.inf, None
        for c in pool:
            rate = beam_subset_rate(beamspace, selected + [c], noise_var)
            if rate > best_rate:  # ties keep the lower index (pool ordered)
                best_rate, best = rate, c
        selected.append(best)
        pool.remove(best)
    return selected


def select_beams_incremental(
    beamspace_est: np.ndarray, n_rf: int, snr_db: float
) -> BeamSet:
    """Greedy forward selection maximizing the reduced ZF sum-rate."""
    n_users, n = beamspace_est.shape
    noise_var = _snr_to_noise_var(snr_db, n_users)
    selected = _greedy_extend(beamspace_est, [], list(range(n)), n_rf, noise_var)
    return BeamSet(indices=tuple(selected))


def select_beams_ia(
    beamspace_est: np.ndarray, n_rf: int, snr_db: float
) -> BeamSet:
    """Interference-aware selection.

    Users whose strongest beam is uncontested claim it directly; users
    colliding on a strongest beam are served through the incremental
    criterion over the unclaimed beams, which also fills any leftover
    RF budget.
    """
    n_users, n = beamspace_est.shape
    if n_rf < n_users:
        raise ValueError("need at least one RF chain per user")
    noise_var = _snr_to_noise_var(snr_db, n_users)
    strongest = np.argmax(np.abs(beamspace_est), axis=1)
    counts = np.bincount(strongest, minlength=n)
    claimed = []
    for k in range(n_users):
        b = int(strongest[k])
        if counts[b] == 1 and b not in claimed:
            claimed.append(b)
    pool = [b for b in range(n) if b not in claimed]
    selected = _greedy_extend(beamspace_est, claimed, pool, n_rf, noise_var)
    return BeamSet(indices=tuple(selected))


def select_beams_exhaustive(
    beamspace: np.ndarray, n_rf: int, snr_db: float
) -> BeamSet:
    """Sum-rate-optimal subset by enumeration; small instances only."""
    n_users, n = beamspace.shape
    if math.comb(n, n_rf) > 10**6:
        raise ValueError("search space too large for exhaustive selection")
    noise_var = _snr_to_noise_var(snr_db, n_users)
    best_rate, best = -np.inf, None
    for combo in itertools.combinations(range(n), n_rf):
        rate = beam_subset_rate(beamspace, combo, noise_var)
        if rate > best_rate:
            best_rate, best = rate, combo
    return BeamSet(indices=best)


def lahp_precoder(
    beamspace_est: np.ndarray, beams: BeamSet, snr_db: float
) -> PrecoderPair:
    """Beam-selection analog stage plus reduced-dimension ZF."""
    n = beamspace_est.shape[1]
    analog = np.zeros((n, len(beams)))
    analog[list(beams.indices), np.arange(len(beams))] = 1.0
    reduced = beamspace_est[:, list(beams.indices)]
    digital = zf_precoder(reduced, analog=analog)
    return PrecoderPair(analog=analog, digital=digital, architecture="lahp")


def hybrid_factorize_omp(
    f_target: np.ndarray, dictionary: DirectionDictionary, n_rf: int
) -> tuple[PrecoderPair, float]:
    """Greedy factorization of a target precoder into steering atoms.

    Selects N_RF atoms by residual correlation, least-squares for the
    digital stage, then renormalizes the pair to the power constraint.
    Returns the pair and the pre-normalization residual Frobenius norm.
    """
    if n_rf > dictionary.grid_size:
        raise ValueError("more RF chains than dictionary atoms")
    n, n_s = f_target.shape
    atoms = dictionary.atoms
    residual = f_target.copy()
    selected: list[int] = []
    digital = np.zeros((0, n_s), dtype=complex)
    for _ in range(n_rf):
        corr = np.linalg.norm(atoms.conj().T @ residual, axis=1)
        if selected:
            corr[selected] = -1.0
        selected.append(int(np.argmax(corr)))
        analog = atoms[:, selected]
        digital, _, _, _ = np.linalg.lstsq(analog, f_target, rcond=None)
        residual = f_target - analog @ digital
    residual_norm = float(np.linalg.norm(residual))
    analog = atoms[:, selected]
    digital = digital * (np.sqrt(n_s) / np.linalg.norm(analog @ digital))
    return (
        PrecoderPair(analog=analog, digital=digital, architecture="pahp_omp"),
        residual_norm,
    )
