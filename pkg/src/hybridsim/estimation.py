"""Channel estimators: LS on the effective channel, adaptive CS over
direction grids, and compressive beamspace estimation through a 0/1
selecting network, all recovered with orthogonal matching pursuit.

Pilot accounting is scalar measurement instants per user; every estimator
respects the same total budget so the comparison between architectures is
fair by construction. Training noise is added per scalar measurement at
the configured training SNR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ArrayGeometry, BeamspaceTransform, _steer


class BudgetError(ValueError):
    """Pilot budget too small for the requested estimator."""


class PlanGenerationError(RuntimeError):
    """Sensing plan stayed rank deficient after the retry limit."""


@dataclass(frozen=True)
class PilotBudget:
    total_pilots: int = 96
    training_snr_db: float = 20.0

    def noise_variance(self) -> float:
        if np.isinf(self.training_snr_db):
            return 0.0
        return 10 ** (-self.training_snr_db / 10)


@dataclass
class SensingPlan:
    """Q combining blocks of the adaptive selecting network, 0/1 entries."""

    blocks: list

    @property
    def stacked(self) -> np.ndarray:
        return np.vstack(self.blocks)


@dataclass(frozen=True)
class DirectionDictionary:
    grid_size: int
    atoms: np.ndarray  # [N x G], unit-norm steering columns
    spatial_freqs: np.ndarray


@dataclass
class EstimationReport:
    estimate: np.ndarray
    nmse: np.ndarray  # per user
    pilots_used: int


def direction_dictionary(geometry: ArrayGeometry, grid_size: int = 1024) -> DirectionDictionary:
    """Uniform grid of steering atoms covering the spatial-frequency range."""
    psi = (np.arange(grid_size) - (grid_size - 1) / 2) / grid_size
    return DirectionDictionary(
        grid_size=grid_size,
        atoms=_steer(geometry.n_antennas, psi),
        spatial_freqs=psi,
    )


def omp_recover(
    measurements: np.ndarray, sensing: np.ndarray, sparsity: int
) -> np.ndarray:
    """Standard OMP: correlate, grow the support, re-solve least squares.

    Columns are normalized internally before correlation; the least-squares
    step uses the original columns. A selection that makes the support
    rank deficient is dropped and the search continues.
    """
    y = np.asarray(measurements)
    m, n = sensing.shape
    if sparsity > m:
        raise ValueError(f"sparsity {sparsity} exceeds measurement count {m}")
    x = np.zeros(n, dtype=complex)
    res_norm = np.linalg.norm(y)
    if res_norm == 0:
        return x
    col_norms = np.linalg.norm(sensing, axis=0)
    safe = np.where(col_norms > 1e-14, col_norms, 1.0)
    unit = sensing / safe
    blocked = col_norms <= 1e-14
    residual = y.copy()
    support: list[int] = []
    coeffs = np.zeros(0, dtype=complex)
    while len(support) < sparsity:
        corr = np.abs(unit.conj().T @ residual)
        corr[blocked] = -1.0
        if support:
            corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] < 0:
            break  # no usable atoms left
        cols = sensing[:, support + [j]]
        sol, _, rank, _ = np.linalg.lstsq(cols, y, rcond=None)
        if rank < len(support) + 1:
            blocked = blocked.copy()
            blocked[j] = True
            continue
        support.append(j)
        coeffs = sol
        residual = y - cols @ sol
        new_norm = np.linalg.norm(residual)
        # residual norm must be non-increasing for a correct LS update
        if new_norm > res_norm * (1 + 1e-9) + 1e-12:
            raise RuntimeError("OMP residual increased; numerical failure")
        res_norm = new_norm
    x[support] = coeffs
    return x


def build_sensing_plan(
    n_antennas: int,
    n_rf: int,
    budget: PilotBudget,
    rng: np.random.Generator,
    max_redraws: int = 16,
) -> SensingPlan:
    """Draw Q iid equiprobable 0/1 blocks with a full-rank stacked matrix."""
    q = budget.total_pilots // n_rf
    if q < 1:
        raise BudgetError(
            f"budget {budget.total_pilots} below one block of {n_rf} pilots"
        )
    rows = q * n_rf
    if rows > n_antennas:
        raise BudgetError(f"{rows} stacked rows exceed {n_antennas} antennas")
    for _ in range(max_redraws):
        blocks = [
            rng.integers(0, 2, size=(n_rf, n_antennas)).astype(float)
            for _ in range(q)
        ]
        if np.linalg.matrix_rank(np.vstack(blocks)) == rows:
            return SensingPlan(blocks=blocks)
    raise PlanGenerationError(
        f"no full-rank 0/1 plan after {max_redraws} redraws"
    )


def _crandn(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def _nmse_rows(estimate: np.ndarray, truth: np.ndarray) -> np.ndarray:
    err = np.linalg.norm(estimate - truth, axis=-1) ** 2
    ref = np.linalg.norm(truth, axis=-1) ** 2
    return err / ref


def estimate_ls_effective(
    h_true: np.ndarray,
    analog_stage: np.ndarray,
    budget: PilotBudget,
    rng: np.random.Generator,
) -> EstimationReport:
    """LS estimate of the effective channel H A from orthogonal pilots.

    The budget is spent as repetitions of one orthogonal pilot block per
    effective-channel column; repeats average the noise down. With unit
    per-symbol pilot power the per-entry estimate variance is
    sigma^2 / (N_RF * repetitions).
    """
    effective = h_true @ analog_stage
    n_users, n_rf = effective.shape
    if budget.total_pilots < n_rf:
        raise BudgetError(
            f"budget {budget.total_pilots} below {n_rf} pilot symbols"
        )
    reps = budget.total_pilots // n_rf
    var = budget.noise_variance() / (n_rf * reps)
    estimate = effective + np.sqrt(var) * _crandn(rng, n_users, n_rf)
    return EstimationReport(
        estimate=estimate,
        nmse=_nmse_rows(estimate, effective),
        pilots_used=reps * n_rf,
    )


def estimate_ls_direct(
    h_true: np.ndarray, budget: PilotBudget, rng: np.random.Generator
) -> EstimationReport:
    """LS estimate of the full spatial channel for the fully digital BS.

    With one RF chain per antenna the BS observes every user's whole
    channel vector each pilot instant (orthogonal user pilots), so the
    budget buys floor(budget / N_s) full observations to average.
    """
    n_users = h_true.shape[0]
    if budget.total_pilots < n_users:
        raise BudgetError(
            f"budget {budget.total_pilots} below {n_users} pilot symbols"
        )
    reps = budget.total_pilots // n_users
    var = budget.noise_variance() / reps
    estimate = h_true + np.sqrt(var) * _crandn(rng, *h_true.shape)
    return EstimationReport(
        estimate=estimate,
        nmse=_nmse_rows(estimate, h_true),
        pilots_used=reps * n_users,
    )


def _refined_freqs(
    coarse_freqs: np.ndarray, support: np.ndarray, grid_size: int, width: int
) -> np.ndarray:
    """Local grids of ``width`` atoms spanning +-1 coarse cell per hit.

    The offsets include zero so an exactly on-grid direction stays in the
    refined dictionary.
    """
    delta = 1.0 / grid_size
    offsets = delta * (np.arange(width) - width // 2) / (width // 2)
    freqs = (coarse_freqs[support][:, None] + offsets[None, :]).ravel()
    return np.clip(freqs, -0.5, 0.5)


def estimate_adaptive_cs(
    h_true: np.ndarray,
    dictionary: DirectionDictionary,
    budget: PilotBudget,
    n_paths: int,
    rng: np.random.Generator,
    refine: bool = True,
    refine_width: int = 16,
) -> EstimationReport:
    """Adaptive CS estimate of the spatial channel for the phased array.

    Measurements are taken through random unit-modulus combiners (one per
    pilot instant, entries of magnitude 1/sqrt(N) so each combining vector
    is passive). OMP against the coarse grid locates the paths; a single
    refinement level re-solves on narrowed local grids around each hit.
    """
    if budget.total_pilots < n_paths:
        raise BudgetError("budget below the number of paths")
    n_users, n = h_true.shape
    p = budget.total_pilots
    combiners = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(n, p))) / np.sqrt(n)
    coarse_sensing = combiners.conj().T @ dictionary.atoms
    sigma = np.sqrt(budget.noise_variance())
    estimate = np.zeros_like(h_true)
    for k in range(n_users):
        z = h_true[k] @ combiners + sigma * _crandn(rng, p)
        coarse = omp_recover(z.conj(), coarse_sensing, n_paths)
        support = np.flatnonzero(coarse)
        if refine and support.size:
            freqs = _refined_freqs(
                dictionary.spatial_freqs, support, dictionary.grid_size, refine_width
            )
            atoms = _steer(n, freqs)
            coeffs = omp_recover(z.conj(), combiners.conj().T @ atoms, n_paths)
            estimate[k] = (atoms @ coeffs).conj()
        else:
            estimate[k] = (dictionary.atoms @ coarse).conj()
    return EstimationReport(
        estimate=estimate,
        nmse=_nmse_rows(estimate, h_true),
        pilots_used=p,
    )


def estimate_beamspace_cs(
    h_true: np.ndarray,
    transform: BeamspaceTransform,
    plan: SensingPlan,
    budget: PilotBudget,
    sparsity: int,
    rng: np.random.Generator,
) -> EstimationReport:
    """Compressive beamspace estimate through the adaptive selecting network.

    Per user, z = P h_tilde + noise with P the stacked 0/1 plan; OMP
    recovers the sparse beamspace vector directly.
    """
    stacked = plan.stacked
    if stacked.shape[0] > budget.total_pilots:
        raise BudgetError("sensing plan exceeds the pilot budget")
    beamspace = h_true @ transform.matrix
    n_users = beamspace.shape[0]
    sigma = np.sqrt(budget.noise_variance())
    estimate = np.zeros_like(beamspace)
    for k in range(n_users):
        z = stacked @ beamspace[k].conj() + sigma * _crandn(rng, stacked.shape[0])
        estimate[k] = omp_recover(z, stacked, sparsity).conj()
    return EstimationReport(
        estimate=estimate,
        nmse=_nmse_rows(estimate, beamspace),
        pilots_used=stacked.shape[0],
    )
