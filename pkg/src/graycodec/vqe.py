"""SPSA, the VQE driver, readout-error mitigation and zero-noise extrapolation."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from functools import partial
from typing import Callable, Optional, Sequence

import numpy as np

from .circuit import Circuit, Gate, fold_cnots, gray_ansatz, gray_parameter_count, onehot_ansatz
from .encoder import qubits_for
from .pauli import PauliSum, to_matrix
from .sim import (
    MeasurementPlan,
    NoiseModel,
    RngLike,
    ShotCounts,
    apply_readout,
    counts_from_probabilities,
    estimate_energy,
    make_rng,
    run_density,
    run_statevector,
)

__all__ = [
    "BACKENDS",
    "Backend",
    "EnergyObjective",
    "MitigationCalibration",
    "SpsaConfig",
    "VqeResult",
    "ZneFit",
    "ansatz_for",
    "build_calibration",
    "calibrate_gain",
    "default_iterations",
    "mitigate_counts",
    "mitigate_probabilities",
    "spsa_minimize",
    "vqe_run",
    "zne_extrapolate",
]

BACKENDS = ("statevector", "sampled", "noisy")
#: Share of the energy history averaged into the reported energy.
TAIL_FRACTION = 0.05
#: Perturbations averaged by :func:`calibrate_gain`.
CALIBRATION_SAMPLES = 25


@dataclass(frozen=True)
class SpsaConfig:
    """SPSA gains ``a_k = a/(k+1+A)^alpha`` and ``c_k = c/(k+1)^gamma``.

    ``A`` is ``stability``; zero gives the plain schedule.
    """

    a: float = 0.628
    c: float = 0.1
    alpha: float = 0.602
    gamma: float = 0.101
    iterations: int = 5000
    seed: int = 0
    stability: float = 0.0

    def __post_init__(self) -> None:
        if self.a <= 0 or self.c <= 0:
            raise ValueError("a and c must be positive")
        if self.stability < 0:
            raise ValueError("stability must be >= 0")
        if not 0 < self.gamma < self.alpha <= 1:
            raise ValueError("need 0 < gamma < alpha <= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")


def default_iterations(n_states: int) -> int:
    """Iteration budget by problem size: 2000, 4000, 5000 (N = 4..8) or 8000."""
    if n_states <= 2:
        return 2000
    if n_states == 3:
        return 4000
    if n_states <= 8:
        return 5000
    return 8000


@dataclass(frozen=True)
class VqeResult:
    """Outcome of one optimization.

    ``energy`` is the mean of the last 5% of ``energy_history``;
    ``best_energy`` is the history minimum with its ``best_parameters``;
    ``final_energy`` is the last history entry.
    """

    energy: float
    best_energy: float
    best_parameters: tuple[float, ...]
    final_energy: float
    final_parameters: tuple[float, ...]
    energy_history: tuple[float, ...]
    evaluations: int
    seed: tuple[int, ...] = ()

    def to_record(self, history: bool = False) -> dict:
        out = {
            "energy": self.energy,
            "best_energy": self.best_energy,
            "final_energy": self.final_energy,
            "best_parameters": list(self.best_parameters),
            "final_parameters": list(self.final_parameters),
            "evaluations": self.evaluations,
            "seed": list(self.seed),
        }
        if history:
            out["energy_history"] = list(self.energy_history)
        return out


def _tail_mean(history: Sequence[float]) -> float:
    k = max(1, math.ceil(TAIL_FRACTION * len(history)))
    return float(np.mean(history[-k:]))


def spsa_minimize(
    objective: Callable[[np.ndarray], float],
    theta0: Sequence[float],
    cfg: SpsaConfig,
    seed: tuple[int, ...] = (),
) -> VqeResult:
    """Minimize a possibly stochastic objective with SPSA.

    Each iteration spends two evaluations on the gradient estimate and one
    on recording the objective at the new point.
    """
    rng = make_rng(cfg.seed)
    theta = np.array(theta0, dtype=float)
    history = [float(objective(theta))]
    best_theta = theta.copy()
    best = history[0]
    for k in range(cfg.iterations):
        ak = cfg.a / (k + 1 + cfg.stability) ** cfg.alpha
        ck = cfg.c / (k + 1) ** cfg.gamma
        delta = 2.0 * rng.integers(0, 2, size=theta.size) - 1.0
        diff = objective(theta + ck * delta) - objective(theta - ck * delta)
        theta = theta - ak * diff / (2.0 * ck) * delta
        value = float(objective(theta))
        history.append(value)
        if value < best:
            best, best_theta = value, theta.copy()
    return VqeResult(
        energy=_tail_mean(history),
        best_energy=best,
        best_parameters=tuple(float(x) for x in best_theta),
        final_energy=history[-1],
        final_parameters=tuple(float(x) for x in theta),
        energy_history=tuple(history),
        evaluations=1 + 3 * cfg.iterations,
        seed=seed or (cfg.seed,),
    )


def calibrate_gain(
    objective: Callable[[np.ndarray], float],
    theta0: Sequence[float],
    cfg: SpsaConfig,
    target_step: float = 0.2,
    samples: int = CALIBRATION_SAMPLES,
) -> SpsaConfig:
    """Copy of ``cfg`` whose ``a`` makes the first update move each angle by about ``target_step``.

    The gradient magnitude is the mean of ``|f(+) - f(-)| / 2c`` over
    ``samples`` random perturbations at ``theta0``, which costs
    ``2 * samples`` evaluations. Perturbations are drawn from ``[cfg.seed, 2]``.
    """
    if target_step <= 0 or samples < 1:
        raise ValueError("target_step and samples must be positive")
    rng = make_rng([cfg.seed, 2])
    theta = np.array(theta0, dtype=float)
    grads = []
    for _ in range(samples):
        delta = 2.0 * rng.integers(0, 2, size=theta.size) - 1.0
        diff = objective(theta + cfg.c * delta) - objective(theta - cfg.c * delta)
        grads.append(abs(diff) / (2.0 * cfg.c))
    g = float(np.mean(grads))
    if g == 0.0:
        return cfg
    return replace(cfg, a=target_step * (1.0 + cfg.stability) ** cfg.alpha / g)


# -- measurement error mitigation --------------------------------------------------


@dataclass(frozen=True)
class MitigationCalibration:
    """``matrix[j, i]`` = empirical P(measure j | prepared basis state i)."""

    matrix: np.ndarray
    shots: int

    def __post_init__(self) -> None:
        mat = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", mat)
        singular = np.linalg.cond(mat) > 1e12
        object.__setattr__(self, "_pinv", None if singular else np.linalg.pinv(mat))

    @property
    def qubit_count(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def __call__(self, frequencies: np.ndarray) -> np.ndarray:
        return mitigate_probabilities(frequencies, self)


def build_calibration(qubit_count: int, noise: Optional[NoiseModel], shots: int, rng: RngLike = 0) -> MitigationCalibration:
    """Prepare every basis state with X gates, measure under ``noise`` and tabulate."""
    if not 1 <= qubit_count <= 6:
        raise ValueError("calibration supports 1 to 6 qubits")
    gen = make_rng(rng)
    dim = 1 << qubit_count
    mat = np.zeros((dim, dim))
    for i in range(dim):
        bits = format(i, f"0{qubit_count}b")
        prep = Circuit(qubit_count, tuple(Gate("X", (k,)) for k, b in enumerate(bits) if b == "1"))
        state = run_density(prep, noise) if noise is not None else run_statevector(prep)
        counts = counts_from_probabilities(apply_readout(state.probabilities(), noise), shots, gen)
        mat[:, i] = counts.frequencies()
    return MitigationCalibration(mat, shots)


def mitigate_counts(counts: ShotCounts, cal: MitigationCalibration) -> np.ndarray:
    """Least-squares solve of ``A p = f``, then clip negatives and renormalize.

    A singular calibration matrix falls back to the raw frequencies with a warning.
    """
    return mitigate_probabilities(counts.frequencies(), cal)


def mitigate_probabilities(freq: np.ndarray, cal: MitigationCalibration) -> np.ndarray:
    """:func:`mitigate_counts` on a frequency vector."""
    freq = np.asarray(freq, dtype=float)
    if freq.size != cal.matrix.shape[0]:
        raise ValueError("counts and calibration act on different registers")
    if cal._pinv is None:
        warnings.warn("calibration matrix is singular; returning raw frequencies", RuntimeWarning, stacklevel=2)
        return freq
    p = cal._pinv @ freq
    p = np.clip(p, 0.0, None)
    total = p.sum()
    return p / total if total > 0 else freq


# -- zero-noise extrapolation -------------------------------------------------------


@dataclass(frozen=True)
class ZneFit:
    """Weighted straight-line fit of energy against the noise level ``2n + 1``."""

    levels: tuple[int, ...]
    energies: tuple[float, ...]
    sigmas: tuple[float, ...]
    intercept: float
    slope: float
    statistical_error: float
    fit_error: float

    @property
    def error(self) -> float:
        return math.hypot(self.statistical_error, self.fit_error)


def zne_extrapolate(points: Sequence[tuple[float, float, float]]) -> ZneFit:
    """Extrapolate ``(level, energy, sigma)`` triples to level 0.

    ``statistical_error`` propagates the per-point sigmas through the
    weighted fit; ``fit_error`` scales the same covariance by the reduced
    chi-square when there are more than two points.
    """
    levels = np.array([p[0] for p in points], dtype=float)
    energies = np.array([p[1] for p in points], dtype=float)
    sigmas = np.array([p[2] for p in points], dtype=float)
    if len(set(levels.tolist())) < 2:
        raise ValueError("need at least two distinct fold levels")
    if np.any(sigmas <= 0):
        raise ValueError("sigmas must be positive")
    design = np.column_stack([np.ones_like(levels), levels])
    w = 1.0 / sigmas**2
    normal = design.T @ (w[:, None] * design)
    cov = np.linalg.inv(normal)
    intercept, slope = cov @ (design.T @ (w * energies))
    dof = len(levels) - 2
    fit_error = 0.0
    if dof > 0:
        chi2 = float(np.sum(w * (energies - intercept - slope * levels) ** 2))
        fit_error = math.sqrt(chi2 / dof * cov[0, 0])
    return ZneFit(
        levels=tuple(int(x) for x in levels),
        energies=tuple(float(x) for x in energies),
        sigmas=tuple(float(x) for x in sigmas),
        intercept=float(intercept),
        slope=float(slope),
        statistical_error=math.sqrt(cov[0, 0]),
        fit_error=fit_error,
    )


# -- VQE driver --------------------------------------------------------------------------


def ansatz_for(encoding: str, n_states: int) -> tuple[Callable[[Sequence[float]], Circuit], int]:
    """Circuit builder and parameter count for an encoding.

    The binary encoding shares the Gray ansatz, which spans all real
    states on its register.
    """
    if encoding == "onehot":
        return partial(onehot_ansatz, n_states), n_states - 1
    if encoding in ("gray", "binary"):
        eta = qubits_for(encoding, n_states)
        return partial(gray_ansatz, eta), gray_parameter_count(eta)
    raise ValueError(f"unknown encoding {encoding!r}")


@dataclass(frozen=True)
class Backend:
    """Where energies come from.

    ``statevector``: exact expectation. ``sampled``: ``shots`` per commuting
    group, noiseless. ``noisy``: sampled from the density matrix under
    ``noise`` (logical qubit indices). ``shots=None`` on the noisy backend
    uses exact outcome probabilities. ``zne_levels`` holds odd noise levels
    ``2n + 1``; when set, each energy is the zero-level intercept.
    """

    kind: str = "statevector"
    shots: Optional[int] = 10000
    noise: Optional[NoiseModel] = None
    mitigate: bool = False
    zne_levels: tuple[int, ...] = ()
    calibration_shots: int = 10000

    def __post_init__(self) -> None:
        if self.kind not in BACKENDS:
            raise ValueError(f"unknown backend {self.kind!r}; expected one of {BACKENDS}")
        if self.kind == "sampled" and not self.shots:
            raise ValueError("the sampled backend needs shots")
        if self.kind == "noisy" and self.noise is None:
            raise ValueError("the noisy backend needs a noise model")
        if self.kind != "noisy" and (self.mitigate or self.zne_levels):
            raise ValueError("mitigation and ZNE need the noisy backend")
        if any(lv < 1 or lv % 2 == 0 for lv in self.zne_levels):
            raise ValueError("ZNE levels must be odd positive integers 2n+1")
        if self.zne_levels and len(set(self.zne_levels)) < 2:
            raise ValueError("ZNE needs at least two distinct levels")


@dataclass
class EnergyObjective:
    """``theta -> energy`` for a Hamiltonian, ansatz and backend."""

    hamiltonian: PauliSum
    builder: Callable[[Sequence[float]], Circuit]
    backend: Backend
    rng: RngLike = 0
    calibration: Optional[MitigationCalibration] = None
    _dense: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        self.rng = make_rng(self.rng)
        if self.backend.kind == "statevector":
            self._dense = to_matrix(self.hamiltonian)
        else:
            noise = self.backend.noise if self.backend.kind == "noisy" else None
            self.plan = MeasurementPlan.compile(self.hamiltonian, noise)
        if self.backend.mitigate and self.calibration is None:
            self.calibration = build_calibration(
                self.hamiltonian.qubit_count, self.backend.noise, self.backend.calibration_shots, self.rng
            )

    def at_level(self, theta: Sequence[float], level: int = 1) -> tuple[float, float]:
        """Energy and its standard error with CNOTs folded to ``level`` copies."""
        circuit = self.builder(theta)
        if level > 1:
            circuit = fold_cnots(circuit, (level - 1) // 2)
        b = self.backend
        if b.kind == "statevector":
            psi = run_statevector(circuit).data
            return float(np.real(np.vdot(psi, self._dense @ psi))), 0.0
        noise = b.noise if b.kind == "noisy" else None
        prepared = run_density(circuit, noise) if noise is not None else run_statevector(circuit)
        est = estimate_energy(
            self.hamiltonian,
            circuit,
            b.shots,
            noise=noise,
            mitigator=self.calibration if b.mitigate else None,
            rng=self.rng,
            prepared=prepared,
            plan=self.plan,
        )
        return est.value, math.sqrt(est.variance)

    def zne(self, theta: Sequence[float], levels: Sequence[int]) -> ZneFit:
        points = []
        for lv in levels:
            e, s = self.at_level(theta, lv)
            points.append((lv, e, s if s > 0 else 1.0))
        return zne_extrapolate(points)

    def __call__(self, theta: Sequence[float]) -> float:
        if self.backend.zne_levels:
            return self.zne(theta, self.backend.zne_levels).intercept
        return self.at_level(theta)[0]


def vqe_run(
    h: PauliSum,
    builder: Callable[[Sequence[float]], Circuit],
    n_params: int,
    backend: Backend,
    cfg: SpsaConfig,
    theta0: Optional[Sequence[float]] = None,
    shot_seed: RngLike = None,
    calibrate: bool = False,
) -> VqeResult:
    """One VQE optimization.

    ``theta0`` defaults to a uniform draw from ``(-pi/2, pi/2)`` seeded by
    ``cfg.seed``; shot sampling is seeded by ``shot_seed`` (default
    ``[cfg.seed, 1]``). ``calibrate`` rescales ``cfg.a`` with
    :func:`calibrate_gain` before optimizing; its evaluations are counted.
    """
    if theta0 is None:
        theta0 = make_rng([cfg.seed, 0]).uniform(-math.pi / 2, math.pi / 2, n_params)
    if len(theta0) != n_params:
        raise ValueError(f"ansatz needs {n_params} parameters, got {len(theta0)}")
    objective = EnergyObjective(h, builder, backend, rng=[cfg.seed, 1] if shot_seed is None else shot_seed)
    if not calibrate:
        return spsa_minimize(objective, theta0, cfg)
    tuned = calibrate_gain(objective, theta0, cfg)
    result = spsa_minimize(objective, theta0, tuned)
    return replace(result, evaluations=result.evaluations + 2 * CALIBRATION_SAMPLES)
