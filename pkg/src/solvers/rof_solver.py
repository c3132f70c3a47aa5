# src/solvers/rof_solver.py
"""Dual fixed-point projection solver for weighted anisotropic TV regularization.

Solves  min_w TV_g(w) + ||w - w0||^2 / (2 lambda)  by iterating on box
constrained dual fields (xi, eta); the solution is w0 minus lambda times
the averaged weighted divergence of the converged duals.
"""
import time
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd

from config.settings import Config
from src.operators.energy import TvVariant, WeightField, WeightLike, as_weight, total_variation
from src.operators.grid_ops import VectorField, as_field, div, div_rot, grad, grad_rot
from src.utils.errors import ConvergenceError, DimensionMismatchError, InvalidParameterError
from src.utils.logger import setup_logger
from src.utils.validators import validate_finite, validate_positive

logger = setup_logger(__name__)

# Step bound on normalised weights (max g == 1)
TAU_BOUND = 1.0 / 8.0

TraceSink = Callable[[str], None]


@dataclass(frozen=True)
class DualFieldPair:
    """Axis duals xi and diagonal duals eta, every component in [-1, 1]"""
    xi: VectorField
    eta: VectorField

    @classmethod
    def zeros(cls, shape: Tuple[int, int]) -> 'DualFieldPair':
        return cls(VectorField.zeros(shape), VectorField.zeros(shape))

    @property
    def shape(self) -> Tuple[int, int]:
        return self.xi.shape

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(c), initial=0.0)
                         for c in (self.xi.x, self.xi.y, self.eta.x, self.eta.y)))


@dataclass(frozen=True)
class RofParams:
    lam: float = 1.0
    tau: float = Config.TAU
    tol: float = Config.TOL
    max_iter: int = Config.MAX_ITER
    # divide residues by sqrt(pixel count) so tol does not depend on resolution
    per_pixel_residue: bool = False

    def __post_init__(self):
        for name in ('lam', 'tau', 'tol'):
            ok, message = validate_positive(getattr(self, name), name)
            if not ok:
                raise InvalidParameterError(message)
        if self.tau > TAU_BOUND:
            raise InvalidParameterError(
                f"tau={self.tau} exceeds the convergence bound {TAU_BOUND} for normalised weights")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidParameterError(f"max_iter must be a positive integer, got {self.max_iter}")


@dataclass
class SolveReport:
    iterations: int = 0
    residues: List[float] = field(default_factory=list)
    final_residue: float = float('inf')
    converged: bool = False
    wall_time: float = 0.0
    primal_energies: List[float] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        """One row per iteration: iter, residue, primal_energy (NaN when not recorded)"""
        energies = self.primal_energies if self.primal_energies else [np.nan] * len(self.residues)
        return pd.DataFrame({
            'iter': np.arange(1, len(self.residues) + 1),
            'residue': self.residues,
            'primal_energy': energies,
        })

    def summary(self) -> dict:
        return {
            'iterations': self.iterations,
            'final_residue': self.final_residue,
            'converged': self.converged,
            'wall_time': self.wall_time,
        }


class KktMultipliers(NamedTuple):
    alpha1: np.ndarray
    alpha2: np.ndarray
    beta1: np.ndarray
    beta2: np.ndarray


def normalize_weights(g: WeightField, lam: float) -> Tuple[WeightField, float]:
    """Rescale g to max 1 and move the factor into lambda; the ROF problem is unchanged"""
    ok, message = validate_positive(lam, 'lambda')
    if not ok:
        raise InvalidParameterError(message)
    g_tilde = WeightField(g.values / g.max_g)
    return g_tilde, lam * g.max_g


def averaged_divergence(duals: DualFieldPair, g: np.ndarray,
                        variant: TvVariant = TvVariant.DIAGONAL) -> np.ndarray:
    """q = (div(g xi) + div_rot(g eta)) / 2, or div(g xi) for the axis variant"""
    if TvVariant(variant) is TvVariant.AXIS:
        return div(duals.xi.scaled(g))
    return 0.5 * (div(duals.xi.scaled(g)) + div_rot(duals.eta.scaled(g)))


def residual_field(duals: DualFieldPair, w0: np.ndarray, g: WeightLike, lam: float,
                   variant: TvVariant = TvVariant.DIAGONAL) -> np.ndarray:
    """w = lambda q - w0; the solution is -w at the fixed point"""
    w0 = as_field(w0)
    weight = as_weight(g, w0.shape).values
    return lam * averaged_divergence(duals, weight, variant) - w0


def primal_energy(u: np.ndarray, w0: np.ndarray, g: WeightLike, lam: float,
                  variant: TvVariant = TvVariant.DIAGONAL) -> float:
    u = as_field(u)
    return total_variation(u, g, variant) + float(np.sum((u - w0) ** 2)) / (2.0 * lam)


def duality_gap(u: np.ndarray, duals: DualFieldPair, w0: np.ndarray, g: WeightLike, lam: float,
                variant: TvVariant = TvVariant.DIAGONAL) -> float:
    """Primal energy of u minus the dual value of the duals; >= 0, zero at the optimum"""
    w0 = as_field(w0)
    weight = as_weight(g, w0.shape)
    q = averaged_divergence(duals, weight.values, variant)
    dual_value = float(np.sum(w0 * q)) - 0.5 * lam * float(np.sum(q * q))
    return primal_energy(u, w0, weight, lam, variant) - dual_value


def kkt_multipliers(duals: DualFieldPair, w_res: np.ndarray, g: WeightLike,
                    lam: float) -> KktMultipliers:
    """Lagrange multipliers of the four box constraints, from the residual field w_res"""
    w_res = as_field(w_res)
    weight = as_weight(g, w_res.shape).values
    if duals.shape != w_res.shape:
        raise DimensionMismatchError(f"duals {duals.shape} vs residual {w_res.shape}")
    axis = grad(w_res)
    diag = grad_rot(w_res)
    scale = 0.5 * lam * weight
    return KktMultipliers(scale * np.abs(axis.x), scale * np.abs(axis.y),
                          scale * np.abs(diag.x), scale * np.abs(diag.y))


def _project_step(p: np.ndarray, step: np.ndarray, gradient: np.ndarray) -> np.ndarray:
    return (p + step * gradient) / (1.0 + step * np.abs(gradient))


def rof_solve(w0: np.ndarray, g: WeightLike, params: RofParams,
              variant: TvVariant = TvVariant.DIAGONAL,
              trace: Optional[TraceSink] = None,
              record_energy: bool = False,
              require_convergence: bool = False,
              debug_checks: Optional[bool] = None
              ) -> Tuple[np.ndarray, DualFieldPair, SolveReport]:
    """Run the synchronous projection iteration and return (u, duals, report).

    Weights are normalised internally, so tau only has to respect the
    1/8 bound. `trace` receives one "iter,residue,primal_energy" line per
    iteration.
    """
    w0 = as_field(w0)
    ok, message = validate_finite(w0, "w0")
    if not ok:
        raise InvalidParameterError(message)
    weight = as_weight(g, w0.shape)
    variant = TvVariant(variant)
    if debug_checks is None:
        debug_checks = Config.DEBUG_CHECKS
    record_energy = record_energy or trace is not None

    g_tilde, lam_eff = normalize_weights(weight, params.lam)
    gt = g_tilde.values
    step = gt * (params.tau / lam_eff)
    residue_scale = 1.0 / np.sqrt(w0.size) if params.per_pixel_residue else 1.0

    logger.info(f"ROF solve {w0.shape[0]}x{w0.shape[1]} variant={variant.value} lambda={params.lam} "
                f"(effective {lam_eff:.6g}) tau={params.tau} tol={params.tol} max_iter={params.max_iter}")

    duals = DualFieldPair.zeros(w0.shape)
    report = SolveReport()
    start = time.perf_counter()
    residue = float('inf')

    for n in range(1, int(params.max_iter) + 1):
        # phase 1: residual field from the current duals
        w = lam_eff * averaged_divergence(duals, gt, variant) - w0

        # phase 2: every dual component from the same w
        axis = grad(w)
        xi = VectorField(_project_step(duals.xi.x, step, axis.x),
                         _project_step(duals.xi.y, step, axis.y))
        if variant is TvVariant.DIAGONAL:
            diag = grad_rot(w)
            eta = VectorField(_project_step(duals.eta.x, step, diag.x),
                              _project_step(duals.eta.y, step, diag.y))
        else:
            eta = duals.eta

        residue = residue_scale * max(
            float(np.sqrt(np.sum((xi.x - duals.xi.x) ** 2) + np.sum((xi.y - duals.xi.y) ** 2))),
            float(np.sqrt(np.sum((eta.x - duals.eta.x) ** 2) + np.sum((eta.y - duals.eta.y) ** 2))),
        )
        duals = DualFieldPair(xi, eta)
        report.residues.append(residue)

        if debug_checks:
            assert duals.max_abs() <= 1.0 + 1e-12, f"dual left the unit box at iteration {n}"

        if record_energy:
            energy = primal_energy(-w, w0, weight, params.lam, variant)
            report.primal_energies.append(energy)
            if trace is not None:
                trace(f"{n},{residue!r},{energy!r}")

        if n % 100 == 0:
            logger.debug(f"iteration {n}: residue {residue:.6g}")

        if residue < params.tol:
            break

    report.iterations = len(report.residues)
    report.final_residue = residue
    report.converged = residue < params.tol
    report.wall_time = time.perf_counter() - start

    u = w0 - lam_eff * averaged_divergence(duals, gt, variant)

    if report.converged:
        logger.info(f"Converged in {report.iterations} iterations, residue {residue:.6g}, "
                    f"{report.wall_time:.3f}s")
    else:
        logger.warning(f"Stopped at max_iter={params.max_iter} with residue {residue:.6g} "
                       f"(tol {params.tol})")
        if require_convergence:
            raise ConvergenceError(
                f"residue {residue:.6g} still above tol {params.tol} after {params.max_iter} iterations")

    return u, duals, report
