# src/services/segmentation_service.py
"""Segmentation service orchestrating data terms, solvers, detection and reports"""
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.settings import Config
from src.data.data_terms import background_model_problem, edge_weight, median_background
from src.data.field_io import read_field, read_pfm, read_pgm, write_mask, write_pfm, write_pgm
from src.detection.acontrario import DetectionParams, DetectionResult, MatchResult, detect, erode, match_detection
from src.operators.energy import TvVariant, WeightField, shape_energy
from src.solvers.graph_cut import build_cut_problem, cut_segment, dump_problem
from src.solvers.level_set import alpha_sweep, is_nested
from src.solvers.rof_solver import DualFieldPair, RofParams, SolveReport, rof_solve
from src.utils.charts import SolveChartGenerator
from src.utils.errors import DimensionMismatchError, InvalidParameterError
from src.utils.logger import setup_logger

REPORT_FORMATS = ('.csv', '.xlsx')


class SegmentationService:
    """Runs one pipeline stage per call and keeps what it produced for reporting"""

    def __init__(self, variant: TvVariant = TvVariant.DIAGONAL, intensity_scale: str = Config.INTENSITY_SCALE):
        self.logger = setup_logger(self.__class__.__name__)
        self.variant = TvVariant(variant)
        if intensity_scale not in ('raw', 'normalized'):
            raise InvalidParameterError(f"intensity scale must be 'raw' or 'normalized', got {intensity_scale!r}")
        self.intensity_scale = intensity_scale

        self.u: Optional[np.ndarray] = None
        self.duals: Optional[DualFieldPair] = None
        self.solve_report: Optional[SolveReport] = None
        self.sweep_rows: List[Dict[str, Any]] = []
        self.cut_rows: List[Dict[str, Any]] = []
        self.detection: Optional[DetectionResult] = None
        self.match: Optional[MatchResult] = None
        self.background_weights: Optional[WeightField] = None

    # ---- data terms ----

    def load_weights(self, shape: Tuple[int, int], lam: float = 1.0, mu: float = 0.0,
                     image_path: Optional[str] = None,
                     weights_path: Optional[str] = None) -> WeightField:
        """g from a stored weight field, from an image as lam * g_I + mu, or lam + mu without image"""
        if weights_path:
            values = read_pfm(weights_path)
            self._check_shape(values, shape, weights_path)
            self.logger.info(f"Loaded weights from {weights_path}")
            return WeightField(values)

        if image_path:
            if image_path.lower().endswith('.pgm'):
                image, maxval = read_pgm(image_path)
                scale = float(maxval) if self.intensity_scale == 'raw' else 1.0
            else:
                image, scale = read_pfm(image_path), 1.0
            self._check_shape(image, shape, image_path)
            g = edge_weight(image, lam, mu, intensity_scale=scale)
            self.logger.info(f"Edge weights from {image_path}: g in [{g.values.min():.4g}, {g.max_g:.4g}] "
                             f"(lambda={lam}, mu={mu}, intensity scale {scale:g})")
            return g

        # a flat image has g_I == 1 everywhere
        return edge_weight(np.zeros(shape), lam, mu)

    @staticmethod
    def _check_shape(values: np.ndarray, shape: Tuple[int, int], path: str):
        if values.shape != tuple(shape):
            raise DimensionMismatchError(f"{path} is {values.shape[0]}x{values.shape[1]}, "
                                         f"expected {shape[0]}x{shape[1]}")

    # ---- ROF ----

    def solve_rof(self, w0: np.ndarray, g: WeightField, params: RofParams,
                  trace_path: Optional[str] = None,
                  require_convergence: bool = False) -> np.ndarray:
        """Solve the ROF problem and keep (u, duals, report); the trace CSV has one row per iteration"""
        self.u, self.duals, self.solve_report = rof_solve(
            w0, g, params, variant=self.variant,
            record_energy=trace_path is not None,
            require_convergence=require_convergence)
        if trace_path:
            self.solve_report.to_frame().to_csv(trace_path, index=False)
            self.logger.info(f"Iteration trace written to {trace_path}")
        return self.u

    def write_duals(self, path: str):
        if self.duals is None:
            raise InvalidParameterError("no dual fields to write; run solve_rof first")
        np.savez(path, xi_x=self.duals.xi.x, xi_y=self.duals.xi.y,
                 eta_x=self.duals.eta.x, eta_y=self.duals.eta.y)
        self.logger.info(f"Dual fields written to {path}")

    # ---- thresholding ----

    def threshold_sweep(self, u: np.ndarray, alphas: Sequence[float], strict: bool = True,
                        f: Optional[np.ndarray] = None, g: Optional[WeightField] = None) -> List[np.ndarray]:
        """Masks for every alpha; their shape energies are recorded when f and g are given"""
        if not alphas:
            raise InvalidParameterError("at least one alpha is required")
        masks = alpha_sweep(u, alphas, strict)
        if not is_nested(masks, alphas):
            self.logger.warning("Thresholded masks are not nested")
        self.sweep_rows = []
        for alpha, mask in zip(alphas, masks):
            row = {'alpha': float(alpha), 'pixels': int(np.count_nonzero(mask))}
            if f is not None and g is not None:
                row['energy'] = shape_energy(mask, f, g, alpha, self.variant)
            self.sweep_rows.append(row)
        return masks

    # ---- graph cut ----

    def segment_by_cut(self, f: np.ndarray, g: WeightField, alpha: float,
                       integer_capacities: bool = False,
                       dump_path: Optional[str] = None) -> Tuple[np.ndarray, float]:
        if dump_path:
            problem = build_cut_problem(f, g, alpha, self.variant)
            if integer_capacities:
                problem = problem.scaled(Config.CUT_SCALE)
            with open(dump_path, 'w', encoding='ascii') as fh:
                dump_problem(problem, fh)
            self.logger.info(f"Cut problem written to {dump_path}")
        mask, energy = cut_segment(f, g, alpha, self.variant, integer_capacities)
        self.cut_rows.append({'alpha': float(alpha), 'pixels': int(np.count_nonzero(mask)), 'energy': energy})
        return mask, energy

    # ---- detection ----

    def run_detection(self, field: np.ndarray, params: DetectionParams,
                      match_u: Optional[np.ndarray] = None) -> np.ndarray:
        """Eroded detection mask; with match_u the closest level set is kept too"""
        if match_u is not None and np.shape(match_u) != np.shape(field):
            raise DimensionMismatchError(f"field {np.shape(field)} and solution {np.shape(match_u)} differ in shape")
        self.detection = detect(field, params)
        if match_u is not None:
            self.match = match_detection(self.detection, match_u, params.radius)
            return self.match.detection
        return erode(self.detection.mask, params.radius // 2)

    # ---- background ----

    def background(self, frame_paths: Sequence[str], current_path: Optional[str] = None,
                   lam: float = 1.0) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Median background B; with a current frame, f = |B - I| and the weights g == lam are kept too"""
        frames = [read_field(path) for path in frame_paths]
        background = median_background(frames)
        difference = None
        self.background_weights = None
        if current_path:
            difference, self.background_weights = background_model_problem(
                frames, read_field(current_path), lam, background=background)
        self.logger.info(f"Median background from {len(frames)} frames")
        return background, difference

    # ---- outputs ----

    @staticmethod
    def write_field(path: str, field: np.ndarray):
        """PFM keeps the values; PGM clips to [0, 1]"""
        if path.lower().endswith('.pgm'):
            write_pgm(path, field)
        else:
            write_pfm(path, field)

    @staticmethod
    def write_mask(path: str, mask: np.ndarray):
        write_mask(path, mask)

    def plot_residues(self, path: str, tol: Optional[float] = None) -> str:
        return SolveChartGenerator().residue_chart(self.solve_report, path, tol)

    def plot_sweep(self, u: np.ndarray, alphas: Sequence[float], masks: Sequence[np.ndarray], path: str) -> str:
        return SolveChartGenerator().sweep_montage(u, alphas, masks, path)

    def report_frame(self) -> pd.DataFrame:
        """Sweep or cut rows when present, otherwise the solve summary"""
        if self.sweep_rows:
            return pd.DataFrame(self.sweep_rows)
        if self.cut_rows:
            return pd.DataFrame(self.cut_rows)
        if self.solve_report is not None:
            return pd.DataFrame([self.solve_report.summary()])
        return pd.DataFrame()

    def write_report(self, path: str) -> str:
        extension = os.path.splitext(path)[1].lower()
        if extension not in REPORT_FORMATS:
            raise InvalidParameterError(f"report must be one of {REPORT_FORMATS}, got {path}")
        frame = self.report_frame()
        if extension == '.xlsx':
            frame.to_excel(path, index=False, engine='openpyxl')
        else:
            frame.to_csv(path, index=False)
        self.logger.info(f"Report with {len(frame)} rows written to {path}")
        return path

    def get_processing_summary(self) -> Dict[str, Any]:
        summary: Dict[str, Any] = {'variant': self.variant.value}
        if self.solve_report is not None:
            summary.update(self.solve_report.summary())
        if self.sweep_rows:
            summary['sweep'] = list(self.sweep_rows)
        if self.cut_rows:
            summary['cuts'] = list(self.cut_rows)
        if self.detection is not None:
            summary['detected_pixels'] = int(np.count_nonzero(self.detection.mask))
            summary['mu_hat'] = self.detection.mu_hat
        if self.match is not None:
            summary['matched_level'] = self.match.level
            summary['match_distance'] = self.match.distance
        return summary
