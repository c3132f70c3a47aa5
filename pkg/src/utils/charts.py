# src/utils/charts.py
"""Chart generation for solver traces and threshold sweeps"""
import os
from typing import Optional, Sequence

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import numpy as np
import seaborn as sns

from src.solvers.rof_solver import SolveReport
from src.utils.logger import setup_logger


class SolveChartGenerator:
    """Generates PNG charts for ROF solves and alpha sweeps"""

    def __init__(self, output_dir: Optional[str] = None):
        self.logger = setup_logger(self.__class__.__name__)
        self.output_dir = output_dir
        if output_dir:
            os.makedirs(output_dir, exist_ok=True)

        sns.set_theme(style='whitegrid')

    def _resolve(self, path: str) -> str:
        if self.output_dir and not os.path.isabs(path) and not os.path.dirname(path):
            return os.path.join(self.output_dir, path)
        return path

    def residue_chart(self, report: SolveReport, path: str, tol: Optional[float] = None) -> str:
        """Residue per iteration on a log scale, plus primal energy when it was recorded"""
        frame = report.to_frame()
        has_energy = bool(report.primal_energies)
        fig, axes = plt.subplots(1, 2 if has_energy else 1, figsize=(12 if has_energy else 7, 5),
                                 squeeze=False)

        ax = axes[0][0]
        sns.lineplot(data=frame, x='iter', y='residue', ax=ax, color='tab:blue')
        ax.set_yscale('log')
        if tol is not None:
            ax.axhline(tol, color='tab:red', linestyle='--', label=f'tol = {tol:g}')
            ax.legend()
        ax.set_title(f'Residue ({report.iterations} iterations, '
                     f'{"converged" if report.converged else "not converged"})', fontweight='bold')
        ax.set_xlabel('Iteration')
        ax.set_ylabel('max(|d xi|, |d eta|)')

        if has_energy:
            ax2 = axes[0][1]
            sns.lineplot(data=frame, x='iter', y='primal_energy', ax=ax2, color='tab:green')
            ax2.set_title('Primal energy', fontweight='bold')
            ax2.set_xlabel('Iteration')
            ax2.set_ylabel('TV(u) + |u - w0|^2 / (2 lambda)')

        plt.tight_layout()
        path = self._resolve(path)
        plt.savefig(path, dpi=150, bbox_inches='tight', facecolor='white')
        plt.close(fig)
        self.logger.info(f"Residue chart saved to {path}")
        return path

    def sweep_montage(self, u: np.ndarray, alphas: Sequence[float],
                      masks: Sequence[np.ndarray], path: str) -> str:
        """The solved field next to one panel per thresholded mask"""
        panels = len(masks) + 1
        columns = min(panels, 4)
        rows = int(np.ceil(panels / columns))
        fig, axes = plt.subplots(rows, columns, figsize=(4 * columns, 4 * rows), squeeze=False)

        axes[0][0].imshow(u, cmap='gray')
        axes[0][0].set_title('u', fontweight='bold')
        for k, (alpha, mask) in enumerate(zip(alphas, masks), start=1):
            ax = axes[k // columns][k % columns]
            ax.imshow(mask, cmap='gray', vmin=0, vmax=1)
            ax.set_title(f'alpha = {alpha:g} ({int(np.count_nonzero(mask))} px)', fontweight='bold')
        for ax in axes.ravel():
            ax.axis('off')

        plt.tight_layout()
        path = self._resolve(path)
        plt.savefig(path, dpi=150, bbox_inches='tight', facecolor='white')
        plt.close(fig)
        self.logger.info(f"Sweep montage saved to {path}")
        return path
