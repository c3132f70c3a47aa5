# main.py
"""Command-line entry point for tvcut: TV regularization and graph cuts for shape optimization"""
import argparse
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from config.settings import Config
from src.data.field_io import load_flow_norm, read_field
from src.detection.acontrario import PSI_MODES, DetectionParams
from src.operators.energy import TvVariant
from src.services.segmentation_service import SegmentationService
from src.solvers.rof_solver import RofParams
from src.utils.errors import (CertificateError, ConvergenceError, DegenerateInputError,
                              DimensionMismatchError, FieldFormatError, InvalidParameterError)
from src.utils.logger import set_level, setup_logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

# config-file keys that differ from the flag destinations
CONFIG_ALIASES = {'lambda': 'lam'}


class CliParser(argparse.ArgumentParser):
    """ArgumentParser whose usage errors exit with status 1"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_weight_args(parser: argparse.ArgumentParser):
    parser.add_argument('--image', help='image (PGM/PFM) for the edge weight g = lambda * g_I + mu')
    parser.add_argument('--weights', help='precomputed weight field g (PFM)')
    parser.add_argument('--lambda', dest='lam', type=float, default=1.0, help='edge term weight (default 1)')
    parser.add_argument('--mu', type=float, default=0.0, help='constant perimeter weight (default 0)')
    parser.add_argument('--normalized-intensity', action='store_true',
                        help='difference image intensities in [0, 1] instead of the file scale')
    parser.add_argument('--variant', choices=[v.value for v in TvVariant], default=TvVariant.DIAGONAL.value,
                        help='TV discretisation (default diagonal)')


def build_parser() -> CliParser:
    parser = CliParser(prog='tvcut', description=__doc__)
    parser.add_argument('--config', help='plain-text key=value file; flags override it')
    parser.add_argument('--seed', type=int, default=0,
                        help='reserved; no stage draws random numbers, so outputs do not depend on it')
    parser.add_argument('--verbose', action='store_true', help='log at DEBUG level')
    commands = parser.add_subparsers(dest='command', required=True, parser_class=CliParser)

    rof = commands.add_parser('rof', help='solve the weighted TV (ROF) problem')
    rof.add_argument('--input', required=True, help='field w0 (PFM/PGM)')
    _add_weight_args(rof)
    rof.add_argument('--tau', type=float, default=Config.TAU)
    rof.add_argument('--tol', type=float, default=Config.TOL)
    rof.add_argument('--max-iter', type=int, default=Config.MAX_ITER)
    rof.add_argument('--output', required=True, help='solved field u (PFM)')
    rof.add_argument('--duals-out', help='dual fields (.npz)')
    rof.add_argument('--trace', help='per-iteration CSV: iter,residue,primal_energy')
    rof.add_argument('--per-pixel-residue', action='store_true')
    rof.add_argument('--strict-convergence', action='store_true', help='exit 3 when tol is not reached')
    rof.add_argument('--plot', help='residue chart (PNG)')
    rof.add_argument('--report', help='solve summary (.csv or .xlsx)')

    thr = commands.add_parser('threshold', help='upper level sets of a solved field')
    thr.add_argument('--input', required=True, help='solved field u (PFM)')
    thr.add_argument('--alpha', type=float, action='append', required=True, help='repeatable')
    strictness = thr.add_mutually_exclusive_group()
    strictness.add_argument('--strict', dest='strict', action='store_true', default=True, help='u > alpha (default)')
    strictness.add_argument('--non-strict', dest='strict', action='store_false', help='u >= alpha')
    thr.add_argument('--output-pattern', default='mask_{index}.pgm',
                     help='mask path; {index} and {alpha} are substituted')
    thr.add_argument('--data', help='nonnegative data field f; enables shape energy output')
    _add_weight_args(thr)
    thr.add_argument('--plot', help='sweep montage (PNG)')
    thr.add_argument('--report', help='sweep table (.csv or .xlsx)')

    cut = commands.add_parser('cut', help='exact binary segmentation by minimum cut')
    cut.add_argument('--data', required=True, help='nonnegative data field f such as a flow norm (PFM/PGM)')
    _add_weight_args(cut)
    cut.add_argument('--alpha', type=float, required=True)
    cut.add_argument('--output', required=True, help='mask (PGM)')
    cut.add_argument('--integer-capacities', action='store_true')
    cut.add_argument('--dump', help='write the cut problem in text form')
    cut.add_argument('--report', help='cut table (.csv or .xlsx)')

    det = commands.add_parser('detect', help='a contrario detection on a regularized field')
    det.add_argument('--field', required=True, help='regularized nonnegative field (PFM/PGM)')
    det.add_argument('--radius', type=int, default=Config.DETECTION_RADIUS)
    det.add_argument('--epsilon', type=float, default=Config.DETECTION_EPSILON)
    det.add_argument('--psi', choices=PSI_MODES, default='max', help='renormalisation (default max)')
    det.add_argument('--match', help='solved field u whose closest level set is matched')
    det.add_argument('--output', required=True, help='eroded detection mask (PGM)')
    det.add_argument('--match-output', help='matched level-set mask (PGM); default derived from --output')
    det.add_argument('--nfa-out', help='log10 NFA field (PFM)')

    bg = commands.add_parser('background', help='temporal median background')
    bg.add_argument('--frames', nargs='+', required=True)
    bg.add_argument('--current', help='frame to compare with the background')
    bg.add_argument('--output', required=True, help='background (PFM/PGM)')
    bg.add_argument('--difference-output', help='|B - I| (PFM); default derived from --output')
    bg.add_argument('--lambda', dest='lam', type=float, default=1.0,
                    help='constant weight g for the difference (default 1)')
    bg.add_argument('--weights-output', help='weight field g == lambda (PFM); needs --current')

    parser.command_parsers = commands.choices

    return parser


def _coerce(value: str) -> Any:
    lowered = value.strip().lower()
    if lowered in ('true', 'yes', 'on'):
        return True
    if lowered in ('false', 'no', 'off'):
        return False
    return value


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse argv, with values from --config filling in flags that were not given"""
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config')
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            values: Dict[str, Any] = Config.load_config_file(known.config)
        except FileNotFoundError as e:
            parser.exit(EXIT_IO, f"tvcut: error: {e}\n")
        values = {CONFIG_ALIASES.get(k, k): _coerce(v) for k, v in values.items()}
        parser.set_defaults(**values)
        for sub in parser.command_parsers.values():
            sub.set_defaults(**values)
    return parser.parse_args(argv)


def _path_with_suffix(path: str, suffix: str, extension: str) -> str:
    stem = path.rsplit('.', 1)[0] if '.' in path else path
    return f"{stem}{suffix}{extension}"


def _service(args: argparse.Namespace) -> SegmentationService:
    scale = 'normalized' if getattr(args, 'normalized_intensity', False) else Config.INTENSITY_SCALE
    return SegmentationService(TvVariant(getattr(args, 'variant', TvVariant.DIAGONAL.value)), scale)


def cmd_rof(args: argparse.Namespace) -> int:
    service = _service(args)
    w0 = read_field(args.input)
    g = service.load_weights(w0.shape, args.lam, args.mu, args.image, args.weights)
    # lambda of the ROF problem stays 1 so level sets solve the shape problem
    params = RofParams(lam=1.0, tau=args.tau, tol=args.tol, max_iter=args.max_iter,
                       per_pixel_residue=args.per_pixel_residue)
    u = service.solve_rof(w0, g, params, trace_path=args.trace,
                          require_convergence=args.strict_convergence)
    service.write_field(args.output, u)
    if args.duals_out:
        service.write_duals(args.duals_out)
    if args.plot:
        service.plot_residues(args.plot, args.tol)
    if args.report:
        service.write_report(args.report)

    report = service.solve_report
    print(f"iterations={report.iterations} residue={report.final_residue:.6g} "
          f"converged={report.converged} time={report.wall_time:.3f}s")
    return EXIT_OK


def cmd_threshold(args: argparse.Namespace) -> int:
    service = _service(args)
    u = read_field(args.input)
    f = g = None
    if args.data:
        f = load_flow_norm(args.data)
        if f.shape != u.shape:
            raise DimensionMismatchError(f"data {f.shape} and solution {u.shape} differ in shape")
        g = service.load_weights(u.shape, args.lam, args.mu, args.image, args.weights)

    masks = service.threshold_sweep(u, args.alpha, args.strict, f, g)
    for index, (alpha, mask) in enumerate(zip(args.alpha, masks)):
        path = args.output_pattern.format(index=index, alpha=alpha)
        service.write_mask(path, mask)
        row = service.sweep_rows[index]
        line = f"alpha={alpha:g} pixels={row['pixels']} mask={path}"
        if 'energy' in row:
            line += f" energy={row['energy']:.12g}"
        print(line)

    if args.plot:
        service.plot_sweep(u, args.alpha, masks, args.plot)
    if args.report:
        service.write_report(args.report)
    return EXIT_OK


def cmd_cut(args: argparse.Namespace) -> int:
    service = _service(args)
    f = load_flow_norm(args.data)
    g = service.load_weights(f.shape, args.lam, args.mu, args.image, args.weights)
    mask, energy = service.segment_by_cut(f, g, args.alpha, args.integer_capacities, args.dump)
    service.write_mask(args.output, mask)
    if args.report:
        service.write_report(args.report)
    print(f"alpha={args.alpha:g} pixels={int(np.count_nonzero(mask))} energy={energy:.12g}")
    return EXIT_OK


def cmd_detect(args: argparse.Namespace) -> int:
    service = SegmentationService()
    field = read_field(args.field)
    params = DetectionParams(radius=args.radius, epsilon=args.epsilon, psi_mode=args.psi)
    u = read_field(args.match) if args.match else None
    detection = service.run_detection(field, params, u)
    service.write_mask(args.output, detection)
    print(f"detected={int(np.count_nonzero(detection))} mask={args.output}")

    if service.match is not None:
        match_path = args.match_output or _path_with_suffix(args.output, '_match', '.pgm')
        service.write_mask(match_path, service.match.mask)
        print(f"level={service.match.level:.12g} distance={service.match.distance} mask={match_path}")

    if args.nfa_out:
        service.write_field(args.nfa_out, service.detection.log_nfa)
    return EXIT_OK


def cmd_background(args: argparse.Namespace) -> int:
    service = SegmentationService()
    if args.weights_output and not args.current:
        raise InvalidParameterError("--weights-output needs --current")
    background, difference = service.background(args.frames, args.current, args.lam)
    service.write_field(args.output, background)
    print(f"frames={len(args.frames)} background={args.output}")
    if difference is not None:
        path = args.difference_output or _path_with_suffix(args.output, '_diff', '.pfm')
        service.write_field(path, difference)
        print(f"difference={path} max={difference.max():.6g}")
    if args.weights_output:
        service.write_field(args.weights_output, service.background_weights.values)
        print(f"weights={args.weights_output} lambda={args.lam:g}")
    return EXIT_OK


COMMANDS = {
    'rof': cmd_rof,
    'threshold': cmd_threshold,
    'cut': cmd_cut,
    'detect': cmd_detect,
    'background': cmd_background,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function; returns the process exit status"""
    args = parse_args(argv)
    logger = setup_logger("main")
    if args.verbose:
        set_level(logging.DEBUG)
    logger.debug(f"Seed {args.seed} recorded; no stage is stochastic")

    try:
        return COMMANDS[args.command](args)
    except (InvalidParameterError, DimensionMismatchError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_USAGE
    except (FieldFormatError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except (ConvergenceError, DegenerateInputError, CertificateError) as e:
        logger.error(f"Numerical failure: {e}")
        return EXIT_NUMERICAL
    except KeyboardInterrupt:
        logger.error("Interrupted by user")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
