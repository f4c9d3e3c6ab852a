"""
Command line interface for fitting surface models and evaluating distance and collision probability fields.
"""
import itertools as it
import sys

import numpy as np
import pandas as pd

from . import plotting
from .bench import WARMUP, run_benchmark, summarize
from .callback import CallbackChain, HistoryCallback, LoggingCallback, PeriodicCallback
from .distance import pair_distance, unit_gradient
from .errors import GSMError, ParseError, UndefinedGradient
from .field import (FieldGrid, compute_metrics, evaluate_distance_field, evaluate_probability_field,
                    evaluate_truth_field, read_distance_field, write_distance_field, write_polylines,
                    write_probability_field)
from .geometry import DEFAULT_LEVEL, ROBOT_AXES, ROBOT_YAW, load_ellipsoids, robot_ellipsoid
from .pipeline import Pipeline
from .probability import DEFAULT_K
from .scenes import SCENES, make_scene
from .surface_model import fit_gmm, load_model, load_point_cloud, save_model, save_point_cloud

DEFAULT_ROBOT = "{} {} {} {} 0 0".format(*(ROBOT_AXES + (ROBOT_YAW,)))
ISO_LEVEL = 0.1


def parse_robot(text):
    """
    Parse a robot specification `"ax ay az [yaw pitch roll]"` (meters and degrees).
    """
    try:
        values = [float(value) for value in text.replace(',', ' ').split()]
    except ValueError as ex:
        raise ParseError("invalid robot '{}': {}".format(text, ex))
    if len(values) not in (3, 6):
        raise ParseError("expected 'ax ay az [yaw pitch roll]' but got '{}'".format(text))
    return robot_ellipsoid(values[:3], *values[3:])


def parse_prune(text):
    """
    Parse a pruning option: `off` or `0` scans all components, a positive integer scans the nearest components.
    """
    text = str(text).strip().lower()
    if text in ('off', '0', 'none', ''):
        return None
    try:
        value = int(text)
    except ValueError:
        raise ParseError("expected 'off' or a positive integer but got '{}'".format(text))
    if value < 0:
        raise ParseError("the number of pruned components must be nonnegative")
    return value


def parse_formats(text):
    return [token for token in str(text or '').replace(',', ' ').split() if token]


def print_frame(frame):
    frame.to_csv(sys.stdout, index=False, lineterminator='\n')


class GSMFieldPipeline(Pipeline):
    """
    Distance fields, distance gradients and collision probabilities of ellipsoidal robots against Gaussian surface
    models.
    """
    description = "Ellipsoid distance fields and collision probabilities for Gaussian surface models."

    def __init__(self, prog='gsm-field'):
        super(GSMFieldPipeline, self).__init__(prog, library_loggers=('gsm_field',))

    # Shared arguments -------------------------------------------------------------------------------------------

    def _add_robot(self, parser):
        self.add_argument(parser, '--robot', default=DEFAULT_ROBOT, help="robot semi-axes and yaw pitch roll")

    def _add_slice(self, parser):
        self.add_argument(parser, '--slice', required=True,
                          help="slice 'ox oy oz,ux uy uz,vx vy vz,eu ev[,ru rv]' centered on the origin")

    def _add_figure(self, parser):
        self.add_argument(parser, '--figure', default='', help="comma separated figure formats, e.g. 'png,pdf'")

    def _load_model(self):
        return load_model(self.args.model, self.args.level)

    # Commands ---------------------------------------------------------------------------------------------------

    def init_fit(self, parser):
        self.add_argument(parser, '--cloud', required=True, help="XYZ or PLY point cloud")
        self.add_argument(parser, '--components', type=int, default=8, help="number of mixture components")
        self.add_argument(parser, '--seed', type=int, default=0, help="random number generator seed")
        self.add_argument(parser, '--out', required=True, help="output model file")
        self.add_argument(parser, '--level', type=float, default=DEFAULT_LEVEL, help="isocontour level")
        self.add_argument(parser, '--max-iter', type=int, default=200, help="maximum number of EM iterations")
        self.add_argument(parser, '--tol', type=float, default=1e-5, help="relative log-likelihood tolerance")

    def run_fit(self):
        """
        Fit a Gaussian surface model to a point cloud.
        """
        args = self.args
        points = load_point_cloud(args.cloud)
        self.info("loaded {} points from '{}'", len(points), args.cloud)
        history = HistoryCallback()
        callback = CallbackChain(history, PeriodicCallback(LoggingCallback(self.logger, 'debug'), 10))
        model = fit_gmm(points, args.components, args.seed, args.max_iter, args.tol, args.level, callback=callback)
        save_model(model, args.out)
        iterations, log_likelihood = history.final
        print_frame(pd.DataFrame([{'components': model.size, 'log_likelihood': log_likelihood,
                                   'iterations': iterations}]))

    def init_field(self, parser):
        self.add_argument(parser, '--model', required=True, help="surface model file")
        self._add_robot(parser)
        self._add_slice(parser)
        self.add_argument(parser, '--out', required=True, help="output prefix")
        self.add_argument(parser, '--prune', default='off', help="scan only the N nearest components")
        self.add_argument(parser, '--level', type=float, default=None, help="override the isocontour level")
        self._add_figure(parser)

    def run_field(self):
        """
        Evaluate the distance field and distance gradient on a slice.
        """
        args = self.args
        model = self._load_model()
        robot = parse_robot(args.robot)
        grid = FieldGrid.parse(args.slice)
        field = evaluate_distance_field(robot, model, grid, parse_prune(args.prune), self.progress)
        filenames = write_distance_field(field, args.out)

        distance = np.where(field.valid, field.distance, np.nan)
        vmax = np.nanmax(distance) if np.isfinite(distance).any() else 1.0
        filenames.append(args.out + '.dist.ppm')
        plotting.write_ppm(filenames[-1], plotting.to_rgb(distance, plotting.DISTANCE_CMAP, 0, vmax))

        formats = parse_formats(args.figure)
        if formats:
            fig, _ = plotting.field_plot(distance, (grid.extent_u, grid.extent_v), plotting.DISTANCE_CMAP,
                                         'distance (m)', 0, vmax)
            filenames.extend(plotting.savefigs(fig, args.out + '.dist', *formats))
        self.info("wrote {}", ", ".join(filenames))

    def init_prob(self, parser):
        self.add_argument(parser, '--model', required=True, help="surface model file")
        self._add_robot(parser)
        self.add_argument(parser, '--sigma', type=float, default=0.01,
                          help="variance of each coordinate of the robot center (m^2)")
        self.add_argument(parser, '--K', type=int, default=DEFAULT_K, help="number of blended components")
        self.add_argument(parser, '--blend', choices=['on', 'off'], default='on',
                          help="blend the nearest components or use the closest component")
        self._add_slice(parser)
        self.add_argument(parser, '--out', required=True, help="output prefix")
        self.add_argument(parser, '--iso', type=float, default=ISO_LEVEL, help="probability isocontour level")
        self.add_argument(parser, '--level', type=float, default=None, help="override the isocontour level")
        self._add_figure(parser)

    def run_prob(self):
        """
        Evaluate the collision probability map on a slice.
        """
        args = self.args
        model = self._load_model()
        robot = parse_robot(args.robot)
        grid = FieldGrid.parse(args.slice)
        field = evaluate_probability_field(robot, model, grid, args.sigma, args.K, args.blend == 'on',
                                           self.progress)
        filenames = [write_probability_field(field, args.out), args.out + '.prob.ppm']
        plotting.write_ppm(filenames[-1], plotting.to_rgb(field.probability, plotting.PROBABILITY_CMAP, 0, 1))
        polylines = plotting.isocontour_polylines(field.probability, field.points, args.iso)
        filenames.append(write_polylines(polylines, args.out + '.iso.csv'))

        formats = parse_formats(args.figure)
        if formats:
            fig, _ = plotting.field_plot(field.probability, (grid.extent_u, grid.extent_v),
                                          plotting.PROBABILITY_CMAP, 'collision probability', 0, 1)
            filenames.extend(plotting.savefigs(fig, args.out + '.prob', *formats))
        self.info("wrote {}", ", ".join(filenames))

    def init_metrics(self, parser):
        self.add_argument(parser, '--pred', required=True, help="prefix of the predicted field")
        self.add_argument(parser, '--truth', required=True, help="prefix of the reference field")

    def run_metrics(self):
        """
        Compare a predicted distance field with a reference field.
        """
        report = compute_metrics(read_distance_field(self.args.pred), read_distance_field(self.args.truth))
        print_frame(pd.DataFrame([report._asdict()]))

    def init_bench(self, parser):
        self.add_argument(parser, '--pairs', type=int, default=100000, help="number of random ellipsoid pairs")
        self.add_argument(parser, '--seed', type=int, default=0, help="random number generator seed")
        self.add_argument(parser, '--device-label', default=None, help="device name reported in the table")
        self.add_argument(parser, '--warmup', type=int, default=WARMUP, help="number of untimed queries")
        self.add_argument(parser, '--out', default=None, help="optional CSV file for per-pair timings")

    def run_bench(self):
        """
        Time initialisation, distance and gradient, and collision probability of random ellipsoid pairs.
        """
        args = self.args
        timings = run_benchmark(args.pairs, args.seed, args.warmup, progress=self.progress)
        if args.out:
            timings.to_csv(args.out, index=False, lineterminator='\n')
        print_frame(summarize(timings, args.device_label))

    def init_truth(self, parser):
        self.add_argument(parser, '--cloud', required=True, help="XYZ or PLY point cloud")
        self._add_robot(parser)
        self._add_slice(parser)
        self.add_argument(parser, '--out', required=True, help="output prefix")
        self.add_argument(parser, '--samples', type=int, default=2000, help="number of robot boundary samples")
        self.add_argument(parser, '--seed', type=int, default=0, help="random number generator seed")

    def run_truth(self):
        """
        Evaluate reference distances and normals against a point cloud on a slice.
        """
        args = self.args
        field = evaluate_truth_field(parse_robot(args.robot), load_point_cloud(args.cloud),
                                     FieldGrid.parse(args.slice), args.samples, args.seed, self.progress)
        self.info("wrote {}", ", ".join(write_distance_field(field, args.out)))

    def init_scene(self, parser):
        self.add_argument(parser, '--kind', choices=sorted(SCENES), default='wall', help="synthetic scene")
        self.add_argument(parser, '--points', type=int, default=10000, help="number of points")
        self.add_argument(parser, '--noise', type=float, default=0.01, help="noise standard deviation (m)")
        self.add_argument(parser, '--seed', type=int, default=0, help="random number generator seed")
        self.add_argument(parser, '--out', required=True, help="output XYZ file")

    def run_scene(self):
        """
        Generate a synthetic point cloud.
        """
        args = self.args
        save_point_cloud(make_scene(args.kind, args.points, args.noise, args.seed), args.out)
        self.info("wrote {} points to '{}'", args.points, args.out)

    def init_pairs(self, parser):
        self.add_argument(parser, '--first', required=True, help="ellipsoid file")
        self.add_argument(parser, '--second', required=True, help="ellipsoid file")
        self.add_argument(parser, '--out', default=None, help="output CSV file (default is standard output)")

    def run_pairs(self):
        """
        Evaluate distances and collisions between every pair of records of two ellipsoid files.
        """
        args = self.args
        first, second = load_ellipsoids(args.first), load_ellipsoids(args.second)
        rows = []
        pairs = it.product(enumerate(first), enumerate(second))
        for (i, e1), (j, e2) in self.tqdm(pairs, total=len(first) * len(second), leave=False):
            solution = pair_distance(e1, e2)
            try:
                gradient = unit_gradient(solution)
            except UndefinedGradient:
                gradient = np.full(e1.dim, np.nan)
            row = {'first': i, 'second': j, 'distance': solution.distance, 'colliding': int(solution.colliding)}
            row.update(zip(['gx', 'gy', 'gz'], gradient))
            rows.append(row)
        frame = pd.DataFrame(rows)
        if args.out:
            frame.to_csv(args.out, index=False, na_rep='nan', lineterminator='\n')
        else:
            frame.to_csv(sys.stdout, index=False, na_rep='nan', lineterminator='\n')


def main(argv=None):
    try:
        pipeline = GSMFieldPipeline()
    except GSMError as ex:
        sys.stderr.write("{}\n".format(ex))
        sys.exit(ex.exit_code)
    sys.exit(pipeline.run(argv))
