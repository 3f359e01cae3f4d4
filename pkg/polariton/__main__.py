# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The main method for the package and an ErrorLogger subclass for runs.

"""
import sys
from argparse import ArgumentParser

from polariton import config as cfg
from polariton import error
from polariton import experiments
from polariton import formatter as frmt
from polariton import kinetics
from polariton.controller import RunController
from polariton.logger import ErrorLogger


class RunErrorLogger(ErrorLogger):
    """An ErrorLogger subclass for runs, thresholds, and sweep points.

    Keys are tuples such as (B, k_p, multiplier) for sweep points and
    (B, k_p) for thresholds.

    Attributes
    ----------
    NOT_CONVERGED : Error instance
        The error indicating a run did not become stationary by its final
        time.
    NOT_BRACKETED : Error instance
        The error indicating no pump in range reaches n0 = 1.
    NUMERICAL_FAILURE : Error instance
        The error indicating a run failed numerically.

    """
    NOT_CONVERGED = error.Error('run not stationary by its final time')
    NOT_BRACKETED = error.Error('threshold not bracketed in the pump range')
    NUMERICAL_FAILURE = error.Error('numerical failure')

    def __init__(self):
        errors = [self.NOT_CONVERGED, self.NOT_BRACKETED, self.NUMERICAL_FAILURE]
        super(RunErrorLogger, self).__init__(errors)
        self._status_errors = {experiments.STATUS_NOT_CONVERGED: self.NOT_CONVERGED,
                               experiments.STATUS_NOT_BRACKETED: self.NOT_BRACKETED,
                               experiments.STATUS_NUMERICAL_FAILURE: self.NUMERICAL_FAILURE}

    def autolog(self, obj, report=False, key=None):
        found = []
        message = ''
        if isinstance(obj, experiments.SweepRecord):
            key = (obj.B, obj.k_p, obj.multiplier) if key is None else key
            if obj.status in self._status_errors:
                found.append(self._status_errors[obj.status])
                message = obj.message
        elif isinstance(obj, experiments.ThresholdResult):
            if obj.p_th is None:
                found.append(self.NOT_BRACKETED)
                message = 'no pump in range reaches n0 = 1 (max n0 = {!r})'.format(obj.max_n0)
            elif not obj.converged:
                found.append(self.NOT_CONVERGED)
                message = 'bisection stopped outside the n0 band at p0 = {!r}'.format(obj.p_th)
        elif isinstance(obj, experiments.ScurvePoint):
            if not obj.converged:
                found.append(self.NOT_CONVERGED)
        elif isinstance(obj, kinetics.Trajectory):
            if not obj.stationarity.stationary:
                found.append(self.NOT_CONVERGED)

        for err in found:
            self.log_error(key, err)
            if report:
                error.error(message or err.strerror, prelude=_describe(key))
        return len(found)


def _describe(key):
    if key is None:
        return 'run'
    labels = ['B = {} T'.format(frmt.number_label(key[0]))]
    if len(key) > 1:
        labels.append('k_p = {!r}'.format(key[1]))
    if len(key) > 2:
        labels.append('x{}'.format(frmt.number_label(key[2])))
    return ', '.join(labels)


def main():
    """Resolve the configuration and run the command given.

    """
    args = _get_parser().parse_args()

    try:
        config = cfg.parse_config(args.config, overrides=args.set or ())
    except error.ConfigError as err:
        error.error(str(err), status=int(RunController.Status.CONFIG))

    log = RunErrorLogger()
    controller = RunController(config, out_dir=args.out, quiet=args.quiet, logger=log)
    status = controller.run_command([args.command] + args.args)

    if log.error_count() > 0 and not args.quiet:
        print()
        log.print_summary()
    sys.exit(int(status))


def _get_parser():
    parser = ArgumentParser(prog='polariton',
                            description='Simulate polariton condensation kinetics in a'
                                        ' magnetic field.')

    command_help = 'dispersion, run, threshold, scurve, sweep, or help (any unambiguous'
    command_help += ' prefix)'

    parser.add_argument('command', metavar='COMMAND', help=command_help)
    parser.add_argument('args', metavar='ARG', nargs='*',
                        help='arguments of the command (the command name for help)')
    parser.add_argument('-c', '--config', metavar='FILE',
                        help='read "section.key = value" lines from FILE')
    parser.add_argument('-s', '--set', metavar='KEY=VALUE', action='append',
                        help='override one configuration key (repeatable)')
    parser.add_argument('-o', '--out', metavar='DIR',
                        help='write outputs to DIR (default: output.dir)')
    parser.add_argument('-q', '--quiet', action='store_true',
                        help='print no progress lines')

    return parser


if __name__ == '__main__':
    main()
