# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The module containing the RunController class.

"""
import textwrap
from collections import OrderedDict
from datetime import datetime, timezone
from enum import IntEnum
from functools import wraps

from polariton import error
from polariton import experiments
from polariton import formatter as frmt
from polariton import kinetics
from polariton import material as mat
from polariton.cmdmap import CommandMapper
from polariton.error import ConfigError, FieldDomainError, NumericalError


class RunController(object):
    """A runner of the package's commands on one resolved configuration.

    Parameters
    ----------
    config : RunConfig
        The configuration every command runs with.
    out_dir : str, optional
        The directory outputs go to (default the configuration's
        'output.dir').
    quiet : bool, optional
        True to suppress progress lines on stdout (default False).
    logger : ErrorLogger, optional
        The logger that run-level errors (non-converged or failed points)
        are recorded with (default None, no recording).

    Attributes
    ----------
    Status : class
        The exit statuses of commands.
    cmd : CommandMapper instance
        Command names mapped to the `_cmd_` methods of this class.
    config : RunConfig
        The configuration.
    out_dir : str
        The output directory.
    quiet : bool
        True if progress lines are suppressed.
    logger : ErrorLogger or None
        The run-level error logger.
    written : OrderedDict of str to str
        The files written by the last command mapped to their sha256.

    Notes
    -----
    Every `_cmd_` method takes argv, the list of str arguments with the
    command's name as the zeroth element, and print_help, which when 1
    prints a one-line overview and when 2 a longer help message, and
    returns a Status constant.

    """
    class Status(IntEnum):
        """The exit status of a command.

        Attributes
        ----------
        OK : int
            Normal return, including runs with recorded per-point errors.
        CONFIG : int
            Return due to an invalid configuration or command, or an
            output that cannot be written.
        NUMERICAL : int
            Return due to a numerical failure that left no usable result.

        """
        # pylint: disable=invalid-name; `OK` is an okay name
        OK = 0
        CONFIG = 2
        NUMERICAL = 3


    def __init__(self, config, out_dir=None, quiet=False, logger=None):
        self.cmd = CommandMapper(obj=self, pattern='^_cmd_')
        self.config = config
        self.out_dir = config['output.dir'] if out_dir is None else out_dir
        self.quiet = quiet
        self.logger = logger
        self.written = OrderedDict()


    def run_command(self, argv):
        """Run the command named by argv[0], which may be abbreviated.

        Errors are reported to stderr and turned into the returned status;
        library exceptions never escape.

        Parameters
        ----------
        argv : list of str
            The command name followed by its arguments.

        Returns
        -------
        Status constant
            The status of the command.

        """
        try:
            command_name = self.cmd.resolve(argv[0] if argv else '')
            command = self.cmd.commands[command_name]
            return command([command_name] + list(argv[1:]))
        except (ConfigError, FieldDomainError) as err:
            error.error(str(err))
            return self.Status.CONFIG
        except NumericalError as err:
            error.error(str(err), prelude='numerical failure')
            self._dump_state(err)
            return self.Status.NUMERICAL
        except OSError as err:
            error.error(str(err))
            return self.Status.CONFIG

    def _dump_state(self, err):
        # The last accepted occupations of a failed run, for diagnosis
        if err.state is None:
            return
        rows = [[node, value] for node, value in enumerate(err.state)]
        try:
            frmt.write_outputs({'failure_state.csv': frmt.Table(['node', 'n'], rows)},
                               self.out_dir)
        except OSError as dump_err:
            error.error(str(dump_err), prelude='warning')

    def progress(self, text):
        """Print a progress line unless quiet.

        """
        if not self.quiet:
            print(text)

    def printwrap(self, *args):
        """Print the passed strings joined by a space and wrapped to 70 columns.

        """
        print('\n'.join(textwrap.wrap(' '.join(args), width=70)))


    def cmdhelp(overview_msg, usage_msg, extra_msg=None):
        """Return method with help-message code generated.

        A decorator that makes a command-style method print its short or
        long help message when its `print_help` parameter is 1 or 2.

        Parameters
        ----------
        overview_msg : str
            A one-line summary of the command.
        usage_msg : str
            How the command is called.
        extra_msg : str, optional
            Any additional notes on the command (default None).

        Returns
        -------
        method
            The command-style method with help-message code added.

        """
        # pylint: disable=no-self-argument; it can't be an instance method
        # and it can't (without unnecessary complexity) be static
        def _cmdhelp_decorator(cmd_func):

            def _decorator(self, argv, print_help=0):
                if print_help == 1:
                    print(overview_msg)
                    return self.Status.OK
                elif print_help == 2:
                    print(overview_msg)
                    print('Usage:', usage_msg)
                    if extra_msg:
                        print()
                        self.printwrap(extra_msg)
                    return self.Status.OK
                return cmd_func(self, argv)

            return wraps(cmd_func)(_decorator)

        return _cmdhelp_decorator


    def _finish(self, command, tables, started, **extra):
        # Write the tables, then the manifest describing them
        self.written = frmt.write_outputs(tables, self.out_dir)
        manifest = {'schema': frmt.MANIFEST_SCHEMA,
                    'csv_schema': frmt.CSV_SCHEMA,
                    'command': command,
                    'config': self.config.as_dict(),
                    'versions': frmt.versions(),
                    'outputs': self.written,
                    'started': started.isoformat(),
                    'elapsed_s': (datetime.now(timezone.utc) - started).total_seconds(),
                    'errors': self.logger.summary() if self.logger is not None else {}}
        manifest.update(extra)
        path = frmt.write_manifest(manifest, self.out_dir)
        self.progress('Wrote {} file{} and {} to "{}".'.format(
            len(self.written), 's' if len(self.written) != 1 else '', frmt.MANIFEST_NAME,
            self.out_dir))
        return path

    def _autolog(self, obj, key=None):
        if self.logger is not None:
            self.logger.autolog(obj, report=True, key=key)

    @staticmethod
    def _run_summary(trajectory, kernels):
        # Manifest entry of a single evolution
        final = trajectory.last
        summary = {'t_end': final.t, 'n0': final.n0, 'N_tot': final.N_tot,
                   'n0_ratio': final.ratio,
                   'stationary': trajectory.stationarity.stationary,
                   'stationary_time': trajectory.stationarity.time,
                   'wall_clock_s': trajectory.elapsed,
                   'counters': experiments.run_counters(trajectory, kernels)}
        if final.f_k is not None:
            summary['bottleneck_ratio'] = kinetics.bottleneck_ratio(final.f_k)
            summary['bose_einstein'] = _bose_einstein(kernels.grid, final.f_k)
        return summary


    @cmdhelp('Write the dispersion at each field value as CSV.',
             'dispersion',
             'One file dispersion_B{B}.csv per value of dispersion.B_values, sampled at'
             ' dispersion.points wavenumbers up to dispersion.k_max. Energies are in eV.')
    def _cmd_dispersion(self, argv):
        started = datetime.now(timezone.utc)
        config = self.config
        material = config.material
        tables = OrderedDict()
        for B in config['dispersion.B_values']:
            field = mat.field_state(material, B)
            name = 'dispersion_B{}.csv'.format(frmt.number_label(B))
            tables[name] = frmt.dispersion_table(field, points=config['dispersion.points'],
                                                 k_max=config['dispersion.k_max'])
            self.progress('B = {} T: M = {:.4g} m0, Omega = {:.4g} meV'.format(
                frmt.number_label(B), field.exciton_mass_B, field.rabi_B))
        self._finish('dispersion', tables, started, mass_pole_T=mat.mass_pole(material))
        return self.Status.OK

    @cmdhelp('Evolve the occupations under the configured pump.',
             'run',
             'Writes trajectory.csv (n0, N_tot, and n0/N_tot over time, with the'
             ' occupations on snapshot rows) and distribution.csv (the final f_k).')
    def _cmd_run(self, argv):
        started = datetime.now(timezone.utc)
        config = self.config
        B = config['field.B']
        kernels = experiments.kernels_for(config, B)
        self.progress('Evolving at B = {} T, p0 = {!r} 1/ps, k_p = {!r} 1/nm on {} nodes.'.format(
            frmt.number_label(B), config['pump.p0'], config['pump.k_p'], kernels.grid.N))
        trajectory = experiments.simulate(config)
        final = trajectory.last
        self.progress('t = {:.1f} ps: n0 = {:.6g}, N_tot = {:.6g}{}'.format(
            final.t, final.n0, final.N_tot,
            '' if trajectory.stationarity.stationary else ' (not stationary)'))
        if not trajectory.stationarity.stationary:
            self._autolog(trajectory, key=(B, config['pump.k_p'], config['pump.p0']))

        tables = OrderedDict([('trajectory.csv', frmt.trajectory_table(trajectory)),
                              ('distribution.csv',
                               frmt.distribution_table(kernels.grid, final.f_k))])
        self._finish('run', tables, started, kernels=experiments.kernel_report(kernels),
                     run=self._run_summary(trajectory, kernels))
        return self.Status.OK

    @cmdhelp('Find the pump strength at which the stationary n0 is 1.',
             'threshold',
             'Brackets and bisects p0 inside [threshold.p_min, threshold.p_max] at field.B'
             ' and pump.k_p; every run is written to threshold.csv.')
    def _cmd_threshold(self, argv):
        started = datetime.now(timezone.utc)
        config = self.config
        B, k_p = config['field.B'], config['pump.k_p']
        result = self._threshold(B, k_p)
        tables = {'threshold.csv': frmt.threshold_table(result)}
        kernels = experiments.kernels_for(config, B)
        self._finish('threshold', tables, started, kernels=experiments.kernel_report(kernels),
                     threshold=_threshold_summary(result))
        return self.Status.OK

    def _threshold(self, B, k_p):
        result = experiments.find_threshold(self.config, B, k_p, progress=self._threshold_step)
        self._threshold_found(result, B, k_p)
        return result

    def _threshold_step(self, step):
        self.progress('p0 = {!r} 1/ps: n0 = {:.6g}{}'.format(
            step.p0, step.n0, '' if step.stationary else ' (not stationary)'))

    def _threshold_found(self, result, B, k_p):
        if result.p_th is not None:
            self.progress('p_th = {!r} 1/ps{}'.format(
                result.p_th, '' if result.converged else ' (not converged)'))
        self._autolog(result, key=(B, k_p))

    @cmdhelp('Find the threshold, then the stationary n0 at multiples of it.',
             'scurve',
             'Writes threshold.csv and scurve.csv (one row per value of'
             ' experiment.multipliers). With the fig2 preset, runs at 0.5, 1, and 2.4'
             ' times the threshold also write trajectory_x{M}.csv and'
             ' distribution_x{M}.csv.')
    def _cmd_scurve(self, argv):
        started = datetime.now(timezone.utc)
        config = self.config
        B, k_p = config['field.B'], config['pump.k_p']
        kernels = experiments.kernels_for(config, B)

        if config['experiment.preset'] == 'fig2':
            result = experiments.run_fig2(config, progress=self._threshold_step)
            self._threshold_found(result.threshold, B, k_p)
            threshold, points = result.threshold, result.scurve
            runs = result.runs
        else:
            threshold = self._threshold(B, k_p)
            points, runs = [], None
            if threshold.p_th is not None:
                points = experiments.run_scurve(config, threshold.p_th, B=B, k_p=k_p)

        tables = OrderedDict([('threshold.csv', frmt.threshold_table(threshold))])
        extra = {'threshold': _threshold_summary(threshold)}
        if runs:
            extra['runs'] = OrderedDict()
            for multiplier, trajectory in runs:
                label = frmt.number_label(multiplier)
                tables['trajectory_x{}.csv'.format(label)] = frmt.trajectory_table(trajectory)
                tables['distribution_x{}.csv'.format(label)] = frmt.distribution_table(
                    kernels.grid, trajectory.last.f_k)
                extra['runs'][label] = self._run_summary(trajectory, kernels)
                self.progress('{} p_th: n0 = {:.6g} at t = {:.1f} ps'.format(
                    label, trajectory.last.n0, trajectory.last.t))

        if threshold.p_th is not None:
            for point in points:
                self.progress('{!r} p_th: n0 = {:.6g}{}'.format(
                    point.multiplier, point.n0, '' if point.converged else ' (not converged)'))
                self._autolog(point, key=(B, k_p, point.multiplier))
            tables['scurve.csv'] = frmt.scurve_table(points)

        self._finish('scurve', tables, started, kernels=experiments.kernel_report(kernels),
                     **extra)
        return self.Status.OK

    @cmdhelp('Run a preset, or a sweep over field, pump wavenumber, and pump strength.',
             'sweep',
             'With experiment.preset fig1 this is the dispersion command and with fig2 the'
             ' scurve command. Otherwise every (sweep.B, sweep.k_p, sweep.multipliers)'
             ' point evolves at multiplier times a reference threshold and is written to'
             ' sweep.csv or {preset}_sweep.csv, with field_thresholds.csv when more than'
             ' one field is swept. Failed points are recorded, not fatal.')
    def _cmd_sweep(self, argv):
        preset = self.config['experiment.preset']
        if preset == 'fig1':
            return self._cmd_dispersion(['dispersion'])
        if preset == 'fig2':
            return self._cmd_scurve(['scurve'])

        started = datetime.now(timezone.utc)
        plan = experiments.plan_from_config(self.config)
        self.progress('Sweeping {} point{} on {} worker{}.'.format(
            len(plan.points()), 's' if len(plan.points()) != 1 else '',
            self.config['experiment.workers'],
            's' if self.config['experiment.workers'] != 1 else ''))

        def report(record):
            self.progress('B = {} T, k_p = {!r} 1/nm, {!r} p_th: n0 = {:.6g}, N_tot = {:.6g}'
                          ' [{}]'.format(frmt.number_label(record.B), record.k_p,
                                         record.multiplier, record.n0, record.N_tot,
                                         record.status))
            self._autolog(record)

        result = experiments.run_field_sweep(plan, progress=report)

        name = 'sweep.csv' if preset == 'custom' else '{}_sweep.csv'.format(preset)
        tables = OrderedDict([(name, frmt.sweep_table(result))])
        if plan.keep_trajectories:
            for rec in result.records:
                if rec.observables is None:
                    continue
                trajectory = kinetics.Trajectory()
                trajectory.observables = rec.observables
                tables[trajectory_name(rec.B, rec.k_p, rec.multiplier)] = \
                    frmt.trajectory_table(trajectory)
        field_thresholds = []
        if len(set(plan.B_values)) > 1:
            field_thresholds = experiments.field_thresholds(result)
            tables['field_thresholds.csv'] = frmt.field_threshold_table(field_thresholds)

        points = [{'B': rec.B, 'k_p': rec.k_p, 'multiplier': rec.multiplier,
                   'status': rec.status, 'message': rec.message, 'wall_clock_s': rec.elapsed,
                   'phonon_kernel': rec.kernel_keys[0], 'pair_kernel': rec.kernel_keys[1],
                   'counters': rec.counters}
                  for rec in result.records]
        references = [dict(_threshold_summary(threshold), B=B, k_p=k_p)
                      for (B, k_p), threshold in sorted(result.thresholds.items())]
        grids = {frmt.number_label(B): experiments.grid_for(self.config, B).content_hash()
                 for B in set(plan.B_values)}
        self._finish('sweep', tables, started, points=points, references=references, grids=grids,
                     field_thresholds=[th._asdict() for th in field_thresholds])
        return self.Status.OK

    def _cmd_help(self, argv, print_help=0):
        if print_help == 1:
            print('Print all commands or the help of one.')
            return self.Status.OK
        elif print_help == 2:
            print('Print all commands or the help of one.')
            print('Usage: help [COMMAND]')
            return self.Status.OK

        args = argv[1:]
        if args:
            command_name = self.cmd.resolve(args[0])
            self.cmd.commands[command_name]([], print_help=2)
            return self.Status.OK

        print('List of commands:\n')
        for command_name in sorted(self.cmd.commands):
            print('{} -- '.format(command_name), end='')
            self.cmd.commands[command_name]([], print_help=1)
        return self.Status.OK


def _threshold_summary(result):
    return {'p_th': result.p_th, 'converged': result.converged, 'bracketed': result.bracketed,
            'max_n0': result.max_n0, 'runs': len(result.history)}


def _bose_einstein(grid, occupations):
    # Fit over the populated nodes above k = 0; None if no temperature fits
    nodes = [i for i in range(1, len(occupations)) if occupations[i] > 0]
    try:
        fit = kinetics.fit_bose_einstein(grid.energies, occupations, nodes=nodes)
    except ValueError:
        return None
    return fit._asdict()


def trajectory_name(B, k_p, multiplier):
    """Return the file name of a sweep point's trajectory table.

    >>> from polariton.controller import trajectory_name
    >>> trajectory_name(2.0, 0.1, 2.4)
    'trajectory_B2_kp0.1_x2.4.csv'

    """
    return 'trajectory_B{}_kp{}_x{}.csv'.format(frmt.number_label(B), frmt.number_label(k_p),
                                               frmt.number_label(multiplier))
