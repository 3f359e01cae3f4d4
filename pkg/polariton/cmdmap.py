# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The module containing the CommandMapper class.

"""
import re
import inspect

from polariton.error import ConfigError


class CommandMapper(object):
    """A map of command names to methods, resolving unambiguous prefixes.

    Given an object, the methods whose names match a pattern are mapped
    under their names with the pattern removed and underscores replaced by
    hyphens, so `_cmd_run` becomes 'run'.

    Parameters
    ----------
    obj : object, optional
        The object whose methods are to be mapped (default None); if None,
        `commands` starts empty.
    pattern : str, optional
        A regex the method names must contain; the matched text is removed
        from the command names (default '', which maps every method).

    Attributes
    ----------
    commands : dict of str to callable
        Command names mapped to the methods themselves.

    Examples
    --------
    >>> from polariton.cmdmap import CommandMapper
    >>> class Commands(object):
    ...     def _cmd_run(self): pass
    ...     def _cmd_dispersion(self): pass
    ...     def _cmd_threshold(self): pass
    ...     def _cmd_help(self): pass
    >>> mapper = CommandMapper(Commands(), '^_cmd_')
    >>> mapper.completions('')
    ['dispersion', 'help', 'run', 'threshold']
    >>> mapper.resolve('th')
    'threshold'

    """
    def __init__(self, obj=None, pattern=None):
        pattern = '' if pattern is None else pattern
        self.commands = self._get_commands(obj, pattern)

    @staticmethod
    def _get_commands(obj, pattern):
        if obj is None:
            return {}

        regex_engine = re.compile(pattern)

        def is_command(member):
            """Return True if is a callable whose name matches regex.

            """
            if not inspect.isfunction(member) and not inspect.ismethod(member):
                return False
            return bool(regex_engine.search(member.__name__))

        return {regex_engine.sub('', name).replace('_', '-'): member
                for name, member in inspect.getmembers(obj, predicate=is_command)}


    def completions(self, command_name):
        """Return the command names starting with the given text, sorted.

        Parameters
        ----------
        command_name : str
            The text to complete (e.g., 's').

        Returns
        -------
        list of str
            Every command name with `command_name` as a prefix (e.g.,
            ['scurve', 'sweep']).

        """
        return sorted(name for name in self.commands if name.startswith(command_name))

    def resolve(self, command_name):
        """Return the full name of the command the text abbreviates.

        An exact name wins over longer names it prefixes.

        Raises
        ------
        ConfigError
            If no command or more than one command starts with the text.

        """
        if command_name in self.commands:
            return command_name
        possible_commands = self.completions(command_name) if command_name else []
        if len(possible_commands) == 1:
            return possible_commands[0]
        if possible_commands:
            raise ConfigError('ambiguous command "{}": {}'.format(
                command_name, ', '.join(possible_commands)))
        raise ConfigError('undefined command "{}"; try "help"'.format(command_name))

    def __getitem__(self, command_name):
        return self.commands[self.resolve(command_name)]
