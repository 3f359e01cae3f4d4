# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""Error flags, exception types, and a function for printing diagnostics.

"""
import sys
import textwrap


class Error(object):
    """A run-level error IDed by an int flag and a string description.

    Parameters
    ----------
    strerror : str
        A string description of the error.

    Attributes
    ----------
    next_errno : int
        A static power-of-two int to be assigned to the next Error
        instance.
    errno : int
        A power-of-two int that identifies this Error instance and can be
        ORed with other error numbers to create an error mask.
    strerror : str
        A string description of this Error instance.

    """
    next_errno = 1

    def __init__(self, strerror):
        self.errno = Error.next_errno
        Error.next_errno <<= 1
        self.strerror = strerror

    def __eq__(self, other):
        return self.errno == other.errno

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return self.errno

    def __repr__(self):
        return 'Error({!r})'.format(self.strerror)


class ConfigError(ValueError):
    """A configuration value or key that cannot be accepted.

    Parameters
    ----------
    message : str
        What is wrong with the entry.
    source : str, optional
        The file name or '--set' the entry came from (default None).
    lineno : int, optional
        The one-indexed line (or override) number of the entry (default
        None).

    """
    def __init__(self, message, source=None, lineno=None):
        super(ConfigError, self).__init__(message)
        self.message = message
        self.source = source
        self.lineno = lineno

    def __str__(self):
        if self.source is None:
            return self.message
        if self.lineno is None:
            return '{}: {}'.format(self.source, self.message)
        return '{}:{}: {}'.format(self.source, self.lineno, self.message)


class FieldDomainError(ValueError):
    """A magnetic field outside the domain of the field-dependent laws.

    """


class NumericalError(ArithmeticError):
    """A failure of the numerics that makes a result meaningless.

    Parameters
    ----------
    message : str
        A description of the failure.
    t : float, optional
        The simulated time in ps at which the failure occurred (default
        None).
    node : int, optional
        The grid node most responsible for the failure (default None).
    state : numpy.ndarray, optional
        The occupations at the last accepted step, kept for a diagnostic
        dump (default None).

    """
    def __init__(self, message, t=None, node=None, state=None):
        super(NumericalError, self).__init__(message)
        self.message = message
        self.t = t
        self.node = node
        self.state = state

    def __str__(self):
        details = []
        if self.t is not None:
            details.append('t = {!r} ps'.format(self.t))
        if self.node is not None:
            details.append('node {}'.format(self.node))
        if not details:
            return self.message
        return '{} ({})'.format(self.message, ', '.join(details))


def error(message, prelude=None, status=0, maxline=70, minwidth=20, stream=None):
    """Print wrapped message to stderr and exit with status if nonzero.

    Print a message wrapped to `maxline`. The first line will be preceded
    by `prelude`, a colon, and a space, and each subsequent line will be
    aligned to the character after that space. If `status` is nonzero, the
    program will afterwards exit with that value.

    Parameters
    ----------
    message : str
        The message to print.
    prelude : str, optional
        The text to print before a colon and the message (default
        'error').
    status : int, optional
        The value to call `exit` with if nonzero (default 0).
    maxline : int, optional
        The max number of characters to include in each line of output
        counting the prelude and padding (default 70).
    minwidth : int, optional
        The minimum number of characters that should be reserved for
        `message`; if `prelude` and its padding don't allow for this,
        `message` will begin printing a line below `prelude` (default 20).
    stream : file, optional
        Where to print (default `sys.stderr` at call time).

    Examples
    --------
    >>> import sys
    >>> from polariton.error import error
    >>> error('grid energies are not increasing at node 12',
    ...       prelude='warning', stream=sys.stdout)
    warning: grid energies are not increasing at node 12

    """
    if stream is None:
        stream = sys.stderr
    if prelude is None:
        prelude = 'error'
    prelude += ': '

    width = maxline - len(prelude)
    if width < minwidth:
        # `prelude` is too long to prefix each line of `message`
        for subline in textwrap.wrap(prelude, maxline):
            print(subline, file=stream)
        width = maxline
        prelude = ''

    for line in message.split('\n'):
        wrapped_line = textwrap.wrap(line, width)
        if not wrapped_line:
            print(file=stream)
        for subline in wrapped_line:
            print(prelude, subline, sep='', file=stream)
            if ':' in prelude:
                prelude = ' ' * len(prelude)

    if status:
        sys.exit(status)
