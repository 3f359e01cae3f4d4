# Copyright: (C) 2026 The polariton developers
# License: GNU GPL version 3

"""The module containing the ErrorLogger class.

"""
from collections import OrderedDict


class ErrorLogger(object):
    """An error logger mapping hashable keys to run-level errors.

    Parameters
    ----------
    errors : iterable of Error instance, optional
        The Error instances to keep track of (default None).

    Attributes
    ----------
    errors : list of Error instance
        The errors kept track of, in the order given.
    log : dict of hashable to int
        Keys (e.g., sweep points) mapped to the ORed error numbers that
        apply to them.
    reverse_log : dict of int to set of hashable
        Error numbers mapped to the keys they apply to.

    Examples
    --------
    >>> from polariton.error import Error
    >>> from polariton.logger import ErrorLogger
    >>> DIVERGED = Error('diverged run')
    >>> log = ErrorLogger([DIVERGED])
    >>> log.log_error((2.0, 0.02), DIVERGED)
    >>> log.error_count(), log.in_mask((2.0, 0.02), DIVERGED.errno)
    (1, True)
    >>> log.print_summary()
    Error Summary:
    1 case of diverged run

    """
    def __init__(self, errors=None):
        self.errors = [] if errors is None else list(errors)
        self.log = {}
        self.reverse_log = {err.errno: set() for err in self.errors}


    def autolog(self, obj, report=False):
        """Log all errors relevant to the object and return an error count.

        If `report` is True, a description of each error found is also
        printed to stderr.

        Notes
        -----
        This is intended to be implemented by subclasses where the nature
        of the objects and errors can be more determinate.

        """
        raise NotImplementedError()

    def log_error(self, key, err):
        """Add the error to the key's log entry.

        """
        self.log[key] = self.log.get(key, 0) | err.errno
        self.reverse_log[err.errno].add(key)

    def log_entry(self, key):
        """Return the ORed error numbers logged for the key, or 0 if none.

        """
        return self.log.get(key, 0)

    def in_mask(self, key, mask):
        """Return True if the key has any error in `mask`.

        """
        return bool(self.log_entry(key) & mask)


    def error_count(self, key=None):
        """Return the number of errors logged overall or, if given, for one key.

        """
        if key is None:
            return sum(len(keys) for keys in self.reverse_log.values())

        count = 0
        flags = self.log_entry(key)
        while flags:
            flags = flags & (flags - 1)
            count += 1
        return count

    def summary(self):
        """Return each error description mapped to its number of cases.

        Returns
        -------
        OrderedDict of str to int
            Every known error, in the order given, including those with no
            cases.

        """
        return OrderedDict((err.strerror, len(self.reverse_log[err.errno]))
                           for err in self.errors)

    def print_summary(self):
        """Print to stdout how many of each error were logged.

        """
        print('Error Summary:')

        if not self.error_count():
            print('(no errors)')
            return

        for strerror, count in self.summary().items():
            if count > 0:
                print('{} case{} of {}'.format(count, 's' if count != 1 else '', strerror))
