class CGRPError(Exception):
    """Base class of all routing errors raised by cgrp."""

    def details(self):
        return {}


class GenerationError(CGRPError):

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts

    def details(self):
        return {'attempts': self.attempts}


class UnsupportedOmegaError(CGRPError):

    def __init__(self, omega, n_pairs):
        super().__init__(f'Instance omega={omega} does not match the {n_pairs} entry-exit pairs of an area task')
        self.omega = omega
        self.n_pairs = n_pairs

    def details(self):
        return {'omega': self.omega, 'pairs': self.n_pairs}


class InvalidTourError(CGRPError):

    def __init__(self, violations):
        kinds = sorted({v['kind'] for v in violations})
        super().__init__(f'Invalid tour: {", ".join(kinds)}')
        self.violations = violations

    def details(self):
        return {'violations': self.violations}


class IllegalActionError(CGRPError):

    def __init__(self, action, reason='masked'):
        super().__init__(f'Illegal action {action}: {reason}')
        self.action = action

    def details(self):
        return {'action': self.action}


class NotTerminalError(CGRPError):
    pass


class InstanceTooLargeError(CGRPError):

    def __init__(self, solver, num_tasks, num_candidates, limits):
        super().__init__(f'{solver} supports at most {limits}, got N={num_tasks} '
                         f'with {num_candidates} candidates')
        self.solver = solver
        self.num_tasks = num_tasks
        self.num_candidates = num_candidates
        self.limits = limits

    def details(self):
        return {'solver': self.solver, 'num_tasks': self.num_tasks,
                'num_candidates': self.num_candidates, 'limits': self.limits}


class ShapeMismatchError(CGRPError):
    pass


def error_payload(error):
    """Machine-readable error object printed by the commands."""
    return {'error': type(error).__name__, 'message': str(error),
            'details': error.details() if isinstance(error, CGRPError) else {}}
