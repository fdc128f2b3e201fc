# coding: utf-8
'''Exception hierarchy shared by the library and the command line tools

Every error raised on purpose by skinladder derives from `SkinLadderError`.
The command line front end maps each category to an exit code:

    UsageError      2   invalid configuration, flags or domain inputs
    NumericalError  3   solver, trajectory or cross-validation failures
    CapacityError   4   a dense object would exceed the memory cap
'''


EXIT_SUCCESS = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3
EXIT_CAPACITY = 4


class SkinLadderError(RuntimeError):
    exit_code = EXIT_NUMERICAL


class UsageError(SkinLadderError, ValueError):
    exit_code = EXIT_USAGE


class NumericalError(SkinLadderError):
    exit_code = EXIT_NUMERICAL


class CapacityError(SkinLadderError):
    '''Raised before allocating a dense object larger than the memory cap'''
    exit_code = EXIT_CAPACITY

    def __init__(self, what, required_bytes, cap_bytes):
        self.what = what
        self.required_bytes = int(required_bytes)
        self.cap_bytes = int(cap_bytes)
        super(CapacityError, self).__init__(
            "%s needs %d bytes, exceeding the memory cap of %d bytes" %
            (what, self.required_bytes, self.cap_bytes))

    def __reduce__(self):
        return (self.__class__, (self.what, self.required_bytes,
                                 self.cap_bytes))


class SteadyStateError(NumericalError):
    '''No, or more than one, zero mode in the Liouvillian spectrum'''

    def __init__(self, message, count):
        self.count = count
        super(SteadyStateError, self).__init__(message)

    def __reduce__(self):
        return (self.__class__, (self.args[0], self.count))


class ImpossibleJumpError(NumericalError):
    pass


class TrajectoryError(NumericalError):
    '''A trajectory aborted; carries the step index and the original error'''

    def __init__(self, step, cause):
        self.step = step
        self.cause = cause
        super(TrajectoryError, self).__init__("step %d: %s" % (step, cause))

    # rebuilt from its fields when sent back from a worker process
    def __reduce__(self):
        return (self.__class__, (self.step, self.cause))


class CoarseTimeStepWarning(RuntimeWarning):
    pass


class IllConditionedWarning(RuntimeWarning):
    pass


def check_memory(what, nbytes, cap_bytes):
    '''Raise `CapacityError` if `nbytes` exceeds `cap_bytes`'''
    if nbytes > cap_bytes:
        raise CapacityError(what, nbytes, cap_bytes)
