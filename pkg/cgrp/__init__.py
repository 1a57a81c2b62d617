from cgrp.errors import CGRPError, GenerationError, UnsupportedOmegaError, InvalidTourError, IllegalActionError, \
    NotTerminalError, InstanceTooLargeError, ShapeMismatchError

__version__ = '0.1.0'
