""" Numerics for probabilities and amplitudes far below the floating point range. """
