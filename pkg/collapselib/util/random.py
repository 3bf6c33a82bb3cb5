import numpy as np


def generator(seed: int) -> np.random.Generator:
    """ Random generator for a single stream run, eg. one trajectory.

    :param seed: unsigned 64-bit master seed
    :return: numpy Generator
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_check_seed(seed))))


def substream(seed: int, index: int) -> np.random.Generator:
    """ Independent random generator derived from (master seed, index). The same pair always gives the same stream,
    whichever worker or order it is evaluated in.

    :param seed: unsigned 64-bit master seed
    :param index: substream index (trajectory or chunk number)
    :return: numpy Generator
    """
    if index < 0:
        raise ValueError('Substream index must not be negative')

    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(_check_seed(seed), spawn_key=(index,))))


def _check_seed(seed: int) -> int:
    if not 0 <= seed < 2 ** 64:
        raise ValueError(f"Seed {seed} outside unsigned 64-bit range")

    return int(seed)
