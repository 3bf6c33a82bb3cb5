import typing


def iterate_chunk(total: int, size: int) -> typing.Generator[typing.Tuple[int, int, int], None, None]:
    """ Split a range of trial indices into fixed size chunks. Chunk boundaries depend only on the total and size,
    never on the number of workers.

    :param total: number of trials
    :param size: maximum chunk size
    :return: iterator of (chunk index, first trial, trial count)
    """
    if size < 1:
        raise ValueError('Chunk size must be at least 1')

    for chunk, start in enumerate(range(0, total, size)):
        yield chunk, start, min(size, total - start)
