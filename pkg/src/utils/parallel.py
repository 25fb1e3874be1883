import multiprocessing
from typing import Callable, Iterable, List, Optional

from tqdm import tqdm


_BAR_FORMAT = "{l_bar}{bar}| {n_fmt}/{total_fmt} ({elapsed}<{remaining})"


def pbar(
    it: Iterable,
    total: Optional[int] = None,
    desc: Optional[str] = None,
    leave: bool = False,
    verbose: bool = True,
) -> Iterable:
    """
    Wrap an iterable in a tqdm progress bar when ``verbose``.

    Args:
        it: The iterable to loop over
        total: Total number of items (inferred when possible)
        desc: Label shown left of the bar
        leave: Keep the bar on screen once finished
        verbose: Show the bar at all

    Returns:
        The iterable itself or a tqdm iterator over it
    """
    if not verbose:
        return it
    return tqdm(it, total=total, ncols=80, desc=desc, leave=leave, bar_format=_BAR_FORMAT)


def apply_pool(
    func: Callable,
    arguments: Iterable[tuple],
    workers: int = 1,
    verbose: bool = False,
    desc: Optional[str] = None,
) -> List:
    """
    Apply ``func`` to every argument tuple, in-process or on a worker pool.

    Results are returned in submission order whatever the scheduling.

    Args:
        func: A picklable top-level function
        arguments: Argument tuples, one per call
        workers: Number of processes; 1 runs in the calling process
        verbose: Show a progress bar
        desc: Progress bar label

    Returns:
        One result per argument tuple
    """
    arguments = list(arguments)
    if not arguments:
        return []
    if workers <= 1 or len(arguments) == 1:
        return [func(*arg) for arg in pbar(arguments, desc=desc, verbose=verbose)]
    chunksize = max(1, len(arguments) // (workers * 8))
    with multiprocessing.Pool(processes=workers) as pool:
        results = pool.imap(_Star(func), arguments, chunksize=chunksize)
        return list(pbar(results, total=len(arguments), desc=desc, verbose=verbose))


class _Star:
    """Picklable ``func(*args)`` adapter for ``Pool.imap``."""

    def __init__(self, func: Callable):
        self.func = func

    def __call__(self, args: tuple):
        return self.func(*args)
