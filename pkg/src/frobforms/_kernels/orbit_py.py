"""Vectorized fallback kernels for the packed F_2 orbit search.

States pack an n x n matrix over F_2 into n^2 bits, entry (i, j) at bit
i*n + j.  A transvection generator I + E_ij acts by the paired operation
"column j += column i, then row j += row i", which is a handful of shifts
and xors on the packed word; the BFS frontier is processed as numpy arrays.

The compiled extension (_orbit_cy) implements the same contract with a
scalar loop; `frobforms._kernels` picks whichever is available.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def generator_masks(n: int):
    """(i, j, colmask, rowmask) per transvection I + E_ij, i != j."""
    colmask = 0
    for r in range(n):
        colmask |= 1 << (r * n)
    rowmask = (1 << n) - 1
    return [(i, j, colmask, rowmask)
            for i in range(n) for j in range(n) if i != j]


def apply_generator(states, n: int, i: int, j: int):
    """Images of packed states under A -> (I + E_ji) A (I + E_ij)."""
    states = np.asarray(states, dtype=np.uint64)
    colmask = np.uint64(sum(1 << (r * n) for r in range(n)))
    rowmask = np.uint64((1 << n) - 1)
    y = states ^ (((states >> np.uint64(i)) & colmask) << np.uint64(j))
    y ^= ((y >> np.uint64(i * n)) & rowmask) << np.uint64(j * n)
    return y


def bfs_f2(n: int, seeds, visited: np.ndarray, queue: np.ndarray) -> int:
    """Mark the orbit(s) of `seeds` in `visited`; fill `queue` with the
    discovered states in BFS order and return their count."""
    ops = generator_masks(n)
    shifts = [(np.uint64(i), np.uint64(j), np.uint64(i * n), np.uint64(j * n))
              for i, j, _, _ in ops]
    colmask = np.uint64(ops[0][2]) if ops else np.uint64(0)
    rowmask = np.uint64(ops[0][3]) if ops else np.uint64(0)

    frontier = np.unique(np.asarray(list(seeds), dtype=np.uint64))
    frontier = frontier[visited[frontier] == 0]
    visited[frontier] = 1
    total = 0
    queue[total:total + frontier.size] = frontier.astype(np.uint32)
    total += frontier.size
    while frontier.size:
        batches = []
        for si, sj, sin, sjn in shifts:
            y = frontier ^ (((frontier >> si) & colmask) << sj)
            y ^= ((y >> sin) & rowmask) << sjn
            batches.append(y)
        imgs = np.unique(np.concatenate(batches)) if batches else frontier[:0]
        imgs = imgs[visited[imgs] == 0]
        visited[imgs] = 1
        queue[total:total + imgs.size] = imgs.astype(np.uint32)
        total += imgs.size
        frontier = imgs
    return total


def bfs_f2_parents(n: int, seeds, visited: np.ndarray, queue: np.ndarray,
                   parent_gen: np.ndarray) -> int:
    """BFS recording, per newly visited state, the generator index whose
    re-application (transvections are involutions under the twisted action)
    steps back toward the seed.  Seeds get parent 255."""
    ops = generator_masks(n)
    shifts = [(np.uint64(i), np.uint64(j), np.uint64(i * n), np.uint64(j * n))
              for i, j, _, _ in ops]
    colmask = np.uint64(ops[0][2]) if ops else np.uint64(0)
    rowmask = np.uint64(ops[0][3]) if ops else np.uint64(0)

    frontier = np.unique(np.asarray(list(seeds), dtype=np.uint64))
    frontier = frontier[visited[frontier] == 0]
    visited[frontier] = 1
    parent_gen[frontier] = 255
    total = 0
    queue[total:total + frontier.size] = frontier.astype(np.uint32)
    total += frontier.size
    while frontier.size:
        collected = []
        for gi, (si, sj, sin, sjn) in enumerate(shifts):
            y = frontier ^ (((frontier >> si) & colmask) << sj)
            y ^= ((y >> sin) & rowmask) << sjn
            y = np.unique(y)
            y = y[visited[y] == 0]
            visited[y] = 1
            parent_gen[y] = gi
            collected.append(y)
        imgs = np.concatenate(collected) if collected else frontier[:0]
        queue[total:total + imgs.size] = imgs.astype(np.uint32)
        total += imgs.size
        frontier = imgs
    return total
