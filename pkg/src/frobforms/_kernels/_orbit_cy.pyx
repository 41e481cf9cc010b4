# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scalar BFS over packed F_2 matrix states.

Same contract as orbit_py.bfs_f2: states are n^2-bit words, entry (i, j)
at bit i*n + j; generators are the transvections I + E_ij acting by
"column j += column i, then row j += row i".
"""

from libc.stdint cimport uint32_t, uint8_t

BACKEND = "cython"


def bfs_f2(int n, seeds, uint8_t[::1] visited, uint32_t[::1] queue):
    """Mark the orbit(s) of `seeds` in `visited`; fill `queue` with the
    discovered states in BFS order and return their count."""
    cdef int ngens = n * (n - 1)
    cdef int[64] ishift, jshift, irow, jrow
    cdef int gi = 0, i, j
    cdef uint32_t colmask = 0, rowmask = (1u << n) - 1
    for i in range(n):
        colmask |= 1u << (i * n)
    for i in range(n):
        for j in range(n):
            if i != j:
                ishift[gi] = i
                jshift[gi] = j
                irow[gi] = i * n
                jrow[gi] = j * n
                gi += 1
    cdef Py_ssize_t head = 0, tail = 0
    cdef uint32_t x, y
    for s in seeds:
        x = <uint32_t> s
        if not visited[x]:
            visited[x] = 1
            queue[tail] = x
            tail += 1
    with nogil:
        while head < tail:
            x = queue[head]
            head += 1
            for gi in range(ngens):
                y = x ^ (((x >> ishift[gi]) & colmask) << jshift[gi])
                y ^= ((y >> irow[gi]) & rowmask) << jrow[gi]
                if not visited[y]:
                    visited[y] = 1
                    queue[tail] = y
                    tail += 1
    return tail


def bfs_f2_parents(int n, seeds, uint8_t[::1] visited, uint32_t[::1] queue,
                   uint8_t[::1] parent_gen):
    """BFS recording, for every newly visited state, the index of the
    transvection whose (involutive) application leads one step back toward
    the seed.  Seeds get parent 255."""
    cdef int ngens = n * (n - 1)
    cdef int[64] ishift, jshift, irow, jrow
    cdef int gi = 0, i, j
    cdef uint32_t colmask = 0, rowmask = (1u << n) - 1
    for i in range(n):
        colmask |= 1u << (i * n)
    for i in range(n):
        for j in range(n):
            if i != j:
                ishift[gi] = i
                jshift[gi] = j
                irow[gi] = i * n
                jrow[gi] = j * n
                gi += 1
    cdef Py_ssize_t head = 0, tail = 0
    cdef uint32_t x, y
    for s in seeds:
        x = <uint32_t> s
        if not visited[x]:
            visited[x] = 1
            parent_gen[x] = 255
            queue[tail] = x
            tail += 1
    with nogil:
        while head < tail:
            x = queue[head]
            head += 1
            for gi in range(ngens):
                y = x ^ (((x >> ishift[gi]) & colmask) << jshift[gi])
                y ^= ((y >> irow[gi]) & rowmask) << jrow[gi]
                if not visited[y]:
                    visited[y] = 1
                    parent_gen[y] = <uint8_t> gi
                    queue[tail] = y
                    tail += 1
    return tail
