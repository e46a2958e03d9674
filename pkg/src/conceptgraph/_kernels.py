"""Compiled inner loops of the greedy modularity optimizer.

The local-moving phase is the hot path (it touches every edge several
times per sweep), so it runs under numba. The kernels own the only
stochastic element of the optimizer: a self-contained xorshift64* RNG that
reshuffles the node visit order before every sweep, making each run a
pure function of (graph, seed).

A candidate move is accepted only when its gain over staying put exceeds
GAIN_EPS; candidates whose gains agree within TIE_EPS are tied and the
smallest target community id wins.
"""

import numba as nb
import numpy as np

GAIN_EPS = 1e-12
TIE_EPS = 1e-12

_U64 = np.uint64


@nb.njit(nb.uint64(nb.uint64), cache=True, nogil=True)
def _rng_next(state):
    state ^= state >> _U64(12)
    state ^= state << _U64(25)
    state ^= state >> _U64(27)
    return state


@nb.njit(nb.uint64(nb.int64), cache=True, nogil=True)
def seed_state(seed):
    # splitmix64-style scrambling; xorshift must never see state 0
    z = _U64(seed) + _U64(0x9E3779B97F4A7C15)
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    z = z ^ (z >> _U64(31))
    if z == _U64(0):
        z = _U64(0x9E3779B97F4A7C15)
    return z


@nb.njit(nb.uint64(nb.int64[:], nb.uint64), cache=True, nogil=True)
def _shuffle(order, state):
    for i in range(order.shape[0] - 1, 0, -1):
        state = _rng_next(state)
        j = int(state % _U64(i + 1))
        order[i], order[j] = order[j], order[i]
    return state


@nb.njit(
    nb.types.Tuple((nb.uint64, nb.int64))(
        nb.int64[:],  # indptr
        nb.int64[:],  # indices
        nb.float64[:],  # weights
        nb.float64[:],  # strength per node (row sums incl. self-loops)
        nb.int64[:],  # comm, modified in place
        nb.uint64,  # rng state
    ),
    cache=True,
    nogil=True,
)
def local_move_unipartite(indptr, indices, weights, strength, comm, state):
    """Sweep single-node moves until a full sweep moves nothing.

    Newman gain for node i joining community c (after removal from its
    own): [w(i->c) - tot(c)*k_i/(2m)] / m. Communities live in node-index
    label space; emptied labels are never reused.
    """
    n = strength.shape[0]
    m2 = 0.0
    for i in range(n):
        m2 += strength[i]
    inv_m2 = 1.0 / m2
    inv_m = 2.0 * inv_m2

    comm_tot = np.zeros(n, dtype=np.float64)
    for i in range(n):
        comm_tot[comm[i]] += strength[i]

    order = np.arange(n, dtype=np.int64)
    w_to = np.zeros(n, dtype=np.float64)
    mark = np.full(n, -1, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)

    gen = 0
    total_moves = 0
    while True:
        state = _shuffle(order, state)
        moves = 0
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            ki = strength[i]
            comm_tot[ci] -= ki

            gen += 1
            ntouch = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                cj = comm[j]
                if mark[cj] != gen:
                    mark[cj] = gen
                    w_to[cj] = 0.0
                    touched[ntouch] = cj
                    ntouch += 1
                w_to[cj] += weights[p]
            if mark[ci] != gen:
                mark[ci] = gen
                w_to[ci] = 0.0

            g_stay = (w_to[ci] - comm_tot[ci] * ki * inv_m2) * inv_m
            best_g = -1.0e300
            best_c = -1
            for t in range(ntouch):
                c = touched[t]
                if c == ci:
                    continue
                g = (w_to[c] - comm_tot[c] * ki * inv_m2) * inv_m
                if g > best_g + TIE_EPS:
                    best_g = g
                    best_c = c
                elif g > best_g - TIE_EPS:
                    if c < best_c:
                        best_c = c
                    if g > best_g:
                        best_g = g

            if best_c >= 0 and best_g - g_stay > GAIN_EPS:
                comm[i] = best_c
                comm_tot[best_c] += ki
                moves += 1
            else:
                comm_tot[ci] += ki
        total_moves += moves
        if moves == 0:
            break
    return state, total_moves


@nb.njit(
    nb.types.Tuple((nb.uint64, nb.int64))(
        nb.int64[:],  # indptr
        nb.int64[:],  # indices
        nb.float64[:],  # weights
        nb.float64[:],  # doc-degree mass per node
        nb.float64[:],  # concept-degree mass per node
        nb.float64,  # m (total bipartite edge count)
        nb.int64[:],  # comm, modified in place
        nb.uint64,  # rng state
    ),
    cache=True,
    nogil=True,
)
def local_move_bipartite(indptr, indices, weights, mass_k, mass_d, m, comm, state):
    """Barber-modularity local moving over the co-clustered node set.

    Gain of node i (masses K_i, D_i) joining community c: [w(i->c) -
    (K_i*D(c) + D_i*K(c))/m] / m. Each original node carries one nonzero
    mass; supernodes carry both.
    """
    n = mass_k.shape[0]
    inv_m = 1.0 / m

    comm_k = np.zeros(n, dtype=np.float64)
    comm_d = np.zeros(n, dtype=np.float64)
    for i in range(n):
        comm_k[comm[i]] += mass_k[i]
        comm_d[comm[i]] += mass_d[i]

    order = np.arange(n, dtype=np.int64)
    w_to = np.zeros(n, dtype=np.float64)
    mark = np.full(n, -1, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)

    gen = 0
    total_moves = 0
    while True:
        state = _shuffle(order, state)
        moves = 0
        for idx in range(n):
            i = order[idx]
            ci = comm[i]
            ki = mass_k[i]
            di = mass_d[i]
            comm_k[ci] -= ki
            comm_d[ci] -= di

            gen += 1
            ntouch = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                cj = comm[j]
                if mark[cj] != gen:
                    mark[cj] = gen
                    w_to[cj] = 0.0
                    touched[ntouch] = cj
                    ntouch += 1
                w_to[cj] += weights[p]
            if mark[ci] != gen:
                mark[ci] = gen
                w_to[ci] = 0.0

            g_stay = (w_to[ci] - (ki * comm_d[ci] + di * comm_k[ci]) * inv_m) * inv_m
            best_g = -1.0e300
            best_c = -1
            for t in range(ntouch):
                c = touched[t]
                if c == ci:
                    continue
                g = (w_to[c] - (ki * comm_d[c] + di * comm_k[c]) * inv_m) * inv_m
                if g > best_g + TIE_EPS:
                    best_g = g
                    best_c = c
                elif g > best_g - TIE_EPS:
                    if c < best_c:
                        best_c = c
                    if g > best_g:
                        best_g = g

            if best_c >= 0 and best_g - g_stay > GAIN_EPS:
                comm[i] = best_c
                comm_k[best_c] += ki
                comm_d[best_c] += di
                moves += 1
            else:
                comm_k[ci] += ki
                comm_d[ci] += di
        total_moves += moves
        if moves == 0:
            break
    return state, total_moves
