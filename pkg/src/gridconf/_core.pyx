# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled enumeration kernel. Same contract as ``_core_py.evaluate_range``."""

from libc.stdlib cimport malloc, free

from ._core_py import unrank_combination


def evaluate_range(int n_bus, int root, const int[:] eu, const int[:] ev,
                   const double[:] weight, const double[:] demand,
                   const int[:] adj_ptr, const int[:] adj_nbr, const int[:] adj_edge,
                   int k, long long start, long long count, int top_k,
                   bint compute_acp=True):
    cdef int n_edge = eu.shape[0]
    if count <= 0 or n_edge - k != n_bus - 1:
        return 0, []

    cdef int* combo = <int*>malloc(k * sizeof(int))
    cdef char* is_open = <char*>malloc(n_edge * sizeof(char))
    cdef int* parent = <int*>malloc(n_bus * sizeof(int))
    cdef double* u = <double*>malloc(n_bus * sizeof(double))
    cdef char* seen = <char*>malloc(n_bus * sizeof(char))
    cdef int* queue = <int*>malloc(n_bus * sizeof(int))
    cdef double* best_acp = <double*>malloc((top_k + 1) * sizeof(double))
    cdef int* best_combo = <int*>malloc((top_k + 1) * k * sizeof(int))
    if (combo == NULL or is_open == NULL or parent == NULL or u == NULL or seen == NULL
            or queue == NULL or best_acp == NULL or best_combo == NULL):
        free(combo); free(is_open); free(parent); free(u); free(seen); free(queue)
        free(best_acp); free(best_combo)
        raise MemoryError()

    cdef long long n_feasible = 0
    cdef long long it
    cdef int i, j, e, a, b, v, w, head, tail, pos, n_best = 0
    cdef bint tree
    cdef double total, acp

    start_combo = unrank_combination(start, n_edge, k)
    for i in range(k):
        combo[i] = start_combo[i]
    for e in range(n_edge):
        is_open[e] = 0

    try:
        for it in range(count):
            for i in range(k):
                is_open[combo[i]] = 1

            for i in range(n_bus):
                parent[i] = i
            tree = True
            for e in range(n_edge):
                if is_open[e]:
                    continue
                a = eu[e]
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                b = ev[e]
                while parent[b] != b:
                    parent[b] = parent[parent[b]]
                    b = parent[b]
                if a == b:
                    tree = False
                    break
                parent[b] = a

            if tree:
                n_feasible += 1
                if compute_acp and top_k > 0:
                    for i in range(n_bus):
                        u[i] = 0.0
                        seen[i] = 0
                    seen[root] = 1
                    queue[0] = root
                    head = 0
                    tail = 1
                    while head < tail:
                        v = queue[head]
                        head += 1
                        for j in range(adj_ptr[v], adj_ptr[v + 1]):
                            e = adj_edge[j]
                            w = adj_nbr[j]
                            if not is_open[e] and not seen[w]:
                                seen[w] = 1
                                u[w] = u[v] + weight[e]
                                queue[tail] = w
                                tail += 1
                    total = 0.0
                    for i in range(n_bus):
                        if demand[i] > 0:
                            total += demand[i] * u[i]
                    acp = total / 1000.0
                    if n_best < top_k or acp < best_acp[n_best - 1]:
                        pos = n_best
                        while pos > 0 and best_acp[pos - 1] > acp:
                            best_acp[pos] = best_acp[pos - 1]
                            for j in range(k):
                                best_combo[pos * k + j] = best_combo[(pos - 1) * k + j]
                            pos -= 1
                        best_acp[pos] = acp
                        for j in range(k):
                            best_combo[pos * k + j] = combo[j]
                        if n_best < top_k:
                            n_best += 1

            for i in range(k):
                is_open[combo[i]] = 0

            i = k - 1
            while i >= 0 and combo[i] == n_edge - k + i:
                i -= 1
            if i < 0:
                break
            combo[i] += 1
            for j in range(i + 1, k):
                combo[j] = combo[j - 1] + 1

        best = [(best_acp[i], tuple([best_combo[i * k + j] for j in range(k)]))
                for i in range(n_best)]
        return n_feasible, best
    finally:
        free(combo); free(is_open); free(parent); free(u); free(seen); free(queue)
        free(best_acp); free(best_combo)
