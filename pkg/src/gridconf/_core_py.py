"""Pure-Python enumeration kernel, used when the compiled core is unavailable.

Mirrors ``_core.pyx`` operation for operation so both backends return
bit-identical objective values.
"""

from math import comb


def unrank_combination(rank, n, k):
    """Lexicographic combination of ``k`` indices out of ``range(n)``."""
    out = []
    x = 0
    for i in range(k):
        while True:
            c = comb(n - x - 1, k - i - 1)
            if rank < c:
                break
            rank -= c
            x += 1
        out.append(x)
        x += 1
    return out


def evaluate_range(n_bus, root, eu, ev, weight, demand, adj_ptr, adj_nbr, adj_edge,
                   k, start, count, top_k, compute_acp=True):
    """Scan ``count`` open sets starting at lexicographic rank ``start``.

    Returns ``(n_feasible, best)`` where ``best`` is a list of up to
    ``top_k`` ``(acp, open_index_tuple)`` pairs sorted by acp, earlier
    combinations first on ties.
    """
    n_edge = len(eu)
    if count <= 0:
        return 0, []
    if n_edge - k != n_bus - 1:
        return 0, []

    eu = list(eu)
    ev = list(ev)
    weight = list(weight)
    demand = list(demand)
    adj_ptr = list(adj_ptr)
    adj_nbr = list(adj_nbr)
    adj_edge = list(adj_edge)

    combo = unrank_combination(start, n_edge, k)
    is_open = [False] * n_edge
    best = []
    n_feasible = 0

    for _ in range(count):
        for e in combo:
            is_open[e] = True

        parent = list(range(n_bus))
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
                u = [0.0] * n_bus
                seen = [False] * n_bus
                seen[root] = True
                queue = [root]
                head = 0
                while head < len(queue):
                    v = queue[head]
                    head += 1
                    for j in range(adj_ptr[v], adj_ptr[v + 1]):
                        e = adj_edge[j]
                        w = adj_nbr[j]
                        if not is_open[e] and not seen[w]:
                            seen[w] = True
                            u[w] = u[v] + weight[e]
                            queue.append(w)
                total = 0.0
                for b in range(n_bus):
                    if demand[b] > 0:
                        total += demand[b] * u[b]
                acp = total / 1000.0
                if len(best) < top_k or acp < best[-1][0]:
                    pos = len(best)
                    while pos > 0 and best[pos - 1][0] > acp:
                        pos -= 1
                    best.insert(pos, (acp, tuple(combo)))
                    if len(best) > top_k:
                        best.pop()

        for e in combo:
            is_open[e] = False

        # advance to the next lexicographic combination
        i = k - 1
        while i >= 0 and combo[i] == n_edge - k + i:
            i -= 1
        if i < 0:
            break
        combo[i] += 1
        for j in range(i + 1, k):
            combo[j] = combo[j - 1] + 1

    return n_feasible, best
