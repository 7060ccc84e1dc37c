"""Brute-force reference for tiny quota-matching instances.

Works on a raw cells x centers distance matrix and deliberately shares no
code with the geometry or allocator modules.  Preferences are strict orders
obtained from the distances with ties broken by index: a cell ranks centers
by ``(distance, center)``, a center ranks cells by ``(distance, cell)``.
Assignments are lists with ``-1`` for an unclaimed cell.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import InvalidInputError

MAX_CELLS = 16
MAX_CENTERS = 5
UNCLAIMED = -1


@dataclass(frozen=True)
class TinyInstance:
    distances: tuple  # distances[cell][center]
    quotas: tuple

    def __post_init__(self):
        rows = tuple(tuple(float(v) for v in row) for row in self.distances)
        n_centers = len(rows[0]) if rows else len(self.quotas)
        if any(len(r) != n_centers for r in rows):
            raise InvalidInputError("distance matrix is ragged")
        if len(rows) > MAX_CELLS or n_centers > MAX_CENTERS:
            raise InvalidInputError(
                f"tiny instances are limited to {MAX_CELLS} cells and {MAX_CENTERS} centers, "
                f"got {len(rows)} x {n_centers}"
            )
        quotas = tuple(int(q) for q in self.quotas)
        if len(quotas) != n_centers or any(q < 0 for q in quotas):
            raise InvalidInputError("need one nonnegative quota per center")
        object.__setattr__(self, "distances", rows)
        object.__setattr__(self, "quotas", quotas)

    @classmethod
    def uniform_quota(cls, distances, quota):
        n_centers = len(distances[0]) if len(distances) else 0
        return cls(distances, (quota,) * n_centers)

    @property
    def n_cells(self):
        return len(self.distances)

    @property
    def n_centers(self):
        return len(self.quotas)

    def cell_preferences(self):
        return [sorted(range(self.n_centers), key=lambda c: (row[c], c)) for row in self.distances]

    def center_preferences(self):
        D = self.distances
        return [sorted(range(self.n_cells), key=lambda x: (D[x][c], x)) for c in range(self.n_centers)]

    def is_tie_free(self):
        """No cell is equidistant from two centers and no center from two cells."""
        for row in self.distances:
            if len(set(row)) != len(row):
                return False
        for c in range(self.n_centers):
            col = [row[c] for row in self.distances]
            if len(set(col)) != len(col):
                return False
        return True


def oracle_deferred_acceptance(inst: TinyInstance, proposer="sites"):
    """Textbook deferred acceptance with quotas; ``proposer`` is 'sites' or 'centers'."""
    if proposer == "sites":
        return _cells_propose(inst)
    if proposer == "centers":
        return _centers_propose(inst)
    raise InvalidInputError(f"proposer must be 'sites' or 'centers', got {proposer!r}")


def _cells_propose(inst):
    prefs = inst.cell_preferences()
    rank = [{x: i for i, x in enumerate(p)} for p in inst.center_preferences()]
    held = [[] for _ in range(inst.n_centers)]
    nxt = [0] * inst.n_cells
    free = deque(range(inst.n_cells))
    while free:
        x = free.popleft()
        if nxt[x] >= inst.n_centers:
            continue
        c = prefs[x][nxt[x]]
        nxt[x] += 1
        held[c].append(x)
        held[c].sort(key=rank[c].__getitem__)
        while len(held[c]) > inst.quotas[c]:
            free.append(held[c].pop())
    out = [UNCLAIMED] * inst.n_cells
    for c, cells in enumerate(held):
        for x in cells:
            out[x] = c
    return out


def _centers_propose(inst):
    prefs = inst.center_preferences()
    rank = [{c: i for i, c in enumerate(p)} for p in inst.cell_preferences()]
    holder = [UNCLAIMED] * inst.n_cells
    count = [0] * inst.n_centers
    nxt = [0] * inst.n_centers
    changed = True
    while changed:
        changed = False
        for c in range(inst.n_centers):
            while count[c] < inst.quotas[c] and nxt[c] < inst.n_cells:
                x = prefs[c][nxt[c]]
                nxt[c] += 1
                cur = holder[x]
                if cur == UNCLAIMED or rank[x][c] < rank[x][cur]:
                    if cur != UNCLAIMED:
                        count[cur] -= 1
                        changed = True
                    holder[x] = c
                    count[c] += 1
    return holder


def unstable_pairs(inst: TinyInstance, assignment):
    """All (cell, center) pairs where the cell desires the center and the center covets it."""
    D = inst.distances
    load = [0] * inst.n_centers
    far = [None] * inst.n_centers
    for x, c in enumerate(assignment):
        if c != UNCLAIMED:
            load[c] += 1
            far[c] = D[x][c] if far[c] is None else max(far[c], D[x][c])
    pairs = []
    for x, cur in enumerate(assignment):
        for c in range(inst.n_centers):
            if c == cur:
                continue
            desires = cur == UNCLAIMED or D[x][c] < D[x][cur]
            covets = load[c] < inst.quotas[c] or (far[c] is not None and D[x][c] < far[c])
            if desires and covets:
                pairs.append((x, c))
    return pairs


def is_stable(inst: TinyInstance, assignment) -> bool:
    return not unstable_pairs(inst, assignment)


def oracle_enumerate(inst: TinyInstance):
    """Every quota-respecting assignment with no unstable pair, in lexicographic order.

    Depth-first over cells with pruning rules that are sound because loads and
    held sets only grow along a branch: a pair that is already unstable given a
    center's current farthest held cell stays unstable, and a center that can
    no longer reach its quota ends unsated.
    """
    D = inst.distances
    n, k = inst.n_cells, inst.n_centers
    quotas = inst.quotas
    assign = [UNCLAIMED] * n
    load = [0] * k
    far = [-1.0] * k  # farthest held distance; -1 when empty
    results = []

    def desires(x, c):
        cur = assign[x]
        return c != cur and (cur == UNCLAIMED or D[x][c] < D[x][cur])

    def doomed_pair(depth):
        # cells 0..depth are placed; check pairs that can no longer be repaired
        remaining = n - depth - 1
        for x in range(depth + 1):
            for c in range(k):
                if not desires(x, c):
                    continue
                if D[x][c] < far[c]:
                    return True
                if load[c] + remaining < quotas[c]:
                    return True
        return False

    def place(x):
        if x == n:
            if is_stable(inst, assign):
                results.append(list(assign))
            return
        for choice in list(range(k)) + [UNCLAIMED]:
            if choice != UNCLAIMED and load[choice] >= quotas[choice]:
                continue
            assign[x] = choice
            if choice != UNCLAIMED:
                load[choice] += 1
                saved = far[choice]
                far[choice] = max(far[choice], D[x][choice])
            if not doomed_pair(x):
                place(x + 1)
            if choice != UNCLAIMED:
                load[choice] -= 1
                far[choice] = saved
            assign[x] = UNCLAIMED

    place(0)
    results.sort()
    return results
