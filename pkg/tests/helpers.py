"""Independent oracles shared by the test modules.

Nothing here imports the code paths it is used to check: the reference
deferred acceptance is a plain sequential textbook loop, the stability
oracles evaluate block events directly at sampled/grid weights, and the
triangle quadrature integrates the three-feature preference regions
numerically.
"""

from __future__ import annotations

from fractions import Fraction as F

import numpy as np

from featmatch.model import DiscreteWeights, Instance
from featmatch.prob import potential_blockers


def reference_da(student_prefs, college_prefs, capacities):
    """Sequential student-proposing deferred acceptance.  student_prefs[s]
    lists college indices best-first; college_prefs[c] lists student indices
    best-first.  Returns the assignment tuple (college index or None)."""
    n, m = len(student_prefs), len(college_prefs)
    rank = [{s: r for r, s in enumerate(order)} for order in college_prefs]
    nxt = [0] * n
    held = [set() for _ in range(m)]
    match = [None] * n
    free = list(range(n))
    while free:
        s = free.pop(0)
        if nxt[s] >= len(student_prefs[s]):
            continue
        c = student_prefs[s][nxt[s]]
        nxt[s] += 1
        held[c].add(s)
        if len(held[c]) > capacities[c]:
            worst = max(held[c], key=lambda t: rank[c][t])
            held[c].remove(worst)
            match[worst] = None
            free.append(worst)
            if worst != s:
                match[s] = c
        else:
            match[s] = c
    return tuple(match)


def point_mass_instance(base: Instance, rng: np.random.Generator) -> Instance:
    """Replace every weight distribution with a single random grid atom."""
    dists = []
    for _ in range(base.n):
        counts = rng.multinomial(10, [1.0 / base.num_features] * base.num_features)
        dists.append(DiscreteWeights(((tuple(F(int(c), 10) for c in counts), F(1)),)))
    return Instance(
        students=base.students,
        colleges=base.colleges,
        capacities=base.capacities,
        college_prefs=base.college_prefs,
        features=base.features,
        utilities=base.utilities,
        weight_dists=tuple(dists),
    )


def induced_strict_prefs(inst: Instance) -> list[list[int]]:
    """Strict college order per student at her point-mass weight vector,
    ties broken by lowest college index."""
    out = []
    for s in range(inst.n):
        (w, _), = inst.weight_dists[s].atoms
        vals = [
            sum(w[f] * inst.utilities[s][f][c] for f in range(inst.num_features))
            for c in range(inst.m)
        ]
        out.append(sorted(range(inst.m), key=lambda c: (-vals[c], c)))
    return out


def grid_pros(inst: Instance, matching, points: int = 10_000) -> float:
    """Stability probability by direct block-event counting on a midpoint
    grid of first-feature weights (two-feature instances)."""
    assert inst.num_features == 2
    w1 = (2 * np.arange(points) + 1) / (2 * points)
    w = np.column_stack([w1, 1.0 - w1])
    total = 1.0
    for s in range(inst.n):
        match = matching.college_of(s)
        cand = potential_blockers(inst, matching, s)
        if match is None:
            total *= 0.0 if cand else 1.0
            continue
        if not cand:
            continue
        scores = w @ inst.utilities_f64[s]
        blocked = (scores[:, cand] > scores[:, [match]]).any(axis=1)
        total *= 1.0 - blocked.mean()
    return total


def triangle_quadrature_strict(inst: Instance, s: int, ci: int, cj: int, cells: int = 1500) -> float:
    """Pr[ci strictly beats cj] for a three-feature student by midpoint
    quadrature over the simplex triangle (w1, w2 free, w3 determined)."""
    assert inst.num_features == 3
    h = 1.0 / cells
    u = inst.utilities_f64[s]
    hits = 0
    total = 0
    for a in range(cells):
        w1 = (a + 0.5) * h
        bmax = int((1.0 - w1) / h)
        if bmax <= 0:
            continue
        w2 = (np.arange(bmax) + 0.5) * h
        w = np.column_stack([np.full(bmax, w1), w2, 1.0 - w1 - w2])
        scores = w @ u
        hits += int((scores[:, ci] > scores[:, cj]).sum())
        total += bmax
    return hits / total


def matchings_count_closed_form(n: int, m: int) -> int:
    """Number of capacity-1 feasible assignments with unmatched allowed:
    sum over k of C(n,k) C(m,k) k! (choose matched students, their colleges
    and the bijection)."""
    from math import comb, factorial

    return sum(comb(n, k) * comb(m, k) * factorial(k) for k in range(min(n, m) + 1))
