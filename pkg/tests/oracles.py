"""Reference decision procedures for the test suite.

Each function here is a literal, set-based transcription of the defining
clauses of one equivalence, written for legibility rather than speed and
sharing no code with the fixpoint engines in :mod:`txbisim.equiv`.  The
greatest relations are computed by starting from the full candidate set
and deleting violators until nothing changes.  Relations are kept as
plain Python sets of state indices: ``(i, j)`` for pairs and
``(i, frozenset_of_names, j)`` for environment-indexed triples, always
closed under the obvious symmetry.

Intended for small systems only; everything is O(states^3) per round or
worse and proud of it.
"""

from itertools import chain, combinations

from txbisim.lts import iter_bits

__all__ = [
    "all_env_sets",
    "ref_branching",
    "ref_reactive",
    "ref_rooted",
    "ref_rooted_branching",
    "ref_strong",
    "tau_reach",
]


def tau_reach(lts, i):
    """Indices reachable from ``i`` by internal steps, including ``i``."""
    seen = {i}
    stack = [i]
    while stack:
        j = stack.pop()
        for k in iter_bits(lts.succ_mask(j, "tau")):
            if k not in seen:
                seen.add(k)
                stack.append(k)
    return seen


def all_env_sets(universe):
    """Every subset of the visible-action universe, as frozensets."""
    names = sorted(universe)
    return [
        frozenset(c)
        for c in chain.from_iterable(
            combinations(names, k) for k in range(len(names) + 1)
        )
    ]


def _match(lts, reach, j, alpha, mid_ok, end_ok, allow_stay):
    """A path ``j ==> q1`` followed by an optional-or-real ``alpha`` step.

    True when some q1 reachable from j by internal steps satisfies
    ``mid_ok`` and either stays put (only when ``allow_stay``) while
    already satisfying ``end_ok``, or has an ``alpha`` step to some q2
    satisfying ``end_ok``.
    """
    for q1 in reach[j]:
        if not mid_ok(q1):
            continue
        if allow_stay and end_ok(q1):
            return True
        for q2 in iter_bits(lts.succ_mask(q1, alpha)):
            if end_ok(q2):
                return True
    return False


# ---------------------------------------------------------------------------
# branching reactive bisimilarity, pairs and triples


def _visible_init(lts, i):
    return {lab for lab in lts.out_labels(i) if lab != "t"}


def ref_reactive(lts, universe):
    """Greatest branching reactive bisimulation as ``(pairs, triples)``.

    ``universe`` bounds the environments: triples range over all subsets
    of it.  All clauses are checked for the left component of each stored
    element; symmetry comes from storing both orders and removing both
    when either fails.
    """
    n = lts.n_states
    envs = all_env_sets(universe)
    reach = [tau_reach(lts, i) for i in range(n)]
    init = [_visible_init(lts, i) for i in range(n)]
    stable = [lts.succ_mask(i, "tau") == 0 for i in range(n)]

    pairs = {(i, j) for i in range(n) for j in range(n)}
    trips = {(i, x, j) for i in range(n) for x in envs for j in range(n)}

    def deadend(i, x):
        return not (init[i] & x) and "tau" not in init[i]

    def pair_ok(i, j):
        for lab in lts.out_labels(i):
            if lab == "t":
                continue
            for ip in iter_bits(lts.succ_mask(i, lab)):
                if not _match(
                    lts, reach, j, lab,
                    mid_ok=lambda q1: (i, q1) in pairs,
                    end_ok=lambda q2: (ip, q2) in pairs,
                    allow_stay=lab == "tau",
                ):
                    return False
        return all((i, x, j) in trips for x in envs)

    def trip_ok(i, x, j):
        for ip in iter_bits(lts.succ_mask(i, "tau")):
            if not _match(
                lts, reach, j, "tau",
                mid_ok=lambda q1: (i, x, q1) in trips,
                end_ok=lambda q2: (ip, x, q2) in trips,
                allow_stay=True,
            ):
                return False
        for a in x & init[i]:
            for ip in iter_bits(lts.succ_mask(i, a)):
                if not _match(
                    lts, reach, j, a,
                    mid_ok=lambda q1: (i, x, q1) in trips,
                    end_ok=lambda q2: (ip, q2) in pairs,
                    allow_stay=False,
                ):
                    return False
        if deadend(i, x):
            if not any((i, q0) in pairs for q0 in reach[j]):
                return False
            for ip in iter_bits(lts.succ_mask(i, "t")):
                if not _match(
                    lts, reach, j, "t",
                    mid_ok=lambda q1: True,
                    end_ok=lambda q2: (ip, x, q2) in trips,
                    allow_stay=False,
                ):
                    return False
        if stable[i] and not any(stable[q0] for q0 in reach[j]):
            return False
        return True

    changed = True
    while changed:
        changed = False
        for i, j in sorted(pairs):
            if (i, j) in pairs and not pair_ok(i, j):
                pairs.discard((i, j))
                pairs.discard((j, i))
                changed = True
        for i, x, j in list(trips):
            if (i, x, j) in trips and not trip_ok(i, x, j):
                trips.discard((i, x, j))
                trips.discard((j, x, i))
                changed = True
    return pairs, trips


def ref_rooted(lts, universe, pairs, trips):
    """Greatest rooted relation on top of a plain one.

    First transitions are matched strongly and land in the plain relation
    given by ``pairs``/``trips``; only the universal-environment clause
    and the deadlocked-system clause stay self-referential, so this is a
    much shallower fixpoint.
    """
    n = lts.n_states
    envs = all_env_sets(universe)
    init = [_visible_init(lts, i) for i in range(n)]

    rpairs = {(i, j) for i in range(n) for j in range(n)}
    rtrips = {(i, x, j) for i in range(n) for x in envs for j in range(n)}

    def deadend(i, x):
        return not (init[i] & x) and "tau" not in init[i]

    def strong_into(i, lab, j, targets):
        for ip in iter_bits(lts.succ_mask(i, lab)):
            if not any(
                (ip, jp) in targets for jp in iter_bits(lts.succ_mask(j, lab))
            ):
                return False
        return True

    def strong_into_x(i, lab, x, j):
        for ip in iter_bits(lts.succ_mask(i, lab)):
            if not any(
                (ip, x, jp) in trips for jp in iter_bits(lts.succ_mask(j, lab))
            ):
                return False
        return True

    def pair_ok(i, j):
        for lab in lts.out_labels(i):
            if lab != "t" and not strong_into(i, lab, j, pairs):
                return False
        return all((i, x, j) in rtrips for x in envs)

    def trip_ok(i, x, j):
        if not strong_into_x(i, "tau", x, j):
            return False
        for a in x & init[i]:
            if not strong_into(i, a, j, pairs):
                return False
        if deadend(i, x):
            if (i, j) not in rpairs:
                return False
            if not strong_into_x(i, "t", x, j):
                return False
        return True

    changed = True
    while changed:
        changed = False
        for i, j in list(rpairs):
            if (i, j) in rpairs and not pair_ok(i, j):
                rpairs.discard((i, j))
                rpairs.discard((j, i))
                changed = True
        for i, x, j in list(rtrips):
            if (i, x, j) in rtrips and not trip_ok(i, x, j):
                rtrips.discard((i, x, j))
                rtrips.discard((j, x, i))
                changed = True
    return rpairs, rtrips


# ---------------------------------------------------------------------------
# plain label-blind relations, usable on raw and on encoded systems


def ref_branching(lts):
    """Greatest stability respecting branching bisimulation.

    Every label is matched branchingly, with the stay option reserved for
    internal steps; stable states must be answered by reachable stable
    states.  Works on any system, whatever its label vocabulary.
    """
    n = lts.n_states
    reach = [tau_reach(lts, i) for i in range(n)]
    stable = [lts.succ_mask(i, "tau") == 0 for i in range(n)]

    rel = {(i, j) for i in range(n) for j in range(n)}

    def ok(i, j):
        for lab in lts.out_labels(i):
            for ip in iter_bits(lts.succ_mask(i, lab)):
                if not _match(
                    lts, reach, j, lab,
                    mid_ok=lambda q1: (i, q1) in rel,
                    end_ok=lambda q2: (ip, q2) in rel,
                    allow_stay=lab == "tau",
                ):
                    return False
        return not stable[i] or any(stable[q0] for q0 in reach[j])

    changed = True
    while changed:
        changed = False
        for i, j in list(rel):
            if (i, j) in rel and not ok(i, j):
                rel.discard((i, j))
                rel.discard((j, i))
                changed = True
    return rel


def ref_rooted_branching(lts, rel=None):
    """Pairs whose first transitions match strongly into ``rel``.

    Not itself a fixpoint: the definition only refers to the plain
    relation, so one symmetric pass suffices.
    """
    if rel is None:
        rel = ref_branching(lts)
    n = lts.n_states

    def ok(i, j):
        for lab in lts.out_labels(i):
            for ip in iter_bits(lts.succ_mask(i, lab)):
                if not any(
                    (ip, jp) in rel for jp in iter_bits(lts.succ_mask(j, lab))
                ):
                    return False
        return True

    return {(i, j) for i in range(n) for j in range(n) if ok(i, j) and ok(j, i)}


def ref_strong(lts):
    """Greatest strong bisimulation; every label, every step, in lockstep."""
    n = lts.n_states
    rel = {(i, j) for i in range(n) for j in range(n)}

    def ok(i, j):
        for lab in lts.out_labels(i):
            for ip in iter_bits(lts.succ_mask(i, lab)):
                if not any(
                    (ip, jp) in rel for jp in iter_bits(lts.succ_mask(j, lab))
                ):
                    return False
        return True

    changed = True
    while changed:
        changed = False
        for i, j in list(rel):
            if (i, j) in rel and not ok(i, j):
                rel.discard((i, j))
                rel.discard((j, i))
                changed = True
    return rel
