#!/usr/bin/env python3
"""Generate the synthetic annotation log used by the stats tests.

The log is constructed so that every aggregate the stats tests check holds
at once: per (language, origin) annotation
counts and display-rounded success rates, 1656 distinct pairs, 588 pairs at
>= 90% and 804 pairs at >= 80% success among pairs with at least three
annotations, and a mean of 4.6 annotations per histogram pair.

The output is deterministic. Usage:

    python3 scripts/make_fixture_log.py > crates/core/fixtures/annotation_log.csv
"""

import random
import sys

# (language, origin, annotations, display-rounded success percentage)
CELLS = [
    ("en", "user_proposed", 726, 86),
    ("en", "manual", 694, 77),
    ("en", "embedding_mined", 678, 73),
    ("es", "user_proposed", 556, 91),
    ("es", "manual", 650, 79),
    ("es", "embedding_mined", 209, 52),
    ("fr", "user_proposed", 930, 86),
    ("fr", "manual", 1967, 76),
    ("fr", "embedding_mined", 732, 88),
    ("it", "manual", 68, 76),
    ("it", "embedding_mined", 33, 85),
    ("ru", "manual", 15, 93),
    ("ru", "embedding_mined", 4, 100),
]

TOTAL_PAIRS = 1656
HIGH_PAIRS = 588  # success >= 0.9
MID_PAIRS = 804 - 588  # 0.8 <= success < 0.9
UNFILTERED_PAIRS = 116  # pairs with fewer than three annotations


def largest_remainder(total, weights):
    s = sum(weights)
    raw = [total * w / s for w in weights]
    out = [int(r) for r in raw]
    rest = sorted(range(len(raw)), key=lambda i: (out[i] - raw[i], i))
    for i in rest[: total - sum(out)]:
        out[i] += 1
    return out


def split_sizes(total, parts):
    base, extra = divmod(total, parts)
    return [base + 1] * extra + [base] * (parts - extra)


def min_low_incorrect(size):
    # smallest number of misses that puts the rate strictly below 0.8
    for miss in range(size + 1):
        if (size - miss) * 10 < 8 * size:
            return miss
    raise ValueError(size)


def mid_incorrect(size):
    # a miss count giving 0.8 <= rate < 0.9, or None
    for miss in range(size + 1):
        ok = (size - miss) * 10 >= 8 * size and (size - miss) * 10 < 9 * size
        if ok:
            return miss
    return None


def plan_cell(n, correct, filtered, unf_sizes, high, mid):
    """Assign (size, misses) to every pair of the cell, or None if infeasible."""
    wrong = n - correct
    unf_total = sum(unf_sizes)
    sizes = split_sizes(n - unf_total, filtered) if filtered else []
    if any(s < 3 for s in sizes):
        return None
    mid_capable = [i for i, s in enumerate(sizes) if mid_incorrect(s) is not None]
    if len(mid_capable) < mid or high + mid > filtered:
        return None
    kinds = ["low"] * filtered
    for i in mid_capable[:mid]:
        kinds[i] = "mid"
    # high pairs take the largest remaining pairs so low pairs stay small
    rest = sorted((i for i in range(filtered) if kinds[i] == "low"), key=lambda i: -sizes[i])
    for i in rest[:high]:
        kinds[i] = "high"
    misses = []
    for s, kind in zip(sizes, kinds):
        if kind == "high":
            misses.append([0, 0])
        elif kind == "mid":
            m = mid_incorrect(s)
            misses.append([m, m])
        else:
            misses.append([min_low_incorrect(s), s])
    for s in unf_sizes:
        misses.append([0, s])
    lo = sum(m[0] for m in misses)
    hi = sum(m[1] for m in misses)
    if not lo <= wrong <= hi:
        return None
    budget = wrong - lo
    chosen = [m[0] for m in misses]
    # spread the surplus misses round-robin so rates vary
    while budget:
        moved = False
        for i, (mn, mx) in enumerate(misses):
            if budget and chosen[i] < mx:
                chosen[i] += 1
                budget -= 1
                moved = True
        assert moved
    all_sizes = sizes + unf_sizes
    return list(zip(all_sizes, chosen, kinds + ["unfiltered"] * len(unf_sizes)))


def main():
    counts = [c[2] for c in CELLS]
    corrects = [round(n * pct / 100) for (_, _, n, pct) in CELLS]
    for (lang, origin, n, pct), c in zip(CELLS, corrects):
        assert round(100 * c / n) == pct, (lang, origin)
    pairs = largest_remainder(TOTAL_PAIRS, counts)
    unf = largest_remainder(UNFILTERED_PAIRS, counts)
    unf = [min(u, p - 1) for u, p in zip(unf, pairs)]
    unf[0] += UNFILTERED_PAIRS - sum(unf)
    unf_sizes = [[2 if j % 2 == 0 else 1 for j in range(u)] for u in unf]
    filtered = [p - u for p, u in zip(pairs, unf)]

    # quota split: high and mid pairs go to cells in proportion to how much
    # success they have beyond the 80% mark, then repaired greedily
    n_cells = len(CELLS)
    high = [0] * n_cells
    mid = [0] * n_cells

    def feasible(i, h, m):
        return plan_cell(counts[i], corrects[i], filtered[i], unf_sizes[i], h, m) is not None

    # every cell starts at the fewest high pairs it can carry
    for i in range(n_cells):
        start = next(
            (h, m)
            for m in range(filtered[i] + 1)
            for h in range(filtered[i] + 1 - m)
            if feasible(i, h, m)
        )
        high[i], mid[i] = start
    assert sum(high) <= HIGH_PAIRS and sum(mid) <= MID_PAIRS

    for quota, arr in ((MID_PAIRS - sum(mid), mid), (HIGH_PAIRS - sum(high), high)):
        remaining = quota
        while remaining:
            best = None
            for i in range(n_cells):
                h, m = (high[i], mid[i])
                if arr is high:
                    h += 1
                else:
                    m += 1
                if not feasible(i, h, m):
                    continue
                share = (arr[i] + 1) / max(filtered[i], 1)
                target = corrects[i] / counts[i]
                key = (share - target, i)
                if best is None or key < best[0]:
                    best = (key, i)
            assert best is not None, "quota cannot be placed"
            arr[best[1]] += 1
            remaining -= 1

    rng = random.Random(20210601)
    rows = []
    pair_id = 1
    for i, (lang, origin, n, pct) in enumerate(CELLS):
        plan = plan_cell(n, corrects[i], filtered[i], unf_sizes[i], high[i], mid[i])
        assert plan is not None
        for size, miss, _kind in plan:
            outcomes = [True] * (size - miss) + [False] * miss
            rng.shuffle(outcomes)
            for ok in outcomes:
                rows.append((lang, origin, pair_id, ok))
            pair_id += 1
    rng.shuffle(rows)

    out = sys.stdout
    out.write("id,riddle_id,player_id,pair_id,language,pair_origin,choice,correct,elapsed_ms,k,points,timestamp\n")
    base_ts = 1622505600000
    for rid, (lang, origin, pid, ok) in enumerate(rows, start=1):
        player = rng.randint(1, 900)
        k = rng.choice([1, 3, 5, 5, 5])
        elapsed = rng.randint(4000, 240000)
        if ok:
            base = {5: 5, 3: 10, 1: 15}[k]
            time = 10 if elapsed < 180000 else 2
            points = max(10, min(300, base * time)) / 100
            choice = f"t{pid}"
        else:
            points = 0.0
            choice = f"f{pid}"
        ts = base_ts + rid * 350000
        out.write(f"{rid},{rid},{player},{pid},{lang},{origin},{choice},{str(ok).lower()},{elapsed},{k},{points},{ts}\n")

    total = len(rows)
    filtered_pairs = sum(filtered)
    filtered_ann = total - sum(sum(u) for u in unf_sizes)
    print(
        f"rows={total} pairs={pair_id - 1} high={sum(high)} mid={sum(mid)} "
        f"filtered={filtered_pairs} mean_filtered={filtered_ann / filtered_pairs:.4f} "
        f"mean_all={total / (pair_id - 1):.4f}",
        file=sys.stderr,
    )


if __name__ == "__main__":
    main()
