"""Gap tables for symmetric bundles of size at most three.

With symmetric bundles of size at most three, every component of the bundling graph is a path
or a cycle, and the bundle of a voter is its closed neighbourhood there. For a leader set W'
the gap is s_p(kappa(W')) - s_g(kappa(W')); voters of any other candidate weigh zero.

A leader set on a path w_1..w_n is (s,t)-proper when its bundle union stays inside w_s..w_t.
GapTable holds, per size r and interval (s,t), the proper set of exactly r leaders with the
largest gap. Intervals of at most BLOCK voters are enumerated; longer ones are split into two
adjacent intervals whose unions cannot overlap, so their gaps add up.
"""

import logging
from collections.abc import Sequence
from itertools import combinations
from typing import Literal, NamedTuple

from bundle_control.election import BundlingFunction, CandidateId, Voter, VoterId
from bundle_control.errors import ComponentShapeError, TooManyCandidatesError

logger = logging.getLogger(__name__)

BLOCK = 9
SplitMode = Literal["leading", "full"]

_Cell = tuple[int, tuple[int, ...]]
_Row = list[_Cell | None]


class GapEntry(NamedTuple):
    gap: int
    leaders: tuple[VoterId, ...]


def _keeps(current: _Cell | None, gap: int, leaders: tuple[int, ...]) -> bool:
    if current is None or gap > current[0]:
        return False
    return gap < current[0] or current[1] <= leaders


class GapTable:
    """T[r, s, t] over one path, filled lazily.

    Split modes:
        leading: the left part of every split is a block of at most BLOCK voters; enough to
            reach an optimum, since an optimal set can be rearranged to leave two adjacent
            non-leaders within the first BLOCK positions of any long covered run.
        full: every split point s <= j < t is tried.
    """

    def __init__(
        self,
        labels: Sequence[VoterId],
        weights: Sequence[int],
        bundles: Sequence[int],
        max_leaders: int,
        splits: SplitMode = "leading",
    ) -> None:
        if not len(labels) == len(weights) == len(bundles):
            raise ValueError("labels, weights and bundles must have the same length")
        if max_leaders < 0:
            raise ValueError("max_leaders must be non-negative")
        self.labels = tuple(labels)
        self.max_leaders = max_leaders
        self.splits = splits
        self._bundles = list(bundles)
        self._plus = sum(1 << i for i, weight in enumerate(weights) if weight > 0)
        self._minus = sum(1 << i for i, weight in enumerate(weights) if weight < 0)
        self._rows: dict[tuple[int, int], _Row] = {}

    @property
    def size(self) -> int:
        return len(self.labels)

    def gap_of(self, union: int) -> int:
        return (union & self._plus).bit_count() - (union & self._minus).bit_count()

    def entry(self, r: int, s: int, t: int) -> GapEntry | None:
        """T[r, s, t] with 1-based positions; None when no proper set of size r exists."""
        if not 0 <= r <= self.max_leaders:
            raise IndexError(f"size {r} outside 0..{self.max_leaders}")
        if not 1 <= s <= t <= self.size:
            raise IndexError(f"interval ({s}, {t}) outside 1..{self.size}")
        cell = self._row(s - 1, t - 1)[r]
        return None if cell is None else self._label(cell)

    def exact_cells(self) -> _Row:
        """Whole-path row by exact size, with 0-based positions."""
        if not self.labels:
            return [(0, ())] + [None] * self.max_leaders
        return list(self._row(0, self.size - 1))

    def best_by_size(self) -> list[GapEntry]:
        """Best whole-path gap using at most r leaders, for r = 0..max_leaders."""
        best: list[GapEntry] = []
        current: _Cell = (0, ())
        for cell in self.exact_cells():
            if cell is not None and cell[0] > current[0]:
                current = cell
            best.append(self._label(current))
        return best

    def _label(self, cell: _Cell) -> GapEntry:
        return GapEntry(cell[0], tuple(self.labels[i] for i in cell[1]))

    def _row(self, s: int, t: int) -> _Row:
        row = self._rows.get((s, t))
        if row is not None:
            return row
        if t - s + 1 <= BLOCK:
            row = self._enumerate(s, t)
            self._rows[(s, t)] = row
            return row
        if self.splits == "leading":
            self._fill_leading(s, t)
        else:
            self._fill_full(s, t)
        return self._rows[(s, t)]

    def _enumerate(self, s: int, t: int) -> _Row:
        inside = ((1 << (t + 1)) - 1) & ~((1 << s) - 1)
        eligible = [i for i in range(s, t + 1) if (self._bundles[i] & ~inside) == 0]
        row: _Row = [None] * (self.max_leaders + 1)
        unions = [0] * (1 << len(eligible))
        for subset in range(1 << len(eligible)):
            if subset:
                low = subset & -subset
                position = eligible[low.bit_length() - 1]
                unions[subset] = unions[subset ^ low] | self._bundles[position]
            size = subset.bit_count()
            if size > self.max_leaders:
                continue
            gap = self.gap_of(unions[subset])
            current = row[size]
            if current is not None and gap < current[0]:
                continue
            leaders = tuple(eligible[j] for j in range(len(eligible)) if subset >> j & 1)
            if not _keeps(current, gap, leaders):
                row[size] = (gap, leaders)
        return row

    def _merge(self, row: _Row, left: _Row, right: _Row) -> None:
        for a, left_cell in enumerate(left):
            if left_cell is None:
                continue
            left_gap, left_leaders = left_cell
            for b in range(self.max_leaders - a + 1):
                right_cell = right[b]
                if right_cell is None:
                    continue
                gap = left_gap + right_cell[0]
                current = row[a + b]
                if current is not None and gap < current[0]:
                    continue
                leaders = left_leaders + right_cell[1]
                if not _keeps(current, gap, leaders):
                    row[a + b] = (gap, leaders)

    def _fill_leading(self, s: int, t: int) -> None:
        for start in range(t - BLOCK, s - 1, -1):
            if (start, t) in self._rows:
                continue
            row: _Row = [None] * (self.max_leaders + 1)
            for j in range(BLOCK):
                self._merge(row, self._row(start, start + j), self._row(start + j + 1, t))
            self._rows[(start, t)] = row

    def _fill_full(self, s: int, t: int) -> None:
        for length in range(BLOCK + 1, t - s + 2):
            for start in range(s, t - length + 2):
                end = start + length - 1
                if (start, end) in self._rows:
                    continue
                row: _Row = [None] * (self.max_leaders + 1)
                for split in range(start, end):
                    self._merge(row, self._row(start, split), self._row(split + 1, end))
                self._rows[(start, end)] = row


def _rival_of(
    voters: Sequence[Voter], p: CandidateId, rival: CandidateId | None
) -> CandidateId | None:
    if rival is not None:
        return rival
    others = sorted({voter.favorite for voter in voters} - {p})
    if len(others) > 1:
        raise TooManyCandidatesError(
            f"gap tables compare two candidates, found {p} and {', '.join(others)}"
        )
    return others[0] if others else None


def _weights(voters: Sequence[Voter], p: CandidateId, rival: CandidateId | None) -> list[int]:
    return [1 if v.favorite == p else -1 if v.favorite == rival else 0 for v in voters]


def _neighbourhood_masks(
    ids: Sequence[VoterId], kappa: BundlingFunction, closed: bool
) -> list[int]:
    n = len(ids)
    masks = []
    for i, voter_id in enumerate(ids):
        if closed:
            around = {(i - 1) % n, i, (i + 1) % n}
        else:
            around = {j for j in (i - 1, i, i + 1) if 0 <= j < n}
        if kappa.bundle(voter_id) != {ids[j] for j in around}:
            shape = "cycle" if closed else "path"
            raise ComponentShapeError(
                f"bundle of {voter_id!r} is not its closed neighbourhood on the given {shape}"
            )
        masks.append(sum(1 << j for j in around))
    return masks


def max_gap_path(
    path_voters: Sequence[Voter],
    kappa: BundlingFunction,
    p: CandidateId,
    k: int,
    rival: CandidateId | None = None,
    splits: SplitMode = "leading",
) -> GapTable:
    """Build the gap table of one path component.

    Args:
        path_voters: Voters in path order
        kappa: Symmetric bundling function whose restriction to these voters is the path
        p: Candidate counted positively
        k: Largest leader count to tabulate
        rival: Candidate counted negatively; inferred when the path has only two candidates
        splits: Split strategy for intervals longer than BLOCK

    Returns:
        Lazily filled GapTable
    """
    rival = _rival_of(path_voters, p, rival)
    ids = [voter.id for voter in path_voters]
    masks = _neighbourhood_masks(ids, kappa, closed=False)
    logger.debug(f"path of {len(ids)} voters, up to {k} leaders, {splits} splits")
    return GapTable(ids, _weights(path_voters, p, rival), masks, k, splits)


def max_gap_cycle(
    cycle_voters: Sequence[Voter],
    kappa: BundlingFunction,
    p: CandidateId,
    k: int,
    rival: CandidateId | None = None,
) -> list[GapEntry]:
    """Best gap on a cycle component with at most r leaders, for r = 0..k.

    Cycles of at most BLOCK voters are enumerated. Longer cycles are cut open between w_i and
    w_(i+1) for each of the first BLOCK positions; the cut ends get fresh rival voters w_b
    (next to w_i) and w_e (next to w_(i+1)), and each resulting path is tabulated. Leaders are
    mapped back to the cycle without the fresh voters and re-scored there.
    """
    n = len(cycle_voters)
    if n < 3:
        raise ComponentShapeError("a cycle needs at least three voters")
    rival = _rival_of(cycle_voters, p, rival)
    ids = [voter.id for voter in cycle_voters]
    masks = _neighbourhood_masks(ids, kappa, closed=True)
    weights = _weights(cycle_voters, p, rival)
    plus = sum(1 << i for i, weight in enumerate(weights) if weight > 0)
    minus = sum(1 << i for i, weight in enumerate(weights) if weight < 0)
    limit = min(k, n)

    def cycle_gap(leaders: tuple[int, ...]) -> int:
        union = 0
        for i in leaders:
            union |= masks[i]
        return (union & plus).bit_count() - (union & minus).bit_count()

    best: _Row = [(0, ())] + [None] * limit

    def offer(leaders: tuple[int, ...]) -> None:
        gap = cycle_gap(leaders)
        if not _keeps(best[len(leaders)], gap, leaders):
            best[len(leaders)] = (gap, leaders)

    if n <= BLOCK:
        for size in range(1, limit + 1):
            for leaders in combinations(range(n), size):
                offer(leaders)
    else:
        for cut in range(BLOCK):
            order = list(range(cut + 1, n)) + list(range(cut + 1))
            path_weights = [-1] + [weights[i] for i in order] + [-1]
            length = n + 2
            path_masks = [
                sum(1 << j for j in (q - 1, q, q + 1) if 0 <= j < length) for q in range(length)
            ]
            labels = ["w_e"] + [ids[i] for i in order] + ["w_b"]
            table = GapTable(labels, path_weights, path_masks, limit)
            for cell in table.exact_cells():
                if cell is not None:
                    offer(tuple(sorted(order[q - 1] for q in cell[1] if 1 <= q <= n)))
        logger.debug(f"cycle of {n} voters solved through {BLOCK} cut paths")

    result: list[GapEntry] = []
    current: _Cell = (0, ())
    for r in range(k + 1):
        cell = best[r] if r <= limit else None
        if cell is not None and cell[0] > current[0]:
            current = cell
        result.append(GapEntry(current[0], tuple(ids[i] for i in current[1])))
    return result


class ComponentTable:
    """A[d, s, t]: best gap with at most d leaders drawn from components s..t (1-based).

    Components are independent, so A[., s, t] combines component s with A[., s+1, t] by a
    (max, +) convolution over the leader count.
    """

    def __init__(self, components: Sequence[Sequence[GapEntry]], max_leaders: int) -> None:
        self.max_leaders = max_leaders
        self._components = [self._pad(list(entries)) for entries in components]
        self._ranges: dict[tuple[int, int], list[GapEntry]] = {}

    @property
    def count(self) -> int:
        return len(self._components)

    def _pad(self, entries: list[GapEntry]) -> list[GapEntry]:
        if not entries:
            entries = [GapEntry(0, ())]
        entries = entries[: self.max_leaders + 1]
        return entries + [entries[-1]] * (self.max_leaders + 1 - len(entries))

    def entry(self, d: int, s: int, t: int) -> GapEntry:
        if not 0 <= d <= self.max_leaders:
            raise IndexError(f"size {d} outside 0..{self.max_leaders}")
        if not 1 <= s <= t <= self.count:
            raise IndexError(f"component range ({s}, {t}) outside 1..{self.count}")
        return self._range(s - 1, t - 1)[d]

    def best(self, d: int) -> GapEntry:
        if not self._components:
            return GapEntry(0, ())
        return self.entry(d, 1, self.count)

    def _range(self, s: int, t: int) -> list[GapEntry]:
        if (s, t) not in self._ranges:
            self._ranges[(t, t)] = self._components[t]
            for start in range(t - 1, s - 1, -1):
                if (start, t) not in self._ranges:
                    self._ranges[(start, t)] = self._combine(
                        self._components[start], self._ranges[(start + 1, t)]
                    )
        return self._ranges[(s, t)]

    def _combine(self, first: list[GapEntry], rest: list[GapEntry]) -> list[GapEntry]:
        row = []
        for d in range(self.max_leaders + 1):
            top: GapEntry | None = None
            for i in range(d + 1):
                gap = first[i].gap + rest[d - i].gap
                if top is None or gap > top.gap:
                    top = GapEntry(gap, first[i].leaders + rest[d - i].leaders)
            assert top is not None
            row.append(top)
        return row
