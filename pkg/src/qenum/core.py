"""Virtual-clock enumeration substrate.

An enumeration *program* is a generator that yields two kinds of items:

* an ``int`` ``n >= 1``: ``n`` abstract operations of work (ticks);
* a ``tuple``: one emitted result, which itself costs one tick.

Generators pause for free at every yield, so any program can be suspended
and resumed by its consumer. :class:`PausableEnumerator` wraps a program with
an explicit ``step(budget)`` interface; the combinators below compose
programs while forwarding every tick, so the clock of the outermost consumer
sees the exact cost of everything underneath.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

Item = Union[int, tuple]

_END = object()


class ConfigurationError(ValueError):
    pass


class ContractViolation(RuntimeError):
    pass


@dataclass
class OpClock:
    ticks: int = 0
    emission_log: List[int] = field(default_factory=list)

    def advance(self, n: int = 1) -> None:
        if n < 0:
            raise ValueError("clock cannot run backwards")
        self.ticks += n

    def emit(self) -> int:
        self.ticks += 1
        self.emission_log.append(self.ticks)
        return self.ticks


class PausableEnumerator:
    """A suspended enumeration program with a tick-budgeted ``step``.

    Iterating the enumerator yields the raw program items, which is how
    combinators nest enumerators inside each other.
    """

    def __init__(self, program: Iterable[Item], name: str = "", bound: Optional[float] = None):
        self._it = iter(program)
        self.name = name
        self.bound = bound
        self.finished = False
        self.ticks = 0
        self._debt = 0
        self.flags: List[str] = []
        self.info: dict = {}

    def __iter__(self) -> Iterator[Item]:
        return self._items()

    def _items(self):
        if self._debt:
            d, self._debt = self._debt, 0
            yield d
        for item in self._it:
            yield item
        self.finished = True

    def step(self, budget: int) -> List[tuple]:
        """Run for at most ``budget`` ticks; return the tuples emitted meanwhile."""
        out: List[tuple] = []
        left = budget
        if self._debt:
            pay = min(self._debt, left)
            self._debt -= pay
            left -= pay
            self.ticks += pay
        while left > 0 and not self.finished:
            item = next(self._it, _END)
            if item is _END:
                self.finished = True
                break
            if type(item) is int:
                if item > left:
                    self._debt = item - left
                    self.ticks += left
                    left = 0
                else:
                    left -= item
                    self.ticks += item
            else:
                out.append(item)
                left -= 1
                self.ticks += 1
        return out


def enumerator(program: Iterable[Item], name: str = "", bound: Optional[float] = None) -> PausableEnumerator:
    if isinstance(program, PausableEnumerator):
        return program
    return PausableEnumerator(program, name=name, bound=bound)


# ---------------------------------------------------------------------------
# elementary programs
# ---------------------------------------------------------------------------

def scan(rows: Iterable[tuple]) -> Iterator[Item]:
    """Emit stored rows, one tick each."""
    for r in rows:
        yield r


def empty(cost: int = 1) -> Iterator[Item]:
    if cost:
        yield cost


def chain(*programs: Iterable[Item]) -> Iterator[Item]:
    for p in programs:
        yield from p


def mapped(program: Iterable[Item], fn: Callable[[tuple], tuple]) -> Iterator[Item]:
    """Rewrite every emitted tuple with ``fn`` (e.g. id decoding); work items pass through."""
    for item in program:
        if type(item) is int:
            yield item
        else:
            yield fn(item)


def list_merge(lists: Sequence[Sequence], make: Callable = None) -> Iterator[Item]:
    """Duplicate-free merge of ascending lists, emitting ``make(w)`` per distinct ``w``.

    Each round scans the live heads for the minimum (one comparison each),
    emits it, then compares every live head with it and advances the equal
    ones. A round costs at most ``3m + 1`` ticks for ``m`` lists.
    """
    make = make or (lambda w: (w,))
    ptr = [0] * len(lists)
    live = [i for i, lst in enumerate(lists) if lst]
    yield len(lists) or 1
    while live:
        yield len(live)
        w = min(lists[i][ptr[i]] for i in live)
        yield make(w)
        nxt = []
        moved = 0
        for i in live:
            if lists[i][ptr[i]] == w:
                ptr[i] += 1
                moved += 1
            if ptr[i] < len(lists[i]):
                nxt.append(i)
        yield len(live) + moved
        live = nxt


# ---------------------------------------------------------------------------
# interleaving combinators
# ---------------------------------------------------------------------------

def merge_sorted(children: Sequence[Iterable[Item]], check_order: bool = False,
                 make: Callable = None) -> PausableEnumerator:
    """Merge enumerators that each emit a strictly increasing sequence.

    Emits the duplicate-free union in increasing order. The gap between two
    emissions is at most ``O(m)`` plus one emission gap of every child whose
    head is advanced, i.e. ``O(m * delta)`` for children of delay ``delta``.
    Exhausted children leave the active set.
    """

    def program():
        its = [iter(c) for c in children]
        heads: list = [None] * len(its)
        live = []
        yield len(its) or 1
        for i, it in enumerate(its):
            for item in it:
                if type(item) is int:
                    yield item
                else:
                    heads[i] = item
                    live.append(i)
                    break
        while live:
            yield len(live)
            w = min(heads[i] for i in live)
            yield make(w) if make else w
            yield len(live)
            nxt = []
            for i in live:
                if heads[i] == w:
                    got = _END
                    for item in its[i]:
                        if type(item) is int:
                            yield item
                        else:
                            got = item
                            break
                    yield 1
                    if got is _END:
                        continue
                    if check_order and not got > w:
                        raise ContractViolation(f"child {i} emitted {got!r} after {w!r}")
                    heads[i] = got
                nxt.append(i)
            live = nxt

    return PausableEnumerator(program(), name="merge")


@dataclass(frozen=True)
class InterleavePlan:
    """Alternation quanta for pacing a delay-guaranteed enumerator.

    ``T`` bounds the total ticks of the unguaranteed side ``A`` from above,
    ``T_prime`` bounds the total ticks of the paced side ``A'`` from below.
    The guaranteed side must not run dry while ``A`` still works, which holds
    when ``eta * T_prime >= gamma * T``.
    """

    T: int
    T_prime: int
    eta: int = 1
    gamma: int = 1

    def __post_init__(self):
        if self.eta < 1 or self.gamma < 1:
            raise ConfigurationError("eta and gamma must be positive integers")
        if self.T < 0 or self.T_prime < 0:
            raise ConfigurationError("T and T_prime must be non-negative")
        if self.T_prime > 0 and self.eta * self.T_prime < self.gamma * self.T:
            raise ConfigurationError(
                f"plan lets A' finish first: eta*T'={self.eta * self.T_prime} < gamma*T={self.gamma * self.T}")

    @classmethod
    def for_bounds(cls, T: int, T_prime: int) -> "InterleavePlan":
        """Smallest quanta meeting the pacing condition (one side fixed to 1)."""
        T, T_prime = max(0, int(T)), max(0, int(T_prime))
        if T_prime == 0 or T == 0:
            return cls(T, T_prime, 1, 1)
        if T <= T_prime:
            return cls(T, T_prime, 1, T_prime // T)
        return cls(T, T_prime, -(-T // T_prime), 1)

    @property
    def slowdown(self) -> float:
        return max(1.0, self.T / self.T_prime) if self.T_prime else 1.0


class _Cursor:
    """Budgeted forwarding over a program, carrying overshoot as debt."""

    __slots__ = ("it", "debt", "live", "work")

    def __init__(self, program):
        self.it = iter(program)
        self.debt = 0
        self.live = True
        self.work = 0

    def run(self, budget):
        left = budget
        if self.debt:
            pay = min(self.debt, left)
            self.debt -= pay
            left -= pay
            self.work += pay
            yield pay
        it = self.it
        while left > 0:
            item = next(it, _END)
            if item is _END:
                self.live = False
                return
            if type(item) is int:
                if item > left:
                    self.debt = item - left
                    item = left
                left -= item
            else:
                left -= 1
            self.work += 1 if type(item) is not int else item
            yield item

    def drain(self):
        if self.debt:
            d, self.debt = self.debt, 0
            self.work += d
            yield d
        for item in self.it:
            self.work += item if type(item) is int else 1
            yield item
        self.live = False


def interleave_union(A: Iterable[Item], A_prime: Iterable[Item], plan: InterleavePlan,
                     delta: Optional[float] = None) -> PausableEnumerator:
    """Union of two disjoint enumerations, pacing ``A'`` so ``A`` finishes first.

    Runs ``A'`` for ``gamma`` ticks, then ``A`` for ``eta`` ticks, and so on;
    each switch costs one tick. If ``A'`` has delay ``delta`` the union has
    delay ``O(delta * max(1, T/T'))``.
    """
    if not isinstance(plan, InterleavePlan):
        raise ConfigurationError("plan must be an InterleavePlan")

    def program():
        fast, slow = _Cursor(A_prime), _Cursor(A)
        while fast.live and slow.live:
            yield from fast.run(plan.gamma)
            yield 1
            if not fast.live:
                break
            yield from slow.run(plan.eta)
            yield 1
        if slow.live:
            yield from slow.drain()
        if fast.live:
            yield from fast.drain()
        out.info["ticks_A"] = slow.work
        out.info["ticks_A_prime"] = fast.work

    bound = delta * plan.slowdown if delta is not None else None
    out = PausableEnumerator(program(), name="interleave", bound=bound)
    out.info["plan"] = plan
    return out


def dedup_cost(work: int, emissions: int) -> int:
    """Tick bound of an ``A`` run under :func:`dedup_interleave` (two probes, insert, emit)."""
    return work + 4 * emissions


def dedup_interleave(J, A: Iterable[Item], T: int) -> PausableEnumerator:
    """Emit a stored duplicate-free set ``J`` while ``A`` runs in the gaps.

    ``J`` needs ``len``, ``in`` and iteration. After each stored tuple ``A``
    gets ``ceil(T/|J|)`` ticks; its tuples are checked against ``J`` and a
    hash set ``H`` of what it already emitted, so nothing is output twice.
    ``T`` must cover ``A`` including these checks (see :func:`dedup_cost`).
    """
    size = len(J)
    window = -(-int(T) // size) if size else 0

    def program():
        H = set()
        cur = _Cursor(A)
        for t in J:
            yield t
            spent = 0
            while spent < window and cur.live:
                for item in cur.run(window - spent):
                    if type(item) is int:
                        spent += item
                        yield item
                    else:
                        # a tuple costs more than the cursor's one tick: re-budget
                        spent += 2
                        yield 2
                        if item not in J and item not in H:
                            H.add(item)
                            spent += 2
                            yield 1
                            yield item
                        break
        if cur.live:
            if size:
                out.flags.append("A outlived the stored output; delay not guaranteed for the tail")
            else:
                out.flags.append("empty stored output; no delay guarantee")
            for item in cur.drain():
                if type(item) is int:
                    yield item
                else:
                    yield 2
                    if item not in J and item not in H:
                        H.add(item)
                        yield 1
                        yield item
        out.info["ticks_A"] = cur.work
        out.info["distinct_from_A"] = len(H)

    out = PausableEnumerator(program(), name="dedup", bound=window or None)
    out.info["window"] = window
    return out


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------

@dataclass
class DelayReport:
    max_gap: int
    mean_gap: float
    emissions: int
    total_ticks: int
    bound: Optional[float] = None
    bound_satisfied: Optional[bool] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def check(self, bound: float) -> "DelayReport":
        self.bound = bound
        self.bound_satisfied = self.max_gap <= bound
        return self


def measure_delay(e: Iterable[Item], sink: Optional[list] = None, clock: Optional[OpClock] = None,
                  keep_log: bool = False) -> DelayReport:
    """Drive ``e`` to completion and report emission gaps in ticks.

    The first gap runs from tick 0 to the first emission and the last from
    the final emission to termination.
    """
    ticks = clock.ticks if clock else 0
    start = ticks
    last = ticks
    max_gap = 0
    count = 0
    log = clock.emission_log if (clock and keep_log) else None
    for item in e:
        if type(item) is int:
            ticks += item
        else:
            ticks += 1
            gap = ticks - last
            if gap > max_gap:
                max_gap = gap
            last = ticks
            count += 1
            if sink is not None:
                sink.append(item)
            if log is not None:
                log.append(ticks)
    if ticks - last > max_gap:
        max_gap = ticks - last
    if clock:
        clock.ticks = ticks
    total = ticks - start
    mean = total / (count + 1)
    bound = getattr(e, "bound", None)
    rep = DelayReport(max_gap, mean, count, total)
    if bound is not None:
        rep.check(bound)
    return rep


def drain(e: Iterable[Item]) -> Tuple[list, DelayReport]:
    out: list = []
    rep = measure_delay(e, sink=out)
    return out, rep


def ceil_root(num: int, den: int, n: int) -> int:
    """Smallest integer ``r >= 1`` with ``r**n * den >= num`` (exact integer arithmetic)."""
    if den <= 0:
        raise ValueError("den must be positive")
    r = max(1, math.ceil((num / den) ** (1.0 / n)))
    while r > 1 and (r - 1) ** n * den >= num:
        r -= 1
    while r ** n * den < num:
        r += 1
    return r
