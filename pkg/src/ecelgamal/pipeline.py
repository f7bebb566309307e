"""Single- and dual-worker execution of the per-block encryption work.

Both modes compute, for every message point P_M with nonce k, the pair
(k*G, P_M + k*P_B).  Single mode runs everything on one worker.  Dual mode
gives worker 1 the k*G products and the final additions, worker 2 the
k*P_B products; the two exchange partial results through a lock-guarded
shared region, one block at a time:

    worker 1: compute k*G   -> lock, deposit, unlock
    worker 2: compute k*P_B -> lock, deposit, unlock
    worker 1: lock, collect both slots, clear them, unlock -> add, emit

The ciphertext blocks are identical across modes for the same nonces; only
the schedule differs.  Every lock, slot access, and compute span is
recorded in an execution trace for inspection.
"""

from __future__ import annotations

import itertools
import threading
import time
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .curve import CurveParams, Point, _require_member, point_add, scalar_mul
from .errors import (
    EmptySlot,
    LockNotHeld,
    NotOwner,
    ReentrantLock,
    SlotAlreadyWritten,
    WorkerFailure,
)


class ExecMode(Enum):
    SINGLE = "single"
    DUAL = "dual"

    @classmethod
    def parse(cls, text: str) -> "ExecMode":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown execution mode {text!r}") from None


@dataclass(frozen=True)
class CiphertextBlock:
    """One encrypted block: (k*G, P_M + k*P_B)."""

    c1: Point
    c2: Point


EVENT_KINDS = ("lock", "unlock", "write_slot", "read_slot",
               "compute_start", "compute_end")

# global ordering for trace events; next() on the C iterator is atomic
_event_seq = itertools.count()


class TraceEvent(NamedTuple):
    seq: int
    timestamp_ns: int
    worker: int
    kind: str
    slot: str | None = None


class _Recorder:
    """Per-worker event sink; each worker appends only to its own list."""

    __slots__ = ("worker", "events")

    def __init__(self, worker: int):
        self.worker = worker
        self.events: list[TraceEvent] = []

    def __call__(self, kind: str, slot: str | None = None,
                 _seq=_event_seq.__next__, _now=time.monotonic_ns) -> None:
        self.events.append(TraceEvent(_seq(), _now(), self.worker, kind, slot))


@dataclass(frozen=True)
class ExecTrace:
    """Merged event log of one pipeline run plus its wall time."""

    mode: ExecMode
    events: tuple[TraceEvent, ...]
    wall_time_s: float

    def validate(self) -> None:
        """Check lock/unlock alternation and slot-access nesting."""
        holder: int | None = None
        for ev in self.events:
            if ev.kind == "lock":
                if holder is not None:
                    raise ValueError(f"lock by w{ev.worker} while w{holder} holds it")
                holder = ev.worker
            elif ev.kind == "unlock":
                if holder != ev.worker:
                    raise ValueError(f"unlock by w{ev.worker}, holder is {holder}")
                holder = None
            elif ev.kind in ("write_slot", "read_slot"):
                if holder != ev.worker:
                    raise ValueError(
                        f"{ev.kind} by w{ev.worker} outside its critical region"
                    )
            elif ev.kind not in EVENT_KINDS:
                raise ValueError(f"unknown event kind {ev.kind!r}")
        if holder is not None:
            raise ValueError(f"trace ends with lock held by w{holder}")

    def render(self) -> str:
        """One line per event: '<monotonic_ns> w<id> <event> [slot]'."""
        lines = []
        for ev in self.events:
            suffix = f" {ev.slot}" if ev.slot else ""
            lines.append(f"{ev.timestamp_ns} w{ev.worker} {ev.kind}{suffix}")
        return "\n".join(lines)


class LockHandle:
    """Proof of lock ownership; dies on release and must not change threads."""

    __slots__ = ("region", "worker", "alive", "recorder")

    def __init__(self, region: "SharedRegion", worker: int, recorder=None):
        self.region = region
        self.worker = worker
        self.alive = True
        self.recorder = recorder


class _Cancelled(Exception):
    """Internal: a peer worker failed, abandon the pipeline quietly."""


class SharedRegion:
    """Two point slots plus a fair mutual-exclusion lock.

    Slot reads and writes are only honored through a live LockHandle, which
    models hardware where shared memory is touched strictly inside the
    lock/unlock protocol.  Lock handoff is FIFO, so no waiter starves.
    """

    SLOT_KG = "kG"
    SLOT_KPB = "kPB"
    SLOTS = (SLOT_KG, SLOT_KPB)

    def __init__(self):
        self._mutex = threading.Lock()
        self._changed = threading.Condition(self._mutex)
        self._owner: int | None = None
        self._waiters: deque[tuple[int, threading.Event]] = deque()
        self._values: dict[str, Point | None] = {s: None for s in self.SLOTS}
        self._written: dict[str, bool] = {s: False for s in self.SLOTS}

    # -- lock protocol --

    def acquire(self, worker: int, recorder=None, cancel=None) -> LockHandle:
        """Block until this worker exclusively owns the region."""
        with self._mutex:
            if self._owner == worker:
                raise ReentrantLock(f"worker {worker} already holds the lock")
            if self._owner is None and not self._waiters:
                self._owner = worker
                if recorder:
                    recorder("lock")
                return LockHandle(self, worker, recorder)
            gate = threading.Event()
            self._waiters.append((worker, gate))

        while not gate.wait(timeout=0.05):
            if cancel is not None and cancel.is_set():
                with self._mutex:
                    if not gate.is_set():
                        self._waiters.remove((worker, gate))
                        raise _Cancelled()
                break  # ownership arrived while we were cancelling
        if recorder:
            recorder("lock")
        return LockHandle(self, worker, recorder)

    def release(self, handle: LockHandle) -> None:
        if not isinstance(handle, LockHandle) or handle.region is not self:
            raise NotOwner("handle does not belong to this region")
        with self._mutex:
            if not handle.alive or self._owner != handle.worker:
                raise NotOwner(
                    f"handle of worker {handle.worker} cannot release; "
                    f"current owner is {self._owner}"
                )
            handle.alive = False
            if handle.recorder:
                handle.recorder("unlock")
            if self._waiters:
                worker, gate = self._waiters.popleft()
                self._owner = worker   # handoff keeps the order fair
                gate.set()
            else:
                self._owner = None

    @property
    def locked(self) -> bool:
        return self._owner is not None

    @property
    def owner(self) -> int | None:
        return self._owner

    # -- slot access, valid only while holding the lock --

    def _check_held(self, handle: LockHandle, slot: str) -> None:
        if slot not in self.SLOTS:
            raise ValueError(f"unknown slot {slot!r}; expected one of {self.SLOTS}")
        if (not isinstance(handle, LockHandle) or handle.region is not self
                or not handle.alive or self._owner != handle.worker):
            raise LockNotHeld(f"slot {slot!r} access without holding the lock")

    def write(self, handle: LockHandle, slot: str, value: Point) -> None:
        self._check_held(handle, slot)
        with self._changed:
            if self._written[slot]:
                raise SlotAlreadyWritten(f"slot {slot!r} already written this round")
            self._values[slot] = value
            self._written[slot] = True
            self._changed.notify_all()
        if handle.recorder:
            handle.recorder("write_slot", slot)

    def read(self, handle: LockHandle, slot: str) -> Point:
        self._check_held(handle, slot)
        if not self._written[slot]:
            raise EmptySlot(f"slot {slot!r} is empty")
        if handle.recorder:
            handle.recorder("read_slot", slot)
        return self._values[slot]

    def is_written(self, handle: LockHandle, slot: str) -> bool:
        self._check_held(handle, slot)
        return self._written[slot]

    def reset(self, handle: LockHandle) -> None:
        """Return both slots to empty; done between blocks by worker 1."""
        self._check_held(handle, self.SLOT_KG)
        with self._changed:
            for slot in self.SLOTS:
                self._values[slot] = None
                self._written[slot] = False
            self._changed.notify_all()

    def wait_for_slot(self, slot: str, written: bool, cancel=None) -> None:
        """Block until the slot's written-state matches; the lock is NOT held.

        Each slot has a single writer and a single consumer, so a state
        observed here cannot be flipped by anyone but the caller's own
        follow-up lock/access cycle.  The wait spins briefly first: at
        millisecond block granularity a futex sleep per block would cost
        more than the work being synchronized.
        """
        if slot not in self.SLOTS:
            raise ValueError(f"unknown slot {slot!r}; expected one of {self.SLOTS}")
        state = self._written
        for _ in range(64):
            if state[slot] == written:
                return
            time.sleep(0)  # yield so the peer can progress
        with self._changed:
            while state[slot] != written:
                self._changed.wait(timeout=0.05)
                if cancel is not None and cancel.is_set():
                    raise _Cancelled()


def _validated_nonces(c: CurveParams, nonces, count: int) -> list[int]:
    ks = list(itertools.islice(iter(nonces), count))
    if len(ks) != count:
        raise ValueError(f"nonce source yielded {len(ks)} values; need {count}")
    for k in ks:
        if not isinstance(k, int) or not 1 <= k <= c.n - 1:
            raise ValueError(f"nonce {k!r} outside [1, {c.n - 1}]")
    return ks


def run_encrypt_pipeline(
    c: CurveParams,
    message_points,
    public: Point,
    nonces,
    mode: ExecMode = ExecMode.SINGLE,
):
    """Encrypt pre-encoded points; returns (blocks, trace).

    Output blocks are identical in content and order for both modes given
    the same nonce sequence.
    """
    points = list(message_points)
    for i, pt in enumerate(points):
        _require_member(c, pt, f"message point {i}")
    _require_member(c, public, "public point")
    ks = _validated_nonces(c, nonces, len(points))

    out: list[CiphertextBlock] = []
    cancel = threading.Event()
    failures: dict[int, BaseException] = {}

    def guarded(worker: int, body):
        def run():
            try:
                body()
            except _Cancelled:
                pass
            except BaseException as exc:
                failures[worker] = exc
                cancel.set()
        return run

    def check_cancel():
        if cancel.is_set():
            raise _Cancelled()

    if mode == ExecMode.SINGLE:
        rec = _Recorder(1)

        def single_worker():
            for pm, k in zip(points, ks):
                rec("compute_start")
                c1 = scalar_mul(c, k, c.g)
                rec("compute_end")
                rec("compute_start")
                kpb = scalar_mul(c, k, public)
                rec("compute_end")
                rec("compute_start")
                c2 = point_add(c, pm, kpb)
                rec("compute_end")
                out.append(CiphertextBlock(c1, c2))

        workers = [threading.Thread(target=guarded(1, single_worker),
                                    name="pipeline-w1")]
        recorders = [rec]

    elif mode == ExecMode.DUAL:
        region = SharedRegion()
        rec1 = _Recorder(1)
        rec2 = _Recorder(2)

        def worker_one():
            for pm, k in zip(points, ks):
                check_cancel()
                rec1("compute_start")
                c1 = scalar_mul(c, k, c.g)
                rec1("compute_end")

                handle = region.acquire(1, rec1, cancel)
                region.write(handle, SharedRegion.SLOT_KG, c1)
                region.release(handle)

                # collect both halves once the partner result lands
                region.wait_for_slot(SharedRegion.SLOT_KPB, written=True,
                                     cancel=cancel)
                handle = region.acquire(1, rec1, cancel)
                c1_out = region.read(handle, SharedRegion.SLOT_KG)
                kpb = region.read(handle, SharedRegion.SLOT_KPB)
                region.reset(handle)
                region.release(handle)

                rec1("compute_start")
                c2 = point_add(c, pm, kpb)
                rec1("compute_end")
                out.append(CiphertextBlock(c1_out, c2))

        def worker_two():
            for k in ks:
                check_cancel()
                rec2("compute_start")
                kpb = scalar_mul(c, k, public)
                rec2("compute_end")

                # wait for worker 1 to clear the previous round
                region.wait_for_slot(SharedRegion.SLOT_KPB, written=False,
                                     cancel=cancel)
                handle = region.acquire(2, rec2, cancel)
                region.write(handle, SharedRegion.SLOT_KPB, kpb)
                region.release(handle)

        workers = [
            threading.Thread(target=guarded(1, worker_one), name="pipeline-w1"),
            threading.Thread(target=guarded(2, worker_two), name="pipeline-w2"),
        ]
        recorders = [rec1, rec2]

    else:
        raise ValueError(f"unknown execution mode {mode!r}")

    start = time.perf_counter()
    for w in workers:
        w.start()
    for w in workers:
        w.join()
    wall = time.perf_counter() - start

    if failures:
        worker = min(failures)
        raise WorkerFailure(worker, repr(failures[worker])) from failures[worker]

    events = tuple(sorted(
        (ev for r in recorders for ev in r.events), key=lambda ev: ev.seq
    ))
    return out, ExecTrace(mode, events, wall)
