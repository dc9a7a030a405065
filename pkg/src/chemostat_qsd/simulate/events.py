"""Jump events, stopping times and trajectories of the hybrid process."""

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum

from ..common.errors import InternalInvariantError
from ..flow.equilibria import equilibrium
from ..flow.solver import DEFAULT_CONFIG, FlowSolverConfig, flow
from ..model.params import ChemostatParams, HybridState


class JumpKind(Enum):
    """The two jump mechanisms."""

    DIVISION = "division"
    WASHOUT = "washout"


@dataclass(frozen=True)
class JumpEvent:
    """One accepted jump; ``s_at_jump`` is the substrate when it fired."""

    time: float
    kind: JumpKind
    x_after: int
    s_at_jump: float


class Outcome(Enum):
    """How a capped first-passage simulation ended."""

    HIT = "hit"
    EXTINCT = "extinct"
    CENSORED = "censored"


@dataclass(frozen=True)
class StoppingTime:
    """A simulated stopping time, or the cap with ``censored`` set."""

    value: float
    outcome: Outcome

    @property
    def censored(self) -> bool:
        return self.outcome is Outcome.CENSORED

    def __float__(self) -> float:
        return math.inf if self.censored else self.value


@dataclass
class Trajectory:
    """Event log of one path plus what is needed to re-integrate the flow."""

    initial: HybridState
    horizon: float
    params: ChemostatParams
    events: list[JumpEvent] = field(default_factory=list)
    extinct_at: float | None = None
    solver: FlowSolverConfig = DEFAULT_CONFIG

    @property
    def times(self) -> list[float]:
        return [event.time for event in self.events]

    def _last_before(self, t: float) -> tuple[float, int, float]:
        index = bisect.bisect_right(self.times, t)
        if index == 0:
            return 0.0, self.initial.x, self.initial.s
        event = self.events[index - 1]
        return event.time, event.x_after, event.s_at_jump

    def x_at(self, t: float) -> int:
        return self._last_before(t)[1]

    def state_at(self, t: float) -> HybridState:
        """State at time t ≤ horizon, re-integrating from the last event."""
        if t < 0 or t > self.horizon:
            raise ValueError(f"t must lie in [0, {self.horizon}], got {t}")
        t0, x, s = self._last_before(t)
        return HybridState(x, max(flow(self.params, x, s, t - t0, self.solver), 0.0))

    @property
    def final_state(self) -> HybridState:
        return self.state_at(self.horizon)

    def survived(self, t: float | None = None) -> bool:
        t = self.horizon if t is None else t
        return self.extinct_at is None or self.extinct_at > t

    def segments(
        self, t_end: float | None = None
    ) -> list[tuple[float, float, int, float]]:
        """(start, stop, x, s_start) for each inter-jump piece up to t_end."""
        t_end = self.horizon if t_end is None else t_end
        pieces = []
        start, x, s = 0.0, self.initial.x, self.initial.s
        for event in self.events:
            if event.time >= t_end:
                break
            pieces.append((start, event.time, x, s))
            start, x, s = event.time, event.x_after, event.s_at_jump
        if start < t_end:
            pieces.append((start, t_end, x, s))
        return pieces

    def check_invariants(self) -> None:
        """Raise InternalInvariantError on any broken trajectory invariant."""
        previous_time, previous_x = 0.0, self.initial.x
        s_bar_1 = equilibrium(self.params, 1)
        inside = 0 < self.initial.s < s_bar_1 and self.initial.x >= 1
        for event in self.events:
            if event.time <= previous_time:
                raise InternalInvariantError(
                    "event times not increasing", diagnostics={"time": event.time}
                )
            if abs(event.x_after - previous_x) != 1:
                raise InternalInvariantError(
                    "jump does not change x by one",
                    diagnostics={"time": event.time, "x_after": event.x_after},
                )
            if inside and event.x_after >= 1 and not 0 < event.s_at_jump < s_bar_1:
                raise InternalInvariantError(
                    "path left the invariant set N* x (0, s_bar_1)",
                    diagnostics={"time": event.time, "s": event.s_at_jump},
                )
            previous_time, previous_x = event.time, event.x_after
        zero_hits = [e.time for e in self.events if e.x_after == 0]
        if zero_hits and (
            self.extinct_at != zero_hits[0] or self.events[-1].x_after != 0
        ):
            raise InternalInvariantError(
                "extinct_at inconsistent with events", diagnostics={"hits": zero_hits}
            )
        if not zero_hits and self.extinct_at not in (None, 0.0):
            raise InternalInvariantError("extinct_at set without a washout to zero")

    def to_rows(self) -> list[dict]:
        """Rows ``t,kind,x_after,s`` with the initial state first."""
        rows = [
            {
                "t": 0.0,
                "kind": "initial",
                "x_after": self.initial.x,
                "s": self.initial.s,
            }
        ]
        rows += [
            {
                "t": event.time,
                "kind": event.kind.value,
                "x_after": event.x_after,
                "s": event.s_at_jump,
            }
            for event in self.events
        ]
        return rows
