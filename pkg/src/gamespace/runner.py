"""Play one game between agents, with telemetry and optional trace."""

from __future__ import annotations

from dataclasses import dataclass, field

from .agents import AgentSpec, make_agent
from .core import Telemetry, trace_record
from .games import new_game
from .rng import child_rng


@dataclass
class GameResult:
    game_id: str
    player_count: int
    seats: list            # seat -> agent index in the caller's list
    winners: set           # winning seats
    utilities: list        # per seat
    telemetry: Telemetry
    trace: list = field(default_factory=list)

    def credit(self, seat: int) -> float:
        """Win credit: 1/|winners| for each winner, 0 otherwise."""
        return 1.0 / len(self.winners) if seat in self.winners else 0.0

    def credit_by_agent(self) -> dict:
        out = {}
        for seat, idx in enumerate(self.seats):
            out[idx] = out.get(idx, 0.0) + self.credit(seat)
        return out


def play_game(game_id: str, specs: list, seed: int, *coords, rules: dict | None = None,
              shuffle_seats: bool = True, trace: bool = False) -> GameResult:
    """Play ``specs`` (one per seat before shuffling) to the end.

    All randomness derives from ``(seed, *coords)``: one stream for the
    environment, one per seat for the agents, one for seat assignment.
    Each decision gets a copy of the true state with the hidden
    information resampled for the acting player.
    """
    n = len(specs)
    seat_rng = child_rng(seed, *coords, "seats")
    seats = list(range(n))
    if shuffle_seats:
        seat_rng.shuffle(seats)
    env_rng = child_rng(seed, *coords, "env")
    agent_rngs = [child_rng(seed, *coords, "agent", s) for s in range(n)]
    agents = [make_agent(specs[idx]) for idx in seats]
    state = new_game(game_id, n, env_rng, **(rules or {}))
    tel = Telemetry()
    state.telemetry = tel
    records = []
    while not state.terminal:
        p = state.current_player
        actions = state.legal_actions()
        tel.record_decision(state, p, len(actions))
        view = state.copy()
        view.redeterminize(p, agent_rngs[p])
        if len(actions) == 1:
            action = actions[0]
        else:
            action = agents[p].decide(view, p, agent_rngs[p])
        if trace:
            records.append(trace_record(state, p, action, len(actions)))
        state.apply(action, env_rng)
    return GameResult(game_id, n, seats, state.winners(), state.utilities(), tel, records)
