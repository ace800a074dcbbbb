"""Game-agnostic state interface, telemetry and trace export.

Concrete games subclass :class:`GameState` and implement the underscore
hooks (``_copy``, ``_apply``, ...).  The public methods add legality
checks and telemetry so that search code can call the hooks directly on
hot paths while the game runner always goes through the checked path.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Hashable, Iterable

Action = Hashable


class GameError(Exception):
    """Base class for rule violations raised by game states."""


class IllegalAction(GameError):
    pass


class TerminalState(GameError):
    pass


class NotTerminal(GameError):
    pass


class UnsupportedPlayerCount(GameError):
    pass


class MissingChoice(GameError):
    pass


@dataclass(frozen=True)
class Component:
    """One physical piece of the game (card, edge, box, token)."""

    id: int
    zone: str
    hidden_from: frozenset
    value: object = None


@dataclass
class Telemetry:
    """Counters shared by a state and every copy made from it.

    Copy and forward-model timings accumulate from all copies (including
    copies made inside agents); the per-decision series are filled by the
    game runner, one entry per decision.
    """

    copy_time_total: float = 0.0
    fm_time_total: float = 0.0
    copy_count: int = 0
    fm_count: int = 0
    component_count: list = field(default_factory=list)
    hidden_fraction: list = field(default_factory=list)
    action_space_size: list = field(default_factory=list)
    score: list = field(default_factory=list)

    @property
    def decisions(self) -> int:
        return len(self.action_space_size)

    def record_decision(self, state: "GameState", player: int, n_actions: int) -> None:
        self.component_count.append(state.component_count())
        self.hidden_fraction.append(state.hidden_fraction(player))
        self.action_space_size.append(n_actions)
        self.score.append(state.score(player))

    @property
    def mean_copy_time(self) -> float:
        return self.copy_time_total / self.copy_count if self.copy_count else 0.0

    @property
    def mean_fm_time(self) -> float:
        return self.fm_time_total / self.fm_count if self.fm_count else 0.0


class GameState:
    """Abstract running game with a forward model.

    Attributes every subclass maintains: ``player_count``,
    ``current_player``, ``turn_index`` (decisions taken so far) and
    ``terminal``.
    """

    game_id = "abstract"

    player_count: int
    current_player: int
    turn_index: int
    terminal: bool
    telemetry: Telemetry | None = None

    # ---- hooks for subclasses -------------------------------------------
    def _copy(self) -> "GameState":
        raise NotImplementedError

    def _apply(self, action: Action, rng) -> None:
        raise NotImplementedError

    def legal_actions(self) -> list:
        """Legal actions of the current player, in canonical order."""
        raise NotImplementedError

    def heuristic(self, player: int) -> float:
        """Non-terminal game score scaled into [0, 1]."""
        raise NotImplementedError

    def winners(self) -> set:
        raise NotImplementedError

    def components(self) -> list:
        raise NotImplementedError

    def redeterminize(self, observer: int, rng) -> None:
        """Resample, in place, everything ``observer`` cannot see."""

    def observation(self, player: int):
        """JSON-serialisable view of everything ``player`` can see."""
        raise NotImplementedError

    def serialize(self) -> dict:
        """Full state, JSON-serialisable, for determinism checks."""
        raise NotImplementedError

    def action_key(self, action: Action) -> str:
        return str(action)

    # ---- derived quantities ---------------------------------------------
    def component_count(self) -> int:
        return len(self.components())

    def hidden_fraction(self, player: int) -> float:
        comps = self.components()
        if not comps:
            return 0.0
        return sum(1 for c in comps if player in c.hidden_from) / len(comps)

    def utilities(self) -> list:
        """+1 sole winner, 0 joint winners, -1 everyone else."""
        win = self.winners()
        if not win:
            raise NotTerminal("winner set is empty")
        u_win = 1.0 if len(win) == 1 else 0.0
        return [u_win if p in win else -1.0 for p in range(self.player_count)]

    def score(self, player: int) -> float:
        if self.terminal:
            return self.utilities()[player]
        return self.heuristic(player)

    def scores(self) -> list:
        if self.terminal:
            return self.utilities()
        return [self.heuristic(p) for p in range(self.player_count)]

    # ---- public, instrumented operations ----------------------------------
    def copy(self) -> "GameState":
        tel = self.telemetry
        if tel is None:
            return self._copy()
        t0 = time.perf_counter()
        new = self._copy()
        tel.copy_time_total += time.perf_counter() - t0
        tel.copy_count += 1
        return new

    def apply(self, action: Action, rng, check: bool = True) -> "GameState":
        """Advance this state in place and return it."""
        if check:
            if self.terminal:
                raise TerminalState(f"{self.game_id}: state is terminal")
            if action not in self.legal_actions():
                raise IllegalAction(f"{self.game_id}: {action!r} is not legal")
        tel = self.telemetry
        if tel is None:
            self._apply(action, rng)
            return self
        t0 = time.perf_counter()
        self._apply(action, rng)
        tel.fm_time_total += time.perf_counter() - t0
        tel.fm_count += 1
        return self


# ---- functional wrappers ---------------------------------------------------

def copy_state(state: GameState) -> GameState:
    return state.copy()


def apply_action(state: GameState, action: Action, rng) -> GameState:
    """Checked forward model; mutates ``state`` in place and returns it."""
    return state.apply(action, rng, check=True)


def legal_actions(state: GameState, player: int | None = None) -> list:
    if state.terminal:
        raise TerminalState(f"{state.game_id}: no actions in a terminal state")
    if player is not None and player != state.current_player:
        raise IllegalAction(f"player {player} is not to move (current {state.current_player})")
    return state.legal_actions()


def redeterminize(state: GameState, observer: int, rng) -> GameState:
    """Return a copy with hidden information resampled for ``observer``."""
    new = state.copy()
    new.redeterminize(observer, rng)
    return new


@dataclass(frozen=True)
class HeuristicScore:
    value: float
    terminal: bool


def heuristic_score(state: GameState, player: int) -> HeuristicScore:
    return HeuristicScore(state.score(player), state.terminal)


def game_winner(state: GameState) -> set:
    if not state.terminal:
        raise NotTerminal(f"{state.game_id}: game is still running")
    return state.winners()


def state_fingerprint(state: GameState) -> str:
    return json.dumps(state.serialize(), sort_keys=True)


# ---- trace export ------------------------------------------------------------

def trace_record(state: GameState, player: int, action: Action, n_actions: int) -> dict:
    return {
        "turn": state.turn_index,
        "player": player,
        "action_key": state.action_key(action),
        "action_space": n_actions,
        "hidden_fraction": state.hidden_fraction(player),
        "component_count": state.component_count(),
        "score": [state.score(p) for p in range(state.player_count)],
    }


def write_trace(records: Iterable[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
