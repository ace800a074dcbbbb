"""Diamant: simultaneous push-your-luck over five rounds.

Each turn every player still in the mine commits to continue or leave.
Commitments are taken one player at a time but stay hidden until the last
one is in, at which point the turn resolves for everybody at once.
"""

from __future__ import annotations

from ..core import Component, GameState, MissingChoice, UnsupportedPlayerCount

CONTINUE, LEAVE = 0, 1
ACTION_NAMES = ("continue", "leave")
N_TREASURE = 15
N_HAZARD_TYPES = 5
HAZARD_COPIES = 3
N_CARDS = N_TREASURE + N_HAZARD_TYPES * HAZARD_COPIES
N_ROUNDS = 5
TREASURE_CAP = 100


def is_hazard(card: int) -> bool:
    return card >= N_TREASURE


def hazard_type(card: int) -> int:
    return (card - N_TREASURE) // HAZARD_COPIES


def treasure_value(card: int) -> int:
    return card + 1


class DiamantState(GameState):
    game_id = "diamant"

    __slots__ = ("player_count", "current_player", "turn_index", "terminal", "telemetry",
                 "round_index", "deck", "path", "removed", "in_mine", "pending",
                 "carried", "banked", "on_path", "hazards_seen",
                 "revealed_treasure", "banked_round", "lost_round")

    def __init__(self, player_count: int, rng):
        if player_count not in (2, 3, 4):
            raise UnsupportedPlayerCount(f"diamant supports 2-4 players, got {player_count}")
        self.player_count = player_count
        self.turn_index = 0
        self.terminal = False
        self.telemetry = None
        self.banked = [0] * player_count
        self.removed = []
        self.round_index = -1
        self._start_round(rng)

    def _start_round(self, rng):
        n = self.player_count
        self.round_index += 1
        removed = set(self.removed)
        self.deck = [c for c in range(N_CARDS) if c not in removed]
        rng.shuffle(self.deck)
        self.path = []
        self.in_mine = [True] * n
        self.pending = [-1] * n
        self.carried = [0] * n
        self.on_path = 0
        self.hazards_seen = 0
        self.revealed_treasure = 0
        self.banked_round = 0
        self.lost_round = 0
        self._reveal(rng)
        if not self.terminal:
            self.current_player = 0

    def _end_round(self, rng):
        if self.round_index + 1 >= N_ROUNDS:
            self.terminal = True
            self.current_player = 0
            self.in_mine = [False] * self.player_count
            return
        self._start_round(rng)

    def _reveal(self, rng):
        """Turn over the next card for the players still in the mine."""
        if not self.deck:
            for p in range(self.player_count):
                if self.in_mine[p]:
                    self.banked[p] += self.carried[p]
                    self.banked_round += self.carried[p]
                    self.carried[p] = 0
                    self.in_mine[p] = False
            self._end_round(rng)
            return
        card = self.deck.pop()
        self.path.append(card)
        stayers = [p for p in range(self.player_count) if self.in_mine[p]]
        if is_hazard(card):
            bit = 1 << hazard_type(card)
            if self.hazards_seen & bit:
                for p in stayers:
                    self.lost_round += self.carried[p]
                    self.carried[p] = 0
                    self.in_mine[p] = False
                self.removed.append(card)
                self._end_round(rng)
                return
            self.hazards_seen |= bit
        else:
            v = treasure_value(card)
            self.revealed_treasure += v
            share, rest = divmod(v, len(stayers))
            for p in stayers:
                self.carried[p] += share
            self.on_path += rest

    def resolve(self, rng):
        """Apply all committed choices at once."""
        n = self.player_count
        for p in range(n):
            if self.in_mine[p] and self.pending[p] < 0:
                raise MissingChoice(f"player {p} has not chosen")
        leavers = [p for p in range(n) if self.in_mine[p] and self.pending[p] == LEAVE]
        if leavers:
            share = self.on_path // len(leavers)
            self.on_path -= share * len(leavers)
            for p in leavers:
                gain = self.carried[p] + share
                self.banked[p] += gain
                self.banked_round += gain
                self.carried[p] = 0
                self.in_mine[p] = False
        self.pending = [-1] * n
        if not any(self.in_mine):
            self._end_round(rng)
        else:
            self._reveal(rng)
        if not self.terminal:
            self.current_player = self.in_mine.index(True)

    # ---- GameState hooks ---------------------------------------------------------
    def _copy(self):
        new = DiamantState.__new__(DiamantState)
        new.player_count = self.player_count
        new.current_player = self.current_player
        new.turn_index = self.turn_index
        new.terminal = self.terminal
        new.telemetry = self.telemetry
        new.round_index = self.round_index
        new.deck = self.deck[:]
        new.path = self.path[:]
        new.removed = self.removed[:]
        new.in_mine = self.in_mine[:]
        new.pending = self.pending[:]
        new.carried = self.carried[:]
        new.banked = self.banked[:]
        new.on_path = self.on_path
        new.hazards_seen = self.hazards_seen
        new.revealed_treasure = self.revealed_treasure
        new.banked_round = self.banked_round
        new.lost_round = self.lost_round
        return new

    def legal_actions(self):
        return [CONTINUE, LEAVE]

    def _apply(self, action, rng):
        p = self.current_player
        self.turn_index += 1
        self.pending[p] = action
        n = self.player_count
        for q in range(p + 1, n):
            if self.in_mine[q]:
                self.current_player = q
                return
        self.resolve(rng)

    def heuristic(self, player):
        return min(1.0, self.banked[player] / TREASURE_CAP)

    def winners(self):
        best = max(self.banked)
        return {p for p, b in enumerate(self.banked) if b == best}

    # ---- information --------------------------------------------------------------
    def components(self):
        everyone = frozenset(range(self.player_count))
        comps = [Component(c, "deck", everyone, None) for c in self.deck]
        comps.extend(Component(c, "path", frozenset(), c) for c in self.path)
        comps.extend(Component(c, "removed", frozenset(), c) for c in self.removed)
        return sorted(comps, key=lambda c: c.id)

    def component_count(self):
        return len(self.deck) + len(self.path) + len(self.removed)

    def hidden_fraction(self, player):
        return len(self.deck) / (len(self.deck) + len(self.path) + len(self.removed))

    def redeterminize(self, observer, rng):
        rng.shuffle(self.deck)
        for q in range(self.player_count):
            if q != observer and self.pending[q] >= 0:
                self.pending[q] = rng.randrange(2)

    def observation(self, player):
        return {
            "round": self.round_index,
            "deck_size": len(self.deck),
            "deck_cards": sorted(self.deck),
            "path": list(self.path),
            "removed": list(self.removed),
            "in_mine": list(self.in_mine),
            "committed": [c >= 0 for c in self.pending],
            "own_choice": self.pending[player],
            "carried": list(self.carried),
            "banked": list(self.banked),
            "on_path": self.on_path,
            "current": self.current_player,
            "turn": self.turn_index,
            "terminal": self.terminal,
        }

    def serialize(self):
        return {
            "round": self.round_index,
            "deck": list(self.deck),
            "path": list(self.path),
            "removed": list(self.removed),
            "in_mine": list(self.in_mine),
            "pending": list(self.pending),
            "carried": list(self.carried),
            "banked": list(self.banked),
            "on_path": self.on_path,
            "hazards": self.hazards_seen,
            "current": self.current_player,
            "turn": self.turn_index,
            "terminal": self.terminal,
        }

    def action_key(self, action):
        return ACTION_NAMES[action]

    def treasure_balanced(self) -> bool:
        """Revealed treasure equals what was banked, carried, lost or left this round."""
        return self.revealed_treasure == (self.banked_round + sum(self.carried)
                                          + self.on_path + self.lost_round)


def simultaneous_resolve(state: DiamantState, choices, rng) -> DiamantState:
    """Resolve a turn from a full ``{player: choice}`` mapping (in place)."""
    for p in range(state.player_count):
        if state.in_mine[p]:
            if p not in choices:
                raise MissingChoice(f"no choice given for player {p}")
            state.pending[p] = choices[p]
    state.resolve(rng)
    return state


def new_game(player_count: int, rng) -> DiamantState:
    return DiamantState(player_count, rng)
