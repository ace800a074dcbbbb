"""Dots and Boxes on a square grid of dots (default 9x9, i.e. 64 boxes)."""

from __future__ import annotations

from functools import lru_cache

from ..core import Component, GameState, UnsupportedPlayerCount


@lru_cache(maxsize=None)
def _geometry(dots: int):
    """Edge/box incidence for a ``dots`` x ``dots`` grid.

    Horizontal edges come first (row-major), then vertical edges.
    """
    n = dots - 1
    n_h = dots * n
    n_edges = 2 * dots * n
    box_edges = []
    for r in range(n):
        for c in range(n):
            box_edges.append((r * n + c, (r + 1) * n + c, n_h + r * dots + c, n_h + r * dots + c + 1))
    edge_boxes = [[] for _ in range(n_edges)]
    for b, edges in enumerate(box_edges):
        for e in edges:
            edge_boxes[e].append(b)
    return n_edges, tuple(box_edges), tuple(tuple(x) for x in edge_boxes)


def edge_index(dots: int, orientation: str, row: int, col: int) -> int:
    n = dots - 1
    if orientation == "h":
        return row * n + col
    return dots * n + row * dots + col


class DotsAndBoxesState(GameState):
    game_id = "dotsandboxes"

    __slots__ = ("dots", "player_count", "current_player", "turn_index", "terminal",
                 "drawn", "owner", "boxes", "n_drawn", "telemetry")

    def __init__(self, player_count: int, dots: int = 9):
        if player_count not in (2, 3, 4):
            raise UnsupportedPlayerCount(f"dotsandboxes supports 2-4 players, got {player_count}")
        if dots < 2:
            raise ValueError("grid needs at least 2x2 dots")
        self.dots = dots
        self.player_count = player_count
        self.current_player = 0
        self.turn_index = 0
        self.terminal = False
        n_edges, box_edges, _ = _geometry(dots)
        self.drawn = bytearray(n_edges)
        self.owner = [-1] * len(box_edges)
        self.boxes = [0] * player_count
        self.n_drawn = 0
        self.telemetry = None

    @property
    def n_boxes(self) -> int:
        return len(self.owner)

    def _copy(self):
        new = DotsAndBoxesState.__new__(DotsAndBoxesState)
        new.dots = self.dots
        new.player_count = self.player_count
        new.current_player = self.current_player
        new.turn_index = self.turn_index
        new.terminal = self.terminal
        new.drawn = self.drawn[:]
        new.owner = self.owner[:]
        new.boxes = self.boxes[:]
        new.n_drawn = self.n_drawn
        new.telemetry = self.telemetry
        return new

    def legal_actions(self):
        d = self.drawn
        return [e for e in range(len(d)) if not d[e]]

    def _apply(self, action, rng):
        _, box_edges, edge_boxes = _geometry(self.dots)
        drawn = self.drawn
        drawn[action] = 1
        self.n_drawn += 1
        self.turn_index += 1
        scored = False
        p = self.current_player
        for b in edge_boxes[action]:
            e0, e1, e2, e3 = box_edges[b]
            if drawn[e0] and drawn[e1] and drawn[e2] and drawn[e3]:
                self.owner[b] = p
                self.boxes[p] += 1
                scored = True
        if self.n_drawn == len(drawn):
            self.terminal = True
        elif not scored:
            self.current_player = (p + 1) % self.player_count

    def heuristic(self, player):
        return self.boxes[player] / len(self.owner)

    def winners(self):
        best = max(self.boxes)
        return {p for p, b in enumerate(self.boxes) if b == best}

    def components(self):
        none = frozenset()
        comps = [Component(e, "drawn" if v else "open", none, None) for e, v in enumerate(self.drawn)]
        base = len(comps)
        comps.extend(Component(base + b, "box", none, o) for b, o in enumerate(self.owner))
        return comps

    def component_count(self):
        return len(self.drawn) + len(self.owner)

    def hidden_fraction(self, player):
        return 0.0

    def redeterminize(self, observer, rng):
        pass

    def observation(self, player):
        return self.serialize()

    def serialize(self):
        return {
            "dots": self.dots,
            "current": self.current_player,
            "turn": self.turn_index,
            "terminal": self.terminal,
            "drawn": list(self.drawn),
            "owner": list(self.owner),
            "boxes": list(self.boxes),
        }

    def action_key(self, action):
        n = self.dots - 1
        n_h = self.dots * n
        if action < n_h:
            return f"h{action // n},{action % n}"
        v = action - n_h
        return f"v{v // self.dots},{v % self.dots}"


def new_game(player_count: int, rng=None, dots: int = 9) -> DotsAndBoxesState:
    return DotsAndBoxesState(player_count, dots=dots)
