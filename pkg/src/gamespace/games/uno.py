"""Uno, single hand: first player to empty their hand wins."""

from __future__ import annotations

from ..core import Component, GameState, UnsupportedPlayerCount

COLORS = "RGBY"
SKIP, REVERSE, DRAW_TWO, WILD, WILD_DRAW_FOUR = 10, 11, 12, 13, 14
VALUE_NAMES = {SKIP: "Skip", REVERSE: "Rev", DRAW_TWO: "+2", WILD: "W", WILD_DRAW_FOUR: "W+4"}
HAND_SIZE = 7
DRAW_ACTION = (-1, -1)
# Highest possible value of an initial 7-card hand (seven wilds at 50 points).
MAX_INITIAL_HAND_VALUE = 7 * 50


def _build_deck():
    colors, values = [], []
    for col in range(4):
        colors.append(col)
        values.append(0)
        for v in list(range(1, 10)) + [SKIP, REVERSE, DRAW_TWO]:
            colors.extend((col, col))
            values.extend((v, v))
    for v in (WILD, WILD_DRAW_FOUR):
        for _ in range(4):
            colors.append(-1)
            values.append(v)
    return tuple(colors), tuple(values)


CARD_COLOR, CARD_VALUE = _build_deck()
N_CARDS = len(CARD_COLOR)
assert N_CARDS == 108


def card_points(card: int) -> int:
    v = CARD_VALUE[card]
    if v < 10:
        return v
    return 20 if v < WILD else 50


# Action = (value, color): for coloured cards the card's own colour, for wilds
# the colour being named.  DRAW_ACTION draws one card and passes.


class UnoState(GameState):
    game_id = "uno"

    __slots__ = ("player_count", "current_player", "turn_index", "terminal", "telemetry",
                 "draw_pile", "discard", "hands", "color", "top_value", "direction",
                 "max_decisions")

    def __init__(self, player_count: int, rng, max_decisions: int = 2000):
        if player_count not in (2, 3, 4):
            raise UnsupportedPlayerCount(f"uno supports 2-4 players, got {player_count}")
        self.player_count = player_count
        self.current_player = 0
        self.turn_index = 0
        self.terminal = False
        self.telemetry = None
        self.max_decisions = max_decisions
        self.direction = 1
        deck = list(range(N_CARDS))
        rng.shuffle(deck)
        self.hands = [[deck.pop() for _ in range(HAND_SIZE)] for _ in range(player_count)]
        # a wild cannot start the discard pile: tuck it under the pile and flip again
        while CARD_COLOR[deck[-1]] < 0:
            deck.insert(0, deck.pop())
        first = deck.pop()
        self.discard = [first]
        self.draw_pile = deck
        self.color = CARD_COLOR[first]
        self.top_value = CARD_VALUE[first]

    def _copy(self):
        new = UnoState.__new__(UnoState)
        new.player_count = self.player_count
        new.current_player = self.current_player
        new.turn_index = self.turn_index
        new.terminal = self.terminal
        new.telemetry = self.telemetry
        new.draw_pile = self.draw_pile[:]
        new.discard = self.discard[:]
        new.hands = [h[:] for h in self.hands]
        new.color = self.color
        new.top_value = self.top_value
        new.direction = self.direction
        new.max_decisions = self.max_decisions
        return new

    def legal_actions(self):
        color, top = self.color, self.top_value
        keys = set()
        for c in self.hands[self.current_player]:
            cc = CARD_COLOR[c]
            v = CARD_VALUE[c]
            if cc < 0:
                keys.update((v, k) for k in range(4))
            elif cc == color or v == top:
                keys.add((v, cc))
        if not keys:
            return [DRAW_ACTION]
        return sorted(keys)

    def _next(self, p, steps=1):
        return (p + steps * self.direction) % self.player_count

    def _draw_cards(self, p, k, rng):
        pile = self.draw_pile
        hand = self.hands[p]
        for _ in range(k):
            if not pile:
                if len(self.discard) <= 1:
                    return
                pile.extend(self.discard[:-1])
                del self.discard[:-1]
                rng.shuffle(pile)
            hand.append(pile.pop())

    def _apply(self, action, rng):
        p = self.current_player
        self.turn_index += 1
        v, col = action
        if v < 0:
            self._draw_cards(p, 1, rng)
            self.current_player = self._next(p)
        else:
            hand = self.hands[p]
            for i, c in enumerate(hand):
                if CARD_VALUE[c] == v and (v >= WILD or CARD_COLOR[c] == col):
                    break
            card = hand.pop(i)
            self.discard.append(card)
            self.color = col
            self.top_value = v
            if not hand:
                self.terminal = True
                self.current_player = p
                return
            if v == SKIP:
                self.current_player = self._next(p, 2)
            elif v == REVERSE:
                self.direction = -self.direction
                self.current_player = self._next(p, 2 if self.player_count == 2 else 1)
            elif v == DRAW_TWO:
                self._draw_cards(self._next(p), 2, rng)
                self.current_player = self._next(p, 2)
            elif v == WILD_DRAW_FOUR:
                self._draw_cards(self._next(p), 4, rng)
                self.current_player = self._next(p, 2)
            else:
                self.current_player = self._next(p)
        if self.turn_index >= self.max_decisions:
            self.terminal = True

    def hand_value(self, player):
        return sum(card_points(c) for c in self.hands[player])

    def heuristic(self, player):
        h = 1.0 - self.hand_value(player) / MAX_INITIAL_HAND_VALUE
        return 0.0 if h < 0.0 else h

    def winners(self):
        empty = {p for p, h in enumerate(self.hands) if not h}
        if empty:
            return empty
        # decision cap reached: the best heuristic wins
        scores = [self.heuristic(p) for p in range(self.player_count)]
        best = max(scores)
        return {p for p, s in enumerate(scores) if s == best}

    # ---- information --------------------------------------------------------------
    def components(self):
        n = self.player_count
        everyone = frozenset(range(n))
        comps = [Component(c, "draw", everyone, None) for c in self.draw_pile]
        comps.extend(Component(c, "discard", frozenset(), None) for c in self.discard)
        for p, hand in enumerate(self.hands):
            hidden = everyone - {p}
            comps.extend(Component(c, f"hand{p}", hidden, None) for c in hand)
        return sorted(comps, key=lambda c: c.id)

    def component_count(self):
        return N_CARDS

    def hidden_fraction(self, player):
        hidden = len(self.draw_pile) + sum(len(h) for q, h in enumerate(self.hands) if q != player)
        return hidden / N_CARDS

    def redeterminize(self, observer, rng):
        pool = list(self.draw_pile)
        for q, h in enumerate(self.hands):
            if q != observer:
                pool.extend(h)
        rng.shuffle(pool)
        k = len(self.draw_pile)
        self.draw_pile = pool[:k]
        for q, h in enumerate(self.hands):
            if q != observer:
                m = len(h)
                self.hands[q] = pool[k:k + m]
                k += m

    def observation(self, player):
        return {
            "hand": sorted(self.hands[player]),
            "hand_sizes": [len(h) for h in self.hands],
            "draw_size": len(self.draw_pile),
            "discard": list(self.discard),
            "color": self.color,
            "top": self.top_value,
            "direction": self.direction,
            "current": self.current_player,
            "turn": self.turn_index,
            "terminal": self.terminal,
        }

    def serialize(self):
        return {
            "draw": list(self.draw_pile),
            "discard": list(self.discard),
            "hands": [list(h) for h in self.hands],
            "color": self.color,
            "top": self.top_value,
            "direction": self.direction,
            "current": self.current_player,
            "turn": self.turn_index,
            "terminal": self.terminal,
        }

    def action_key(self, action):
        v, col = action
        if v < 0:
            return "draw"
        name = VALUE_NAMES.get(v, str(v))
        if v >= WILD:
            return f"{name}:{COLORS[col]}"
        return f"{COLORS[col]}{name}"


def new_game(player_count: int, rng, max_decisions: int = 2000) -> UnoState:
    return UnoState(player_count, rng, max_decisions=max_decisions)
