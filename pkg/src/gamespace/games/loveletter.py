"""Love Letter, 16-card edition.

Cards are physical ids 0..15 with a value each; knowledge is tracked per
card id as a bitmask of players who can currently see that card.
Redeterminisation permutes values among the ids hidden from the observer,
so every id keeps its own knowledge mask.
"""

from __future__ import annotations

from ..core import Component, GameState, UnsupportedPlayerCount

GUARD, PRIEST, BARON, HANDMAID, PRINCE, KING, COUNTESS, PRINCESS = range(1, 9)
CARD_NAMES = {1: "Guard", 2: "Priest", 3: "Baron", 4: "Handmaid",
              5: "Prince", 6: "King", 7: "Countess", 8: "Princess"}
DECK_VALUES = (1, 1, 1, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 7, 8)
N_CARDS = len(DECK_VALUES)

# Action = (card value, target player or -1, guessed value or 0).


class LoveLetterState(GameState):
    game_id = "loveletter"

    __slots__ = ("player_count", "current_player", "turn_index", "terminal", "telemetry",
                 "value", "seen", "deck", "burn", "hands", "discards", "alive",
                 "protected", "tokens", "tokens_needed", "round_index", "last_winners")

    def __init__(self, player_count: int, rng):
        if player_count not in (2, 3, 4):
            raise UnsupportedPlayerCount(f"loveletter supports 2-4 players, got {player_count}")
        self.player_count = player_count
        self.current_player = 0
        self.turn_index = 0
        self.terminal = False
        self.telemetry = None
        self.value = list(DECK_VALUES)
        self.tokens = [0] * player_count
        self.tokens_needed = 7 - player_count
        self.round_index = -1
        self.last_winners = [0]
        self._start_round(rng, first=0)

    # ---- round management ----------------------------------------------------
    def _start_round(self, rng, first):
        n = self.player_count
        self.round_index += 1
        self.value = list(DECK_VALUES)
        ids = list(range(N_CARDS))
        rng.shuffle(ids)
        self.seen = [0] * N_CARDS
        self.burn = ids.pop()
        self.hands = [[] for _ in range(n)]
        self.discards = [[] for _ in range(n)]
        for i in range(n):
            p = (first + i) % n
            c = ids.pop()
            self.hands[p].append(c)
            self.seen[c] = 1 << p
        self.deck = ids
        self.alive = [True] * n
        self.protected = [False] * n
        self.current_player = first
        self._draw(first)

    def _draw(self, p):
        if self.deck:
            c = self.deck.pop()
        elif self.burn >= 0:
            c, self.burn = self.burn, -1
        else:
            return
        self.hands[p].append(c)
        self.seen[c] = 1 << p

    def _discard(self, p, c):
        self.hands[p].remove(c)
        self.discards[p].append(c)
        self.seen[c] = (1 << self.player_count) - 1

    def _eliminate(self, p):
        self.alive[p] = False
        for c in list(self.hands[p]):
            self._discard(p, c)

    def _end_round(self, rng):
        alive = [p for p in range(self.player_count) if self.alive[p]]
        if len(alive) > 1:
            best = max(self.value[self.hands[p][0]] for p in alive)
            alive = [p for p in alive if self.value[self.hands[p][0]] == best]
            if len(alive) > 1:
                sums = {p: sum(self.value[c] for c in self.discards[p]) for p in alive}
                top = max(sums.values())
                alive = [p for p in alive if sums[p] == top]
        for p in alive:
            self.tokens[p] += 1
        self.last_winners = alive
        if max(self.tokens) >= self.tokens_needed:
            self.terminal = True
            return
        self._start_round(rng, first=alive[0])

    # ---- GameState hooks ---------------------------------------------------------
    def _copy(self):
        new = LoveLetterState.__new__(LoveLetterState)
        new.player_count = self.player_count
        new.current_player = self.current_player
        new.turn_index = self.turn_index
        new.terminal = self.terminal
        new.telemetry = self.telemetry
        new.value = self.value[:]
        new.seen = self.seen[:]
        new.deck = self.deck[:]
        new.burn = self.burn
        new.hands = [h[:] for h in self.hands]
        new.discards = [d[:] for d in self.discards]
        new.alive = self.alive[:]
        new.protected = self.protected[:]
        new.tokens = self.tokens[:]
        new.tokens_needed = self.tokens_needed
        new.round_index = self.round_index
        new.last_winners = self.last_winners
        return new

    def legal_actions(self):
        p = self.current_player
        vals = sorted({self.value[c] for c in self.hands[p]})
        if COUNTESS in vals and (KING in vals or PRINCE in vals):
            return [(COUNTESS, -1, 0)]
        n = self.player_count
        others = [q for q in range(n) if q != p and self.alive[q] and not self.protected[q]]
        out = []
        for v in vals:
            if v == GUARD:
                if others:
                    out.extend((GUARD, q, g) for q in others for g in range(2, 9))
                else:
                    out.append((GUARD, -1, 0))
            elif v in (PRIEST, BARON, KING):
                if others:
                    out.extend((v, q, 0) for q in others)
                else:
                    out.append((v, -1, 0))
            elif v == PRINCE:
                targets = sorted(others + [p])
                out.extend((PRINCE, q, 0) for q in targets)
            else:
                out.append((v, -1, 0))
        return out

    def _apply(self, action, rng):
        v, target, guess = action
        p = self.current_player
        self.turn_index += 1
        hand = self.hands[p]
        card = hand[0] if self.value[hand[0]] == v else hand[1]
        self._discard(p, card)
        self.protected[p] = False
        if v == GUARD:
            if target >= 0 and self.value[self.hands[target][0]] == guess:
                self._eliminate(target)
        elif v == PRIEST:
            if target >= 0:
                self.seen[self.hands[target][0]] |= 1 << p
        elif v == BARON:
            if target >= 0:
                mine, theirs = self.hands[p][0], self.hands[target][0]
                self.seen[mine] |= 1 << target
                self.seen[theirs] |= 1 << p
                a, b = self.value[mine], self.value[theirs]
                if a > b:
                    self._eliminate(target)
                elif b > a:
                    self._eliminate(p)
        elif v == HANDMAID:
            self.protected[p] = True
        elif v == PRINCE:
            old = self.hands[target][0]
            self._discard(target, old)
            if self.value[old] == PRINCESS:
                self._eliminate(target)
            else:
                self._draw(target)
        elif v == KING:
            if target >= 0:
                mine, theirs = self.hands[p][0], self.hands[target][0]
                self.hands[p][0], self.hands[target][0] = theirs, mine
                self.seen[mine] |= 1 << target
                self.seen[theirs] |= 1 << p
        elif v == PRINCESS:
            self._eliminate(p)
        # advance
        alive = self.alive
        n = self.player_count
        if sum(alive) <= 1 or not self.deck:
            self._end_round(rng)
            return
        q = (p + 1) % n
        while not alive[q]:
            q = (q + 1) % n
        self.current_player = q
        self.protected[q] = False
        self._draw(q)

    def heuristic(self, player):
        return min(1.0, self.tokens[player] / self.tokens_needed)

    def winners(self):
        return {p for p, t in enumerate(self.tokens) if t >= self.tokens_needed}

    # ---- information --------------------------------------------------------------
    def _zone_of(self):
        zones = {}
        for c in self.deck:
            zones[c] = "deck"
        if self.burn >= 0:
            zones[self.burn] = "burn"
        for p, h in enumerate(self.hands):
            for c in h:
                zones[c] = f"hand{p}"
        for p, d in enumerate(self.discards):
            for c in d:
                zones[c] = f"discard{p}"
        return zones

    def _hidden_ids(self, observer):
        bit = 1 << observer
        return [c for c in range(N_CARDS) if not self.seen[c] & bit]

    def components(self):
        zones = self._zone_of()
        n = self.player_count
        comps = []
        for c in range(N_CARDS):
            hidden = frozenset(p for p in range(n) if not self.seen[c] >> p & 1)
            comps.append(Component(c, zones[c], hidden, self.value[c]))
        for p in range(n):
            for t in range(self.tokens[p]):
                comps.append(Component(N_CARDS + p * 8 + t, f"tokens{p}", frozenset(), 1))
        return comps

    def component_count(self):
        return N_CARDS + sum(self.tokens)

    def hidden_fraction(self, player):
        bit = 1 << player
        hidden = sum(1 for s in self.seen if not s & bit)
        return hidden / (N_CARDS + sum(self.tokens))

    def redeterminize(self, observer, rng):
        ids = self._hidden_ids(observer)
        vals = [self.value[c] for c in ids]
        rng.shuffle(vals)
        for c, v in zip(ids, vals):
            self.value[c] = v

    def observation(self, player):
        bit = 1 << player
        zones = self._zone_of()
        cards = sorted((zones[c], c, self.value[c] if self.seen[c] & bit else None) for c in range(N_CARDS))
        return {
            "cards": cards,
            "deck_order": list(self.deck),
            "current": self.current_player,
            "turn": self.turn_index,
            "alive": list(self.alive),
            "protected": list(self.protected),
            "tokens": list(self.tokens),
            "round": self.round_index,
            "terminal": self.terminal,
        }

    def serialize(self):
        return {
            "value": list(self.value),
            "seen": list(self.seen),
            "deck": list(self.deck),
            "burn": self.burn,
            "hands": [list(h) for h in self.hands],
            "discards": [list(d) for d in self.discards],
            "alive": list(self.alive),
            "protected": list(self.protected),
            "tokens": list(self.tokens),
            "round": self.round_index,
            "current": self.current_player,
            "turn": self.turn_index,
            "terminal": self.terminal,
        }

    def action_key(self, action):
        v, target, guess = action
        key = CARD_NAMES[v]
        if target >= 0:
            key += f">{target}"
        if guess:
            key += f":{CARD_NAMES[guess]}"
        return key


def new_game(player_count: int, rng) -> LoveLetterState:
    return LoveLetterState(player_count, rng)
