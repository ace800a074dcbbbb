"""Concrete games and the ``game_id`` registry."""

from __future__ import annotations

from ..core import UnsupportedPlayerCount
from . import diamant, dotsandboxes, loveletter, uno
from .diamant import DiamantState, simultaneous_resolve
from .dotsandboxes import DotsAndBoxesState
from .loveletter import LoveLetterState
from .uno import UnoState

GAMES = {
    "dotsandboxes": dotsandboxes.new_game,
    "loveletter": loveletter.new_game,
    "uno": uno.new_game,
    "diamant": diamant.new_game,
}
GAME_IDS = tuple(GAMES)
PLAYER_COUNTS = (2, 3, 4)


def new_game(game_id: str, player_count: int, rng, **rules):
    """Deal a fresh game.  ``rules`` are per-game options (e.g. ``dots=5``)."""
    try:
        factory = GAMES[game_id]
    except KeyError:
        raise ValueError(f"unknown game {game_id!r}; choose from {', '.join(GAME_IDS)}") from None
    if player_count not in PLAYER_COUNTS:
        raise UnsupportedPlayerCount(f"{game_id}: player count {player_count} not in {PLAYER_COUNTS}")
    return factory(player_count, rng, **rules)


__all__ = [
    "GAMES", "GAME_IDS", "PLAYER_COUNTS", "new_game", "simultaneous_resolve",
    "DiamantState", "DotsAndBoxesState", "LoveLetterState", "UnoState",
]
