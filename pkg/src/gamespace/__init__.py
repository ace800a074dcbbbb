"""Characterise multiplayer tabletop games through agent behaviour.

Four small games, a configurable MCTS family with baseline agents, an
N-tuple bandit parameter optimiser, four 16-feature game embeddings and
the statistics used to compare them.
"""

__version__ = "0.1.0"
