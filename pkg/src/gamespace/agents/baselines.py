"""Non-tree agents: uniform random, one-step lookahead, and RMHC."""

from __future__ import annotations

from ..core import TerminalState


def _check_live(state):
    if state.terminal:
        raise TerminalState("no decision to make in a terminal state")


def random_decide(state, player, rng):
    _check_live(state)
    acts = state.legal_actions()
    return acts[rng.randrange(len(acts))]


def osla_decide(state, player, rng):
    """Apply every legal action once and keep the best-scoring successor."""
    _check_live(state)
    acts = state.legal_actions()
    if len(acts) == 1:
        return acts[0]
    best, best_val = [], None
    for a in acts:
        nxt = state.copy()
        nxt.apply(a, rng, False)
        v = nxt.score(player)
        if best_val is None or v > best_val + 1e-12:
            best, best_val = [a], v
        elif v >= best_val - 1e-12:
            best.append(a)
    return best[rng.randrange(len(best))]


class RMHCPlanner:
    """Random mutation hill climber over a plan of own-action indices.

    A plan entry ``i`` means "take legal action ``i mod |legal|``" at that
    of our decisions; opponents move uniformly at random during
    evaluation.  The plan is kept between decisions and shifted by one.
    """

    INDEX_RANGE = 1 << 16

    def __init__(self, horizon: int, budget: int):
        if horizon < 1:
            raise ValueError("RMHC horizon must be >= 1")
        self.horizon = horizon
        self.budget = budget
        self.plan = None

    def _random_index(self, rng):
        return rng.randrange(self.INDEX_RANGE)

    def evaluate(self, state, player, plan, rng) -> float:
        s = state.copy()
        step = 0
        while not s.terminal and step < len(plan):
            acts = s.legal_actions()
            if s.current_player == player:
                a = acts[plan[step] % len(acts)]
                step += 1
            else:
                a = acts[rng.randrange(len(acts))]
            s.apply(a, rng, False)
        return s.score(player)

    def decide(self, state, player, rng):
        _check_live(state)
        acts = state.legal_actions()
        if self.plan is None or len(self.plan) != self.horizon:
            self.plan = [self._random_index(rng) for _ in range(self.horizon)]
        plan = self.plan
        if self.budget > 0:
            value = self.evaluate(state, player, plan, rng)
            for _ in range(self.budget):
                mutant = plan[:]
                mutant[rng.randrange(self.horizon)] = self._random_index(rng)
                v = self.evaluate(state, player, mutant, rng)
                if v >= value:
                    plan, value = mutant, v
        action = acts[plan[0] % len(acts)]
        self.plan = plan[1:] + [self._random_index(rng)]
        return action


def rmhc_decide(state, player, horizon, budget, rng):
    """Stateless convenience wrapper: a fresh random plan each call."""
    return RMHCPlanner(horizon, budget).decide(state, player, rng)
