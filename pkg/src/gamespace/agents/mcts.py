"""Configurable multiplayer MCTS.

One search routine covers the whole parameter space: four selection
rules (UCB, AlphaZero-style, EXP3, regret matching), three opponent
models (MaxN, Paranoid, SelfOnly), open- or closed-loop trees and
per-iteration redeterminisation.
"""

from __future__ import annotations

import math
import time

from .params import MctsParams

_TIE_EPS = 1e-12


def uct_value(q: float, n: int, total: int, k: float) -> float:
    """``q + k * sqrt(ln(total) / n)``; requires ``n >= 1``."""
    return q + k * math.sqrt(math.log(total) / n)


def alpha_value(q: float, n: int, total: int, k: float) -> float:
    """``q + k * sqrt(total) / (1 + n)``."""
    return q + k * math.sqrt(total) / (1 + n)


def _argmax_random(keys, values, rng):
    best = max(values)
    ties = [k for k, v in zip(keys, values) if v >= best - _TIE_EPS]
    if len(ties) == 1:
        return ties[0]
    return ties[rng.randrange(len(ties))]


def _sample(keys, probs, rng):
    r = rng.random()
    acc = 0.0
    for k, p in zip(keys, probs):
        acc += p
        if r < acc:
            return k
    return keys[-1]


class TreeNode:
    """Statistics for one decision point.

    ``n[a]`` visits through action ``a``; ``w[a]`` summed backed-up value
    (a per-player list for MaxN, a scalar from the searching player's
    point of view otherwise); ``g[a]`` EXP3 cumulative weighted payoff.
    ``visits`` counts every iteration that reached this node, including
    iterations that ended here.
    """

    __slots__ = ("n", "w", "g", "visits", "children", "state", "actions", "depth")

    def __init__(self, depth: int, state=None):
        self.n = {}
        self.w = {}
        self.g = {}
        self.visits = 0
        self.children = {}
        self.state = state
        self.actions = None
        self.depth = depth

    @property
    def N(self) -> int:
        return sum(self.n.values())

    def mean(self, action, actor, me, maxn: bool) -> float:
        """Mean value of ``action`` as seen by ``actor``."""
        n = self.n[action]
        if maxn:
            return self.w[action][actor] / n
        q = self.w[action] / n
        return q if actor == me else -q


def select_child(node: TreeNode, actions, actor: int, me: int, params: MctsParams, rng):
    """Pick one of ``actions`` (all tried at least once) by the tree policy.

    Returns ``(action, probability)``; the probability is 1.0 for the
    deterministic argmax rules.
    """
    maxn = params.opponent_tree == "MaxN"
    policy = params.tree_policy
    if policy == "UCB" or policy == "Alpha":
        total = node.visits
        k = params.K
        fn = uct_value if policy == "UCB" else alpha_value
        vals = [fn(node.mean(a, actor, me, maxn), node.n[a], total, k) for a in actions]
        return _argmax_random(actions, vals, rng), 1.0
    eps = params.epsilon
    m = len(actions)
    if policy == "EXP3":
        g = [node.g.get(a, 0.0) for a in actions]
        top = max(g)
        ex = [math.exp(x - top) for x in g]
        z = sum(ex)
        probs = [(1.0 - eps) * e / z + eps / m for e in ex]
    elif policy == "RM":
        qs = [node.mean(a, actor, me, maxn) for a in actions]
        ns = [node.n[a] for a in actions]
        mean = sum(q * n for q, n in zip(qs, ns)) / sum(ns)
        pos = [max(q - mean, 0.0) for q in qs]
        z = sum(pos)
        if z <= 0.0:
            probs = [1.0 / m] * m
        else:
            probs = [(1.0 - eps) * r / z + eps / m for r in pos]
    else:
        raise ValueError(f"unknown tree policy {policy!r}")
    a = _sample(actions, probs, rng)
    return a, probs[actions.index(a)]


class MCTSSearch:
    """A single search from one root state; keeps the tree for inspection."""

    def __init__(self, params: MctsParams, player: int):
        self.params = params
        self.me = player
        self.maxn = params.opponent_tree == "MaxN"
        self.self_only = params.opponent_tree == "SelfOnly"
        self.root = TreeNode(0)
        self.iterations = 0

    # ------------------------------------------------------------------------------
    def run(self, state, rng, iterations: int | None = None, time_ms: float | None = None):
        params = self.params
        me = self.me
        fixed = None
        if not params.redeterminise:
            fixed = state.copy()
            fixed.redeterminize(me, rng)
        deadline = None if time_ms is None else time.perf_counter() + time_ms / 1000.0
        while True:
            if iterations is not None and self.iterations >= iterations:
                break
            if deadline is not None and time.perf_counter() >= deadline:
                break
            if params.redeterminise:
                base = state.copy()
                base.redeterminize(me, rng)
            else:
                base = fixed
            self._iterate(base, rng)
            self.iterations += 1
        return self

    @staticmethod
    def _random_step(state, rng):
        acts = state.legal_actions()
        state.apply(acts[rng.randrange(len(acts))] if len(acts) > 1 else acts[0], rng, False)

    def _iterate(self, base, rng):
        params = self.params
        me = self.me
        open_loop = params.open_loop
        self_only = self.self_only
        max_depth = params.tree_depth
        node = self.root
        path = []
        if open_loop:
            state = base.copy()
            owned = True
        else:
            state = base if node.state is None else node.state
            owned = False
        node.visits += 1
        while not state.terminal:
            actor = state.current_player
            if self_only and actor != me:
                if not owned:
                    state = state.copy()
                    owned = True
                self._random_step(state, rng)
                continue
            if open_loop or node.actions is None:
                acts = state.legal_actions()
                if not open_loop:
                    node.actions = acts
            else:
                acts = node.actions
            n = node.n
            untried = [a for a in acts if a not in n]
            if untried:
                if node.depth >= max_depth:
                    break
                a = untried[rng.randrange(len(untried))] if len(untried) > 1 else untried[0]
                if not owned:
                    state = state.copy()
                    owned = True
                state.apply(a, rng, False)
                child = TreeNode(node.depth + 1)
                if not open_loop:
                    if self_only:
                        while not state.terminal and state.current_player != me:
                            self._random_step(state, rng)
                    child.state = state.copy()
                node.children[a] = child
                n[a] = 0
                node.w[a] = [0.0] * state.player_count if self.maxn else 0.0
                path.append((node, a, actor, 1.0))
                node = child
                node.visits += 1
                break
            a, prob = select_child(node, acts, actor, me, params, rng)
            path.append((node, a, actor, prob))
            node = node.children[a]
            node.visits += 1
            if open_loop:
                state.apply(a, rng, False)
            else:
                state = node.state
                owned = False
        # rollout
        if params.rollout_length > 0 and not state.terminal:
            if not owned:
                state = state.copy()
            for _ in range(params.rollout_length):
                if state.terminal:
                    break
                self._random_step(state, rng)
        reward = state.scores()
        self._backup(path, reward)

    def _backup(self, path, reward):
        me = self.me
        maxn = self.maxn
        exp3 = self.params.tree_policy == "EXP3"
        r_me = reward[me]
        for node, a, actor, prob in path:
            node.n[a] += 1
            if maxn:
                w = node.w[a]
                for i, r in enumerate(reward):
                    w[i] += r
                x = reward[actor]
            else:
                node.w[a] += r_me
                x = r_me if actor == me else -r_me
            if exp3:
                node.g[a] = node.g.get(a, 0.0) + (x + 1.0) * 0.5 / prob

    # ------------------------------------------------------------------------------
    def best_action(self, legal, rng):
        root = self.root
        tried = [a for a in legal if root.n.get(a, 0) > 0]
        if not tried:
            return legal[rng.randrange(len(legal))]
        if self.params.final_policy == "Robust":
            vals = [root.n[a] for a in tried]
        else:
            vals = [root.mean(a, self.me, self.me, self.maxn) for a in tried]
        return _argmax_random(tried, vals, rng)


def mcts_search(state, player: int, params: MctsParams, budget: int, rng, time_ms: float | None = None):
    """Search from ``state`` for ``player`` and return the chosen action."""
    legal = state.legal_actions()
    if len(legal) == 1:
        return legal[0]
    search = MCTSSearch(params, player)
    if time_ms is not None:
        search.run(state, rng, time_ms=time_ms)
    else:
        search.run(state, rng, iterations=budget)
    return search.best_action(legal, rng)
