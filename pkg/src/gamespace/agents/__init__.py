"""Agents behind one ``decide(state, player, rng)`` interface."""

from __future__ import annotations

from dataclasses import dataclass, field

from .baselines import RMHCPlanner, osla_decide, random_decide, rmhc_decide
from .mcts import MCTSSearch, TreeNode, alpha_value, mcts_search, select_child, uct_value
from .params import DIMENSIONS, FINGERPRINT_DIMENSIONS, MctsParams, ParamError, space_size

AGENT_KINDS = ("RND", "OSLA", "RMHC", "MCTS")
FIXED_OPPONENTS = ("RND", "OSLA", "SimpleMCTS")
DEFAULT_BUDGET = 128
DEFAULT_OPPONENT_BUDGET = 64

SIMPLE_MCTS_PARAMS = MctsParams(
    tree_policy="UCB", opponent_tree="Paranoid", final_policy="Robust",
    tree_depth=10, rollout_length=10, redeterminise=False, open_loop=True,
    K=1.0, epsilon=0.1,
)


@dataclass(frozen=True)
class AgentSpec:
    kind: str
    name: str = ""
    params: MctsParams | None = None
    horizon: int = 0
    budget: int = DEFAULT_BUDGET
    budget_ms: float | None = None

    def __post_init__(self):
        if self.kind not in AGENT_KINDS:
            raise ValueError(f"unknown agent kind {self.kind!r}")
        if self.kind == "RMHC" and self.horizon < 1:
            raise ValueError("RMHC horizon must be >= 1")
        if self.kind == "MCTS" and self.params is None:
            raise ValueError("MCTS agent needs params")
        if not self.name:
            object.__setattr__(self, "name", self.kind if self.kind != "RMHC" else f"RMHC-{self.horizon}")

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "name": self.name, "budget": self.budget}
        if self.params is not None:
            d["params"] = self.params.to_text()
        if self.kind == "RMHC":
            d["horizon"] = self.horizon
        if self.budget_ms is not None:
            d["budget_ms"] = self.budget_ms
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "AgentSpec":
        d = dict(d)
        if "params" in d and isinstance(d["params"], str):
            d["params"] = MctsParams.from_text(d["params"])
        elif "params" in d and isinstance(d["params"], dict):
            d["params"] = MctsParams.from_dict(d["params"])
        return cls(**d)


class Agent:
    def __init__(self, spec: AgentSpec):
        self.spec = spec

    @property
    def name(self):
        return self.spec.name

    def decide(self, state, player, rng):
        raise NotImplementedError


class RandomAgent(Agent):
    def decide(self, state, player, rng):
        return random_decide(state, player, rng)


class OSLAAgent(Agent):
    def decide(self, state, player, rng):
        return osla_decide(state, player, rng)


class RMHCAgent(Agent):
    def __init__(self, spec):
        super().__init__(spec)
        self.planner = RMHCPlanner(spec.horizon, spec.budget)

    def decide(self, state, player, rng):
        return self.planner.decide(state, player, rng)


class MCTSAgent(Agent):
    def decide(self, state, player, rng):
        return mcts_search(state, player, self.spec.params, self.spec.budget, rng,
                           time_ms=self.spec.budget_ms)


def make_agent(spec: AgentSpec) -> Agent:
    """Fresh agent instance (RMHC keeps a plan, so one per game seat)."""
    return {"RND": RandomAgent, "OSLA": OSLAAgent, "RMHC": RMHCAgent, "MCTS": MCTSAgent}[spec.kind](spec)


def fixed_opponent(kind: str, budget: int = DEFAULT_OPPONENT_BUDGET, budget_ms: float | None = None) -> AgentSpec:
    if kind == "RND":
        return AgentSpec("RND")
    if kind == "OSLA":
        return AgentSpec("OSLA")
    if kind == "SimpleMCTS":
        return AgentSpec("MCTS", name="SimpleMCTS", params=SIMPLE_MCTS_PARAMS, budget=budget, budget_ms=budget_ms)
    raise ValueError(f"unknown fixed opponent {kind!r}; choose from {FIXED_OPPONENTS}")


# The twelve MCTS agents A-L.  Blank cells in the source table are filled
# with False (OL/IS), K=1.0 or epsilon=0.1 where the policy ignores them,
# and the Robust final policy throughout.
_ROSTER_ROWS = {
    #    roll  OL     opp         tree     K      eps   depth IS
    "A": (3, True, "MaxN", "Alpha", 0.1, 0.1, 1, False),
    "B": (10, True, "Paranoid", "Alpha", 0.01, 0.1, 100, True),
    "C": (0, False, "MaxN", "EXP3", 1.0, 0.01, 1, False),
    "D": (100, True, "Paranoid", "EXP3", 1.0, 0.1, 3, True),
    "E": (30, False, "MaxN", "RM", 1.0, 0.3, 30, False),
    "F": (0, True, "Paranoid", "RM", 1.0, 0.3, 10, False),
    "G": (0, False, "MaxN", "UCB", 0.01, 0.1, 100, False),
    "H": (10, False, "SelfOnly", "UCB", 0.1, 0.1, 30, False),
    "I": (3, True, "SelfOnly", "UCB", 10.0, 0.1, 1, True),
    "J": (10, True, "Paranoid", "UCB", 1.0, 0.1, 3, True),
    "K": (30, True, "SelfOnly", "EXP3", 1.0, 0.03, 10, False),
    "L": (10, True, "SelfOnly", "RM", 1.0, 0.03, 3, True),
}


def roster_params() -> dict:
    out = {}
    for ref, (roll, ol, opp, tree, k, eps, depth, is_) in _ROSTER_ROWS.items():
        out[ref] = MctsParams(tree_policy=tree, opponent_tree=opp, final_policy="Robust",
                              tree_depth=depth, rollout_length=roll, redeterminise=is_,
                              open_loop=ol, K=k, epsilon=eps)
    return out


def default_roster(budget: int = DEFAULT_BUDGET, budget_ms: float | None = None) -> list:
    """The 16 agents: MCTS A-L, then RND, OSLA, RMHC-3 and RMHC-20."""
    roster = [AgentSpec("MCTS", name=ref, params=p, budget=budget, budget_ms=budget_ms)
              for ref, p in roster_params().items()]
    roster += [
        AgentSpec("RND"),
        AgentSpec("OSLA"),
        AgentSpec("RMHC", horizon=3, budget=budget),
        AgentSpec("RMHC", horizon=20, budget=budget),
    ]
    return roster


__all__ = [
    "AGENT_KINDS", "FIXED_OPPONENTS", "DEFAULT_BUDGET", "DEFAULT_OPPONENT_BUDGET",
    "SIMPLE_MCTS_PARAMS", "AgentSpec", "Agent", "RandomAgent", "OSLAAgent", "RMHCAgent",
    "MCTSAgent", "make_agent", "fixed_opponent", "roster_params", "default_roster",
    "DIMENSIONS", "FINGERPRINT_DIMENSIONS", "MctsParams", "ParamError", "space_size",
    "MCTSSearch", "TreeNode", "alpha_value", "uct_value", "mcts_search", "select_child",
    "RMHCPlanner", "osla_decide", "random_decide", "rmhc_decide",
]
