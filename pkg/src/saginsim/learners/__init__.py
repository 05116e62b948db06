"""Decision algorithms steering UAV motion and channel choice."""

from saginsim.learners.actions import ActionSpace
from saginsim.learners.bandit import UcbBandit
from saginsim.learners.dqn import DqnAgent, MlpNet, ReplayBuffer
from saginsim.learners.pso import PsoSwarm
from saginsim.learners.qlearning import QLearner
from saginsim.learners.satisfaction import DistributionError, SatisfactionAgent

__all__ = [
    "ActionSpace",
    "UcbBandit",
    "DqnAgent",
    "MlpNet",
    "ReplayBuffer",
    "PsoSwarm",
    "QLearner",
    "DistributionError",
    "SatisfactionAgent",
]
