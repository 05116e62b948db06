"""Tabular Q-learning with epsilon-greedy exploration."""

from __future__ import annotations

from typing import Callable

import numpy as np


class QLearner:
    """Q table over discrete states and actions.

    ``alpha`` may be a constant step size, a callable mapping the update
    count of the touched (state, action) entry to a step size, or None
    for the default decaying schedule 1 / (1 + 0.001 n).
    """

    def __init__(
        self,
        n_states: int,
        n_actions: int,
        *,
        alpha: float | Callable[[int], float] | None = None,
        gamma: float = 0.9,
        epsilon: float = 0.1,
    ) -> None:
        if n_states < 1 or n_actions < 1:
            raise ValueError("n_states and n_actions must be >= 1")
        self.n_states = n_states
        self.n_actions = n_actions
        if alpha is None:
            self.alpha: Callable[[int], float] = lambda n: 1.0 / (1.0 + 0.001 * n)
        elif callable(alpha):
            self.alpha = alpha
        else:
            a = float(alpha)
            self.alpha = lambda n: a
        self.gamma = gamma
        self.epsilon = epsilon
        self.q = np.zeros((n_states, n_actions))
        self.visits = np.zeros((n_states, n_actions), dtype=np.int64)

    def greedy(self, state: int, rng: np.random.Generator) -> int:
        """Highest-value action, ties broken uniformly at random."""
        row = self.q[state]
        best = np.flatnonzero(row == row.max())
        if best.size == 1:
            return int(best[0])
        return int(best[rng.integers(best.size)])

    def select(self, state: int, rng: np.random.Generator) -> int:
        """Epsilon-greedy action choice."""
        if rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        return self.greedy(state, rng)

    def update(self, state: int, action: int, reward: float, next_state: int) -> float:
        """One temporal-difference backup; returns the step size used."""
        self.visits[state, action] += 1
        a = self.alpha(int(self.visits[state, action]))
        target = reward + self.gamma * self.q[next_state].max()
        self.q[state, action] += a * (target - self.q[state, action])
        return a
