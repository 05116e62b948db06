"""Upper-confidence-bound bandit for stateless action selection."""

from __future__ import annotations

import numpy as np


class UcbBandit:
    """UCB1-style bandit: play every arm once, then maximize the index.

    The exploration bonus is sqrt(2 ln t / n) with ``t`` the agent's own
    play counter.  Unplayed arms are taken in index order before any
    index comparison happens, and ties in the index favour the lowest
    arm, so selection consumes no randomness.
    """

    def __init__(self, n_arms: int) -> None:
        if n_arms < 1:
            raise ValueError("n_arms must be >= 1")
        self.n_arms = n_arms
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.means = np.zeros(n_arms)
        self.t = 0

    def select(self) -> int:
        """Choose an arm and advance the play counter."""
        self.t += 1
        unplayed = np.flatnonzero(self.counts == 0)
        if unplayed.size:
            return int(unplayed[0])
        bonus = np.sqrt(2.0 * np.log(self.t) / self.counts)
        return int(np.argmax(self.means + bonus))

    def update(self, arm: int, reward: float) -> None:
        """Incremental running mean of the chosen arm's rewards."""
        self.counts[arm] += 1
        self.means[arm] += (reward - self.means[arm]) / self.counts[arm]
