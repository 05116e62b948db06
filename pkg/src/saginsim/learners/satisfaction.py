"""Satisfaction-based learning over a mixed strategy.

The agent keeps a probability distribution over its actions.  While the
observed reward clears an aspiration threshold it freezes and replays
the same action; otherwise it nudges the distribution toward the action
just played, with a step that shrinks over time and grows with how
close the reward came to the threshold.  The threshold itself relaxes
geometrically every ``decay_period`` steps of sustained dissatisfaction.
"""

from __future__ import annotations

import numpy as np


class DistributionError(RuntimeError):
    """The action distribution left the probability simplex."""

_SIMPLEX_TOL = 1e-9


class SatisfactionAgent:
    """One satisfaction-learning agent.

    Call :meth:`select` to obtain the action for the current step and
    :meth:`observe` with the reward it produced.  ``reward_max`` is the
    largest attainable reward and scales the proximity factor.
    """

    def __init__(
        self,
        n_actions: int,
        *,
        threshold: float,
        decay: float = 0.2,
        decay_period: int = 200,
        reward_max: float = 1.0,
    ) -> None:
        if n_actions < 1:
            raise ValueError("n_actions must be >= 1")
        if reward_max <= 0.0:
            raise ValueError("reward_max must be positive")
        self.n_actions = n_actions
        self.probs = np.full(n_actions, 1.0 / n_actions)
        self.threshold = float(threshold)
        self.decay = float(decay)
        self.decay_period = int(decay_period)
        self.reward_max = float(reward_max)
        self.satisfied = False
        self.last_action: int | None = None
        self._unsatisfied_streak = 0

    def _check_simplex(self) -> None:
        total = float(self.probs.sum())
        if abs(total - 1.0) > _SIMPLEX_TOL or np.any(self.probs < -_SIMPLEX_TOL):
            raise DistributionError(
                f"action distribution left the simplex (sum={total!r})"
            )

    def select(self, t: int, rng: np.random.Generator) -> int:
        """Pick the step-``t`` action: replay while satisfied, else sample.

        After ``decay_period`` consecutive dissatisfied steps the
        aspiration threshold relaxes by the decay factor and the streak
        restarts.
        """
        if self.satisfied and self.last_action is not None:
            return self.last_action
        if self._unsatisfied_streak >= self.decay_period:
            self.threshold *= 1.0 - self.decay
            self._unsatisfied_streak = 0
        self._check_simplex()
        u = rng.random()
        action = int(np.searchsorted(np.cumsum(self.probs), u, side="right"))
        action = min(action, self.n_actions - 1)
        self.last_action = action
        return action

    def observe(self, reward: float, t: int) -> None:
        """Digest the reward of the action returned by the last select.

        A satisfied agent leaves its distribution untouched; otherwise
        probability mass moves toward the played action with step size
        mu(t) * lambda, mu(t) = 1 / (1000 t + 1) and lambda the clamped
        proximity (reward_max + reward - threshold) / (2 reward_max).
        """
        if self.last_action is None:
            raise RuntimeError("observe called before select")
        self.satisfied = reward >= self.threshold
        if self.satisfied:
            self._unsatisfied_streak = 0
            return
        self._unsatisfied_streak += 1
        mu = 1.0 / (1000.0 * t + 1.0)
        lam = (self.reward_max + reward - self.threshold) / (2.0 * self.reward_max)
        lam = min(max(lam, 0.0), 1.0)
        step = mu * lam
        self.probs *= 1.0 - step
        self.probs[self.last_action] += step
        self._check_simplex()
