"""Particle swarm optimization over a box-bounded continuous space."""

from __future__ import annotations

import numpy as np


class PsoSwarm:
    """Maximizing particle swarm with persistent personal and global bests.

    Velocities mix inertia with attraction toward the personal and
    global best positions; the attraction strengths are modulated by
    fresh uniform draws per vector element every iteration.  Positions
    are clamped to the box after each move.  Fitness callbacks are
    batched: ``evaluate`` receives the full (P, L) position matrix and
    returns one value per particle.
    """

    def __init__(
        self,
        n_particles: int,
        lower: np.ndarray,
        upper: np.ndarray,
        rng: np.random.Generator,
        *,
        inertia: float = 0.9,
        c_personal: float = 0.1,
        c_global: float = 0.1,
    ) -> None:
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or np.any(self.lower > self.upper):
            raise ValueError("invalid bounds")
        self.inertia = inertia
        self.c_personal = c_personal
        self.c_global = c_global
        dim = self.lower.shape[0]
        self.positions = rng.uniform(self.lower, self.upper, size=(n_particles, dim))
        self.velocities = np.zeros((n_particles, dim))
        self.best_positions = self.positions.copy()
        self.best_values = np.full(n_particles, -np.inf)
        self.global_best_position = self.positions[0].copy()
        self.global_best_value = -np.inf

    def iterate(self, evaluate, rng: np.random.Generator) -> None:
        """One round: score positions, refresh bests, move the swarm."""
        values = np.asarray(evaluate(self.positions), dtype=float)
        improved = values > self.best_values
        if improved.any():
            self.best_values = np.where(improved, values, self.best_values)
            self.best_positions[improved] = self.positions[improved]
        top = int(np.argmax(self.best_values))
        if self.best_values[top] > self.global_best_value:
            self.global_best_value = float(self.best_values[top])
            self.global_best_position = self.best_positions[top].copy()

        shape = self.positions.shape
        pull_personal = rng.random(shape)
        pull_global = rng.random(shape)
        self.velocities = (
            self.inertia * self.velocities
            + self.c_personal * pull_personal * (self.best_positions - self.positions)
            + self.c_global * pull_global * (self.global_best_position - self.positions)
        )
        self.positions = np.clip(self.positions + self.velocities, self.lower, self.upper)

    def run(self, evaluate, n_iters: int, rng: np.random.Generator) -> tuple[np.ndarray, float]:
        """Run ``n_iters`` rounds and return the global best (position, value)."""
        for _ in range(n_iters):
            self.iterate(evaluate, rng)
        return self.global_best_position.copy(), self.global_best_value
