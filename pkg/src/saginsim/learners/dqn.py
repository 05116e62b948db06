"""Small deep Q network trained by plain SGD on replayed transitions.

The network is a single-hidden-layer ReLU MLP implemented directly in
numpy so the backward pass is auditable against finite differences.
Two copies are kept: the online net picks actions and is updated every
step, the target net supplies bootstrap values and is refreshed every
``target_sync`` training steps.
"""

from __future__ import annotations

import numpy as np


class MlpNet:
    """Fully connected net: input -> ReLU hidden layer -> linear output."""

    def __init__(self, n_in: int, n_hidden: int, n_out: int, rng: np.random.Generator) -> None:
        self.n_in = n_in
        self.n_hidden = n_hidden
        self.n_out = n_out
        self.w1 = rng.standard_normal((n_in, n_hidden)) * np.sqrt(2.0 / n_in)
        self.b1 = np.zeros(n_hidden)
        self.w2 = rng.standard_normal((n_hidden, n_out)) * np.sqrt(2.0 / n_hidden)
        self.b2 = np.zeros(n_out)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Q values for a batch of states; ``x`` is (m, n_in)."""
        hidden = np.maximum(x @ self.w1 + self.b1, 0.0)
        return hidden @ self.w2 + self.b2

    def copy_from(self, other: "MlpNet") -> None:
        self.w1 = other.w1.copy()
        self.b1 = other.b1.copy()
        self.w2 = other.w2.copy()
        self.b2 = other.b2.copy()

    def parameters(self) -> dict[str, np.ndarray]:
        return {"w1": self.w1, "b1": self.b1, "w2": self.w2, "b2": self.b2}


def q_loss(net: MlpNet, states: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> float:
    """Mean squared error between chosen-action Q values and targets."""
    q = net.forward(states)[np.arange(states.shape[0]), actions]
    err = q - targets
    return float(np.mean(err * err))


def q_loss_grads(
    net: MlpNet, states: np.ndarray, actions: np.ndarray, targets: np.ndarray
) -> tuple[float, dict[str, np.ndarray]]:
    """Loss and its gradient with respect to every network parameter."""
    m = states.shape[0]
    z1 = states @ net.w1 + net.b1
    hidden = np.maximum(z1, 0.0)
    q_all = hidden @ net.w2 + net.b2
    idx = np.arange(m)
    err = q_all[idx, actions] - targets
    loss = float(np.mean(err * err))

    dq = np.zeros_like(q_all)
    dq[idx, actions] = 2.0 * err / m
    grads = {
        "w2": hidden.T @ dq,
        "b2": dq.sum(axis=0),
    }
    dh = dq @ net.w2.T
    dz1 = dh * (z1 > 0.0)
    grads["w1"] = states.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return loss, grads


class ReplayBuffer:
    """Fixed-capacity ring buffer of (state, action, reward, next state)."""

    def __init__(self, capacity: int, state_dim: int) -> None:
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.size = 0
        self._pos = 0

    def push(self, state: np.ndarray, action: int, reward: float, next_state: np.ndarray) -> None:
        i = self._pos
        self.states[i] = state
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_states[i] = next_state
        self._pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator) -> tuple[np.ndarray, ...]:
        idx = rng.choice(self.size, size=batch, replace=False)
        return (
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
        )


class DqnAgent:
    """Deep Q agent: epsilon-greedy acting, replayed one-step SGD training."""

    def __init__(
        self,
        state_dim: int,
        n_actions: int,
        rng: np.random.Generator,
        *,
        hidden: int = 200,
        replay: int = 600,
        batch: int = 64,
        lr: float = 1e-3,
        gamma: float = 0.9,
        epsilon: float = 0.1,
        target_sync: int = 100,
    ) -> None:
        if batch > replay:
            raise ValueError("batch size cannot exceed replay capacity")
        self.n_actions = n_actions
        self.online = MlpNet(state_dim, hidden, n_actions, rng)
        self.target = MlpNet(state_dim, hidden, n_actions, rng)
        self.target.copy_from(self.online)
        self.buffer = ReplayBuffer(replay, state_dim)
        self.batch = batch
        self.lr = lr
        self.gamma = gamma
        self.epsilon = epsilon
        self.target_sync = target_sync
        self.train_steps = 0

    def act(self, state: np.ndarray, rng: np.random.Generator) -> int:
        """Epsilon-greedy over online-net Q values, uniform tie-break."""
        if rng.random() < self.epsilon:
            return int(rng.integers(self.n_actions))
        q = self.online.forward(state[None, :])[0]
        best = np.flatnonzero(q == q.max())
        if best.size == 1:
            return int(best[0])
        return int(best[rng.integers(best.size)])

    def remember(self, state: np.ndarray, action: int, reward: float, next_state: np.ndarray) -> None:
        self.buffer.push(state, action, reward, next_state)

    def train_step(self, rng: np.random.Generator) -> float | None:
        """One SGD step on a replayed minibatch; None while warming up.

        Targets bootstrap through the frozen target net, which is
        re-synchronized every ``target_sync`` completed training steps.
        """
        if self.buffer.size < self.batch:
            return None
        states, actions, rewards, next_states = self.buffer.sample(self.batch, rng)
        targets = rewards + self.gamma * self.target.forward(next_states).max(axis=1)
        loss, grads = q_loss_grads(self.online, states, actions, targets)
        for name, param in self.online.parameters().items():
            param -= self.lr * grads[name]
        self.train_steps += 1
        if self.train_steps % self.target_sync == 0:
            self.target.copy_from(self.online)
        return loss
