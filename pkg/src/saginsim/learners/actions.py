"""Discrete action spaces shared by the learning agents.

An action is either a movement direction, a channel, or both; the flat
index layout is move-major so ``index = move_idx * n_channels + ch_idx``
when channels are part of the action.
"""

from __future__ import annotations

from dataclasses import dataclass

from saginsim.environment import MOVES_2D, MOVES_3D, UavAction


@dataclass(frozen=True)
class ActionSpace:
    """Enumerates (move, channel) pairs behind a flat integer index.

    ``channels`` is None for trajectory-only schemes, in which case
    ``decode`` reports no channel choice.
    """

    moves: tuple[UavAction, ...]
    channels: tuple[int, ...] | None = None

    def __len__(self) -> int:
        n_ch = len(self.channels) if self.channels else 1
        return len(self.moves) * n_ch

    def decode(self, index: int) -> tuple[UavAction, int | None]:
        if not 0 <= index < len(self):
            raise IndexError(f"action index {index} out of range for {len(self)} actions")
        if self.channels is None:
            return self.moves[index], None
        n_ch = len(self.channels)
        return self.moves[index // n_ch], self.channels[index % n_ch]

    @classmethod
    def trajectory(cls, is_3d: bool) -> "ActionSpace":
        """Movement only: 5 directions in 2D (with hover), 7 in 3D."""
        return cls(moves=MOVES_3D if is_3d else MOVES_2D)

    @classmethod
    def composite(cls, is_3d: bool, n_channels: int) -> "ActionSpace":
        """Joint movement and channel choice."""
        moves = MOVES_3D if is_3d else MOVES_2D
        return cls(moves=moves, channels=tuple(range(n_channels)))

    @classmethod
    def channel_only(cls, n_channels: int) -> "ActionSpace":
        """Channel choice for static base stations (the move is a no-op)."""
        return cls(moves=(UavAction.HOVER,), channels=tuple(range(n_channels)))
