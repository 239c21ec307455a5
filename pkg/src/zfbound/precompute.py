"""SDMA set enumeration and the cached pseudo-inverse beam directions.

The pseudo-inverses do not depend on the multipliers, so they are computed
once per (subcarrier, set) and shared read-only by every solver.
"""

import itertools
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidInputError
from .model import ChannelTensor
from .numerics import batched_pseudo_inverse


@dataclass(frozen=True, order=True)
class SdmaSet:
    """Users transmitting together on one subcarrier, sorted ascending."""

    members: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise InvalidInputError("an SDMA set needs at least one member")
        if list(self.members) != sorted(set(self.members)):
            raise InvalidInputError(
                f"SDMA set members must be distinct and sorted, got {self.members}"
            )

    @property
    def size(self) -> int:
        return len(self.members)

    def __str__(self) -> str:
        return "{" + ",".join(str(k) for k in self.members) + "}"


def enumerate_sdma_sets(num_users: int, num_antennas: int) -> list[SdmaSet]:
    """All user subsets of size ``1..min(M, K)`` in lexicographic order."""
    if num_users < 1 or num_antennas < 1:
        raise InvalidInputError("num_users and num_antennas must be >= 1")
    max_size = min(num_users, num_antennas)
    sets = [
        SdmaSet(combo)
        for size in range(1, max_size + 1)
        for combo in itertools.combinations(range(num_users), size)
    ]
    return sorted(sets)


@dataclass(frozen=True, eq=False)
class SetPrecompute:
    """Beam directions and gains for every (subcarrier, SDMA set, member).

    Arrays are indexed ``[n, set_index, member_position]``; positions past a
    set's size are padding (``member_mask`` is False there).
    """

    sets: tuple[SdmaSet, ...]
    members: np.ndarray  # (S, P) user index, -1 for padding
    member_mask: np.ndarray  # (S, P)
    gamma: np.ndarray  # (N, S, P), norm of the pseudo-inverse column
    directions: np.ndarray  # (N, S, P, M)
    usable: np.ndarray  # (N, S), full row rank
    channels: ChannelTensor

    @property
    def num_users(self) -> int:
        return self.channels.num_users

    @property
    def num_subcarriers(self) -> int:
        return self.gamma.shape[0]

    @property
    def num_sets(self) -> int:
        return len(self.sets)

    def set_index(self, members: Sequence[int]) -> int:
        """Index of the set with exactly these members."""
        key = SdmaSet(tuple(sorted(members)))
        try:
            return self._index[key]
        except KeyError:
            raise InvalidInputError(f"unknown SDMA set {key}")

    @property
    def _index(self) -> dict[SdmaSet, int]:
        cached = self.__dict__.get("_index_cache")
        if cached is None:
            cached = {s: i for i, s in enumerate(self.sets)}
            object.__setattr__(self, "_index_cache", cached)
        return cached

    def usable_counts(self) -> list[int]:
        """Number of usable sets on each subcarrier."""
        return [int(c) for c in self.usable.sum(axis=1)]


def precompute_all(
    channels: ChannelTensor, sets: Sequence[SdmaSet], rank_tol: float = 0.0
) -> SetPrecompute:
    """Pseudo-invert the stacked member channels of every (carrier, set) once.

    One pseudo-inverse per (n, s) serves all members: member ``j``'s beam
    direction is column ``j`` of the pseudo-inverse and its gain is that
    column's norm. Sets without full row rank are marked unusable.
    """
    if not sets:
        raise InvalidInputError("at least one SDMA set is required")
    num_users, num_carriers, num_antennas = channels.h.shape
    for s in sets:
        if s.members[-1] >= num_users:
            raise InvalidInputError(f"set {s} references a user beyond K={num_users}")
        if s.size > num_antennas:
            raise InvalidInputError(f"set {s} is larger than M={num_antennas}")

    width = max(s.size for s in sets)
    num_sets = len(sets)
    members = np.full((num_sets, width), -1, dtype=np.int64)
    for i, s in enumerate(sets):
        members[i, : s.size] = s.members
    member_mask = members >= 0

    gamma = np.zeros((num_carriers, num_sets, width))
    directions = np.zeros(
        (num_carriers, num_sets, width, num_antennas), dtype=np.complex128
    )
    usable = np.zeros((num_carriers, num_sets), dtype=bool)

    for size in sorted({s.size for s in sets}):
        idx = np.array([i for i, s in enumerate(sets) if s.size == size])
        users = members[idx, :size]  # (S_k, size)
        # (S_k, size, N, M) -> (N, S_k, size, M)
        stacked = np.transpose(channels.h[users], (2, 0, 1, 3))
        pinv, rank = batched_pseudo_inverse(stacked, rank_tol)  # (N, S_k, M, size)
        cols = np.swapaxes(pinv, -1, -2)  # (N, S_k, size, M)
        directions[:, idx, :size, :] = cols
        gamma[:, idx, :size] = np.linalg.norm(cols, axis=-1)
        usable[:, idx] = rank == size

    for arr in (members, member_mask, gamma, directions, usable):
        arr.flags.writeable = False
    return SetPrecompute(
        sets=tuple(sets),
        members=members,
        member_mask=member_mask,
        gamma=gamma,
        directions=directions,
        usable=usable,
        channels=channels,
    )
