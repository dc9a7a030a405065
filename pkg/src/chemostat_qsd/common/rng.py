"""Counter-based random streams keyed by (master seed, stream id)."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

_U64 = 2**64


@dataclass(frozen=True)
class RngStream:
    """Reproducible Philox stream.

    Streams with distinct ``stream_id`` (or distinct ``sub_ids``) under the
    same ``master_seed`` are independent; the same key always yields the same
    sequence.
    """

    master_seed: int
    stream_id: int = 0
    sub_ids: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.master_seed < _U64:
            raise ConfigurationError(
                "master_seed must be an unsigned 64-bit integer, "
                f"got {self.master_seed}"
            )
        if not 0 <= self.stream_id < _U64:
            raise ConfigurationError(
                f"stream_id must be an unsigned 64-bit integer, got {self.stream_id}"
            )

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(
            entropy=self.master_seed, spawn_key=(self.stream_id, *self.sub_ids)
        )

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of the stream."""
        return np.random.Generator(np.random.Philox(self.seed_sequence()))

    def child(self, sub_id: int) -> "RngStream":
        """Independent sub-stream, e.g. one per particle of an ensemble."""
        return RngStream(self.master_seed, self.stream_id, (*self.sub_ids, sub_id))


def derive_seed(master_seed: int, phase: int) -> int:
    """Master seed of an independent phase of a run (e.g. one estimator)."""
    state = RngStream(master_seed, phase).seed_sequence().generate_state(1, np.uint64)
    return int(state[0])
