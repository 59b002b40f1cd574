"""Model and training hyperparameters.

Desk-scale defaults keep a laptop run in minutes; `paper_scale()` restores
the published sizes (6 layers, 256 hidden, the large per-attribute embedding
widths) for anyone with the compute and a real corpus.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

from ..rules import RepetitionType
from ..vocab import ATTRIBUTES, MAX_ROWS, VOCAB

#: attribute importance weights: pitch always 4; position/duration/velocity 2
#: for the three example-based types; everything else 1.
_BOOSTED = {"position", "duration", "velocity"}
_BOOSTED_LABELS = {
    RepetitionType.SUBSEQUENTIAL,
    RepetitionType.HOMODIRECTIONAL,
    RepetitionType.SYMMETRIC,
}


def default_gamma(label: RepetitionType, attribute: str) -> float:
    if attribute == "pitch":
        return 4.0
    if attribute in _BOOSTED and label in _BOOSTED_LABELS:
        return 2.0
    return 1.0


@dataclass(frozen=True)
class ModelConfig:
    layers: int = 2
    heads: int = 4
    hidden: int = 64  # H1 == H2
    feed_forward: int = 256
    embedding_sizes: tuple[int, ...] = (16, 32, 8, 4, 64, 16, 16)
    label_embedding: int = 32
    dropout: float = 0.1
    lam: float = 0.5  # classification/reconstruction trade-off
    learning_rate: float = 1e-4
    max_rows: int = MAX_ROWS
    num_classes: int = 5
    vocab_sizes: tuple[int, ...] = VOCAB.sizes
    batch_size: int = 32
    max_steps: int = 4000
    stop_epsilon: float = 1e-3
    stop_window: int = 200
    stop_patience: int = 3
    seed: int = 0
    dtype: str = "float32"
    categorical_decoder: bool = False  # reserved; only the literal regression path is wired

    def __post_init__(self) -> None:
        if len(self.embedding_sizes) != len(ATTRIBUTES):
            raise ValueError("need one embedding size per attribute")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if self.heads < 1 or self.hidden % self.heads:
            raise ValueError("hidden size must divide evenly across heads")

    @property
    def concat_size(self) -> int:
        return sum(self.embedding_sizes)

    def gamma(self, label: RepetitionType, attribute: str) -> float:
        return default_gamma(label, attribute)

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, d: dict) -> "ModelConfig":
        d = dict(d)
        d["embedding_sizes"] = tuple(d["embedding_sizes"])
        d["vocab_sizes"] = tuple(d["vocab_sizes"])
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ModelConfig":
        from ..dataset import _load_config_mapping

        raw = _load_config_mapping(path, set(cls.__dataclass_fields__))
        if "embedding_sizes" in raw:
            raw["embedding_sizes"] = tuple(raw["embedding_sizes"])
        if "vocab_sizes" in raw:
            raw["vocab_sizes"] = tuple(raw["vocab_sizes"])
        return cls(**raw)

    @classmethod
    def paper_scale(cls) -> "ModelConfig":
        return cls(
            layers=6,
            heads=4,
            hidden=256,
            feed_forward=2048,
            embedding_sizes=(128, 256, 64, 32, 512, 128, 128),
            label_embedding=32,
        )

    @classmethod
    def tiny(cls) -> "ModelConfig":
        """Gradient-check scale: short rows, small widths, 64-bit math."""
        return cls(
            layers=2,
            heads=2,
            hidden=16,
            feed_forward=32,
            embedding_sizes=(4, 4, 4, 4, 8, 4, 4),
            label_embedding=8,
            max_rows=8,
            dtype="float64",
        )
