"""Versioned key=value run configuration.

One INI-style file with a section per pipeline stage; CLI flags override
file values. Unknown sections or keys are rejected so typos fail loudly.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, replace
from pathlib import Path

from .classifier import TrainConfig
from .errors import InputError
from .labeling import AugmentConfig
from .postprocess import SelectionStrategy
from .synth import SynthSpec

CONFIG_VERSION = 1

_KNOWN_KEYS = {
    "meta": {"version"},
    "paths": {"corpus_dir", "out_dir"},
    "labeling": {"frame_ms", "aug_radius", "aggregation"},
    "postprocess": {"selection", "origin"},
    "eval": {"tolerance_ms", "aggregate"},
    "train": {"learning_rate", "batch_size", "patience", "max_epochs", "seed",
              "val_metric"},
}


@dataclass(frozen=True)
class RunConfig:
    frame_ms: float = 25.0
    aug_radius: int = 1
    aggregation: str = "majority"
    selection: SelectionStrategy = SelectionStrategy.MID
    origin: str = "center"
    tolerance_ms: float = 40.0
    aggregate: str = "micro"
    train: TrainConfig = field(default_factory=TrainConfig)
    corpus_dir: Path | None = None
    out_dir: Path | None = None

    def __post_init__(self):
        if self.frame_ms <= 0:
            raise ValueError("frame_ms must be positive")
        if self.tolerance_ms < 0:
            raise ValueError("tolerance_ms must be >= 0")
        if self.aug_radius < 0:
            raise ValueError("aug_radius must be >= 0")
        if self.aggregation not in ("majority", "any"):
            raise ValueError(f"unknown aggregation {self.aggregation!r}")
        if self.origin not in ("center", "onset"):
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.aggregate not in ("micro", "macro"):
            raise ValueError(f"unknown aggregate {self.aggregate!r}")

    @property
    def tolerance_s(self) -> float:
        return self.tolerance_ms / 1000.0

    def with_aug_radius(self, radius: int) -> "RunConfig":
        train = replace(self.train, augment=AugmentConfig(radius))
        return replace(self, aug_radius=radius, train=train)


def _parser_for(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise InputError(f"unreadable config: {path} ({exc})")
    except configparser.Error as exc:
        raise InputError(f"bad config {path}: {exc}")
    return parser


def _check_keys(parser: configparser.ConfigParser, known: dict, path: Path) -> None:
    for section in parser.sections():
        if section not in known:
            raise InputError(f"{path}: unknown section [{section}]")
        for key in parser[section]:
            if key not in known[section]:
                raise InputError(f"{path}: unknown key {key!r} in [{section}]")


def _get(parser, section, key, cast, default, path):
    if not parser.has_option(section, key):
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (ValueError, InputError) as exc:
        raise InputError(f"{path}: bad value for [{section}] {key} = {raw!r} ({exc})")


def load_run_config(path: str | Path, base_dir: Path | None = None) -> RunConfig:
    """Parse a run config; relative paths resolve against the file's parent."""
    path = Path(path)
    parser = _parser_for(path)
    _check_keys(parser, _KNOWN_KEYS, path)
    root = base_dir if base_dir is not None else path.parent

    version = _get(parser, "meta", "version", int, CONFIG_VERSION, path)
    if version != CONFIG_VERSION:
        raise InputError(f"{path}: unsupported config version {version}")

    def _path(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else root / p

    defaults = RunConfig()
    aug_radius = _get(parser, "labeling", "aug_radius", int, defaults.aug_radius, path)
    train = TrainConfig(
        learning_rate=_get(parser, "train", "learning_rate", float,
                           defaults.train.learning_rate, path),
        batch_size=_get(parser, "train", "batch_size", int, defaults.train.batch_size, path),
        patience=_get(parser, "train", "patience", int, defaults.train.patience, path),
        max_epochs=_get(parser, "train", "max_epochs", int, defaults.train.max_epochs, path),
        seed=_get(parser, "train", "seed", int, defaults.train.seed, path),
        augment=AugmentConfig(aug_radius),
        val_metric=_get(parser, "train", "val_metric", str,
                        defaults.train.val_metric, path),
    )
    try:
        return RunConfig(
            frame_ms=_get(parser, "labeling", "frame_ms", float, defaults.frame_ms, path),
            aug_radius=aug_radius,
            aggregation=_get(parser, "labeling", "aggregation", str,
                             defaults.aggregation, path),
            selection=_get(parser, "postprocess", "selection", SelectionStrategy.parse,
                           defaults.selection, path),
            origin=_get(parser, "postprocess", "origin", str, defaults.origin, path),
            tolerance_ms=_get(parser, "eval", "tolerance_ms", float,
                              defaults.tolerance_ms, path),
            aggregate=_get(parser, "eval", "aggregate", str, defaults.aggregate, path),
            train=train,
            corpus_dir=_get(parser, "paths", "corpus_dir", _path, None, path),
            out_dir=_get(parser, "paths", "out_dir", _path, None, path),
        )
    except ValueError as exc:
        raise InputError(f"{path}: {exc}")


_SYNTH_KEYS = {
    "synth": {"num_utterances", "words_per_utterance", "word_duration_ms",
              "gap_duration_ms", "sample_rate", "seed", "splits"},
}


def load_synth_spec(path: str | Path) -> tuple[SynthSpec, tuple[int, int, int]]:
    """Parse a synthesis spec file; returns the spec and train/val/test sizes."""
    path = Path(path)
    parser = _parser_for(path)
    _check_keys(parser, _SYNTH_KEYS, path)

    def _pair(cast):
        def parse(raw: str):
            parts = raw.split()
            if len(parts) != 2:
                raise ValueError("expected two whitespace-separated values")
            return (cast(parts[0]), cast(parts[1]))
        return parse

    def _splits(raw: str) -> tuple[int, int, int]:
        parts = [int(v) for v in raw.split()]
        if len(parts) != 3 or any(v < 0 for v in parts):
            raise ValueError("expected three non-negative counts: train val test")
        return tuple(parts)  # type: ignore[return-value]

    defaults = SynthSpec()
    try:
        spec = SynthSpec(
            num_utterances=_get(parser, "synth", "num_utterances", int,
                                defaults.num_utterances, path),
            words_per_utterance=_get(parser, "synth", "words_per_utterance", _pair(int),
                                     defaults.words_per_utterance, path),
            word_duration_ms=_get(parser, "synth", "word_duration_ms", _pair(float),
                                  defaults.word_duration_ms, path),
            gap_duration_ms=_get(parser, "synth", "gap_duration_ms", _pair(float),
                                 defaults.gap_duration_ms, path),
            sample_rate=_get(parser, "synth", "sample_rate", int,
                             defaults.sample_rate, path),
            seed=_get(parser, "synth", "seed", int, defaults.seed, path),
        )
    except ValueError as exc:
        raise InputError(f"{path}: {exc}")
    splits = _get(parser, "synth", "splits", _splits, (200, 40, 40), path)
    if sum(splits) != spec.num_utterances:
        raise InputError(
            f"{path}: splits {splits} do not sum to num_utterances {spec.num_utterances}"
        )
    return spec, splits
