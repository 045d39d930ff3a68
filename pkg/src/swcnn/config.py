"""Run configuration: one key=value file drives every CLI stage.

Lines are ``key=value``; blank lines and lines starting with ``#`` are
ignored.  Unknown keys are rejected.  Command-line ``--set key=value``
overrides take precedence over the file.  The ``profile`` key encodes the
pooling rule (sentiment tasks fix k=1, topic tasks search {1, 10});
``small_data=true`` switches the epoch schedule from 30/24 to 100/80
unless ``epochs``/``decay_epoch`` are set explicitly (0 means "use the
profile default").
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from swcnn.errors import DataError, UsageError
from swcnn.textpipe import BOW_NGRAM, BOW_WORD, CONCAT, NGRAM123, WORD
from swcnn.train import SelectionGrid, TrainConfig
from swcnn.tv import TvTrainConfig

PROFILES = ("topic", "sentiment")


@dataclass
class RunConfig:
    seed: int = 1
    profile: str = "topic"
    small_data: bool = False
    n_classes: int = 0  # 0 = infer from the training labels

    word_vocab_cap: int = 30_000
    ngram_vocab_cap: int = 200_000

    embed_dim: int = 500
    representation: str = CONCAT
    region_size: int = 3
    pooling_k: int = 1

    initial_lr: float = 0.1
    epochs: int = 0
    decay_epoch: int = 0
    decay_factor: float = 0.1
    momentum: float = 0.9
    batch_size: int = 100
    init_std: float = 0.01
    dropout: float = 0.5
    top_l2: float = 0.0001
    holdout: int = -1  # -1 = auto: 10000 if >100K records else 10%

    grid_region_sizes: tuple[int, ...] = (3, 5)
    grid_initial_lrs: tuple[float, ...] = (0.25, 0.1, 0.05, 0.01)

    tv_dim: int = 300
    tv_epochs: int = 10
    tv_lr: float = 0.1
    tv_negatives: int = 50
    tv_batch_size: int = 100
    tv_region_size: int = 5
    tv_representation: str = BOW_WORD
    tv_specs: str = ""  # for `params`: e.g. "bow:5,bow:9,ngram:5,ngram:9"

    bench_v_small: int = 1_000
    bench_v_large: int = 100_000
    bench_d: int = 500
    bench_p: int = 3
    bench_repetitions: int = 100

    train_csv: str = ""
    test_csv: str = ""
    word_vocab: str = ""
    tv_vocab: str = ""
    embeddings: str = ""  # comma-separated tv container paths
    model_path: str = "model.swcn"
    metrics_path: str = ""
    tv_out: str = "tv.swcn"


_FIELDS = {f.name: f for f in fields(RunConfig)}


def _coerce(field, raw: str):
    # field types arrive as strings under `from __future__ import annotations`
    name = field.name
    text = raw.strip()
    hint = field.type
    if hint in ("int",):
        try:
            return int(text)
        except ValueError:
            raise UsageError(f"config key {name} expects an integer, got {raw!r}") from None
    if hint in ("float",):
        try:
            return float(text)
        except ValueError:
            raise UsageError(f"config key {name} expects a number, got {raw!r}") from None
    if hint in ("bool",):
        low = text.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise UsageError(f"config key {name} expects true/false, got {raw!r}")
    if hint.startswith("tuple[int"):
        try:
            return tuple(int(part) for part in text.split(",") if part.strip())
        except ValueError:
            raise UsageError(f"config key {name} expects comma-separated integers") from None
    if hint.startswith("tuple[float"):
        try:
            return tuple(float(part) for part in text.split(",") if part.strip())
        except ValueError:
            raise UsageError(f"config key {name} expects comma-separated numbers") from None
    return text


def apply_setting(cfg: RunConfig, key: str, raw: str) -> None:
    if key not in _FIELDS:
        raise UsageError(f"unknown config key {key!r}")
    setattr(cfg, key, _coerce(_FIELDS[key], raw))


def parse_config(path) -> RunConfig:
    cfg = RunConfig()
    try:
        stream = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open config: {exc}") from exc
    with stream:
        for lineno, line in enumerate(stream, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise UsageError(f"{path}: line {lineno}: expected key=value")
            try:
                apply_setting(cfg, key.strip(), value)
            except UsageError as exc:
                raise UsageError(f"{path}: line {lineno}: {exc}") from None
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.profile not in PROFILES:
        raise UsageError(f"profile must be one of {PROFILES}, got {cfg.profile!r}")
    if cfg.representation not in (CONCAT, BOW_WORD, BOW_NGRAM):
        raise UsageError(f"unknown representation {cfg.representation!r}")
    if cfg.tv_representation not in (BOW_WORD, BOW_NGRAM):
        raise UsageError(
            f"tv_representation must be {BOW_WORD} or {BOW_NGRAM}, got {cfg.tv_representation!r}"
        )


def resolved_epochs(cfg: RunConfig) -> int:
    return cfg.epochs or (100 if cfg.small_data else 30)


def resolved_decay_epoch(cfg: RunConfig) -> int:
    return cfg.decay_epoch or (80 if cfg.small_data else 24)


def train_config(cfg: RunConfig) -> TrainConfig:
    return TrainConfig(
        initial_lr=cfg.initial_lr,
        epochs=resolved_epochs(cfg),
        decay_epoch=resolved_decay_epoch(cfg),
        decay_factor=cfg.decay_factor,
        momentum=cfg.momentum,
        batch_size=cfg.batch_size,
        init_std=cfg.init_std,
        dropout=cfg.dropout,
        top_l2=cfg.top_l2,
        seed=cfg.seed,
    )


def selection_grid(cfg: RunConfig) -> SelectionGrid:
    pooling_ks = (1,) if cfg.profile == "sentiment" else (1, 10)
    return SelectionGrid(
        region_sizes=cfg.grid_region_sizes,
        pooling_ks=pooling_ks,
        initial_lrs=cfg.grid_initial_lrs,
    )


def tv_config(cfg: RunConfig) -> TvTrainConfig:
    return TvTrainConfig(
        seed=cfg.seed,
        epochs=cfg.tv_epochs,
        lr=cfg.tv_lr,
        negatives=cfg.tv_negatives,
        momentum=cfg.momentum,
        batch_size=cfg.tv_batch_size,
        init_std=cfg.init_std,
    )


def parse_tv_specs(cfg: RunConfig) -> list[tuple[str, int]]:
    """(vocabulary kind, region size) pairs from the tv_specs key."""
    out = []
    if not cfg.tv_specs:
        return out
    for part in cfg.tv_specs.split(","):
        part = part.strip()
        if not part:
            continue
        name, sep, size = part.partition(":")
        kind = {"bow": WORD, "ngram": NGRAM123}.get(name.strip())
        if kind is None or not sep:
            raise UsageError(
                f"tv_specs entries look like bow:5 or ngram:9, got {part!r}"
            )
        try:
            out.append((kind, int(size)))
        except ValueError:
            raise UsageError(f"bad region size in tv_specs entry {part!r}") from None
    return out
