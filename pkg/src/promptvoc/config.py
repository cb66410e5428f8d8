"""Model/training configuration with flat key=value file round-tripping."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields


@dataclass
class ModelConfig:
    sample_rate: int = 24000
    n_mels: int = 80

    # content / prompt features
    content_dim: int = 512
    groups: int = 2
    codebook_size: int = 64
    prompt_dim: int = 1024

    # conformer frontend
    n_blocks: int = 2
    attn_dim: int = 184
    n_heads: int = 2
    ff_hidden: int = 2048
    conv_kernel: int = 31
    dropout: float = 0.1
    prenet_dims: tuple = (128, 256, 512, 512)
    prenet_kernel: int = 5

    # generator
    base_channels: int = 512
    upsample_factors: tuple = (8, 5, 3, 2)
    upsample_kernels: tuple = (16, 10, 6, 4)
    amp_kernel_sizes: tuple = (3, 7, 11)
    amp_dilations: tuple = (1, 3, 5)
    activation: str = "adaptive_snake"  # adaptive_snake | snake
    architecture: str = "bigvgan"  # bigvgan | hifigan

    # discriminators
    mpd_channels: int = 32
    msd_channels: int = 16

    def __post_init__(self):
        if self.attn_dim % self.n_heads != 0:
            raise ValueError("attn_dim must be divisible by n_heads")
        if self.content_dim % self.groups != 0:
            raise ValueError("content_dim must divide evenly across groups")
        hop = self.sample_rate // 100
        prod = 1
        for f in self.upsample_factors:
            prod *= f
        if prod != hop:
            raise ValueError(f"upsample factors product {prod} != samples per frame {hop}")
        if self.activation not in ("adaptive_snake", "snake"):
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.architecture not in ("bigvgan", "hifigan"):
            raise ValueError(f"unknown architecture {self.architecture!r}")

    @property
    def hop(self) -> int:
        return self.sample_rate // 100

    @property
    def cond_dim(self) -> int:
        # Speaker vector is the mean-pooled raw prompt feature.
        return self.prompt_dim


@dataclass
class TrainConfig:
    steps: int = 2000
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    beta1: float = 0.8
    beta2: float = 0.99
    lr_decay: float = 0.999
    decay_every: int = 1000
    seed: int = 1234
    deterministic: bool = True

    # loss weights and warmup
    adv_weight: float = 1.0
    feat_match_weight: float = 2.0
    mel_weight: float = 45.0
    aux_mel_weight: float = 60.0
    aux_warmup_steps: int = 2000

    # data handling
    min_duration_s: float = 6.0
    max_duration_s: float = 30.0
    min_prompt_frames: int = 600
    max_batch_s: float = 36.0
    crop_frames: int = 0  # 0 = train on the full target region
    target_mode: str = "complement"  # complement | full

    checkpoint_every: int = 500

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.lr_g <= 0 or self.lr_d <= 0:
            raise ValueError("learning rates must be positive")
        if self.target_mode not in ("complement", "full"):
            raise ValueError(f"unknown target_mode {self.target_mode!r}")


def desk_model_config(**overrides) -> ModelConfig:
    """Small configuration for CPU-scale experiments and tests."""
    base = dict(
        prompt_dim=192,
        codebook_size=32,
        attn_dim=96,
        ff_hidden=256,
        prenet_dims=(64, 128, 192, 192),
        base_channels=32,
        amp_kernel_sizes=(3, 7),
        amp_dilations=(1, 3),
        mpd_channels=12,
        msd_channels=12,
        dropout=0.0,
    )
    base.update(overrides)
    return ModelConfig(**base)


def desk_train_config(**overrides) -> TrainConfig:
    base = dict(
        max_batch_s=0.4,
        crop_frames=32,
        checkpoint_every=500,
        min_duration_s=1.0,
        min_prompt_frames=200,
    )
    base.update(overrides)
    return TrainConfig(**base)


def _to_text(value) -> str:
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def _from_text(text: str, default):
    if isinstance(default, bool):
        if text.lower() not in ("true", "false"):
            raise ValueError(f"expected true/false, got {text!r}")
        return text.lower() == "true"
    if isinstance(default, tuple):
        elem = int if (not default or isinstance(default[0], int)) else float
        return tuple(elem(v) for v in text.split(",")) if text else ()
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def dump_config(model: ModelConfig, train: TrainConfig) -> str:
    """Render both configs as flat ``section.key = value`` lines."""
    lines = []
    for prefix, cfg in (("model", model), ("train", train)):
        for f in fields(cfg):
            lines.append(f"{prefix}.{f.name} = {_to_text(getattr(cfg, f.name))}")
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> tuple[ModelConfig, TrainConfig]:
    """Parse flat key=value text; unknown keys are rejected."""
    defaults = {"model": ModelConfig(), "train": TrainConfig()}
    values = {"model": {}, "train": {}}
    known = {
        section: {f.name: getattr(cfg, f.name) for f in fields(cfg)}
        for section, cfg in defaults.items()
    }
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line or "." not in line.split("=", 1)[0]:
            raise ValueError(f"line {lineno}: expected 'section.key = value'")
        key, val = (part.strip() for part in line.split("=", 1))
        section, name = key.split(".", 1)
        if section not in known or name not in known[section]:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        values[section][name] = _from_text(val, known[section][name])
    return ModelConfig(**values["model"]), TrainConfig(**values["train"])


def load_config(path) -> tuple[ModelConfig, TrainConfig]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def config_to_dict(cfg) -> dict:
    return dataclasses.asdict(cfg)
