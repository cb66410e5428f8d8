"""promptvoc: a prompted discrete-token vocoder for voice conversion.

Content tokens carry what is said; a reference prompt supplies speaker
timbre through position-agnostic cross-attention and speaker-adaptive
Snake activations in an anti-aliased waveform generator.
"""

from .activations import AdaptiveSnake, Snake, adaptive_snake, condition_transform, snake
from .config import (
    ModelConfig,
    TrainConfig,
    desk_model_config,
    desk_train_config,
    dump_config,
    load_config,
    parse_config,
)
from .data import (
    Manifest,
    ManifestEntry,
    PromptSegment,
    build_manifest,
    make_batches,
    make_training_example,
    sample_prompt_segment,
)
from .discriminators import MultiPeriodDiscriminator, MultiScaleDiscriminator
from .dsp import (
    FIRFilter,
    MelConfig,
    PitchContour,
    Waveform,
    design_lowpass,
    downsample2x,
    load_wav,
    mel_spectrogram,
    pitch_correlation,
    save_wav,
    track_pitch,
    upsample2x,
)
from .features import (
    CodebookSet,
    SyntheticPromptExtractor,
    SyntheticTokenizer,
    TokenSeq,
    embed_tokens,
    fit_synthetic_tokenizer,
    mean_pool,
    read_feature_file,
    read_token_file,
    tokenize,
    write_feature_file,
    write_token_file,
)
from .frontend import Frontend, PositionAgnosticCrossAttention, PromptPrenet
from .generator import Generator, count_params
from .losses import (
    LossWeights,
    TorchMel,
    aux_weight,
    feature_matching_loss,
    lsgan_d_loss,
    lsgan_g_loss,
    mel_l1,
)
from .metrics import eval_pcorr, secs
from .model import VoiceConverter, converter_from_checkpoint, save_checkpoint
from .trainer import NonFiniteLossError, Trainer

__version__ = "0.1.0"
