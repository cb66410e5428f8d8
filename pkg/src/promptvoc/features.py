"""Content-token and prompt-feature provisioning.

Production features come from files written by external extractors; for
desk-scale work a synthetic stand-in tokenizer (mel band-split + k-means)
and prompt extractor (mel + fixed random projection) provide the same
structural contract: grouped discrete ids and per-frame prompt features
at 100 Hz.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .dsp import MelConfig, Waveform, mel_spectrogram


class FormatError(ValueError):
    """Raised on malformed feature files."""


FEATURE_MAGIC = b"FTR1"
TOKEN_MAGIC = b"TOK1"


@dataclass(frozen=True)
class TokenSeq:
    """Grouped integer content tokens, (frames, groups), at a fixed frame rate."""

    ids: np.ndarray
    frame_rate: int = 100

    def __post_init__(self):
        ids = np.asarray(self.ids)
        if ids.ndim != 2:
            raise ValueError("token ids must be (frames, groups)")
        if ids.size and ids.min() < 0:
            raise ValueError("token ids must be non-negative")
        object.__setattr__(self, "ids", ids.astype(np.int64))

    @property
    def frames(self) -> int:
        return self.ids.shape[0]

    @property
    def groups(self) -> int:
        return self.ids.shape[1]


@dataclass(frozen=True)
class CodebookSet:
    """Per-group code-vector tables; concatenated dims give content_dim."""

    tables: tuple

    def __post_init__(self):
        tables = tuple(np.asarray(t, dtype=np.float64) for t in self.tables)
        for t in tables:
            if t.ndim != 2:
                raise ValueError("each codebook must be (codebook_size, code_dim)")
        object.__setattr__(self, "tables", tables)

    @property
    def groups(self) -> int:
        return len(self.tables)

    @property
    def content_dim(self) -> int:
        return sum(t.shape[1] for t in self.tables)


def _kmeans(data: np.ndarray, k: int, seed: int, max_iters: int = 100) -> np.ndarray:
    """Plain Lloyd's k-means with seeded k-means++ init; returns (k, dim) centroids."""
    n = len(data)
    if n < k:
        raise ValueError(f"k-means needs at least {k} points, got {n}")
    rng = np.random.default_rng(seed)

    centroids = np.empty((k, data.shape[1]))
    centroids[0] = data[rng.integers(n)]
    d2 = np.sum((data - centroids[0]) ** 2, axis=1)
    for i in range(1, k):
        probs = d2 / max(d2.sum(), 1e-12)
        centroids[i] = data[rng.choice(n, p=probs)]
        d2 = np.minimum(d2, np.sum((data - centroids[i]) ** 2, axis=1))

    for _ in range(max_iters):
        assign = _nearest(data, centroids)
        new = centroids.copy()
        for i in range(k):
            members = data[assign == i]
            if len(members):
                new[i] = members.mean(axis=0)
        if np.allclose(new, centroids):
            centroids = new
            break
        centroids = new
    return centroids


def _nearest(data: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(data**2, axis=1, keepdims=True)
        - 2.0 * data @ centroids.T
        + np.sum(centroids**2, axis=1)
    )
    return np.argmin(d2, axis=1)


class SyntheticTokenizer:
    """Mel band-split k-means tokenizer standing in for a pretrained quantizer.

    Mel bins are split into ``groups`` contiguous bands; each band gets its
    own k-means codebook.  Code-vectors for the downstream embedding are the
    band centroids sent through a fixed-seed random projection so each group
    contributes content_dim / groups dimensions.
    """

    def __init__(self, centroids, mel_cfg: MelConfig, content_dim: int = 512, seed: int = 0):
        self.centroids = [np.asarray(c, dtype=np.float64) for c in centroids]
        self.mel_cfg = mel_cfg
        self.content_dim = content_dim
        self.seed = seed
        groups = len(self.centroids)
        if content_dim % groups != 0:
            raise ValueError("content_dim must divide evenly across groups")
        code_dim = content_dim // groups
        rng = np.random.default_rng(seed + 1)
        self.codebooks = CodebookSet(
            tables=tuple(
                c @ (rng.standard_normal((c.shape[1], code_dim)) / np.sqrt(c.shape[1]))
                for c in self.centroids
            )
        )

    @property
    def groups(self) -> int:
        return len(self.centroids)

    @property
    def codebook_size(self) -> int:
        return self.centroids[0].shape[0]

    def band_slices(self):
        n_mels = self.mel_cfg.n_mels
        groups = self.groups
        edges = [round(i * n_mels / groups) for i in range(groups + 1)]
        return [slice(edges[i], edges[i + 1]) for i in range(groups)]


def fit_synthetic_tokenizer(
    corpus,
    groups: int = 2,
    codebook_size: int = 64,
    mel_cfg: MelConfig | None = None,
    content_dim: int = 512,
    seed: int = 0,
) -> SyntheticTokenizer:
    """Fit per-band k-means codebooks on the mel frames of a corpus."""
    if not corpus:
        raise ValueError("corpus must be non-empty")
    if codebook_size < 1:
        raise ValueError("codebook_size must be >= 1")
    mel_cfg = mel_cfg or MelConfig()
    mels = np.concatenate([mel_spectrogram(w, mel_cfg) for w in corpus], axis=0)
    if len(mels) < codebook_size:
        raise ValueError("fewer mel frames than codebook entries")

    n_mels = mel_cfg.n_mels
    edges = [round(i * n_mels / groups) for i in range(groups + 1)]
    centroids = [
        _kmeans(mels[:, edges[g] : edges[g + 1]], codebook_size, seed=seed + g)
        for g in range(groups)
    ]
    return SyntheticTokenizer(centroids, mel_cfg, content_dim=content_dim, seed=seed)


def tokenize(w: Waveform, tok: SyntheticTokenizer) -> TokenSeq:
    """Nearest-centroid token ids per group per 10 ms frame."""
    mels = mel_spectrogram(w, tok.mel_cfg)
    ids = np.stack(
        [_nearest(mels[:, sl], c) for sl, c in zip(tok.band_slices(), tok.centroids)],
        axis=1,
    )
    return TokenSeq(ids=ids)


def embed_tokens(t: TokenSeq, cb: CodebookSet) -> np.ndarray:
    """Concatenate each group's code-vector per frame, (frames, content_dim)."""
    if t.groups != cb.groups:
        raise ValueError(f"token groups {t.groups} != codebook groups {cb.groups}")
    cols = []
    for g, table in enumerate(cb.tables):
        ids = t.ids[:, g]
        if ids.size and ids.max() >= len(table):
            raise ValueError(f"token id {ids.max()} out of range for group {g}")
        cols.append(table[ids])
    return np.concatenate(cols, axis=1)


class SyntheticPromptExtractor:
    """Mel frames linearly projected to prompt_dim with a fixed-seed matrix."""

    def __init__(self, prompt_dim: int = 1024, mel_cfg: MelConfig | None = None, seed: int = 0):
        self.prompt_dim = prompt_dim
        self.mel_cfg = mel_cfg or MelConfig()
        self.seed = seed
        rng = np.random.default_rng(seed + 7)
        n_mels = self.mel_cfg.n_mels
        self.projection = rng.standard_normal((n_mels, prompt_dim)) / np.sqrt(n_mels)

    def extract(self, w: Waveform) -> np.ndarray:
        return mel_spectrogram(w, self.mel_cfg) @ self.projection


def mean_pool(prompt_frames: np.ndarray) -> np.ndarray:
    """Mean over the time axis: (frames, dim) -> (dim,).

    Values are summed in sorted order per dimension, so the result is
    bitwise identical under any permutation of the frames.
    """
    p = np.asarray(prompt_frames, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] < 1:
        raise ValueError("prompt frames must be a non-empty (frames, dim) matrix")
    return np.sort(p, axis=0).mean(axis=0)


def write_feature_file(path, matrix: np.ndarray) -> None:
    """Write a float32 matrix: magic 'FTR1', u32 rows, u32 cols, row-major f32."""
    m = np.ascontiguousarray(matrix, dtype="<f4")
    if m.ndim != 2:
        raise ValueError("feature matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<II", m.shape[0], m.shape[1]))
        fh.write(m.tobytes())


def read_feature_file(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FEATURE_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {FEATURE_MAGIC!r}")
        header = fh.read(8)
        if len(header) != 8:
            raise FormatError("truncated header")
        rows, cols = struct.unpack("<II", header)
        payload = fh.read()
    if len(payload) != rows * cols * 4:
        raise FormatError(f"payload is {len(payload)} bytes, expected {rows * cols * 4}")
    return np.frombuffer(payload, dtype="<f4").reshape(rows, cols).copy()


def write_token_file(path, tokens: TokenSeq) -> None:
    """Write token ids: magic 'TOK1', u32 frames, u32 groups, row-major i32."""
    ids = np.ascontiguousarray(tokens.ids, dtype="<i4")
    with open(path, "wb") as fh:
        fh.write(TOKEN_MAGIC)
        fh.write(struct.pack("<II", ids.shape[0], ids.shape[1]))
        fh.write(ids.tobytes())


def read_token_file(path) -> TokenSeq:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TOKEN_MAGIC:
            raise FormatError(f"bad magic {magic!r}, expected {TOKEN_MAGIC!r}")
        header = fh.read(8)
        if len(header) != 8:
            raise FormatError("truncated header")
        frames, groups, = struct.unpack("<II", header)
        payload = fh.read()
    if len(payload) != frames * groups * 4:
        raise FormatError(f"payload is {len(payload)} bytes, expected {frames * groups * 4}")
    ids = np.frombuffer(payload, dtype="<i4").reshape(frames, groups).copy()
    return TokenSeq(ids=ids)
