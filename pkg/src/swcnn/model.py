"""The shallow word-level CNN: region sweep, fusion, pooling, top layer.

A document of L tokens yields R = max(1, L - p + 1) region positions for
base region size p.  Each position produces a feature vector

    h = relu(W x + sum_i F_i relu(W_i x_i + b_i) + b)

where x is the sparse base representation of the region and each optional
two-view embedding i contributes its frozen output on its own view x_i of
the same position (the fusion matrices F_i are trained, the embeddings
W_i, b_i are not).  The R region vectors are max-pooled into k units
(unit u covers positions [floor(u*R/k), floor((u+1)*R/k)), empty units
emit zeros), concatenated, passed through inverted dropout in train mode,
and mapped to class scores by a linear layer.

For speed the sweep is organized around "slot incidence" lists: per view,
each slot of the representation (one per region-local position, or one
per (n-gram-length, offset) pair) stores which region rows receive which
weight columns, so a document's whole sweep is a handful of vectorized
gather-adds instead of a Python loop over positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from swcnn.kernels import relu
from swcnn.textpipe import (
    BOW_WORD,
    CONCAT,
    OOV,
    EncodedDocument,
    RegionSpec,
    Vocabulary,
    encode,
    region_count,
)


@dataclass
class RegionEmbedding:
    """An affine map over one sparse region view, with its vocabulary."""

    spec: RegionSpec
    vocab: Vocabulary
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        d, n = self.W.shape
        if n != self.spec.input_dim:
            raise ValueError(f"W has {n} columns, spec input dim is {self.spec.input_dim}")
        if self.b.shape != (d,):
            raise ValueError("bias does not match W")
        if len(self.vocab) != self.spec.vocab_size:
            raise ValueError("vocabulary size does not match spec")

    @property
    def dim(self) -> int:
        return self.W.shape[0]


@dataclass
class TvEmbedding:
    """A frozen two-view region embedding plus its trained fusion matrix."""

    embedding: RegionEmbedding
    fusion: np.ndarray

    def __post_init__(self):
        if self.fusion.shape[1] != self.embedding.dim:
            raise ValueError("fusion column count must equal the embedding dimension")


@dataclass
class ShallowModel:
    base: RegionEmbedding
    tvs: tuple[TvEmbedding, ...]
    pooling_k: int
    top_W: np.ndarray
    top_b: np.ndarray
    dropout_rate: float = 0.5

    def __post_init__(self):
        self.tvs = tuple(self.tvs)
        if self.pooling_k < 1:
            raise ValueError("pooling_k must be >= 1")
        n_classes, feat = self.top_W.shape
        if feat != self.base.dim * self.pooling_k:
            raise ValueError("top layer input dimension must be base dim * pooling_k")
        if self.top_b.shape != (n_classes,):
            raise ValueError("top bias does not match top weights")
        for tv in self.tvs:
            if tv.fusion.shape[0] != self.base.dim:
                raise ValueError("fusion rows must equal the base embedding dimension")

    @property
    def n_classes(self) -> int:
        return self.top_W.shape[0]

    @property
    def views(self) -> list[tuple[RegionSpec, Vocabulary]]:
        out = [(self.base.spec, self.base.vocab)]
        out.extend((tv.embedding.spec, tv.embedding.vocab) for tv in self.tvs)
        return out

    def trainable_params(self) -> list[np.ndarray]:
        params = [self.base.W, self.base.b]
        params.extend(tv.fusion for tv in self.tvs)
        params.extend([self.top_W, self.top_b])
        return params


@dataclass(frozen=True)
class ModelDoc:
    """One document encoded against every view of a model."""

    label: int
    views: tuple[EncodedDocument, ...]


def encode_document(
    views: Sequence[tuple[RegionSpec, Vocabulary]], tokens: Sequence[str], label: int = 0
) -> ModelDoc:
    return ModelDoc(label=label, views=tuple(encode(tokens, vocab, label) for _, vocab in views))


@dataclass
class PreparedView:
    # one (rows, cols) pair per slot: region row `rows[j]` receives weight
    # column `cols[j]` with coefficient 1
    slots: list[tuple[np.ndarray, np.ndarray]]
    input_dim: int


@dataclass
class PreparedDoc:
    label: int
    n_regions: int
    views: tuple[PreparedView, ...]


def _view_slots(enc: EncodedDocument, spec: RegionSpec, n_regions: int) -> PreparedView:
    ids = np.asarray(enc.ids, dtype=np.int64)
    length = len(ids)
    p = spec.region_size
    v = spec.vocab_size
    slots: list[tuple[np.ndarray, np.ndarray]] = []
    if spec.representation in (CONCAT, BOW_WORD):
        for s in range(p):
            upper = min(n_regions, length - s)
            if upper <= 0:
                continue
            window = ids[s : s + upper]
            rows = np.nonzero(window != OOV)[0]
            if len(rows) == 0:
                continue
            cols = window[rows]
            if spec.representation == CONCAT:
                cols = cols + s * v
            slots.append((rows, cols))
    else:
        if enc.ngram_ids is None:
            raise ValueError("bow-ngram123 views need an n-gram encoded document")
        grams = np.asarray(enc.ngram_ids, dtype=np.int64).reshape(length, 3) if length else np.zeros((0, 3), dtype=np.int64)
        for n in (1, 2, 3):
            for s in range(p - n + 1):
                upper = min(n_regions, length - s)
                if upper <= 0:
                    continue
                window = grams[s : s + upper, n - 1]
                rows = np.nonzero(window != OOV)[0]
                if len(rows) == 0:
                    continue
                slots.append((rows, window[rows]))
    return PreparedView(slots=slots, input_dim=spec.input_dim)


def prepare_document(
    views: Sequence[tuple[RegionSpec, Vocabulary]], doc: ModelDoc
) -> PreparedDoc:
    """Precompute the slot incidence of every view of one document.

    This is the "input vector generation" step: after it, a forward pass
    touches only weight gathers, adds and the top layer.
    """
    if len(doc.views) != len(views):
        raise ValueError(f"document has {len(doc.views)} views, model has {len(views)}")
    base_spec = views[0][0]
    n_regions = region_count(len(doc.views[0].ids), base_spec.region_size)
    prepared = tuple(
        _view_slots(enc, spec, n_regions)
        for enc, (spec, _) in zip(doc.views, views)
    )
    return PreparedDoc(label=doc.label, n_regions=n_regions, views=prepared)


def prepare_tokens(model_views, tokens: Sequence[str], label: int = 0) -> PreparedDoc:
    return prepare_document(model_views, encode_document(model_views, tokens, label))


def embed_regions(W: np.ndarray, view: PreparedView, n_regions: int) -> np.ndarray:
    """Accumulate W x for every region position of one view, as (R, d)."""
    if W.shape[1] != view.input_dim:
        raise ValueError(f"view input dim {view.input_dim} does not match W")
    Wt = W.T
    Z = np.zeros((n_regions, W.shape[0]))
    for rows, cols in view.slots:
        Z[rows] += Wt[cols]
    return Z


def pooling_bounds(n_regions: int, k: int) -> list[tuple[int, int]]:
    return [(u * n_regions // k, (u + 1) * n_regions // k) for u in range(k)]


def max_pool(H: np.ndarray, k: int):
    """k-unit max pooling; returns (pooled (k, d), source rows (k, d)).

    Empty units emit zeros and row index -1.  Ties go to the earliest
    position so gradient routing is deterministic.
    """
    n_regions, d = H.shape
    pooled = np.zeros((k, d))
    rows = np.full((k, d), -1, dtype=np.int64)
    for u, (lo, hi) in enumerate(pooling_bounds(n_regions, k)):
        if hi > lo:
            block = H[lo:hi]
            arg = block.argmax(axis=0)
            pooled[u] = block[arg, np.arange(d)]
            rows[u] = lo + arg
    return pooled, rows


@dataclass
class ForwardCache:
    prep: PreparedDoc
    tv_outputs: list[np.ndarray]
    relu_mask: np.ndarray          # (R, d) bool, region pre-activation > 0
    pool_rows: np.ndarray          # (k, d) source row per pooled unit
    dropout_scale: np.ndarray | None  # (k*d,) 0 or 1/(1-rate), None in infer mode
    top_input: np.ndarray          # (k*d,) the vector the top layer saw


def forward(model: ShallowModel, doc, train: bool = False, rng=None):
    """Full forward pass; returns (logits, cache).

    ``doc`` may be a PreparedDoc or a ModelDoc.  In train mode a seeded
    ``rng`` must be supplied whenever the dropout rate is nonzero; the
    dropout mask is the only source of randomness.  Inference applies no
    dropout and no scaling.
    """
    if isinstance(doc, ModelDoc):
        doc = prepare_document(model.views, doc)
    if len(doc.views) != 1 + len(model.tvs):
        raise ValueError("document views do not match the model")
    Z = embed_regions(model.base.W, doc.views[0], doc.n_regions)
    tv_outputs = []
    for tv, view in zip(model.tvs, doc.views[1:]):
        hidden = embed_regions(tv.embedding.W, view, doc.n_regions)
        hidden += tv.embedding.b
        np.maximum(hidden, 0.0, out=hidden)
        tv_outputs.append(hidden)
        Z += hidden @ tv.fusion.T
    Z += model.base.b
    H = relu(Z)
    pooled, pool_rows = max_pool(H, model.pooling_k)
    v = pooled.ravel()
    dropout_scale = None
    if train and model.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("train-mode forward with dropout needs an rng")
        keep = rng.random(v.shape) >= model.dropout_rate
        dropout_scale = keep / (1.0 - model.dropout_rate)
        v = v * dropout_scale
    logits = model.top_W @ v + model.top_b
    cache = ForwardCache(
        prep=doc,
        tv_outputs=tv_outputs,
        relu_mask=H > 0.0,
        pool_rows=pool_rows,
        dropout_scale=dropout_scale,
        top_input=v,
    )
    return logits, cache


@dataclass
class ModelGrads:
    base_W: np.ndarray
    base_b: np.ndarray
    fusions: list[np.ndarray]
    top_W: np.ndarray
    top_b: np.ndarray

    def as_list(self) -> list[np.ndarray]:
        return [self.base_W, self.base_b, *self.fusions, self.top_W, self.top_b]

    def add_(self, other: "ModelGrads") -> None:
        for mine, theirs in zip(self.as_list(), other.as_list()):
            mine += theirs

    def scale_(self, factor: float) -> None:
        for g in self.as_list():
            g *= factor


def zero_grads(model: ShallowModel) -> ModelGrads:
    return ModelGrads(
        base_W=np.zeros_like(model.base.W),
        base_b=np.zeros_like(model.base.b),
        fusions=[np.zeros_like(tv.fusion) for tv in model.tvs],
        top_W=np.zeros_like(model.top_W),
        top_b=np.zeros_like(model.top_b),
    )


def backward(model: ShallowModel, cache: ForwardCache, grad_logits: np.ndarray, out: ModelGrads | None = None) -> ModelGrads:
    """Exact gradients of the forward pass for all trainable parameters.

    Two-view embedding internals receive no gradient by construction.
    When ``out`` is given, gradients are accumulated into it in place.
    """
    if len(cache.prep.views) != 1 + len(model.tvs):
        raise ValueError("cache does not match the model")
    grads = out if out is not None else zero_grads(model)
    k = model.pooling_k
    d = model.base.dim
    v = cache.top_input
    grads.top_W += np.outer(grad_logits, v)
    grads.top_b += grad_logits
    dv = model.top_W.T @ grad_logits
    if cache.dropout_scale is not None:
        dv = dv * cache.dropout_scale
    dpool = dv.reshape(k, d)
    n_regions = cache.prep.n_regions
    dH = np.zeros((n_regions, d))
    col_range = np.arange(d)
    for u in range(k):
        rows = cache.pool_rows[u]
        valid = rows >= 0
        if valid.any():
            # (row, col) pairs are unique within a unit and units cover
            # disjoint position spans, so fancy += does not collide
            dH[rows[valid], col_range[valid]] += dpool[u][valid]
    dZ = np.where(cache.relu_mask, dH, 0.0)
    _scatter_embedding_grad(grads.base_W, dZ, cache.prep.views[0])
    grads.base_b += dZ.sum(axis=0)
    for df, tv_out in zip(grads.fusions, cache.tv_outputs):
        df += dZ.T @ tv_out
    return grads


def _scatter_embedding_grad(dW: np.ndarray, dZ: np.ndarray, view: PreparedView) -> None:
    dWt = dW.T
    for rows, cols in view.slots:
        # duplicate columns are possible across rows, add.at is unbuffered
        np.add.at(dWt, cols, dZ[rows])


def count_parameters(model: ShallowModel) -> int:
    """Total number of weights: base map, per-tv map and fusion, top layer."""
    total = model.base.W.size + model.base.b.size
    for tv in model.tvs:
        total += tv.embedding.W.size + tv.embedding.b.size + tv.fusion.size
    total += model.top_W.size + model.top_b.size
    return int(total)


def predict(model: ShallowModel, doc) -> int:
    """Class with the highest score; ties go to the lowest class index."""
    logits, _ = forward(model, doc, train=False)
    return int(np.argmax(logits))
