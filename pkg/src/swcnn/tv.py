"""Two-view region embedding training.

A region embedding relu(W x + b) is fitted so that a region predicts the
words of its adjacent regions: for every region position, the target is
the binary bag of in-vocabulary words in the union of the region
immediately to the left and the region immediately to the right (each as
wide as the region itself, clipped to the document).  A disposable linear
prediction layer maps the embedding into word-vocabulary space; the
weighted square loss is evaluated only on the target indices plus a small
sampled set of negative indices, so the per-example cost depends on the
number of targets and negatives, not on the vocabulary size.  Labels are
never read.  The prediction layer is discarded; only W, b survive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from swcnn.errors import DataError
from swcnn.kernels import relu_grad, sparse_affine
from swcnn.model import RegionEmbedding
from swcnn.textpipe import (
    OOV,
    EncodedDocument,
    RegionSpec,
    SparseRegionVector,
    Vocabulary,
    encode,
    region_count,
    region_vector,
)
from swcnn.train import sgd_momentum_step


@dataclass(eq=False)
class TvExample:
    """One (region, adjacent-words) training pair.

    ``target`` holds the sorted in-vocabulary word ids appearing in the
    adjacent regions (binary presence).  ``negatives`` is the sampled
    negative index set, disjoint from ``target``; it is attached when the
    example stream is armed for training.
    """

    input: SparseRegionVector
    target: np.ndarray
    negatives: np.ndarray | None = None


def make_tv_examples(
    input_doc: EncodedDocument, target_doc: EncodedDocument, spec: RegionSpec
) -> list[TvExample]:
    """Training pairs for every region position of one document.

    ``input_doc`` is the document encoded against the embedding's own
    vocabulary, ``target_doc`` against the word vocabulary the adjacent
    regions are predicted over.  Positions whose clipped adjacent union
    contains no in-vocabulary word are skipped.
    """
    if len(input_doc.ids) != len(target_doc.ids):
        raise ValueError("input and target encodings tokenize differently")
    p = spec.region_size
    length = len(target_doc.ids)
    target_ids = target_doc.ids
    examples = []
    for pos in range(region_count(length, p)):
        around = list(target_ids[max(0, pos - p) : pos])
        around.extend(target_ids[pos + p : min(length, pos + 2 * p)])
        target = np.unique(np.asarray([t for t in around if t != OOV], dtype=np.int64))
        if len(target) == 0:
            continue
        examples.append(TvExample(input=region_vector(input_doc, pos, spec), target=target))
    return examples


def sample_negatives(target: np.ndarray, vocab_size: int, m: int, rng) -> np.ndarray:
    """Uniform sample without replacement from the complement of target."""
    m = min(m, vocab_size - len(target))
    taken = set(int(t) for t in target)
    out: list[int] = []
    while len(out) < m:
        batch = rng.integers(0, vocab_size, size=max(16, 2 * (m - len(out))))
        for cand in batch.tolist():
            if cand not in taken:
                taken.add(cand)
                out.append(cand)
                if len(out) == m:
                    break
    return np.asarray(out, dtype=np.int64)


def weighted_square_loss(pred: np.ndarray, target: np.ndarray, weights: np.ndarray):
    """Loss and gradient over the weighted output dimensions only.

    Arguments are aligned vectors over the dimensions carrying nonzero
    weight; everything else contributes nothing and is never computed.
    """
    diff = pred - target
    loss = float(np.dot(weights, diff * diff))
    grad = 2.0 * weights * diff
    return loss, grad


@dataclass
class TvTrainConfig:
    seed: int = 0
    epochs: int = 10
    lr: float = 0.1
    negatives: int = 50
    momentum: float = 0.9
    batch_size: int = 100
    init_std: float = 0.01

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.negatives < 1:
            raise ValueError("epochs, batch_size and negatives must be >= 1")
        if self.lr < 0 or self.momentum < 0 or self.init_std <= 0:
            raise ValueError("invalid training rates")


def train_tv(
    corpus: Sequence[Sequence[str]],
    spec: RegionSpec,
    tv_vocab: Vocabulary,
    word_vocab: Vocabulary,
    d_tv: int,
    config: TvTrainConfig,
):
    """Fit a two-view region embedding on an unlabeled token corpus.

    Returns (embedding, per-epoch mean losses).  Initialization and the
    negative samples are drawn from a single generator seeded with
    ``config.seed``, so a fixed seed reproduces the embedding bitwise.
    Draw order: W, b, prediction weights, prediction bias, then per-doc
    negative sets, then per-epoch shuffles.
    """
    if len(corpus) == 0:
        raise DataError("tv training needs a non-empty corpus")
    if spec.vocab_size != len(tv_vocab):
        raise ValueError("spec vocab_size does not match the input vocabulary")
    rng = np.random.default_rng(config.seed)
    n_words = len(word_vocab)
    W = np.asfortranarray(rng.normal(0.0, config.init_std, size=(d_tv, spec.input_dim)))
    b = rng.normal(0.0, config.init_std, size=d_tv)
    head_W = rng.normal(0.0, config.init_std, size=(n_words, d_tv))
    head_b = rng.normal(0.0, config.init_std, size=n_words)

    examples: list[TvExample] = []
    for tokens in corpus:
        input_doc = encode(tokens, tv_vocab)
        target_doc = input_doc if tv_vocab is word_vocab else encode(tokens, word_vocab)
        for ex in make_tv_examples(input_doc, target_doc, spec):
            ex.negatives = sample_negatives(ex.target, n_words, config.negatives, rng)
            examples.append(ex)
    if not examples:
        raise DataError("no tv examples")

    params = [W, b, head_W, head_b]
    velocity = [np.zeros_like(p) for p in params]
    dW, db = np.zeros_like(W), np.zeros_like(b)
    dhead_W, dhead_b = np.zeros_like(head_W), np.zeros_like(head_b)
    grads = [dW, db, dhead_W, dhead_b]
    n = len(examples)
    epoch_losses = []
    for _ in range(config.epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            for g in grads:
                g[...] = 0.0
            for idx in batch:
                ex = examples[idx]
                z = sparse_affine(W, b, ex.input)
                h = np.maximum(z, 0.0)
                out_idx = np.concatenate([ex.target, ex.negatives])
                target_vals = np.zeros(len(out_idx))
                target_vals[: len(ex.target)] = 1.0
                pred = head_W[out_idx] @ h + head_b[out_idx]
                loss, dpred = weighted_square_loss(pred, target_vals, np.ones(len(out_idx)))
                loss_sum += loss
                dhead_W[out_idx] += np.outer(dpred, h)
                dhead_b[out_idx] += dpred
                dz = relu_grad(z, head_W[out_idx].T @ dpred)
                if ex.input.nnz:
                    dW[:, ex.input.indices] += np.outer(dz, ex.input.values)
                db += dz
            for g in grads:
                g *= 1.0 / len(batch)
            sgd_momentum_step(params, grads, velocity, config.lr, config.momentum)
        epoch_losses.append(loss_sum / n)
    embedding = RegionEmbedding(spec=spec, vocab=tv_vocab, W=W, b=b)
    return embedding, epoch_losses
