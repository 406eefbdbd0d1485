"""Sparse masked attention pooling.

Per mask: gather member points, add a positional encoding of each point's
offset from the group centroid, use the group mean as the query of one
multi-head scaled dot-product attention over the members, project with wo and
L2-normalise. Forward runs on zero-padded J x L tensors with padded slots
removed from the mean and from the softmax; gradients are derived by hand,
one group at a time in mask order.
"""
from __future__ import annotations

import logging
from typing import Dict, Optional, Tuple

import numpy as np

from ..exceptions import DimensionMismatchError, EmptyInputError, SchemaError
from ..models import SmapBatch, SmapParams

logger = logging.getLogger(__name__)


def _check_dims(batch: SmapBatch, params: SmapParams) -> None:
    if batch.dim != params.dim:
        raise DimensionMismatchError(f'batch features have C={batch.dim}, params expect C={params.dim}')


def _masked_softmax(scores: np.ndarray, valid: np.ndarray) -> np.ndarray:
    """Softmax over the last axis with invalid slots forced to exactly zero."""
    masked = np.where(valid, scores, -np.inf)
    peak = np.max(masked, axis=-1, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    weights = np.where(valid, np.exp(masked - peak), 0.0)
    total = np.sum(weights, axis=-1, keepdims=True)
    return np.divide(weights, total, out=np.zeros_like(weights), where=total > 0)


class SmapService:

    @staticmethod
    def positional_encoding(coords: np.ndarray, centroid: np.ndarray, params: SmapParams) -> np.ndarray:
        """MLP(p - centroid): one ReLU hidden layer, C outputs."""
        offsets = np.asarray(coords, dtype=np.float64) - np.asarray(centroid, dtype=np.float64)
        hidden = np.maximum(offsets @ params.pe_w1 + params.pe_b1, 0.0)
        return hidden @ params.pe_w2 + params.pe_b2

    @staticmethod
    def smap_forward(
        batch: SmapBatch,
        params: SmapParams,
        use_pe: bool = True,
        pad_to: Optional[int] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Pooled J x C features and the per-mask empty flags.

        ``pad_to`` widens the padded group length; the result does not depend on it.
        """
        _check_dims(batch, params)
        masks = batch.masks.masks
        num_masks, dim = masks.shape[0], params.dim
        empty = ~masks.any(axis=1)
        pooled = np.zeros((num_masks, dim))
        active = np.flatnonzero(~empty)
        if active.size == 0:
            return pooled, empty

        counts = masks[active].sum(axis=1)
        length = max(int(counts.max()), int(pad_to or 0))
        index = np.zeros((active.size, length), dtype=np.int64)
        valid = np.zeros((active.size, length), dtype=bool)
        for row, j in enumerate(active):
            members = np.flatnonzero(masks[j])
            index[row, :members.size] = members
            valid[row, :members.size] = True

        slot = valid[..., None]
        feats = np.where(slot, batch.features[index], 0.0)
        encoded = feats
        if use_pe:
            pts = np.where(slot, batch.coords[index], 0.0)
            centroid = pts.sum(axis=1) / counts[:, None]
            offsets = np.where(slot, pts - centroid[:, None, :], 0.0)
            hidden = np.maximum(offsets @ params.pe_w1 + params.pe_b1, 0.0)
            encoded = np.where(slot, feats + hidden @ params.pe_w2 + params.pe_b2, 0.0)

        query = (encoded.sum(axis=1) / counts[:, None]) @ params.wq
        keys = encoded @ params.wk
        values = encoded @ params.wv

        heads = params.heads
        head_dim = dim // heads
        q = query.reshape(active.size, heads, head_dim)
        k = keys.reshape(active.size, length, heads, head_dim)
        v = values.reshape(active.size, length, heads, head_dim)
        scores = np.einsum('jhd,jlhd->jhl', q, k) / np.sqrt(head_dim)
        attn = _masked_softmax(scores, valid[:, None, :])
        heads_out = np.einsum('jhl,jlhd->jhd', attn, v).reshape(active.size, dim)

        out = heads_out @ params.wo
        norms = np.linalg.norm(out, axis=1, keepdims=True)
        pooled[active] = np.divide(out, norms, out=np.zeros_like(out), where=norms > 0)
        logger.debug('smap_forward: J=%d (empty=%d) L=%d C=%d heads=%d', num_masks, int(empty.sum()), length, dim, heads)
        return pooled, empty

    @staticmethod
    def smap_loss(pooled: np.ndarray, targets: np.ndarray, empty_flags: np.ndarray) -> float:
        """Mean squared error over non-empty masks and all channels."""
        pooled = np.asarray(pooled, dtype=np.float64)
        targets = np.asarray(targets, dtype=np.float64)
        if pooled.shape != targets.shape:
            raise DimensionMismatchError(f'pooled {pooled.shape} vs targets {targets.shape}')
        keep = ~np.asarray(empty_flags, dtype=bool)
        if not keep.any():
            raise EmptyInputError('every mask is empty; the loss is undefined')
        diff = pooled[keep] - targets[keep]
        return float(np.mean(diff * diff))

    @staticmethod
    def _group_forward(feats: np.ndarray, coords: np.ndarray, params: SmapParams, use_pe: bool) -> Dict[str, np.ndarray]:
        size = feats.shape[0]
        cache = {'size': size}
        encoded = feats
        if use_pe:
            offsets = coords - coords.mean(axis=0)
            pre = offsets @ params.pe_w1 + params.pe_b1
            act = np.maximum(pre, 0.0)
            encoded = feats + act @ params.pe_w2 + params.pe_b2
            cache.update(offsets=offsets, pre=pre, act=act)
        mean = encoded.mean(axis=0)
        query = mean @ params.wq
        keys = encoded @ params.wk
        values = encoded @ params.wv

        head_dim = params.dim // params.heads
        attn = np.zeros((params.heads, size))
        mixed = np.zeros(params.dim)
        for h in range(params.heads):
            sl = slice(h * head_dim, (h + 1) * head_dim)
            scores = keys[:, sl] @ query[sl] / np.sqrt(head_dim)
            scores = np.exp(scores - scores.max())
            attn[h] = scores / scores.sum()
            mixed[sl] = attn[h] @ values[:, sl]

        out = mixed @ params.wo
        norm = float(np.linalg.norm(out))
        pooled = out / norm if norm > 0 else np.zeros_like(out)
        cache.update(
            encoded=encoded, mean=mean, query=query, keys=keys, values=values,
            attn=attn, mixed=mixed, norm=norm, pooled=pooled, head_dim=head_dim,
        )
        return cache

    @staticmethod
    def _group_backward(cache: Dict[str, np.ndarray], d_pooled: np.ndarray, params: SmapParams,
                        grads: Dict[str, np.ndarray], use_pe: bool) -> None:
        norm = cache['norm']
        if norm == 0:
            return
        pooled = cache['pooled']
        d_out = (d_pooled - pooled * (pooled @ d_pooled)) / norm
        grads['wo'] += np.outer(cache['mixed'], d_out)
        d_mixed = params.wo @ d_out

        head_dim = cache['head_dim']
        scale = np.sqrt(head_dim)
        keys, values, query, attn = cache['keys'], cache['values'], cache['query'], cache['attn']
        d_query = np.zeros(params.dim)
        d_keys = np.zeros_like(keys)
        d_values = np.zeros_like(values)
        for h in range(params.heads):
            sl = slice(h * head_dim, (h + 1) * head_dim)
            d_values[:, sl] = np.outer(attn[h], d_mixed[sl])
            d_attn = values[:, sl] @ d_mixed[sl]
            d_scores = attn[h] * (d_attn - attn[h] @ d_attn)
            d_query[sl] = keys[:, sl].T @ d_scores / scale
            d_keys[:, sl] = np.outer(d_scores, query[sl]) / scale

        encoded = cache['encoded']
        grads['wq'] += np.outer(cache['mean'], d_query)
        grads['wk'] += encoded.T @ d_keys
        grads['wv'] += encoded.T @ d_values
        d_encoded = d_keys @ params.wk.T + d_values @ params.wv.T + (params.wq @ d_query)[None, :] / cache['size']

        if use_pe:
            grads['pe_w2'] += cache['act'].T @ d_encoded
            grads['pe_b2'] += d_encoded.sum(axis=0)
            d_pre = (d_encoded @ params.pe_w2.T) * (cache['pre'] > 0)
            grads['pe_w1'] += cache['offsets'].T @ d_pre
            grads['pe_b1'] += d_pre.sum(axis=0)

    @staticmethod
    def smap_value_and_gradients(batch: SmapBatch, params: SmapParams, use_pe: bool = True) -> Tuple[float, SmapParams]:
        """MSE loss and its exact gradient w.r.t. every weight.

        Groups are accumulated in mask order so repeated runs sum identically.
        """
        _check_dims(batch, params)
        if batch.targets is None:
            raise SchemaError('gradients need distillation targets')
        masks = batch.masks.masks
        active = np.flatnonzero(masks.any(axis=1))
        if active.size == 0:
            raise EmptyInputError('every mask is empty; the loss is undefined')

        grads = {name: np.zeros_like(value) for name, value in params.weights()}
        scale = 2.0 / (active.size * params.dim)
        total = 0.0
        for j in active:
            members = np.flatnonzero(masks[j])
            cache = SmapService._group_forward(batch.features[members], batch.coords[members], params, use_pe)
            residual = cache['pooled'] - batch.targets[j]
            total += float(residual @ residual)
            SmapService._group_backward(cache, scale * residual, params, grads, use_pe)
        loss = total / (active.size * params.dim)
        return loss, params.with_weights(**grads)

    @staticmethod
    def smap_gradients(batch: SmapBatch, params: SmapParams, use_pe: bool = True) -> SmapParams:
        return SmapService.smap_value_and_gradients(batch, params, use_pe)[1]
