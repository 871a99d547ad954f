"""Model wrapper: batched feature vectors and entailment probabilities.

The feature vector for a pair is the encoder's final-layer hidden state at
the summary position (index 0). The entailment probability is the softmax
mass on the classification head's entailment class. Inference runs in eval
mode under ``no_grad``, so identical inputs give identical outputs.
"""

from __future__ import annotations

import numpy as np
import torch

from .config import ServiceConfig

# Tokenizers report a huge sentinel for "no limit"; treat anything above
# this as unset and fall back to the encoder's position table size.
_MAX_LENGTH_SENTINEL = 100_000


class ModelError(RuntimeError):
    """The model cannot serve the requested endpoints."""


def resolve_entailment_index(label2id: dict[str, int], label_substring: str,
                             override: int | None, n_labels: int) -> int:
    """Index of the entailment class on the classification head."""
    if override is not None:
        if override >= n_labels:
            raise ModelError(
                f"entailment_index {override} out of range for {n_labels} labels")
        return override
    needle = label_substring.casefold()
    matches = [idx for name, idx in label2id.items() if needle in name.casefold()]
    if len(matches) != 1:
        raise ModelError(
            f"cannot resolve entailment class: {len(matches)} labels match "
            f"'{label_substring}' in {sorted(label2id)}; "
            f"set entailment_index explicitly")
    return matches[0]


class NliModel:
    """Loaded tokenizer + encoder serving feature and probability batches."""

    def __init__(self, config: ServiceConfig):
        # Imported here so module import stays cheap for config-only callers.
        from transformers import AutoModelForSequenceClassification, AutoTokenizer

        self.config = config
        self.tokenizer = AutoTokenizer.from_pretrained(config.model_id)
        self.model = AutoModelForSequenceClassification.from_pretrained(
            config.model_id)
        self.model.to(torch.device(config.device))
        self.model.eval()

        self.dim = int(self.model.config.hidden_size)
        if config.dim is not None and config.dim != self.dim:
            raise ModelError(
                f"configured dim {config.dim} does not match the model's "
                f"summary-vector width {self.dim}")

        self.entailment_index = resolve_entailment_index(
            dict(self.model.config.label2id), config.entailment_label,
            config.entailment_index, int(self.model.config.num_labels))

        max_length = int(self.tokenizer.model_max_length)
        if max_length > _MAX_LENGTH_SENTINEL:
            max_length = int(self.model.config.max_position_embeddings)
        self.max_length = max_length

    # -- encoding -----------------------------------------------------------

    def _encode_pair(self, premise: str, hypothesis: str):
        """One pair's token ids, truncated premise-first, plus a flag.

        The premise is truncated before the hypothesis; when the hypothesis
        alone exceeds the window, both sides are trimmed instead (the
        premise-first strategy cannot shorten the pair enough and refuses).
        """
        untruncated = self.tokenizer(premise, hypothesis, truncation=False,
                                     verbose=False)
        truncated = len(untruncated["input_ids"]) > self.max_length
        if not truncated:
            return untruncated, False
        try:
            encoding = self.tokenizer(premise, hypothesis, truncation="only_first",
                                      max_length=self.max_length)
        except Exception:
            encoding = self.tokenizer(premise, hypothesis, truncation="longest_first",
                                      max_length=self.max_length)
        return encoding, True

    def _encode_batch(self, pairs: list[tuple[str, str]]):
        encodings = []
        flags = []
        for premise, hypothesis in pairs:
            encoding, flag = self._encode_pair(premise, hypothesis)
            encodings.append(encoding)
            flags.append(flag)
        batch = self.tokenizer.pad(encodings, return_tensors="pt")
        batch = {name: tensor.to(self.model.device)
                 for name, tensor in batch.items()}
        return batch, flags

    # -- endpoints ----------------------------------------------------------

    def features(self, pairs: list[tuple[str, str]]) -> tuple[np.ndarray, list[bool]]:
        """Summary-position vector per pair, in request order."""
        batch, flags = self._encode_batch(pairs)
        with torch.no_grad():
            output = self.model(**batch, output_hidden_states=True)
        vectors = output.hidden_states[-1][:, 0, :]
        return vectors.cpu().numpy().astype(np.float32), flags

    def probs(self, pairs: list[tuple[str, str]]) -> tuple[list[float], list[bool]]:
        """Entailment-class probability per pair, in request order."""
        batch, flags = self._encode_batch(pairs)
        with torch.no_grad():
            output = self.model(**batch)
        probabilities = torch.softmax(output.logits, dim=-1)
        entailment = probabilities[:, self.entailment_index]
        return [float(p) for p in entailment.cpu()], flags
