"""Assembly of classifier inputs from interpreter outputs.

The input representation u(x) concatenates interpreter vectors over the label
descriptions; the explanation representation v(x) concatenates them over the
explanations in file order. The final classifier input is [u, v, extras] with
an ordered manifest of (source id, offset, length) blocks so downstream code
can locate, ablate, or project any block without guessing offsets.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cache import FeatureCache
from .data import Explanation, Instance, LabelSpace
from .errors import DataError
from .hashing import config_hash
from .interpreters import Interpreter
from .templating import instantiate

PATTERN_SOURCE = "patterns"


@dataclass(frozen=True)
class Block:
    """One named contiguous span of an assembled vector."""

    source_id: str
    offset: int
    length: int

    @property
    def stop(self) -> int:
        return self.offset + self.length


@dataclass(frozen=True)
class SegmentedVector:
    """A 1-D float32 vector plus the manifest of blocks that tile it."""

    values: np.ndarray
    blocks: tuple[Block, ...]

    def __post_init__(self):
        if self.values.ndim != 1:
            raise DataError(f"segmented vector must be 1-D, got shape {self.values.shape}")
        offset = 0
        for block in self.blocks:
            if block.offset != offset or block.length < 1:
                raise DataError(f"manifest block '{block.source_id}' is not contiguous")
            offset = block.stop
        if offset != self.values.size:
            raise DataError(
                f"manifest covers {offset} values but vector has {self.values.size}")

    @property
    def dim(self) -> int:
        return int(self.values.size)

    def block_values(self, source_id: str) -> np.ndarray:
        for block in self.blocks:
            if block.source_id == source_id:
                return self.values[block.offset : block.stop]
        raise DataError(f"no block named '{source_id}'")


EMPTY_VECTOR = SegmentedVector(values=np.zeros(0, dtype=np.float32), blocks=())


@dataclass(frozen=True)
class AssembledRepresentation:
    """Classifier input [u, v, extras] with its manifest."""

    values: np.ndarray
    manifest: tuple[Block, ...]
    u_dim: int
    v_dim: int

    @property
    def dim(self) -> int:
        return int(self.values.size)

    @property
    def u(self) -> np.ndarray:
        return self.values[: self.u_dim]

    @property
    def v(self) -> np.ndarray:
        return self.values[self.u_dim : self.u_dim + self.v_dim]

    def block_values(self, source_id: str) -> np.ndarray:
        for block in self.manifest:
            if block.source_id == source_id:
                return self.values[block.offset : block.stop]
        raise DataError(f"no block named '{source_id}'")


def _concat_blocks(
    instance: Instance,
    sources: list[tuple[str, str]],
    interpreter: Interpreter,
) -> SegmentedVector:
    texts = [instantiate(instance, template, source_id) for source_id, template in sources]
    vectors = interpreter.interpret_many([(instance, t.text) for t in texts])
    if vectors.shape != (len(sources), interpreter.dim):
        raise DataError(
            f"interpreter returned shape {vectors.shape}, "
            f"expected {(len(sources), interpreter.dim)}")
    blocks = tuple(
        Block(source_id=source_id, offset=i * interpreter.dim, length=interpreter.dim)
        for i, (source_id, _template) in enumerate(sources))
    return SegmentedVector(values=np.ascontiguousarray(vectors, dtype=np.float32).reshape(-1),
                           blocks=blocks)


def build_u(instance: Instance, label_space: LabelSpace, interpreter: Interpreter) -> SegmentedVector:
    """Interpret the instance against every label description, in label order."""
    if not label_space.labels:
        raise DataError("label space is empty")
    sources = [(f"label:{label.name}", label.description) for label in label_space.labels]
    return _concat_blocks(instance, sources, interpreter)


def build_v(
    instance: Instance,
    explanations: list[Explanation],
    interpreter: Interpreter | None,
) -> SegmentedVector:
    """Interpret the instance against every explanation, in file order.

    Returns the empty vector when there are no explanations (the
    no-explanation baseline). A whole-instance interpreter (patterns)
    produces one block covering all its bits instead of per-explanation
    blocks.
    """
    if not explanations or interpreter is None:
        return EMPTY_VECTOR
    if not interpreter.per_text:
        values = interpreter.interpret(instance, "")
        block = Block(source_id=PATTERN_SOURCE, offset=0, length=int(values.size))
        return SegmentedVector(values=np.asarray(values, dtype=np.float32), blocks=(block,))
    sources = [(f"exp:{exp.id}", exp.template) for exp in explanations]
    return _concat_blocks(instance, sources, interpreter)


def assemble(
    u: SegmentedVector,
    v: SegmentedVector = EMPTY_VECTOR,
    extras: tuple[tuple[str, np.ndarray], ...] = (),
) -> AssembledRepresentation:
    """Concatenate [u, v, extras] in that fixed order with a manifest."""
    if u.dim == 0:
        raise DataError("u must be non-empty")
    parts = [u.values, v.values]
    manifest = list(u.blocks)
    offset = u.dim
    for block in v.blocks:
        manifest.append(Block(block.source_id, offset + block.offset, block.length))
    offset += v.dim
    for source_id, values in extras:
        arr = np.asarray(values, dtype=np.float32).reshape(-1)
        if arr.size == 0:
            raise DataError(f"extra block '{source_id}' is empty")
        parts.append(arr)
        manifest.append(Block(source_id, offset, int(arr.size)))
        offset += int(arr.size)
    return AssembledRepresentation(
        values=np.concatenate(parts),
        manifest=tuple(manifest),
        u_dim=u.dim,
        v_dim=v.dim,
    )


def assemble_matrix(
    instances: list[Instance],
    label_space: LabelSpace,
    u_interpreter: Interpreter,
    explanations: list[Explanation] | None = None,
    v_interpreter: Interpreter | None = None,
    extra_interpreters: tuple[tuple[str, Interpreter], ...] = (),
) -> tuple[np.ndarray, tuple[Block, ...]]:
    """Assemble the full design matrix for a list of instances.

    Every instance must produce the same manifest; rows follow instance
    order. Returns (matrix of shape (n, dim), shared manifest).
    """
    if not instances:
        raise DataError("cannot assemble a matrix from zero instances")
    rows = []
    manifest: tuple[Block, ...] | None = None
    for instance in instances:
        u = build_u(instance, label_space, u_interpreter)
        v = build_v(instance, explanations or [], v_interpreter)
        extras = tuple(
            (source_id, interp.interpret(instance, ""))
            for source_id, interp in extra_interpreters)
        rep = assemble(u, v, extras)
        if manifest is None:
            manifest = rep.manifest
        elif rep.manifest != manifest:
            raise DataError(f"instance '{instance.id}' produced a mismatched manifest")
        rows.append(rep.values)
    return np.stack(rows), manifest


def manifest_digest(manifest: tuple[Block, ...]) -> str:
    """Stable hex id of a manifest layout, used to key exported matrices."""
    payload = [[b.source_id, b.offset, b.length] for b in manifest]
    return config_hash(payload)[:32]


def export_matrix(
    path: str,
    instances: list[Instance],
    matrix: np.ndarray,
    manifest: tuple[Block, ...],
) -> None:
    """Write an assembled matrix to the feature cache format, one row per instance."""
    if matrix.shape[0] != len(instances):
        raise DataError(f"matrix has {matrix.shape[0]} rows for {len(instances)} instances")
    digest = manifest_digest(manifest)
    with FeatureCache(path, dim=matrix.shape[1], mode="a") as cache:
        for instance, row in zip(instances, matrix):
            cache.put(instance.id, digest, row)


def load_matrix(path: str, instances: list[Instance], manifest: tuple[Block, ...]) -> np.ndarray:
    """Read back a matrix exported with export_matrix, in instance order."""
    digest = manifest_digest(manifest)
    with FeatureCache(path, dim=sum(b.length for b in manifest), mode="r") as cache:
        return cache.get_rows([(instance.id, digest) for instance in instances])
