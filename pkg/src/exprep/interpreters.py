"""Feature interpreters: functions from (instance, text) to a fixed-dim vector.

Six kinds are supported:

* ``nli_features`` -- summary vector of a remote sentence-pair encoder.
* ``nli_prob``     -- single entailment probability from the same service.
* ``feature_store`` -- rows read from an existing feature cache file.
* ``hash``         -- keyed pseudo-random vectors; a fully offline,
                      cross-platform-deterministic stand-in for the encoder.
* ``pattern``      -- binary n-gram containment features over the sentence.
* ``ontology``     -- binary entity-pair membership bits from dictionaries.

All interpreters are pure: equal inputs give equal vectors. The hash, remote,
and store kinds are per-text (one vector per instantiated text); pattern and
ontology featurize the instance as a whole.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field

import numpy as np

from .cache import FeatureCache
from .client import DEFAULT_BATCH_SIZE, NliServiceClient
from .data import Explanation, Instance
from .errors import ConfigError, DataError
from .hashing import stable_digest, text_hash
from .templating import entity_strings, premise_text

KINDS = ("nli_features", "nli_prob", "feature_store", "hash", "pattern", "ontology")
ONTOLOGY_BITS = 6
ENDPOINT_ENV_VAR = "EXPREP_NLI_ENDPOINT"


@dataclass(frozen=True)
class InterpreterSpec:
    """Configuration for one interpreter; JSON-roundtrippable."""

    kind: str
    dim: int = 1
    seed: int = 0
    endpoint: str | None = None
    batch_size: int = DEFAULT_BATCH_SIZE
    store_path: str | None = None
    dictionary_paths: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown interpreter kind '{self.kind}'")
        if self.dim < 1:
            raise ConfigError(f"interpreter dim must be >= 1, got {self.dim}")
        if self.kind in ("nli_features", "nli_prob") and not self.endpoint \
                and not os.environ.get(ENDPOINT_ENV_VAR):
            raise ConfigError(f"interpreter kind '{self.kind}' requires an endpoint")
        if self.kind == "nli_prob" and self.dim != 1:
            raise ConfigError("nli_prob interpreter has dim 1 per text")
        if self.kind == "feature_store" and not self.store_path:
            raise ConfigError("feature_store interpreter requires store_path")
        if self.kind == "ontology" and len(self.dictionary_paths) != ONTOLOGY_BITS:
            raise ConfigError(
                f"ontology interpreter requires exactly {ONTOLOGY_BITS} dictionaries, "
                f"got {len(self.dictionary_paths)}")


def hash_interpret(instance_key: str, text: str, dim: int, seed: int = 0) -> np.ndarray:
    """Deterministic pseudo-random vector in [-1, 1]^dim.

    Component i is derived from a keyed blake2b hash of
    (seed, instance_key, text, i), so values are identical across processes
    and platforms and any single-character change to the inputs decorrelates
    the whole vector.
    """
    if dim < 1:
        raise ConfigError(f"hash interpreter dim must be >= 1, got {dim}")
    base = stable_digest(str(seed), instance_key, text)
    out = np.empty(dim, dtype=np.float32)
    for i in range(dim):
        h = hashlib.blake2b(i.to_bytes(8, "little"), digest_size=8, key=base)
        u = int.from_bytes(h.digest(), "little")
        out[i] = (u / 0xFFFFFFFFFFFFFFFF) * 2.0 - 1.0
    return out


# ---------------------------------------------------------------------------
# n-gram patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatternSet:
    """Ordered unique token n-grams (n in 1..3) mined from templates."""

    patterns: tuple[tuple[str, ...], ...]

    def __len__(self) -> int:
        return len(self.patterns)


def extract_patterns(explanations: list[Explanation]) -> PatternSet:
    """Collect all 1/2/3-grams of each template, placeholders stripped.

    Templates are lowercased after placeholder removal; the union keeps
    first-seen order so the feature layout is stable across runs.
    """
    seen: dict[tuple[str, ...], None] = {}
    for exp in explanations:
        cleaned = exp.template.replace("{o1}", " ").replace("{o2}", " ")
        tokens = [t.lower() for t in cleaned.split()]
        for n in (1, 2, 3):
            for start in range(len(tokens) - n + 1):
                seen.setdefault(tuple(tokens[start : start + n]))
    return PatternSet(patterns=tuple(seen))


def pattern_interpret(pattern_set: PatternSet, instance: Instance) -> np.ndarray:
    """Bit i is 1 iff pattern i occurs as a contiguous token subsequence."""
    if not pattern_set.patterns:
        raise DataError("pattern interpreter requires a non-empty pattern set")
    tokens = [t.lower() for t in instance.tokens]
    present: set[tuple[str, ...]] = set()
    for n in (1, 2, 3):
        for start in range(len(tokens) - n + 1):
            present.add(tuple(tokens[start : start + n]))
    out = np.zeros(len(pattern_set), dtype=np.float32)
    for i, pattern in enumerate(pattern_set.patterns):
        if pattern in present:
            out[i] = 1.0
    return out


# ---------------------------------------------------------------------------
# ontology dictionaries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OntologyDictionaries:
    """Six named sets of case-folded (entity1, entity2) pairs."""

    names: tuple[str, ...]
    pair_sets: tuple[frozenset[tuple[str, str]], ...]

    def __post_init__(self):
        if len(self.names) != ONTOLOGY_BITS or len(self.pair_sets) != ONTOLOGY_BITS:
            raise DataError(
                f"expected exactly {ONTOLOGY_BITS} ontology dictionaries, "
                f"got {len(self.pair_sets)}")


def load_ontology_dictionaries(paths: list[str]) -> OntologyDictionaries:
    """Read six tab-separated entity-pair files; bit order follows path order."""
    if len(paths) != ONTOLOGY_BITS:
        raise DataError(f"expected exactly {ONTOLOGY_BITS} dictionary files, got {len(paths)}")
    names: list[str] = []
    pair_sets: list[frozenset[tuple[str, str]]] = []
    for path in paths:
        if not os.path.exists(path):
            raise DataError(f"missing dictionary file: {path}")
        pairs: set[tuple[str, str]] = set()
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.rstrip("\n")
                if not line.strip():
                    continue
                cols = line.split("\t")
                if len(cols) != 2:
                    raise DataError(f"{path}:{line_no}: expected two tab-separated entities")
                pairs.add((cols[0].casefold(), cols[1].casefold()))
        names.append(os.path.splitext(os.path.basename(path))[0])
        pair_sets.append(frozenset(pairs))
    return OntologyDictionaries(names=tuple(names), pair_sets=tuple(pair_sets))


def ontology_interpret(dictionaries: OntologyDictionaries, instance: Instance) -> np.ndarray:
    """Bit j is 1 iff the case-folded entity pair is in dictionary j."""
    o1, o2 = entity_strings(instance)
    pair = (o1.casefold(), o2.casefold())
    out = np.zeros(ONTOLOGY_BITS, dtype=np.float32)
    for j, pair_set in enumerate(dictionaries.pair_sets):
        if pair in pair_set:
            out[j] = 1.0
    return out


# ---------------------------------------------------------------------------
# interpreter objects
# ---------------------------------------------------------------------------

class Interpreter:
    """Callable feature extractor with a fixed output dimension.

    ``calls`` counts how many (instance, text) pairs were actually
    interpreted; featurization relies on it to prove cache hits issued no
    recomputation.
    """

    dim: int
    per_text = True

    def __init__(self):
        self.calls = 0

    def interpret(self, instance: Instance, text: str) -> np.ndarray:
        raise NotImplementedError

    def interpret_many(self, items: list[tuple[Instance, str]]) -> np.ndarray:
        out = np.empty((len(items), self.dim), dtype=np.float32)
        for i, (instance, text) in enumerate(items):
            out[i] = self.interpret(instance, text)
        return out


class HashInterpreter(Interpreter):
    def __init__(self, dim: int, seed: int = 0):
        super().__init__()
        self.dim = dim
        self.seed = seed

    def interpret(self, instance: Instance, text: str) -> np.ndarray:
        self.calls += 1
        # Keyed on sentence content, not instance id: identical sentences must
        # interpret identically, like a frozen encoder would.
        return hash_interpret(premise_text(instance), text, self.dim, self.seed)


class RemoteFeatureInterpreter(Interpreter):
    def __init__(self, client: NliServiceClient, dim: int):
        super().__init__()
        self.client = client
        self.dim = dim

    def interpret(self, instance: Instance, text: str) -> np.ndarray:
        return self.interpret_many([(instance, text)])[0]

    def interpret_many(self, items: list[tuple[Instance, str]]) -> np.ndarray:
        self.calls += len(items)
        pairs = [(premise_text(instance), text) for instance, text in items]
        return self.client.features(pairs, self.dim)


class RemoteProbInterpreter(Interpreter):
    dim = 1

    def __init__(self, client: NliServiceClient):
        super().__init__()
        self.client = client

    def interpret(self, instance: Instance, text: str) -> np.ndarray:
        return self.interpret_many([(instance, text)])[0]

    def interpret_many(self, items: list[tuple[Instance, str]]) -> np.ndarray:
        self.calls += len(items)
        pairs = [(premise_text(instance), text) for instance, text in items]
        return self.client.probs(pairs).reshape(-1, 1)


class StoreInterpreter(Interpreter):
    """Serves precomputed vectors from a feature cache file."""

    def __init__(self, store: FeatureCache):
        super().__init__()
        self.store = store
        self.dim = store.dim

    def interpret(self, instance: Instance, text: str) -> np.ndarray:
        self.calls += 1
        return self.store.get(instance.id, text_hash(text))


class PatternInterpreter(Interpreter):
    """Whole-instance featurizer; the text argument is ignored."""

    per_text = False

    def __init__(self, pattern_set: PatternSet):
        super().__init__()
        self.pattern_set = pattern_set
        self.dim = len(pattern_set)

    def interpret(self, instance: Instance, text: str = "") -> np.ndarray:
        self.calls += 1
        return pattern_interpret(self.pattern_set, instance)


class OntologyInterpreter(Interpreter):
    """Whole-instance featurizer; the text argument is ignored."""

    per_text = False

    def __init__(self, dictionaries: OntologyDictionaries):
        super().__init__()
        self.dictionaries = dictionaries
        self.dim = ONTOLOGY_BITS

    def interpret(self, instance: Instance, text: str = "") -> np.ndarray:
        self.calls += 1
        return ontology_interpret(self.dictionaries, instance)


def build_interpreter(
    spec: InterpreterSpec,
    explanations: list[Explanation] | None = None,
) -> Interpreter:
    """Resolve a spec into a ready interpreter.

    The pattern kind mines its n-grams from ``explanations``; remote kinds
    honor the EXPREP_NLI_ENDPOINT environment variable over the configured
    endpoint.
    """
    if spec.kind == "hash":
        return HashInterpreter(dim=spec.dim, seed=spec.seed)
    if spec.kind in ("nli_features", "nli_prob"):
        endpoint = os.environ.get(ENDPOINT_ENV_VAR) or spec.endpoint
        client = NliServiceClient(endpoint, batch_size=spec.batch_size)
        if spec.kind == "nli_features":
            return RemoteFeatureInterpreter(client, dim=spec.dim)
        return RemoteProbInterpreter(client)
    if spec.kind == "feature_store":
        return StoreInterpreter(FeatureCache(spec.store_path, dim=spec.dim, mode="r"))
    if spec.kind == "pattern":
        if explanations is None:
            raise ConfigError("pattern interpreter requires explanations to mine patterns from")
        pattern_set = extract_patterns(explanations)
        if not pattern_set.patterns:
            raise ConfigError("pattern interpreter mined zero patterns")
        return PatternInterpreter(pattern_set)
    if spec.kind == "ontology":
        return OntologyInterpreter(load_ontology_dictionaries(list(spec.dictionary_paths)))
    raise ConfigError(f"unknown interpreter kind '{spec.kind}'")


def interpret(spec: InterpreterSpec | Interpreter, instance: Instance, text: str) -> np.ndarray:
    """One-shot convenience wrapper over build_interpreter."""
    interpreter = spec if isinstance(spec, Interpreter) else build_interpreter(spec)
    return interpreter.interpret(instance, text)
