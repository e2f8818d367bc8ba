"""Binary Merkle trees over the MiMC hash.

Nodes are hashed as ``hash_blocks([left, right])`` with no byte padding; an odd
node at the end of a level is paired with itself. A single-leaf tree still has
one hash: ``root = H(leaf, leaf)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .gf254 import BN254, FieldElement, FieldParams, from_hex, mul_mod_naive, to_hex
from .mimc import hash_blocks
from .pipesim.config import DesignConfig
from .pipesim.report import CycleReport, timing_report
from .pipesim.simulator import simulate_hash_blocks


@dataclass(frozen=True)
class MerkleTree:
    leaves: tuple
    levels: tuple
    root: FieldElement

    @property
    def depth(self) -> int:
        return len(self.levels) - 1


def hash_pair(left: int, right: int, constants, params: FieldParams = BN254, mul=mul_mod_naive) -> FieldElement:
    return hash_blocks([left, right], constants, params, mul)


def build_tree(leaves, constants, params: FieldParams = BN254, mul=mul_mod_naive) -> MerkleTree:
    if not leaves:
        raise ValueError("cannot build a Merkle tree with no leaves")
    level = [FieldElement(v, params) for v in leaves]
    levels = [tuple(level)]
    while len(level) > 1 or len(levels) == 1:
        if len(level) % 2:
            level = level + [level[-1]]
        level = [hash_pair(level[i], level[i + 1], constants, params, mul) for i in range(0, len(level), 2)]
        levels.append(tuple(level))
    return MerkleTree(levels[0], tuple(levels), level[0])


def prove_inclusion(tree: MerkleTree, index: int) -> list[FieldElement]:
    """Sibling nodes from the leaf level upward."""
    if not 0 <= index < len(tree.leaves):
        raise IndexError(f"leaf index {index} out of range for {len(tree.leaves)} leaves")
    if len(tree.leaves) == 1:
        return []
    path = []
    i = index
    for level in tree.levels[:-1]:
        sib = i ^ 1
        path.append(level[sib] if sib < len(level) else level[i])
        i //= 2
    return path


def verify_inclusion(root: int, leaf: int, index: int, path, constants, params: FieldParams = BN254, mul=mul_mod_naive) -> bool:
    if index < 0:
        return False
    if not path:
        return index == 0 and hash_pair(leaf, leaf, constants, params, mul) == root
    node = leaf
    i = index
    for sib in path:
        node = hash_pair(sib, node, constants, params, mul) if i & 1 else hash_pair(node, sib, constants, params, mul)
        i //= 2
    return i == 0 and node == root


def batched_level_cost(tree: MerkleTree, config: DesignConfig, constants, params: FieldParams = BN254) -> CycleReport:
    """Cycle cost of rebuilding ``tree`` on ``config``, level by level.

    Each level's node hashes are issued in frames of ``config.batch`` through the
    hash simulator; the simulated digests are checked against the tree.
    """
    total = 0
    hashes = 0
    for lower, upper in zip(tree.levels[:-1], tree.levels[1:]):
        nodes = list(lower) + ([lower[-1]] if len(lower) % 2 else [])
        pairs = [[nodes[i], nodes[i + 1]] for i in range(0, len(nodes), 2)]
        for start in range(0, len(pairs), config.batch):
            frame = pairs[start:start + config.batch]
            digests, rep = simulate_hash_blocks(config, frame, constants, params)
            if list(digests) != list(upper[start:start + len(frame)]):
                raise RuntimeError("simulated node hashes disagree with the tree")
            total += rep.total_cycles
        hashes += len(pairs)
    return timing_report(config, total, hashes)


def read_leaves(path, params: FieldParams = BN254) -> list[FieldElement]:
    leaves = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        try:
            leaves.append(from_hex(s, params))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    return leaves


def format_proof(index: int, path) -> str:
    return "".join([f"{index}\n"] + [to_hex(node) + "\n" for node in path])


def parse_proof(text: str, params: FieldParams = BN254) -> tuple[int, list[FieldElement]]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty proof")
    try:
        index = int(lines[0])
    except ValueError:
        raise ValueError(f"proof must start with a leaf index, got {lines[0]!r}") from None
    return index, [from_hex(s, params) for s in lines[1:]]
