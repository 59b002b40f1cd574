"""Brute-force repetition-label oracle, written straight from the taxonomy prose.

Kept deliberately independent of motifrep.rules: subsequence similarity is
computed by enumerating subsequences instead of dynamic programming, and the
cascade is restated from scratch. Only meant for short monophonic melodies.
"""

from __future__ import annotations

from itertools import combinations

THRESHOLD = 0.75

MAJOR = (0, 2, 4, 5, 7, 9, 11)
MINOR = (0, 2, 3, 5, 7, 8, 10)


def subsequences(seq):
    for r in range(len(seq), 0, -1):
        for idx in combinations(range(len(seq)), r):
            yield tuple(seq[i] for i in idx)


def is_subsequence(small, big) -> bool:
    it = iter(big)
    return all(any(x == y for y in it) for x in small)


def brute_lcs(p, q) -> int:
    p, q = tuple(p), tuple(q)
    if not p or not q:
        return 0
    for cand in subsequences(p):
        if is_subsequence(cand, q):
            return len(cand)
    return 0


def brute_similarity(p, q) -> float:
    if not p or not q:
        return 0.0
    return brute_lcs(p, q) / max(len(p), len(q))


def brute_development(melody):
    dirs = []
    for i in range(len(melody) - 1):
        delta = melody[i + 1] - melody[i]
        dirs.append("U" if delta > 0 else "D" if delta < 0 else "S")
    return tuple(dirs)


def brute_scale(tonic, mode):
    steps = MAJOR if mode == "major" else MINOR
    return sorted((tonic + s) % 12 for s in steps)


def brute_degree(pitch, tonic, mode):
    scale = brute_scale(tonic, mode)
    if pitch % 12 not in scale:
        return None
    return (pitch // 12) * 7 + scale.index(pitch % 12)


def brute_label(melody_a, melody_b, tonic, mode) -> str:
    """Label for two monophonic melodies (full pitches == melody)."""
    a, b = tuple(melody_a), tuple(melody_b)
    # 3. strict: two motifs are the same (pitch value of all notes identical)
    if a == b:
        return "StR"
    # 4. transpositional: same relationships between pitches, different tone
    if len(a) == len(b) and a:
        semis = [y - x for x, y in zip(a, b)]
        if len(set(semis)) == 1 and semis[0] != 0:
            return "TrR"
        degs_a = [brute_degree(p, tonic, mode) for p in a]
        degs_b = [brute_degree(p, tonic, mode) for p in b]
        if None not in degs_a and None not in degs_b:
            dd = [y - x for x, y in zip(degs_a, degs_b)]
            if len(set(dd)) == 1 and dd[0] != 0:
                return "TrR"
    # 5. subsequential: not identical or transpositional, share a subsequence
    if brute_similarity(a, b) >= THRESHOLD:
        return "SuR"
    # 6/7: not SuR, but homodirectional / symmetric development
    da, db = brute_development(a), brute_development(b)
    neg = {"U": "D", "D": "U", "S": "S"}
    homod = brute_similarity(da, db) >= THRESHOLD
    symmetric = (
        brute_similarity(tuple(neg[d] for d in da), db) >= THRESHOLD
        or brute_similarity(tuple(reversed(da)), db) >= THRESHOLD
        or brute_similarity(tuple(neg[d] for d in reversed(da)), db) >= THRESHOLD
    )
    if homod and symmetric:
        return "Ambiguous"
    if homod:
        return "HoR"
    if symmetric:
        return "SyR"
    return "None"
