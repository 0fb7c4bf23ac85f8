"""Words in free groups.

A word is a tuple of nonzero ints: generator ``k`` (0-based) is the letter
``k + 1`` and its inverse is ``-(k + 1)``.  Generators are named
``a1, b1, a2, b2, ...`` so letter ``2i + 1`` is ``a_{i+1}`` and ``2i + 2``
is ``b_{i+1}``.
"""

from __future__ import annotations

import re

import numpy as np

Word = tuple


def gen_name(letter: int) -> str:
    k = abs(letter) - 1
    name = ("a" if k % 2 == 0 else "b") + str(k // 2 + 1)
    return name if letter > 0 else name + "^-1"


def format_word(word) -> str:
    return " ".join(gen_name(x) for x in word) if word else "1"


_TOKEN = re.compile(r"^([ab])(\d+)(?:\^(-?\d+))?$")


def parse_word(text: str, aliases: dict | None = None) -> Word:
    """Parse ``"a1 b1 a1^-1 b1^-1"``; ``aliases`` maps names to words."""
    out = []
    for tok in text.split():
        if aliases and tok in aliases:
            out.extend(aliases[tok])
            continue
        m = _TOKEN.match(tok)
        if not m:
            raise ValueError(f"bad word token {tok!r}")
        kind, idx, exp = m.group(1), int(m.group(2)), int(m.group(3) or 1)
        if idx < 1:
            raise ValueError(f"bad generator index in {tok!r}")
        letter = 2 * (idx - 1) + (1 if kind == "a" else 2)
        out.extend([letter if exp > 0 else -letter] * abs(exp))
    return reduce_word(out)


def reduce_word(word) -> Word:
    out = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def inverse(word) -> Word:
    return tuple(-x for x in reversed(word))


def multiply(*words) -> Word:
    return reduce_word([x for w in words for x in w])


def power(word, n: int) -> Word:
    if n < 0:
        return reduce_word(inverse(word) * (-n))
    return reduce_word(tuple(word) * n)


def commutator_word(i: int) -> Word:
    """[a_i, b_i] = a_i b_i a_i^-1 b_i^-1 with 1-based ``i``."""
    a, b = 2 * i - 1, 2 * i
    return (a, b, -a, -b)


def surface_relator(genus: int, first: int = 1) -> Word:
    return tuple(x for i in range(first, first + genus) for x in commutator_word(i))


def power_of(word, base) -> int | None:
    """Exponent k with ``word == base^k`` in the free group, else None.

    ``base`` must be cyclically reduced.
    """
    word = tuple(word)
    n = len(base)
    if not word:
        return 0
    if len(word) % n:
        return None
    k = len(word) // n
    if word == tuple(base) * k:
        return k
    if word == inverse(base) * k:
        return -k
    return None


def enumerate_reduced(letters, max_len: int):
    """All freely reduced words over ``letters`` (and inverses) up to length
    ``max_len``, in shortlex-by-generation order, starting with the empty word.
    """
    alphabet = sorted({abs(x) for x in letters})
    alphabet = [s * x for x in alphabet for s in (1, -1)]
    level = [()]
    yield ()
    for _ in range(max_len):
        nxt = []
        for w in level:
            for x in alphabet:
                if w and w[-1] == -x:
                    continue
                nw = w + (x,)
                nxt.append(nw)
                yield nw
        level = nxt


def count_reduced(rank: int, max_len: int) -> int:
    total = 1
    for n in range(1, max_len + 1):
        total += 2 * rank * (2 * rank - 1) ** (n - 1)
    return total


def random_reduced(rng, letters, length: int) -> Word:
    alphabet = sorted({abs(x) for x in letters})
    alphabet = [s * x for x in alphabet for s in (1, -1)]
    w = []
    while len(w) < length:
        x = alphabet[rng.integers(len(alphabet))]
        if w and w[-1] == -x:
            continue
        w.append(x)
    return tuple(w)


def evaluate(word, gens: dict, identity):
    """Product of ``gens[letter]`` in order; inverses must be present as keys."""
    out = identity
    for x in word:
        out = out @ gens[x]
    return out


def evaluate_tree(letters, max_len: int, mats: dict, dim: int):
    """Matrices of all reduced words up to ``max_len`` by incremental products.

    Returns ``(words, stack)`` aligned with :func:`enumerate_reduced` order.
    """
    alphabet = sorted({abs(x) for x in letters})
    alphabet = [s * x for x in alphabet for s in (1, -1)]
    words = [()]
    dtype = np.result_type(*[np.asarray(m).dtype for m in mats.values()])
    out = [np.eye(dim, dtype=dtype)]
    level = [((), np.eye(dim, dtype=dtype))]
    for _ in range(max_len):
        nxt = []
        for w, M in level:
            for x in alphabet:
                if w and w[-1] == -x:
                    continue
                nw, nM = w + (x,), M @ mats[x]
                nxt.append((nw, nM))
                words.append(nw)
                out.append(nM)
        level = nxt
    return words, np.array(out)
