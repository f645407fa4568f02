"""Shuffle algebra of iterated-integral words.

A word is a tuple of letters over ``{0, 1, ..., d}``; letter 0 integrates
against time.  Words are read left to right from the innermost to the
outermost integration, so ``(1, 2)`` is the integral of ``W^1`` against
``dW^2``.  Reversal of words is an automorphism of the shuffle product, so
every identity here holds equally in the mirrored convention.

Coefficients are exact rationals throughout; ranks of the relation systems
are computed with sympy.
"""
from __future__ import annotations

from collections import defaultdict
from fractions import Fraction
from functools import lru_cache
from itertools import permutations
from math import comb

import sympy

__all__ = [
    "Word",
    "WordPoly",
    "as_word",
    "format_word",
    "shuffle_product",
    "is_constant",
    "is_two_block",
    "parts_reduce",
    "ShuffleSystem",
    "solve_shuffle_system",
    "classify_word",
    "derivation_plan",
]

Word = tuple


def as_word(w) -> Word:
    """Coerce ``"121"``, ``[1, 2, 1]`` or ``(1, 2, 1)`` to a word tuple."""
    if isinstance(w, str):
        w = w.strip()
        if not w.isdigit():
            raise ValueError(f"word strings are digit strings, got {w!r}")
        return tuple(int(c) for c in w)
    w = tuple(int(c) for c in w)
    if any(c < 0 for c in w):
        raise ValueError(f"letters must be non-negative, got {w}")
    return w


def format_word(w) -> str:
    return "".join(str(c) for c in w)


@lru_cache(maxsize=None)
def _shuffle(u: Word, v: Word):
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out = defaultdict(int)
    # the last letter is outermost: split off the final letters
    for w, c in _shuffle(u[:-1], v).items():
        out[w + (u[-1],)] += c
    for w, c in _shuffle(u, v[:-1]).items():
        out[w + (v[-1],)] += c
    return dict(out)


def _canonical_monomial(words):
    return tuple(sorted(words, key=lambda w: (len(w), w)))


class WordPoly:
    """Rational linear combination of monomials in iterated-integral words.

    A monomial is a sorted tuple of words standing for the pathwise product
    of the corresponding integrals; a single word ``w`` is the monomial
    ``(w,)`` and the empty monomial ``()`` is the constant 1.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c != 0:
                mono = _canonical_monomial(mono)
                clean[mono] = clean.get(mono, 0) + c
        self.terms = {m: c for m, c in clean.items() if c != 0}

    @classmethod
    def word(cls, w, coeff=1):
        return cls({(as_word(w),): coeff})

    @classmethod
    def constant(cls, c):
        return cls({(): c})

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return WordPoly(out)

    def __neg__(self):
        return WordPoly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return WordPoly({m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if not isinstance(other, WordPoly):
            return self.scale(Fraction(other))
        out = defaultdict(Fraction)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[_canonical_monomial(m1 + m2)] += c1 * c2
        return WordPoly(out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, WordPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self):
        return len(self.terms)

    def is_linear(self):
        return all(len(m) == 1 for m in self.terms)

    def linearize(self) -> "WordPoly":
        """Expand every product by shuffles into a combination of single words."""
        out = defaultdict(Fraction)
        for mono, c in self.terms.items():
            acc = {(): 1}
            for w in mono:
                nxt = defaultdict(int)
                for a, ca in acc.items():
                    for s, cs in _shuffle(a, w).items():
                        nxt[s] += ca * cs
                acc = nxt
            for w, cw in acc.items():
                out[(w,) if w else ()] += c * cw
        return WordPoly(out)

    def words(self):
        return sorted({w for m in self.terms for w in m})

    def render(self) -> str:
        """Stable text form: ``J_{12}·J_1 − 2·J_{112}``."""
        if not self.terms:
            return "0"
        parts = []
        order = sorted(self.terms, key=lambda m: (-sum(map(len, m)), -len(m),
                                                  [tuple(-x for x in w) for w in m]))
        for k, mono in enumerate(order):
            c = self.terms[mono]
            sign = "−" if c < 0 else "+"
            a = abs(c)
            body = "·".join(_render_J(w) for w in sorted(mono, key=lambda w: (-len(w), w))) if mono else ""
            if a != 1 or not body:
                coeff = f"{a.numerator}" if a.denominator == 1 else f"{a.numerator}/{a.denominator}"
                body = f"{coeff}·{body}" if body else coeff
            if k == 0:
                parts.append(("−" if c < 0 else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    def __repr__(self):
        return f"WordPoly({self.render()})"


def _render_J(w):
    s = format_word(w)
    return f"J_{s}" if len(s) == 1 else f"J_{{{s}}}"


def shuffle_product(u, v) -> WordPoly:
    """All riffle shuffles of ``u`` and ``v`` with multiplicity."""
    return WordPoly({(w,): c for w, c in _shuffle(as_word(u), as_word(v)).items()})


# -- word shapes -------------------------------------------------------------

def _blocks(w):
    out = []
    for c in w:
        if out and out[-1][0] == c:
            out[-1][1] += 1
        else:
            out.append([c, 1])
    return out


def is_constant(w) -> bool:
    return len(set(as_word(w))) == 1


def is_two_block(w) -> bool:
    """Words ``a..a b..b``: computable from a single running sum."""
    return len(_blocks(as_word(w))) <= 2


def _is_sandwich(w):
    b = _blocks(w)
    return len(b) == 3 and b[0][0] == b[2][0] and b[1][1] == 1


def parts_reduce(word) -> WordPoly:
    """Integration-by-parts form of ``i^p j i^q`` or ``i^p j^q`` words.

    The result only involves two-block words and their products, each of
    which needs a single running sum over the quadrature lattice.  Two-block
    words are returned unchanged.
    """
    w = as_word(word)
    if not w:
        raise ValueError("empty word")
    if is_two_block(w):
        return WordPoly.word(w)
    if not _is_sandwich(w):
        raise ValueError(
            f"word {format_word(w)} is not of the form i..i j i..i or i..i j..j; "
            "use classify_word / solve_shuffle_system")
    (i, p), (j, _), (_, q) = _blocks(w)
    # J_{i^p j i^q} = sum_k (-1)^(k+1) J_{i^k} J_{i^p j i^(q-k)}
    #                 + (-1)^q C(p+q, p) J_{i^(p+q) j}
    out = WordPoly.word((i,) * (p + q) + (j,), (-1) ** q * comb(p + q, p))
    for k in range(1, q + 1):
        lower = parts_reduce((i,) * p + (j,) + (i,) * (q - k))
        out = out + (WordPoly.word((i,) * k) * lower).scale((-1) ** (k + 1))
    return out


# -- shuffle relation systems ---------------------------------------------

_SHAPES = {
    2: [(1, 1)],
    3: [(2, 1), (1, 1, 1)],
    4: [(3, 1), (2, 2)],
    5: [(4, 1), (3, 2), (2, 3), (2, 2, 1), (1, 1, 1, 1, 1)],
}


def _pattern_letters(pattern):
    w = as_word(pattern) if not isinstance(pattern, dict) else None
    if w is None:
        raise TypeError("pattern must be a word-like multiset")
    return tuple(sorted(w, key=lambda c: (-w.count(c), c)))


class ShuffleSystem:
    """Linear shuffle relations among the permutations of a letter multiset.

    Attributes
    ----------
    unknowns : list of words not computable from one running sum
    equations : list of (row over unknowns, right-hand side WordPoly)
    rank : rank of the coefficient matrix over the rationals
    generators : words that must be approximated directly
    reductions : map from each remaining unknown to a WordPoly in generators,
        two-block words and products of lower-order words
    """

    def __init__(self, unknowns, equations, rank, generators, reductions):
        self.unknowns = unknowns
        self.equations = equations
        self.rank = rank
        self.generators = generators
        self.reductions = reductions

    @property
    def basis(self):
        """Two-block words of the multiset plus the generators."""
        letters = sorted(self.unknowns[0]) if self.unknowns else []
        blocks = [w for w in _perms(letters) if is_two_block(w)]
        return sorted(blocks) + list(self.generators)

    @property
    def n_equations(self):
        return len(self.equations)

    def check(self) -> bool:
        """Substitute the reductions back into every equation."""
        for row, rhs in self.equations:
            lhs = WordPoly()
            for u, c in zip(self.unknowns, row):
                if c:
                    lhs = lhs + self._expr(u).scale(c)
            if (lhs - rhs).linearize() != WordPoly():
                return False
        return True

    def _expr(self, u):
        return self.reductions.get(u, WordPoly.word(u))


def _perms(letters):
    return sorted(set(permutations(letters)))


def _build_equations(letters, unknowns):
    n = len(letters)
    if n not in _SHAPES:
        raise ValueError(f"pattern length {n} outside 2..5")
    index = {u: k for k, u in enumerate(unknowns)}
    equations = []
    for shape in _SHAPES[n]:
        for perm in _perms(letters):
            pieces, pos = [], 0
            for s in shape:
                pieces.append(perm[pos:pos + s])
                pos += s
            prod = WordPoly({tuple(pieces): 1})
            expanded = prod.linearize()
            row = [Fraction(0)] * len(unknowns)
            rhs = prod
            for (w,), c in expanded.terms.items():
                if w in index:
                    row[index[w]] += c
                else:
                    rhs = rhs - WordPoly.word(w, c)
            equations.append((row, rhs))
    return equations


def _generator_key(w):
    # constant words, then parts-reducible words, then lexicographic
    return (0 if is_constant(w) else 1 if (is_two_block(w) or _is_sandwich(w)) else 2, w)


def solve_shuffle_system(pattern) -> ShuffleSystem:
    """Rank, generators and reductions for the permutations of a two-letter multiset.

    ``pattern`` is any word with the multiset of interest, e.g. ``"11122"``;
    the letter with larger multiplicity plays the role of ``i``.  Two-block
    words are known single-sum quantities and enter on the right-hand side.
    """
    letters = _pattern_letters(pattern)
    if len(set(letters)) != 2:
        raise ValueError("pattern must contain exactly two distinct letters")
    if not 2 <= len(letters) <= 5:
        raise ValueError(f"pattern length {len(letters)} outside 2..5")
    i, j = letters[0], letters[-1]
    rank_order = {i: 0, j: 1}
    perms = sorted(_perms(letters), key=lambda w: [rank_order[c] for c in w])
    unknowns = [w for w in perms if not is_two_block(w)]
    if not unknowns:
        # two-letter words: the relation J_i J_j = J_ij + J_ji ties the knowns
        eqs = _build_equations(letters, perms)
        m = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in r] for r, _ in eqs])
        return ShuffleSystem(perms, eqs, m.rank(), [], {})
    equations = _build_equations(letters, unknowns)
    mat = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row]
                        for row, _ in equations])
    rank = mat.rank()
    n = len(unknowns)
    candidates = sorted(range(n), key=lambda k: _generator_key_pref(unknowns[k], i, j))
    free = _choose_free(mat, candidates)
    bound = [c for c in range(n) if c not in free]
    generators = [unknowns[k] for k in free]
    # solve M_bound x_bound = rhs - M_free x_free, symbolically over WordPoly
    sub = mat[:, bound]
    pinv_rows = _left_inverse(sub)
    reductions = {}
    for r, b in enumerate(bound):
        expr = WordPoly()
        for e, (row, rhs) in enumerate(equations):
            coeff = pinv_rows[r, e]
            if coeff == 0:
                continue
            term = rhs
            for f in free:
                if row[f]:
                    term = term - WordPoly.word(unknowns[f], row[f])
            expr = expr + term.scale(Fraction(int(coeff.p), int(coeff.q)))
        reductions[unknowns[b]] = expr
    return ShuffleSystem(unknowns, equations, rank, generators, reductions)


def _generator_key_pref(w, i, j):
    order = {i: 0, j: 1}
    # ties go to words opening with the rarer letter
    return (_generator_key(w)[0], [1 - order[c] for c in w])


def _choose_free(mat, preference):
    """Columns left free, most preferred first, with the rest of full column rank.

    Columns are reduced in reverse preference order; the non-pivot columns
    of the echelon form are exactly the preferred ones that depend on the
    columns before them.
    """
    order = list(reversed(preference))
    _, pivots = mat[:, order].rref()
    free = [order[k] for k in range(len(order)) if k not in pivots]
    return sorted(free, key=preference.index)


def _left_inverse(m):
    """A rational left inverse of a full-column-rank matrix."""
    # pick an invertible subset of rows
    rows, acc = [], sympy.zeros(0, m.cols)
    for r in range(m.rows):
        trial = acc.col_join(m[r, :])
        if trial.rank() > acc.rank():
            acc, rows = trial, rows + [r]
        if len(rows) == m.cols:
            break
    inv = acc.inv()
    full = sympy.zeros(m.cols, m.rows)
    for k, r in enumerate(rows):
        full[:, r] = inv[:, k]
    return full


def classify_word(word) -> str:
    """Cheapest quadrature class: ``"exact"``, ``"single_sum"`` or ``"double_sum"``.

    Constant words have closed forms.  A word is single-sum when it can be
    written through two-block words and products of lower-order words.
    """
    w = as_word(word)
    if not 1 <= len(w) <= 5:
        raise ValueError("classify_word supports words of length 1..5")
    if is_constant(w):
        return "exact"
    if is_two_block(w) or _is_sandwich(w):
        return "single_sum"
    if len(set(w)) == 2:
        system = solve_shuffle_system(w)
        return "double_sum" if w in system.generators else "single_sum"
    return "double_sum"


def _compositions(n):
    if n == 0:
        yield ()
        return
    for first in range(1, n + 1):
        for rest in _compositions(n - first):
            yield (first,) + rest


@lru_cache(maxsize=None)
def derivation_plan(letters, available):
    """Which permutations of ``letters`` must be integrated directly.

    ``available`` is a frozenset of lower-order words whose values are
    known; constant words always are.  Every shuffle product of available
    words whose letters make up ``letters`` yields one linear relation.
    Returns ``(generators, reductions)`` where ``reductions`` expresses each
    other permutation through generators and products of available words.
    Two-block words are preferred as generators.
    """
    letters = tuple(sorted(letters))
    perms = _perms(letters)
    n = len(letters)
    index = {u: k for k, u in enumerate(perms)}

    def known(w):
        return is_constant(w) or w in available

    equations = []
    for shape in _compositions(n):
        if len(shape) < 2:
            continue
        for perm in perms:
            pieces, pos = [], 0
            for sz in shape:
                pieces.append(perm[pos:pos + sz])
                pos += sz
            if not all(known(pc) for pc in pieces):
                continue
            prod = WordPoly({tuple(pieces): 1})
            row = [Fraction(0)] * len(perms)
            for (w,), c in prod.linearize().terms.items():
                row[index[w]] += c
            equations.append((tuple(row), prod))
    if not equations:
        return tuple(perms), {}
    mat = sympy.Matrix([[sympy.Rational(c.numerator, c.denominator) for c in row]
                        for row, _ in equations])
    order = sorted(range(len(perms)),
                   key=lambda k: (0 if is_two_block(perms[k]) else 1, perms[k]))
    free = _choose_free(mat, order)
    bound = [c for c in range(len(perms)) if c not in free]
    inv = _left_inverse(mat[:, bound])
    reductions = {}
    for r, b in enumerate(bound):
        expr = WordPoly()
        for e, (row, rhs) in enumerate(equations):
            coeff = inv[r, e]
            if coeff == 0:
                continue
            term = rhs
            for f in free:
                if row[f]:
                    term = term - WordPoly.word(perms[f], row[f])
            expr = expr + term.scale(Fraction(int(coeff.p), int(coeff.q)))
        reductions[perms[b]] = expr
    return tuple(perms[k] for k in sorted(free)), reductions
