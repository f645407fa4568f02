"""Multiple Stratonovich integrals over one evaluation step.

Words follow the convention of :mod:`stratflow.shuffle`: ``(a_1, ..., a_l)``
integrates ``dW^{a_1}`` innermost and ``dW^{a_l}`` outermost, with
``W^0 = t``.

Three kinds of values are produced:

* exact closed forms (constant words, pure time words);
* conditional expectations given the Wiener increments on ``Q`` equal
  subintervals of the step.  Given those increments the Brownian bridges on
  different subintervals are independent, so the conditional expectation of
  the step signature is the ordered product of per-subinterval conditional
  signatures.  Each per-subinterval factor is an exact polynomial in the
  subinterval increments, obtained by Hermite projection of the word onto
  the increments;
* unconditional expectations, used for terms that only contribute through
  their mean.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product as iproduct
from math import ceil, factorial, floor, log2

import numpy as np

from .linalg import FlopTally, eval_flops
from .shuffle import WordPoly, as_word, derivation_plan, format_word, is_constant

__all__ = [
    "WordStats",
    "word_stats",
    "weight",
    "quadrature_rate",
    "beta",
    "effort_exponent",
    "critical_stepsize",
    "q_for_word",
    "expected_signature",
    "expected_value",
    "bridge_polynomial",
    "BridgePoly",
    "exact_value",
    "conditional_expectation",
    "linear_path_integral",
    "step_increments",
    "IntegralTable",
    "MAX_CONDITIONED_LENGTH",
]

MAX_CONDITIONED_LENGTH = 4


# -- word statistics and rate calculus ---------------------------------------

@dataclass(frozen=True)
class WordStats:
    length: int
    zeros: int
    jstar: int | None
    nstar: int | None


def word_stats(word) -> WordStats:
    """Length, zero count and the trailing-run statistics ``j*``, ``n*``.

    ``j*`` is the smallest ``j <= l-1`` such that all letters after position
    ``j`` (1-based) coincide; ``n*`` counts zeros among letters ``j*..l``.
    Both are ``None`` for constant words.
    """
    w = as_word(word)
    if not w:
        raise ValueError("empty word")
    ell, n = len(w), w.count(0)
    if is_constant(w):
        return WordStats(ell, n, None, None)
    jstar = next(j for j in range(1, ell) if len(set(w[j:])) == 1)
    nstar = w[jstar - 1:].count(0)
    return WordStats(ell, n, jstar, nstar)


def weight(word) -> int:
    """Twice the order in h of ``J_word``: letters count 1, zeros count 2."""
    w = as_word(word)
    return len(w) + w.count(0)


def quadrature_rate(word):
    """Exponents ``(a, b)`` of the predicted L2 error ``h**a / Q**b``."""
    s = word_stats(word)
    if s.jstar is None:
        raise ValueError(f"word {format_word(as_word(word))} is constant: "
                         "its closed form is exact")
    return Fraction(s.length + s.zeros, 2), Fraction(s.nstar + 1, 2)


def beta(M, ell) -> int:
    """Effort exponent ``(l-1)(2M+1-l)+1`` for distinct non-zero indices."""
    M = Fraction(M)
    if M.denominator not in (1, 2):
        raise ValueError(f"order must be a half-integer, got {M}")
    if int(ell) != ell or ell < 2 or M < Fraction(ell, 2):
        raise ValueError(f"need integer l >= 2 and M >= l/2, got M={M}, l={ell}")
    b = (ell - 1) * (2 * M + 1 - ell) + 1
    return int(b)


def effort_exponent(M, ell) -> Fraction:
    """Slope of log error against log quadrature effort, ``-M/beta``."""
    return -Fraction(M) / beta(M, ell)


def _ell_max(M, d):
    # the dominant distinct-index length: max{d, M+1}, kept inside [2, 2M]
    M = Fraction(M)
    ell = floor(max(Fraction(d), M + 1))
    return int(max(2, min(ell, 2 * M)))


def critical_stepsize(M, d, p, T, scheme_label) -> float:
    """Stepsize below which quadrature effort exceeds evaluation effort.

    Balancing ``K/h`` evaluation flops, ``K = T(c_M p^2 + c_E)``, against
    ``h**-beta`` quadrature operations gives ``h_cr = K**(1/(1-beta))``.
    """
    b = beta(M, _ell_max(M, d))
    if b <= 1:
        return 0.0
    k = T * eval_flops(scheme_label, p, d)
    return float(k) ** (1.0 / (1.0 - b))


def q_for_word(word, h, M, q_scale=1.0, q_max=None) -> int:
    """Subintervals per step so that conditioning on them keeps global order M.

    Mean-zero local quadrature errors of size ``h**a / Q**b`` accumulate to a
    global error ``h**(a-1/2) / Q**b``; requiring this to be ``O(h**M)``
    gives ``Q = h**(-(M + 1/2 - a)/b)``.  The result is rounded up to a
    power of two and capped at ``q_max``.
    """
    a, b = quadrature_rate(word)
    expo = (Fraction(M) + Fraction(1, 2) - a) / b
    if expo <= 0:
        return 1
    q = q_scale * h ** (-float(expo))
    q = 1 if q <= 1 else 2 ** int(ceil(log2(q) - 1e-9))
    if q_max is not None:
        q = min(q, int(q_max))
    return max(int(q), 1)


# -- expectations ----------------------------------------------------------

@lru_cache(maxsize=None)
def expected_signature(word):
    """``(c, k)`` with ``E[J_word] = c * delta**k`` on an interval of length delta.

    The expected signature is ``exp(delta (e_0 + 1/2 sum_i e_i e_i))``, so
    only tilings of the word by tokens ``0`` and ``ii`` contribute.
    """
    w = as_word(word)
    # ways[pos][tokens] = total weight of tilings of w[pos:]
    @lru_cache(maxsize=None)
    def tilings(pos):
        if pos == len(w):
            return {0: Fraction(1)}
        out = defaultdict(Fraction)
        if w[pos] == 0:
            for k, c in tilings(pos + 1).items():
                out[k + 1] += c
        elif pos + 1 < len(w) and w[pos + 1] == w[pos]:
            for k, c in tilings(pos + 2).items():
                out[k + 1] += c / 2
        return dict(out)

    coeff = Fraction(0)
    ks = tilings(0)
    power = weight(w) // 2
    for k, c in ks.items():
        coeff += c / factorial(k)
    if not ks:
        return Fraction(0), power
    return coeff, power


def expected_value(word, h):
    """Unconditional expectation of ``J_word`` over a step of length h."""
    c, k = expected_signature(as_word(word))
    return float(c) * h ** k


def _expect_poly(poly: WordPoly):
    """Expectation of a WordPoly as {delta power: coefficient}."""
    out = defaultdict(Fraction)
    for mono, c in poly.linearize().terms.items():
        if not mono:
            out[0] += c
            continue
        (w,) = mono
        e, k = expected_signature(w)
        if e:
            out[Fraction(weight(w), 2)] += c * e
    return out


def _hermite_coeffs(m):
    """Integer coefficients of the probabilists' Hermite polynomial He_m."""
    out = {}
    for j in range(m // 2 + 1):
        out[m - 2 * j] = Fraction((-1) ** j * factorial(m),
                                  factorial(j) * factorial(m - 2 * j) * 2 ** j)
    return out


@dataclass(frozen=True)
class BridgePoly:
    """``E[J_word | increments]`` on one interval as a polynomial.

    ``terms`` maps ``(exponents, delta_power)`` to a rational coefficient;
    ``letters`` lists the Wiener letters the exponents refer to.
    """

    word: tuple
    letters: tuple
    terms: tuple

    def __call__(self, x, delta, powers=None):
        """Evaluate on increments ``x[letter]`` (mapping or sequence by letter).

        ``powers`` is an optional cache ``{(letter, e): x[letter]**e}``
        shared between calls on the same increments.
        """
        powers = {} if powers is None else powers
        total = None
        for (exps, dp), c in self.terms:
            term = float(c) * delta ** dp
            for letter, e in zip(self.letters, exps):
                if e:
                    key = (letter, e)
                    if key not in powers:
                        powers[key] = x[letter] ** e if e > 1 else np.asarray(x[letter])
                    term = term * powers[key]
            total = term if total is None else total + term
        return 0.0 if total is None else total

    def render(self, names=None):
        parts = []
        for (exps, dp), c in self.terms:
            f = [f"x{l}" + (f"^{e}" if e > 1 else "") for l, e in zip(self.letters, exps) if e]
            if dp:
                f.append("δ" + (f"^{dp}" if dp > 1 else ""))
            parts.append(f"{c}" + ("·" + "·".join(f) if f else ""))
        return " + ".join(parts) if parts else "0"


@lru_cache(maxsize=None)
def bridge_polynomial(word) -> BridgePoly:
    """Exact conditional expectation of ``J_word`` given the interval increments.

    ``E[J | x] = sum_m c_m prod_i He_{m_i}(x_i / sqrt(delta))`` with
    ``c_m = E[J prod_i He_{m_i}(x_i/sqrt(delta))] / prod_i m_i!``.  The
    moments are found by shuffling ``J_word`` with powers of increments
    (``x_i**k = k! J_{i..i}``) and taking expected signatures.
    """
    w = as_word(word)
    letters = tuple(sorted({c for c in w if c != 0}))
    counts = [w.count(c) for c in letters]
    result = defaultdict(Fraction)
    ranges = [range(k % 2, k + 1, 2) for k in counts]
    for m in iproduct(*ranges):
        # E[J_w prod He_{m_i}(x_i / sqrt delta)] as {delta power: coeff}
        herm = [_hermite_coeffs(mi) for mi in m]
        moment = defaultdict(Fraction)
        for ks in iproduct(*[sorted(hc) for hc in herm]):
            scale = Fraction(1)
            poly = WordPoly.word(w)
            for letter, k, hc in zip(letters, ks, herm):
                scale *= hc[k] * factorial(k)
                if k:
                    poly = poly * WordPoly.word((letter,) * k)
            for dp, c in _expect_poly(poly).items():
                moment[dp - Fraction(sum(ks), 2)] += scale * c
        norm = 1
        for mi in m:
            norm *= factorial(mi)
        # multiply back by prod He_{m_i}(x_i / sqrt delta) and collect
        for dp, c in moment.items():
            if c == 0:
                continue
            for ks in iproduct(*[sorted(hc) for hc in herm]):
                coef = c / norm
                for k, hc in zip(ks, herm):
                    coef *= hc[k]
                p = dp - Fraction(sum(ks), 2)
                if p.denominator != 1:
                    raise ArithmeticError(f"non-integer delta power for {w}")
                result[(tuple(ks), int(p))] += coef
    terms = tuple(sorted((k, v) for k, v in result.items() if v != 0))
    return BridgePoly(w, letters, terms)


# -- pathwise values ----------------------------------------------------------

def exact_value(word, h, dW):
    """Closed-form value of ``J_word`` from the step increments, or None.

    ``dW`` is indexed by letter-1 (array of shape ``(d, ...)``).
    """
    w = as_word(word)
    if not is_constant(w):
        return None
    k, c = len(w), w[0]
    if c == 0:
        return h ** k / factorial(k)
    return np.asarray(dW[c - 1]) ** k / factorial(k)


def step_increments(lattice, n_steps, q):
    """Coarsen lattice increments ``(..., d, L)`` to ``(d, ..., n_steps, q)``.

    ``lattice`` is an array or a :class:`~stratflow.wiener.WienerGrid`, whose
    cached partial sums are then reused.
    """
    if hasattr(lattice, "lattice_sums"):
        L = lattice.L
        if L % (n_steps * q):
            raise ValueError(f"lattice of {L} cannot be split into {n_steps} x {q}")
        x = lattice.lattice_sums(L // (n_steps * q))
        x = x.reshape(x.shape[:-1] + (n_steps, q))
        return np.moveaxis(x, -3, 0)
    lattice = np.asarray(lattice)
    L = lattice.shape[-1]
    if L % (n_steps * q):
        raise ValueError(f"lattice of {L} cannot be split into {n_steps} x {q}")
    f = L // (n_steps * q)
    x = lattice.reshape(lattice.shape[:-1] + (n_steps, q, f))
    x = x.sum(axis=-1) if f > 1 else x[..., 0]
    return np.moveaxis(x, -3, 0)


def _chen_sum(w, seg_value, q, tally=None):
    """Ordered-product recursion ``P_m(q+1) = sum_r P_r(q) B_{w[r:m]}(q)``.

    ``seg_value(sub)`` returns the per-subinterval value of sub-word ``sub``
    as an array with the subinterval axis last.  Returns the full-step value.
    """
    ell = len(w)
    prefix = [None] * (ell + 1)  # prefix[m][..., q]: value of w[:m] up to subinterval q
    total = None
    for m in range(1, ell + 1):
        inc = seg_value(w[:m])
        for r in range(1, m):
            inc = inc + prefix[r] * seg_value(w[r:m])
        if m < ell:
            csum = np.cumsum(inc, axis=-1)
            prefix[m] = csum - inc  # value before subinterval q
        else:
            total = inc.sum(axis=-1)
    if tally is not None:
        tally.add("quad", (ell - 1) * q * int(np.prod(total.shape)))
    return total


def conditional_expectation(word, increments, dt, tally: FlopTally | None = None):
    """``E[J_word | F_Q]`` for one or many steps.

    ``increments`` has shape ``(d, ..., Q)``: letter axis first and the Q
    subintervals of each step last; ``dt`` is the subinterval length.
    Quadrature operations, ``(l-1) Q`` per step, are added to ``tally``.
    """
    w = as_word(word)
    if not 1 <= len(w) <= MAX_CONDITIONED_LENGTH:
        raise ValueError(f"conditional expectation of word {format_word(w)} "
                         f"(length {len(w)}) is not supported; max length "
                         f"{MAX_CONDITIONED_LENGTH}")
    x = np.asarray(increments, dtype=float)
    if max(w) > x.shape[0]:
        raise ValueError(f"word {format_word(w)} uses letter {max(w)} but only "
                         f"{x.shape[0]} Wiener increments were given")
    q = x.shape[-1]
    poly_cache, powers = {}, {}
    xs = {c: x[c - 1] for c in set(w) if c}

    def seg(sub):
        if sub not in poly_cache:
            val = bridge_polynomial(sub)(xs, dt, powers)
            if np.ndim(val) < x.ndim - 1:
                val = np.broadcast_to(val, x.shape[1:])
            poly_cache[sub] = val
        return poly_cache[sub]

    if q == 1 or len(w) == 1:
        val = seg(w).sum(axis=-1)
        if tally is not None and len(w) > 1:
            tally.add("quad", (len(w) - 1) * q * int(np.prod(val.shape)))
        return val
    return _chen_sum(w, seg, q, tally)


def linear_path_integral(word, increments, dt):
    """Iterated integral of the piecewise linear interpolant of the path.

    Independent brute-force route used as an oracle: each lattice segment
    contributes ``prod_k x_{a_k} / l!``, combined by the same ordered
    products.  Shapes as in :func:`conditional_expectation`.
    """
    w = as_word(word)
    x = np.asarray(increments, dtype=float)
    ones = np.ones(x.shape[1:])

    def seg(sub):
        v = ones / factorial(len(sub))
        for c in sub:
            v = v * (dt if c == 0 else x[c - 1])
        return v

    if len(w) == 1 or x.shape[-1] == 1:
        return seg(w).sum(axis=-1)
    return _chen_sum(w, seg, x.shape[-1])


# -- per-step tables ---------------------------------------------------------

@dataclass
class IntegralTable:
    """Values of the words a scheme needs over a block of steps.

    ``values[word]`` has shape ``(..., N)``; ``provenance[word]`` is one of
    ``"exact"``, ``"conditioned"``, ``"derived"`` (from conditioned entries
    through shuffle relations) or ``"expectation"``;
    ``q[word]`` records the subinterval count used.
    """

    h: float
    values: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    q: dict = field(default_factory=dict)
    tally: FlopTally = field(default_factory=FlopTally)

    def __getitem__(self, word):
        w = as_word(word)
        try:
            return self.values[w]
        except KeyError:
            raise KeyError(f"integral table has no entry for word {format_word(w)}") from None

    def __contains__(self, word):
        return as_word(word) in self.values

    def set(self, word, value, provenance, q=1):
        w = as_word(word)
        self.values[w] = value
        self.provenance[w] = provenance
        self.q[w] = q

    @classmethod
    def build(cls, words, lattice, T, n_steps, M, *, expectation_words=(),
              q_scale=1.0, q_fixed=None):
        """Fill a table from lattice increments ``(..., d, L)`` or a WienerGrid.

        Non-constant words are conditioned on ``Q`` subintervals chosen by
        :func:`q_for_word` for order ``M`` (or ``q_fixed``), capped by the
        lattice resolution.  Words sharing a letter multiset are grouped:
        only a generating subset is integrated and the rest follow from
        shuffle relations such as ``J_i J_j = J_ij + J_ji``, which hold
        exactly for the conditional expectations too.
        """
        if not hasattr(lattice, "lattice_sums"):
            lattice = np.asarray(lattice, dtype=float)
        L = lattice.L if hasattr(lattice, "lattice_sums") else lattice.shape[-1]
        h = T / n_steps
        q_cap = L // n_steps
        table = cls(h=h)
        dW = step_increments(lattice, n_steps, 1)[..., 0]
        for w in map(as_word, expectation_words):
            table.set(w, expected_value(w, h), "expectation", 0)
        pending = []
        for w in map(as_word, words):
            if w in table:
                continue
            val = exact_value(w, h, dW)
            if val is not None:
                table.set(w, val, "exact", 1)
            else:
                pending.append(w)
        groups = {}
        for w in pending:
            groups.setdefault(tuple(sorted(w)), []).append(w)
        for letters in sorted(groups, key=lambda m: (len(m), m)):
            needed = groups[letters]
            avail = frozenset(w for w in table.values if len(w) < len(letters))
            generators, reductions = derivation_plan(letters, avail)
            direct = [g for g in generators
                      if g in needed or any(g in r.words() for u, r in reductions.items()
                                            if u in needed)]
            q = q_fixed if q_fixed is not None else max(
                q_for_word(w, h, M, q_scale, q_cap) for w in needed)
            q = min(int(q), q_cap)
            x = step_increments(lattice, n_steps, q) if direct else None
            # conditioned values depend only on the lattice, the word, N and Q;
            # grids sharing a lattice share them
            cache = getattr(lattice, "_sums", None)
            for g in direct:
                key = ("J", g, n_steps, q)
                if cache is not None and key in cache:
                    val, ops = cache[key]
                    table.tally.add("quad", ops)
                else:
                    sub = FlopTally()
                    val = conditional_expectation(g, x, h / q, sub)
                    ops = sub.count
                    table.tally.merge(sub)
                    if cache is not None:
                        cache[key] = (val, ops)
                table.set(g, val, "conditioned", q)
            for w in needed:
                if w in table:
                    continue
                table.set(w, _evaluate(reductions[w], table, h, dW), "derived", q)
        return table


def _evaluate(poly, table, h, dW):
    total = 0.0
    for mono, c in poly.terms.items():
        v = float(c)
        for w in mono:
            if w not in table.values:
                table.set(w, exact_value(w, h, dW), "exact", 1)
            v = v * table.values[w]
        total = total + v
    return total

