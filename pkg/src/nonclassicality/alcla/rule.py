"""Symbolic decision rules: the decoder polynomial rewritten over moments.

Encoder outputs are linear combinations of sample moments. A moment is keyed
by the sorted tuple of modes it multiplies, so ``(0, 0)`` is ``<n^2>`` of mode
0 and ``(0, 1)`` is ``<n_1 n_2>`` in the printed (1-based) notation. A rule
term is a sorted tuple of moment keys with a coefficient; ``()`` is the
constant.
"""

from __future__ import annotations

import re
from collections import Counter, defaultdict
from dataclasses import dataclass

import numpy as np

from .model import AlClaConfig, AlClaParams

MomentKey = tuple[int, ...]
TermKey = tuple[MomentKey, ...]

_SUP = str.maketrans("0123456789", "⁰¹²³⁴⁵⁶⁷⁸⁹")
_SUB = str.maketrans("0123456789", "₀₁₂₃₄₅₆₇₈₉")
_UNSUP = str.maketrans("⁰¹²³⁴⁵⁶⁷⁸⁹", "0123456789")
_UNSUB = str.maketrans("₀₁₂₃₄₅₆₇₈₉", "0123456789")
NHAT = "n̂"


def _encoder_expansion(params: AlClaParams, d_x: int) -> list[list[dict[MomentKey, float]]]:
    """``out[i-1][nu]`` is x^(i)_nu as {moment: coefficient}."""
    layers = [[{(nu,): 1.0} for nu in range(d_x)]]
    for K in params.K:
        prev = layers[-1]
        nxt = []
        for nu in range(d_x):
            acc: dict[MomentKey, float] = defaultdict(float)
            for eta in range(d_x):
                w = K[nu, eta]
                if w == 0.0:
                    continue
                for key, c in prev[eta].items():
                    acc[tuple(sorted(key + (nu,)))] += w * c
            nxt.append(dict(acc))
        layers.append(nxt)
    return layers


def _poly_mul(a: dict[TermKey, float], b: dict[TermKey, float]) -> dict[TermKey, float]:
    out: dict[TermKey, float] = defaultdict(float)
    for ka, ca in a.items():
        for kb, cb in b.items():
            out[tuple(sorted(ka + kb))] += ca * cb
    return dict(out)


@dataclass(frozen=True)
class DecisionRule:
    terms: dict[TermKey, float]
    d_x: int = 1
    normalized: bool = True

    def evaluate_moments(self, moments: dict[MomentKey, float]) -> float:
        total = 0.0
        for key, c in self.terms.items():
            v = c
            for mk in key:
                v *= moments[mk]
            total += v
        return total

    def moment_keys(self) -> set[MomentKey]:
        return {mk for key in self.terms for mk in key}

    def evaluate_samples(self, samples) -> float:
        """Rule value on one state's samples (sample means, or sums when the
        encoder is unnormalized)."""
        x = np.asarray(getattr(samples, "samples", samples), dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        reduce = np.mean if self.normalized else np.sum
        vals = {mk: float(reduce(np.prod(x[:, list(mk)], axis=1))) for mk in self.moment_keys()}
        return self.evaluate_moments(vals)

    def ordered_terms(self) -> list[tuple[TermKey, float]]:
        def sort_key(item):
            key, _ = item
            degree = sum(len(mk) for mk in key)
            return (-degree, len(key), key)

        return sorted(self.terms.items(), key=sort_key)

    def to_text(self, decimals: int = 4) -> str:
        """Terms by descending total degree, coefficients at fixed precision;
        terms that round to zero are omitted."""
        parts = []
        for key, c in self.ordered_terms():
            if round(abs(c), decimals) == 0.0:
                continue
            body = f"{abs(c):.{decimals}f}" + "".join(
                _format_moment(mk, self.d_x) + (str(p).translate(_SUP) if p > 1 else "")
                for mk, p in sorted(Counter(key).items())
            )
            if not parts:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append(("- " if c < 0 else "+ ") + body)
        return " ".join(parts) if parts else f"{0:.{decimals}f}"

    def __str__(self) -> str:
        return self.to_text()

    def sign_pattern(self) -> dict[TermKey, int]:
        return {k: int(np.sign(c)) for k, c in self.terms.items()}


def _format_moment(mk: MomentKey, d_x: int) -> str:
    inner = ""
    for mode, p in sorted(Counter(mk).items()):
        inner += NHAT
        if d_x > 1:
            inner += str(mode + 1).translate(_SUB)
        if p > 1:
            inner += str(p).translate(_SUP)
    return f"⟨{inner}⟩"


def extract_rule(params: AlClaParams, config: AlClaConfig) -> DecisionRule:
    """Expand encoder weights into the decoder basis to obtain the polynomial
    over sample moments that the model thresholds at zero."""
    params.check_shapes(config)
    enc = _encoder_expansion(params, config.d_x)
    terms: dict[TermKey, float] = defaultdict(float)
    for theta, mono in zip(params.theta, config.basis.monomials):
        if theta == 0.0:
            continue
        poly: dict[TermKey, float] = {(): 1.0}
        for mode, order, power in mono:
            lin = {(mk,): c for mk, c in enc[order - 1][mode].items()}
            for _ in range(power):
                poly = _poly_mul(poly, lin)
        for k, c in poly.items():
            terms[k] += theta * c
    return DecisionRule({k: v for k, v in terms.items() if v != 0.0}, config.d_x, config.normalize_encoder)


_TERM = re.compile(r"\s*([+-]?)\s*(\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)((?:⟨[^⟩]*⟩[⁰¹²³⁴⁵⁶⁷⁸⁹]*)*)")
_MOMENT = re.compile(r"⟨([^⟩]*)⟩([⁰¹²³⁴⁵⁶⁷⁸⁹]*)")
_FACTOR = re.compile(NHAT + r"([₀₁₂₃₄₅₆₇₈₉]*)([⁰¹²³⁴⁵⁶⁷⁸⁹]*)")


def parse_rule(text: str, d_x: int = 1, normalized: bool = True) -> DecisionRule:
    """Inverse of :meth:`DecisionRule.to_text`."""
    terms: dict[TermKey, float] = defaultdict(float)
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"cannot parse rule near {text[pos:pos + 20]!r}")
        sign = -1.0 if m.group(1) == "-" else 1.0
        coef = sign * float(m.group(2))
        key: list[MomentKey] = []
        for mm in _MOMENT.finditer(m.group(3)):
            modes: list[int] = []
            for fm in _FACTOR.finditer(mm.group(1)):
                mode = int(fm.group(1).translate(_UNSUB)) - 1 if fm.group(1) else 0
                p = int(fm.group(2).translate(_UNSUP)) if fm.group(2) else 1
                modes.extend([mode] * p)
            power = int(mm.group(2).translate(_UNSUP)) if mm.group(2) else 1
            key.extend([tuple(sorted(modes))] * power)
        terms[tuple(sorted(key))] += coef
        pos = m.end()
    return DecisionRule(dict(terms), d_x, normalized)
