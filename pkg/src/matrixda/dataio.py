"""Dataset container, deterministic splitting and synthetic data.

``.mts`` text format::

    n d1 d2 c
    <label of observation 1>
    <d1 lines of d2 space-separated floats>
    <label of observation 2>
    ...

Floats are written with 17 significant digits so ``load_mts(save_mts(d))``
reproduces ``d`` bit for bit; ``inf``/``nan`` are rejected.  Lines end with LF
and the file ends with a newline.

Random splits and fold assignments use :class:`SplitMix64` (Steele, Lea &
Flood's 64-bit generator) and an explicit Fisher-Yates shuffle, so they do not
depend on the platform or the NumPy version.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .exceptions import InputError, MtsParseError
from .scatter import MtsDataset

_MASK = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 generator.

    ``state += 0x9E3779B97F4A7C15``; the output is the state passed through
    ``z = (z ^ z>>30) * 0xBF58476D1CE4E5B9``, ``z = (z ^ z>>27) *
    0x94D049BB133111EB``, ``z ^ z>>31`` (all modulo 2**64).
    """

    def __init__(self, seed):
        self.state = int(seed) & _MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def shuffle(self, items):
        """In-place Fisher-Yates: for i = len-1 .. 1 swap i with next() % (i+1)."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next() % (i + 1)
            items[i], items[j] = items[j], items[i]
        return items

    def derive(self):
        """A new generator seeded from the next output."""
        return SplitMix64(self.next())


def as_fraction(proportion):
    """Parse ``'1/9'``, ``0.25``, ``Fraction(4, 5)``... into a Fraction in (0, 1]."""
    try:
        if isinstance(proportion, float):
            p = Fraction(proportion).limit_denominator(10 ** 6)
        else:
            p = Fraction(str(proportion).strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"invalid proportion {proportion!r}") from exc
    if not 0 < p <= 1:
        raise InputError(f"proportion must lie in (0, 1], got {p}")
    return p


@dataclass(frozen=True)
class SplitSpec:
    """Per-class random split: ``max(1, floor(proportion * n_k))`` for training."""

    proportion: Fraction
    seed: int
    per_class: bool = True

    def __post_init__(self):
        object.__setattr__(self, "proportion", as_fraction(self.proportion))
        if not self.per_class:
            raise InputError("only per-class splitting is supported")

    def n_train(self, n_k):
        return max(1, math.floor(self.proportion * n_k))


def random_split(data, spec):
    """Split ``data`` into ``(train, test)`` class by class.

    Both parts keep the original relative order of observations.
    """
    data.require_nonempty_classes()
    rng = SplitMix64(spec.seed)
    train_idx = []
    for k in range(data.n_classes):
        members = list(np.flatnonzero(data.labels == k))
        rng.shuffle(members)
        train_idx.extend(members[:spec.n_train(len(members))])
    mask = np.zeros(data.n, dtype=bool)
    mask[train_idx] = True
    return data.subset(np.flatnonzero(mask)), data.subset(np.flatnonzero(~mask))


def synth_separable(d1, d2, n_per_class, c, mean_gap, noise_sigma, seed):
    """Gaussian classes around multiples of a fixed rank-1 pattern.

    Class ``k`` has mean ``mean_gap * k * a b'`` with ``a``, ``b`` constant unit
    vectors (so the pattern has unit Frobenius norm); i.i.d.
    ``N(0, noise_sigma**2)`` noise is added entrywise.  Labels are grouped by
    class.
    """
    if mean_gap < 0:
        raise InputError("mean_gap must be non-negative")
    if not noise_sigma > 0:
        raise InputError("noise_sigma must be positive")
    if min(d1, d2, n_per_class, c) < 1:
        raise InputError("dimensions, class count and class size must be positive")
    rng = np.random.default_rng(seed)
    pattern = np.outer(np.full(d1, 1 / np.sqrt(d1)), np.full(d2, 1 / np.sqrt(d2)))
    labels = np.repeat(np.arange(c), n_per_class)
    X = mean_gap * labels[:, None, None] * pattern
    X = X + noise_sigma * rng.standard_normal((c * n_per_class, d1, d2))
    return MtsDataset(X, labels, c)


def save_mts(path, data):
    """Write ``data`` in the ``.mts`` text format."""
    X = data.observations
    if not np.all(np.isfinite(X)):
        raise InputError("cannot save non-finite values")
    n, d1, d2 = X.shape
    parts = [f"{n} {d1} {d2} {data.n_classes}\n"]
    for obs, label in zip(X, data.labels):
        parts.append(f"{int(label)}\n")
        for row in obs:
            parts.append(" ".join(format(float(v), ".17g") for v in row))
            parts.append("\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("".join(parts))


def _parse_int(token, lineno, what):
    try:
        return int(token)
    except ValueError:
        raise MtsParseError(f"{what} is not an integer: {token!r}", lineno) from None


def load_mts(path):
    """Read an ``.mts`` file.

    Raises
    ------
    MtsParseError
        On a malformed header, a label out of range, wrong row or column
        counts, non-finite values, a missing trailing newline, or a class
        without observations.  The message carries the line number.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        text = fh.read()
    if not text.endswith("\n"):
        raise MtsParseError("file must end with a newline", text.count("\n") + 1)
    if "\r" in text:
        raise MtsParseError("CR characters are not allowed; use LF line endings",
                            text[:text.index("\r")].count("\n") + 1)
    lines = text[:-1].split("\n")
    header = lines[0].split(" ")
    if len(header) != 4:
        raise MtsParseError("header must be 'n d1 d2 c'", 1)
    n, d1, d2, c = (_parse_int(tok, 1, "header field") for tok in header)
    if n < 0 or d1 < 1 or d2 < 1 or c < 1:
        raise MtsParseError("header values out of range", 1)
    expected = 1 + n * (1 + d1)
    if len(lines) != expected:
        raise MtsParseError(
            f"expected {expected} lines for n={n}, d1={d1}, got {len(lines)}",
            min(len(lines), expected) + 1)
    X = np.empty((n, d1, d2))
    labels = np.empty(n, dtype=np.int64)
    lineno = 1
    for i in range(n):
        lineno += 1
        label = _parse_int(lines[lineno - 1], lineno, "label")
        if not 0 <= label < c:
            raise MtsParseError(f"label {label} outside [0, {c})", lineno)
        labels[i] = label
        for row in range(d1):
            lineno += 1
            tokens = lines[lineno - 1].split(" ")
            if len(tokens) != d2:
                raise MtsParseError(f"expected {d2} values, found {len(tokens)}", lineno)
            try:
                values = [float(tok) for tok in tokens]
            except ValueError:
                raise MtsParseError("unparseable value", lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise MtsParseError("non-finite value", lineno)
            X[i, row] = values
    counts = np.bincount(labels, minlength=c)
    if np.any(counts == 0):
        raise MtsParseError(f"class {int(np.argmin(counts))} has no observations", 1)
    return MtsDataset(X, labels, c)
