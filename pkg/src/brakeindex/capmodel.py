"""Model cap operators: exact kernel/cokernel counts and index ledgers.

The model cap operator on a rank-1 summand twists del-bar by a ramp
beta(s) omega on the cylindrical end.  With the brake symmetry the
Fourier coefficients are real, so each admissible mode contributes one
real dimension:

* kernel modes:   integers k with 0 <= k < omega / 2 pi,
* cokernel modes: integers k with omega / 2 pi < k <= -1.

Ledger pieces glue along labelled boundaries carrying (kind, value)
data; matched boundaries must agree and be traversed once as a positive
end and once as a negative end.
"""

from __future__ import annotations

import dataclasses
import math

from .core import HalfInt
from .errors import BoundaryMismatch, OmegaResonant, ValidationError

POSITIVE = "positive"
NEGATIVE = "negative"


@dataclasses.dataclass(frozen=True)
class CapSpec:
    """A direct sum of rank many rotation-model summands at rate omega."""

    omega: float
    rank: int = 1
    resonance_tol: float = 1e-9

    def __post_init__(self):
        if self.rank < 1:
            raise ValidationError("rank must be a positive integer")
        ratio = self.omega / (2 * math.pi)
        if abs(ratio - round(ratio)) <= self.resonance_tol:
            raise OmegaResonant(
                f"omega/2pi = {ratio!r} is within {self.resonance_tol} of an integer"
            )


def cap_kernel_cokernel(spec: CapSpec):
    """Exact (kernel, cokernel) real dimensions by mode counting."""
    ratio = spec.omega / (2 * math.pi)
    if ratio > 0:
        kernel = math.ceil(ratio)  # integers 0 <= k < ratio
        cokernel = 0
    else:
        kernel = 0
        cokernel = -1 - math.floor(ratio)  # integers ratio < k <= -1
        cokernel = max(cokernel, 0)
    return kernel * spec.rank, cokernel * spec.rank


def cap_index(sign, boundary_value, rank=1, is_pair=False) -> HalfInt:
    """Index of a cap with the given boundary data.

    Symmetric caps contribute rank/2 +- mu1; a pair of caps glued along a
    Reeb orbit pair contributes rank +- mu_CZ (is_pair=True counts the
    two half-caps at once and uses the Conley-Zehnder boundary value).
    """
    if sign not in (POSITIVE, NEGATIVE):
        raise ValidationError("sign must be 'positive' or 'negative'")
    value = HalfInt.coerce(boundary_value)
    if is_pair:
        base = HalfInt.from_int(rank)
    else:
        base = HalfInt(rank)  # rank/2
    return base + value if sign == POSITIVE else base - value


@dataclasses.dataclass(frozen=True)
class Boundary:
    label: str
    sign: str  # POSITIVE (outgoing end) or NEGATIVE (incoming end)
    kind: str  # "brake" or "pair"
    value: HalfInt

    def __post_init__(self):
        if self.sign not in (POSITIVE, NEGATIVE):
            raise ValidationError("boundary sign must be positive/negative")
        if self.kind not in ("brake", "pair"):
            raise ValidationError("boundary kind must be 'brake' or 'pair'")
        object.__setattr__(self, "value", HalfInt.coerce(self.value))


@dataclasses.dataclass(frozen=True)
class GluePiece:
    name: str
    index: HalfInt
    boundaries: tuple

    def __post_init__(self):
        object.__setattr__(self, "index", HalfInt.coerce(self.index))
        object.__setattr__(self, "boundaries", tuple(self.boundaries))


@dataclasses.dataclass(frozen=True)
class IndexLedger:
    pieces: tuple
    total: HalfInt
    open_boundaries: tuple

    @classmethod
    def single(cls, piece: GluePiece):
        return cls((piece,), piece.index, piece.boundaries)


def glue(*items):
    """Combine pieces/ledgers, matching boundary labels pairwise.

    A label appearing twice must carry identical (kind, value) data and
    opposite signs; it is then consumed.  A label appearing more than
    twice is malformed.  The total index is the plain sum.
    """
    pieces = []
    boundaries = []
    total = HalfInt(0)
    for item in items:
        if isinstance(item, GluePiece):
            item = IndexLedger.single(item)
        if not isinstance(item, IndexLedger):
            raise ValidationError("glue takes GluePiece or IndexLedger items")
        pieces.extend(item.pieces)
        boundaries.extend(item.open_boundaries)
        total = total + item.total
    by_label = {}
    for b in boundaries:
        by_label.setdefault(b.label, []).append(b)
    remaining = []
    for label, group in by_label.items():
        if len(group) == 1:
            remaining.append(group[0])
            continue
        if len(group) > 2:
            raise BoundaryMismatch(f"label {label!r} appears {len(group)} times")
        x, y = group
        if x.kind != y.kind or x.value != y.value:
            raise BoundaryMismatch(
                f"label {label!r} carries mismatched data "
                f"({x.kind}, {x.value}) vs ({y.kind}, {y.value})"
            )
        if {x.sign, y.sign} != {POSITIVE, NEGATIVE}:
            raise BoundaryMismatch(
                f"label {label!r} must join a positive end to a negative end"
            )
    remaining.sort(key=lambda b: b.label)
    return IndexLedger(tuple(pieces), total, tuple(remaining))


def riemann_roch_brake(genus, c1=0, rank=1) -> HalfInt:
    """Index (rank/2) chi + c1 for a closed symmetric surface of the
    given genus: chi = 2 - 2 genus."""
    if genus < 0:
        raise ValidationError("genus must be nonnegative")
    return HalfInt(rank * (2 - 2 * genus)) + HalfInt.from_int(c1)


def _ramp(s):
    # smooth monotone ramp supported on [2, 3]
    if s <= 2.0:
        return 0.0
    if s >= 3.0:
        return 1.0
    x = s - 2.0
    return x * x * (3.0 - 2.0 * x)


def _decays(rate_fn, s_max, steps):
    """Integrate log a' = rate(s) and test whether the solution has
    dropped well below its running maximum by the end of the domain."""
    h = s_max / steps
    log_a = 0.0
    log_max = 0.0
    for i in range(steps):
        s = i * h
        log_a += 0.5 * h * (rate_fn(s) + rate_fn(s + h))
        log_max = max(log_max, log_a)
    return log_a < log_max - 1.0


def slow_cap_check(omega, k_range=8, s_max=12.0, steps=4800):
    """Low-resolution ODE cross-check of the cap mode counts.

    Integrates the radial equation a'(s) = (2 pi k - beta(s) omega) a(s)
    for each Fourier mode (and the adjoint equation with opposite sign)
    on a truncated cylinder and classifies each solution as decaying by
    comparing its endpoint against its running maximum.  Returns
    (kernel, cokernel) counts for a rank-1 summand; intended for omega
    near +-pi.
    """
    ker = 0
    coker = 0
    for k in range(-k_range, k_range + 1):
        # kernel candidate: regularity at the disk end needs k >= 0
        if k >= 0 and _decays(
            lambda s, k=k: 2 * math.pi * k - _ramp(s) * omega, s_max, steps
        ):
            ker += 1
        # cokernel candidate: adjoint mode, disk-end condition k <= -1
        if k <= -1 and _decays(
            lambda s, k=k: -(2 * math.pi * k - _ramp(s) * omega), s_max, steps
        ):
            coker += 1
    return ker, coker
