"""Certified evaluation of the generator's weighted power series.

The series handled here have the form  sum_i alpha_i * q_i^l  where the
coefficients alpha are produced by the counterexample construction:

  * on a subsequence Omega = {i_k} with q_{i_k} >= k the coefficients are
    alpha_{i_k} = 1/(k^2 q_{i_k}^n), so the terms at exponent l <= n are
    q_{i_k}^{l-n}/k^2 and the terms at l = n+1 dominate the harmonic series;
  * off Omega the coefficients are chosen so that alpha_i * q_i^l <= 2^{-i}
    for every exponent l <= n, giving a geometric tail.

Convergent verdicts carry an interval enclosure: partial sums are
accumulated in fixed-point arithmetic with directed rounding (denominator
2^dyadic_bits), and the tails are bracketed by exact integral bounds.
Divergent verdicts carry a harmonic minorant plus an exact partial sum
that crosses a configurable threshold.

Everything below a certificate is an exact rational; enclosures are sound
by construction, never heuristic.
"""

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Optional

from .errors import NoCertificateError, SupNotWitnessedError
from .rationals import Interval, as_fraction, rat_to_str

_STABLE_STEPS = 8
_VERIFY_STEPS = 64
_MAX_STABILIZE_SCAN = 10_000


@dataclass(frozen=True)
class CertConfig:
    """Tunables for certificate evaluation.

    series_width is the per-series enclosure width target; checks against
    spec identities use check_tol.  max_terms caps the number of explicit
    terms of any one series (the achieved width is recorded either way).
    """

    series_width: Fraction = Fraction(1, 10**12)
    check_tol: Fraction = Fraction(1, 10**10)
    divergence_threshold: Fraction = Fraction(10)
    max_terms: int = 1_200_000
    off_omega_terms: int = 48
    scan_horizon: int = 1_000_000
    dyadic_bits: int = 320
    max_power: int = 16


DEFAULT_CONFIG = CertConfig()


class Tail(Enum):
    LINEAR = "linear"
    MIXED = "mixed"
    CONSTANT = "constant"


@dataclass(frozen=True)
class SequenceSpec:
    """Closed-form positive rational sequence i (1-based) -> q_i.

    A finite prefix of explicit values followed by a named tail rule:
    linear (q_i = i), mixed (q_i = i for even i, 1/i for odd i), or
    constant (repeat the last prefix value).
    """

    tail: Tail = Tail.LINEAR
    prefix: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(as_fraction(x) for x in self.prefix))
        if any(x <= 0 for x in self.prefix):
            raise ValueError("sequence values must be positive")
        if self.tail is Tail.CONSTANT and not self.prefix:
            raise ValueError("constant tail needs a nonempty prefix")

    def value(self, i: int) -> Fraction:
        if i < 1:
            raise ValueError("sequence index must be >= 1")
        if i <= len(self.prefix):
            return self.prefix[i - 1]
        if self.tail is Tail.LINEAR:
            return Fraction(i)
        if self.tail is Tail.MIXED:
            return Fraction(i) if i % 2 == 0 else Fraction(1, i)
        return self.prefix[-1]

    def sup_bound(self) -> Optional[Fraction]:
        """A finite upper bound for sup q_i, or None when unbounded."""
        if self.tail is Tail.CONSTANT:
            return max(self.prefix)
        return None

    def to_json(self):
        return {"tail": self.tail.value, "prefix": [rat_to_str(x) for x in self.prefix]}

    @staticmethod
    def from_json(obj) -> "SequenceSpec":
        return SequenceSpec(Tail(obj["tail"]), tuple(Fraction(x) for x in obj["prefix"]))


LINEAR_Q = SequenceSpec(Tail.LINEAR)
MIXED_Q = SequenceSpec(Tail.MIXED)


@dataclass(frozen=True)
class OmegaSpec:
    """The subsequence i_k chosen greedily so that q_{i_k} >= k.

    head memoizes the first indices; from affine_from onward the greedy
    choice stabilizes to i_k = slope*k + intercept with q_{i_k} = i_k
    (the construction verifies this before trusting it).
    """

    head: tuple
    affine_from: int
    slope: int
    intercept: int

    @property
    def covers_all(self) -> bool:
        """True when Omega = N (every index is on the subsequence)."""
        return (
            self.slope == 1
            and self.head == tuple(range(1, len(self.head) + 1))
            and self.intercept == 0
        )

    def index(self, k: int) -> int:
        if k < 1:
            raise ValueError("k must be >= 1")
        if k <= len(self.head):
            return self.head[k - 1]
        return self.slope * k + self.intercept

    def k_of(self, i: int) -> Optional[int]:
        """The k with i_k == i, or None when i is off the subsequence."""
        if i <= self.head[-1]:
            try:
                return self.head.index(i) + 1
            except ValueError:
                return None
        d, r = divmod(i - self.intercept, self.slope)
        return d if r == 0 else None

    def contains(self, i: int) -> bool:
        return self.k_of(i) is not None

    def to_json(self):
        return {
            "head": list(self.head),
            "affine_from": self.affine_from,
            "slope": self.slope,
            "intercept": self.intercept,
        }

    @staticmethod
    def from_json(obj) -> "OmegaSpec":
        return OmegaSpec(
            tuple(obj["head"]), obj["affine_from"], obj["slope"], obj["intercept"]
        )


def build_omega(q: SequenceSpec, cfg: CertConfig = DEFAULT_CONFIG) -> OmegaSpec:
    """Greedy subsequence: i_k = smallest index > i_{k-1} with q_i >= k.

    Scans until the choice stabilizes to an affine pattern in the pure tail
    region, then verifies the pattern for a further margin of steps.
    Raises SupNotWitnessedError when q is bounded (no valid index exists
    for some k within the scan horizon).
    """
    bound = q.sup_bound()

    def fail(k):
        raise SupNotWitnessedError(
            f"no index with q_i >= {k} witnessed (sup q_i looks bounded)"
        )

    head = []
    prev = 0

    def step(k):
        nonlocal prev
        if bound is not None and k > bound:
            fail(k)
        i = prev + 1
        scanned = 0
        while q.value(i) < k:
            i += 1
            scanned += 1
            if scanned > cfg.scan_horizon:
                fail(k)
        if q.value(i) < k:
            fail(k)
        head.append(i)
        prev = i

    prefix_len = len(q.prefix)
    k = 0
    while True:
        k += 1
        step(k)
        if k > _MAX_STABILIZE_SCAN:
            raise NoCertificateError("greedy subsequence did not stabilize")
        if k < _STABLE_STEPS + 1 or k <= prefix_len:
            continue
        window = head[-(_STABLE_STEPS + 1):]
        diffs = {b - a for a, b in zip(window, window[1:])}
        if len(diffs) != 1:
            continue
        d = diffs.pop()
        if window[0] <= prefix_len:
            continue
        if any(q.value(i) != i for i in window):
            continue
        slope, intercept = d, head[-1] - d * k
        affine_from = k - _STABLE_STEPS
        # verify the affine prediction for a margin of further greedy steps
        ok = True
        for kk in range(k + 1, k + 1 + _VERIFY_STEPS):
            step(kk)
            want = slope * kk + intercept
            if head[-1] != want or q.value(want) != Fraction(want):
                ok = False
                break
        if not ok:
            k = len(head)
            continue
        # q_{i_k} >= k must persist on the affine tail
        if slope == 1 and intercept < 0:
            raise NoCertificateError("affine tail violates q_{i_k} >= k")
        if (slope - 1) * affine_from + intercept < 0:
            raise NoCertificateError("affine tail violates q_{i_k} >= k")
        return OmegaSpec(tuple(head), affine_from, slope, intercept)


@dataclass(frozen=True)
class AlphaFamily:
    """Generator coefficients with on/off-Omega tail metadata.

    On Omega: alpha_{i_k} = scale / (k^2 q_{i_k}^n).
    Off Omega: alpha_i = scale * 2^{-i} / sum_{k=1}^{i} q_i^{n+1-k}.
    The scale factor is carried symbolically, so enclosures of rescaled
    families are exact rational multiples of the base enclosures.
    """

    q: SequenceSpec
    omega: OmegaSpec
    power: int
    scale: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "scale", as_fraction(self.scale))
        if self.power < 1:
            raise ValueError("power must be >= 1")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def base(self) -> "AlphaFamily":
        return self if self.scale == 1 else replace(self, scale=Fraction(1))

    def rescaled(self, r) -> "AlphaFamily":
        return replace(self, scale=self.scale * as_fraction(r))

    def on_omega_value(self, k: int) -> Fraction:
        qv = self.q.value(self.omega.index(k))
        return self.scale / (k * k * qv**self.power)

    def off_omega_value(self, i: int) -> Fraction:
        if self.omega.contains(i):
            raise ValueError(f"index {i} is on Omega")
        return self.scale * Fraction(1, 2**i) / _slon4_denominator(self.q, self.power, i)

    def value(self, i: int) -> Fraction:
        k = self.omega.k_of(i)
        if k is not None:
            return self.on_omega_value(k)
        return self.off_omega_value(i)

    def to_json(self):
        return {"power": self.power, "scale": rat_to_str(self.scale)}


def _slon4_denominator(q: SequenceSpec, n: int, i: int) -> Fraction:
    """sum_{k=1}^{i} q_i^{n+1-k}: the row sum bounding alpha_i on column k."""
    qv = q.value(i)
    return sum((qv ** (n + 1 - k) for k in range(1, i + 1)), Fraction(0))


@dataclass(frozen=True)
class SeriesCertificate:
    """Machine-checkable verdict for a nonnegative series.

    Convergent: enclosure [partial_lo + tail_lo, partial_hi + tail_hi]
    where [partial_lo, partial_hi] brackets the computed partial sum
    (directed fixed-point rounding) and [tail_lo, tail_hi] brackets the
    omitted tail by exact integral/geometric comparison.

    Divergent: the on-Omega terms dominate 1/k; witness_partial is the
    exact partial sum of those terms at witness_index and strictly
    exceeds the threshold.
    """

    terms: str
    verdict: str  # "convergent" | "divergent"
    scale: Fraction = Fraction(1)
    enclosure: Optional[Interval] = None
    tail_rule: str = ""
    terms_used: int = 0
    omega_terms: int = 0
    off_terms: int = 0
    partial_lo: Optional[Fraction] = None
    partial_hi: Optional[Fraction] = None
    tail_lo: Optional[Fraction] = None
    tail_hi: Optional[Fraction] = None
    minorant: str = ""
    threshold: Optional[Fraction] = None
    witness_index: Optional[int] = None
    witness_partial: Optional[Fraction] = None
    witness_partial_lb: Optional[Fraction] = None  # compact dyadic bound > threshold

    @property
    def is_convergent(self) -> bool:
        return self.verdict == "convergent"

    @property
    def width(self) -> Fraction:
        return self.enclosure.width

    def to_json(self):
        out = {"terms": self.terms, "verdict": self.verdict, "scale": rat_to_str(self.scale)}
        if self.is_convergent:
            out.update(
                enclosure=[rat_to_str(self.enclosure.lo), rat_to_str(self.enclosure.hi)],
                tail_rule=self.tail_rule,
                terms_used=self.terms_used,
                omega_terms=self.omega_terms,
                off_terms=self.off_terms,
                partial_lo=rat_to_str(self.partial_lo),
                partial_hi=rat_to_str(self.partial_hi),
                tail_lo=rat_to_str(self.tail_lo),
                tail_hi=rat_to_str(self.tail_hi),
            )
        else:
            # the exact partial sum has an lcm-sized denominator; persist the
            # certified dyadic lower bound instead (still strictly > threshold)
            out.update(
                minorant=self.minorant,
                threshold=rat_to_str(self.threshold),
                witness_index=self.witness_index,
                witness_partial_lb=rat_to_str(self.witness_partial_lb),
            )
        return out


def _on_tail_bounds(a: Fraction, b: Fraction, m: int, K: int):
    """Exact bracket of sum_{k>K} 1/(k^2 (a*k+b)^m), the on-Omega tail.

    Uses (a*k+b)/k in [c_lo, c_hi] for k >= K+1 and the integral sandwich
    int_{K+1}^inf x^{-p} dx <= sum_{k>K} k^{-p} <= int_K^inf x^{-p} dx.
    """
    p = m + 2
    if m == 0:
        c_lo = c_hi = Fraction(1)
    elif b >= 0:
        c_lo, c_hi = a, a + b / (K + 1)
    else:
        c_lo, c_hi = a + b / (K + 1), a
    if c_lo <= 0:
        raise NoCertificateError("affine tail coefficient not positive")
    lo = (c_hi ** -m if m else Fraction(1)) * Fraction(1, (p - 1) * (K + 1) ** (p - 1))
    hi = (c_lo ** -m if m else Fraction(1)) * Fraction(1, (p - 1) * K ** (p - 1))
    return lo, hi


class _DyadicSum:
    """Directed fixed-point accumulator: after adding N exact rationals,
    the true sum lies in [lo_int, lo_int + N] / 2^bits."""

    def __init__(self, bits: int):
        self.bits = bits
        self.one = 1 << bits
        self.lo_int = 0
        self.count = 0

    def add(self, x: Fraction):
        self.lo_int += (x.numerator << self.bits) // x.denominator
        self.count += 1

    def bounds(self):
        scale = Fraction(1, self.one)
        return self.lo_int * scale, (self.lo_int + self.count) * scale


_BASE_CACHE: dict = {}
_WITNESS_CACHE: dict = {}


def _convergent_base(q, omega, n, l, cfg) -> SeriesCertificate:
    """Unscaled convergent certificate for sum_i alpha_i q_i^l, l <= n."""
    m = n - l
    a, b = Fraction(omega.slope), Fraction(omega.intercept)
    off_empty = omega.covers_all
    I = 0 if off_empty else max(cfg.off_omega_terms, n + 1 - l, 1)
    off_tail_hi = Fraction(0) if off_empty else Fraction(1, 2**I)

    K = max(16, omega.affine_from)
    while True:
        t_lo, t_hi = _on_tail_bounds(a, b, m, K)
        slop = Fraction(K + I, 2**cfg.dyadic_bits)
        if (t_hi - t_lo) + off_tail_hi + slop <= cfg.series_width or K >= cfg.max_terms:
            break
        K = min(2 * K, cfg.max_terms)

    acc = _DyadicSum(cfg.dyadic_bits)
    head_len = len(omega.head)
    shift = acc.bits
    if m == 0:
        # terms are exactly 1/k^2, independent of q
        for k in range(1, K + 1):
            acc.lo_int += (1 << shift) // (k * k)
        acc.count += K
    else:
        for k in range(1, K + 1):
            if k <= head_len:
                qv = q.value(omega.head[k - 1])
            else:
                qv = a * k + b
            acc.add(qv ** (-m) / (k * k))

    off_used = 0
    if not off_empty:
        for i in range(1, I + 1):
            if omega.contains(i):
                continue
            term = Fraction(1, 2**i) * q.value(i) ** l / _slon4_denominator(q, n, i)
            acc.add(term)
            off_used += 1

    partial_lo, partial_hi = acc.bounds()
    tail_lo = t_lo
    tail_hi = t_hi + off_tail_hi
    rule = (
        f"on-Omega tail: integral sandwich of sum 1/(k^2 (q_slope*k+q_icept)^{m}) "
        f"beyond k={K}"
    )
    if not off_empty:
        rule += f"; off-Omega tail: sum_{{i>{I}}} 2^-i = 2^-{I}"
    return SeriesCertificate(
        terms=f"sum_i alpha_i*q_i^{l}",
        verdict="convergent",
        enclosure=Interval(partial_lo + tail_lo, partial_hi + tail_hi),
        tail_rule=rule,
        terms_used=K + off_used,
        omega_terms=K,
        off_terms=off_used,
        partial_lo=partial_lo,
        partial_hi=partial_hi,
        tail_lo=tail_lo,
        tail_hi=tail_hi,
    )


def dyadic_floor(x: Fraction, bits: int = 128) -> Fraction:
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def _divergent_base(q, omega, n, l, cfg) -> SeriesCertificate:
    """Unscaled divergent certificate for l >= n+1: harmonic minorant."""
    m = l - n  # >= 1
    T = as_fraction(cfg.divergence_threshold)
    S = Fraction(0)
    k = 0
    while True:
        k += 1
        qv = q.value(omega.index(k))
        if qv < k:
            raise NoCertificateError(f"q_{{i_{k}}} = {qv} < {k}: minorant broken")
        S += qv**m / (k * k)
        # stop at the first crossing whose dyadic floor still exceeds T
        if S > T and dyadic_floor(S) > T:
            break
        if k > 10_000_000:
            raise NoCertificateError("divergence witness not reached")
    return SeriesCertificate(
        terms=f"sum_i alpha_i*q_i^{l}",
        verdict="divergent",
        minorant=(
            f"on-Omega terms q_{{i_k}}^{m}/k^2 >= 1/k (harmonic, since "
            f"q_{{i_k}} >= k); remaining terms nonnegative"
        ),
        threshold=T,
        witness_index=k,
        witness_partial=S,
        witness_partial_lb=dyadic_floor(S),
    )


def _scaled(cert: SeriesCertificate, scale: Fraction) -> SeriesCertificate:
    if scale == 1:
        return cert
    if cert.is_convergent:
        return replace(
            cert,
            scale=scale,
            enclosure=Interval(cert.enclosure.lo * scale, cert.enclosure.hi * scale),
            partial_lo=cert.partial_lo * scale,
            partial_hi=cert.partial_hi * scale,
            tail_lo=cert.tail_lo * scale,
            tail_hi=cert.tail_hi * scale,
        )
    # positive rescaling leaves divergence (and its unscaled witness) intact
    return replace(cert, scale=scale)


def power_series_certificate(
    alpha: AlphaFamily, l: int, cfg: CertConfig = DEFAULT_CONFIG
) -> SeriesCertificate:
    """Certificate for sum_i alpha_i * q_i^l over the full index set."""
    key = (
        alpha.q,
        alpha.omega,
        alpha.power,
        l,
        cfg.series_width,
        cfg.max_terms,
        cfg.off_omega_terms,
        cfg.dyadic_bits,
        cfg.divergence_threshold,
    )
    cert = _BASE_CACHE.get(key)
    if cert is None:
        if l <= alpha.power:
            cert = _convergent_base(alpha.q, alpha.omega, alpha.power, l, cfg)
        else:
            cert = _divergent_base(alpha.q, alpha.omega, alpha.power, l, cfg)
        _BASE_CACHE[key] = cert
    return _scaled(cert, alpha.scale)


def witness_partial_sum(alpha: AlphaFamily, l: int, upto: int) -> Fraction:
    """Exact partial sum of the on-Omega terms of sum alpha_i q_i^l / scale.

    This is the direct recomputation path for divergence witnesses.
    """
    return _witness_partial_cached(alpha.q, alpha.omega, l - alpha.power, upto)


def _witness_partial_cached(q, omega, m, upto) -> Fraction:
    key = (q, omega, m, upto)
    S = _WITNESS_CACHE.get(key)
    if S is None:
        S = Fraction(0)
        for k in range(1, upto + 1):
            S += q.value(omega.index(k)) ** m / (k * k)
        _WITNESS_CACHE[key] = S
    return S


def finite_series_certificate(q: SequenceSpec, values, l: int) -> SeriesCertificate:
    """Exact certificate for a finitely supported coefficient sequence."""
    total = Fraction(0)
    used = 0
    for idx, v in enumerate(values, start=1):
        v = as_fraction(v)
        if v < 0:
            raise ValueError("coefficients must be nonnegative")
        if v == 0:
            continue
        total += v * q.value(idx) ** l
        used += 1
    return SeriesCertificate(
        terms=f"finite sum_i alpha_i*q_i^{l}",
        verdict="convergent",
        enclosure=Interval.point(total),
        tail_rule="finite support: tail is exactly zero",
        terms_used=used,
        omega_terms=0,
        off_terms=used,
        partial_lo=total,
        partial_hi=total,
        tail_lo=Fraction(0),
        tail_hi=Fraction(0),
    )
