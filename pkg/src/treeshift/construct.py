"""Counterexample generator on the model tree with eta = infinity.

Given a target power n and a trunk length kappa, produce a certified
weight system and measure system such that S^n is densely defined while
S^{n+1} is not:

  * pick a subsequence Omega with q_{i_k} >= k;
  * set alpha_{i_k} = 1/(k^2 q_{i_k}^n) on Omega and choose alpha off
    Omega so that alpha_i * sum_{k<=i} q_i^{n+1-k} <= 2^{-i};
  * normalize so that sum_i c*alpha_i = 1, making the branching-vertex
    measure a probability mixture;
  * define trunk weights as ratios of neighbouring negative-moment series
    (the normalization constant cancels);
  * derive the trunk measures down the single-child chain and certify all
    the identities the construction promises.

Artifacts serialize to a single deterministic JSON document carrying both
the symbolic rules and concrete per-vertex tables inside the truncation
window; `verify` re-checks a document from its tables.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Optional, Tuple, Union

from .errors import NoCertificateError
from .measures import (
    AtomicMeasure,
    ConsistencyResult,
    MixtureMeasure,
    check_consist6_at,
)
from .rationals import (
    Interval,
    coerce,
    interval_from_json,
    interval_to_json,
    rat_from_str,
    rat_to_decimal,
    rat_to_str,
)
from .series import (
    AlphaFamily,
    CertConfig,
    DEFAULT_CONFIG,
    OmegaSpec,
    SequenceSpec,
    SeriesCertificate,
    build_omega,
    dyadic_floor,
    power_series_certificate,
    witness_partial_sum,
)
from .shift import ModelWeights
from .tree import (
    INF,
    Branch,
    ModelTree,
    Trunk,
    Vertex,
    Window,
    children,
    window_vertices,
)
from . import wco

SCHEMA = "treeshift-artifact/1"


@dataclass(frozen=True)
class CounterexampleRequest:
    """Target power n >= 1, trunk length kappa, base sequence q (sup must be
    unbounded), and certificate configuration."""

    n: int
    kappa: Union[int, float] = 0
    q: SequenceSpec = SequenceSpec()
    cert: CertConfig = DEFAULT_CONFIG
    window: Window = Window()

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.n + 1 > self.cert.max_power:
            raise ValueError("n+1 exceeds the configured power cap")
        if self.kappa is not INF and (not isinstance(self.kappa, int) or self.kappa < 0):
            raise ValueError("kappa must be an integer >= 0 or INF")

    def to_json(self):
        return {
            "n": self.n,
            "kappa": "inf" if self.kappa is INF else self.kappa,
            "q": self.q.to_json(),
            "window": {
                "max_trunk": self.window.max_trunk,
                "max_branch": self.window.max_branch,
                "max_depth": self.window.max_depth,
            },
            "cert": {
                "series_width": rat_to_str(self.cert.series_width),
                "check_tol": rat_to_str(self.cert.check_tol),
                "divergence_threshold": rat_to_str(self.cert.divergence_threshold),
                "max_terms": self.cert.max_terms,
                "off_omega_terms": self.cert.off_omega_terms,
                "scan_horizon": self.cert.scan_horizon,
                "dyadic_bits": self.cert.dyadic_bits,
                "max_power": self.cert.max_power,
            },
        }

    @staticmethod
    def from_json(obj) -> "CounterexampleRequest":
        cert = obj["cert"]
        return CounterexampleRequest(
            n=obj["n"],
            kappa=INF if obj["kappa"] == "inf" else obj["kappa"],
            q=SequenceSpec.from_json(obj["q"]),
            cert=CertConfig(
                series_width=Fraction(cert["series_width"]),
                check_tol=Fraction(cert["check_tol"]),
                divergence_threshold=Fraction(cert["divergence_threshold"]),
                max_terms=cert["max_terms"],
                off_omega_terms=cert["off_omega_terms"],
                scan_horizon=cert["scan_horizon"],
                dyadic_bits=cert["dyadic_bits"],
                max_power=cert["max_power"],
            ),
            window=Window(**obj["window"]),
        )


# --- pipeline operations ---


def boundedness_guard(q: SequenceSpec, cfg: CertConfig = DEFAULT_CONFIG) -> str:
    """The shift is bounded iff sup q_i < infinity; report which side the
    scan witnesses.  Informational: callers decide whether to proceed."""
    bound = q.sup_bound()
    if bound is not None:
        return f"bounded-looking: sup q_i <= {bound}"
    target = Fraction(1000)
    i = 0
    while True:
        i += 1
        if q.value(i) >= target:
            return f"unbounded: q_{i} = {q.value(i)} >= {target} witnessed"
        if i > cfg.scan_horizon:
            return "unbounded tail rule, no witness within scan horizon"


def choose_subsequence(q: SequenceSpec, cfg: CertConfig = DEFAULT_CONFIG) -> OmegaSpec:
    """Strictly increasing i_k with q_{i_k} >= k, greedily smallest."""
    return build_omega(q, cfg)


def omega_alphas(q: SequenceSpec, omega: OmegaSpec, n: int, upto_k: int) -> Dict[int, Fraction]:
    """alpha_{i_k} = 1/(k^2 q_{i_k}^n) for k <= upto_k."""
    fam = AlphaFamily(q, omega, n)
    return {omega.index(k): fam.on_omega_value(k) for k in range(1, upto_k + 1)}


def slon4_alphas(q: SequenceSpec, omega: OmegaSpec, n: int, upto_i: int) -> Dict[int, Fraction]:
    """Off-Omega alpha_i = 2^{-i} / sum_{k=1}^{i} q_i^{n+1-k} for i <= upto_i,
    making column k of the exponent matrix summable with a geometric tail."""
    fam = AlphaFamily(q, omega, n)
    return {
        i: fam.off_omega_value(i)
        for i in range(1, upto_i + 1)
        if not omega.contains(i)
    }


def normalize(alpha: AlphaFamily, cfg: CertConfig = DEFAULT_CONFIG):
    """c = 1 / sum_i alpha_i as an interval; the series converges because
    the exponent 0 is <= n."""
    cert = power_series_certificate(alpha, 0, cfg)
    if not cert.is_convergent:
        raise NoCertificateError("normalization series did not certify convergent")
    return cert.enclosure.recip(), cert


def branch_weights(alpha: AlphaFamily, c: Interval, kappa) -> ModelWeights:
    """Branch part of the weight system: |lambda_{i,1}|^2 = c*alpha_i*q_i
    and |lambda_{i,j}|^2 = q_i for j >= 2; trunk left empty."""
    return ModelWeights(alpha=alpha, c=c, kappa=kappa, trunk=())


def _moment_series(alpha: AlphaFamily, l: int, cfg: CertConfig) -> SeriesCertificate:
    """Certificate for sum_i alpha_i q_i^{-l} (negative moments, l >= 0)."""
    return power_series_certificate(alpha, -l, cfg)


def trunk_weights(
    alpha: AlphaFamily, kappa, levels: int, cfg: CertConfig = DEFAULT_CONFIG
) -> Tuple[Interval, ...]:
    """|lambda_{-l}|^2 for l = 0..levels-1 as ratios of neighbouring
    negative-moment series; the normalization constant cancels, so these
    enclosures are exactly invariant under rescaling alpha.

    For finite kappa the recursion runs to l = kappa-1 and the last weight
    makes the terminal inequality an equality.
    """
    if kappa is not INF and levels > kappa:
        raise ValueError("more trunk weights requested than non-root trunk vertices")
    out = []
    for l in range(levels):
        num = _moment_series(alpha, l, cfg).enclosure
        den = _moment_series(alpha, l + 1, cfg).enclosure
        out.append(num / den)
    return tuple(out)


@lru_cache(maxsize=65536)
def _cached_dirac(q: SequenceSpec, i: int) -> AtomicMeasure:
    return AtomicMeasure.dirac(q.value(i))


@lru_cache(maxsize=65536)
def _cached_dirac_at(t: Fraction) -> AtomicMeasure:
    return AtomicMeasure.dirac(t)


@dataclass(frozen=True)
class MeasureSystem:
    """Measures of a generated system: delta_{q_i} on every branch vertex,
    Dirac mixtures at vertex 0 and down the trunk, eps identically 0 (the
    trunk recursion keeps every mass exactly 1)."""

    q: SequenceSpec
    mixtures: Tuple[MixtureMeasure, ...]  # index = trunk level (0 = vertex 0)
    eps_root_slack: Fraction = Fraction(0)

    def measure_at(self, v: Vertex):
        if isinstance(v, Branch):
            return _cached_dirac(self.q, v.i)
        if isinstance(v, Trunk):
            if v.k < len(self.mixtures):
                return self.mixtures[v.k]
            raise NoCertificateError(f"no measure materialized for {v}")
        raise NoCertificateError(f"no measure for {v}")

    def eps_at(self, v: Vertex) -> Fraction:
        return Fraction(0)


def build_measure_system(
    alpha: AlphaFamily, kappa, levels: int, cfg: CertConfig = DEFAULT_CONFIG
) -> MeasureSystem:
    """Mixtures mu_{-l} = sum_i prefactor_l * alpha_i q_i^{-l} delta_{q_i}
    for l = 0..levels-1, derived down the single-child trunk chain; each
    prefactor encloses the reciprocal of its own series, so every mass is
    exactly 1 and every eps vanishes."""
    mixtures = []
    for l in range(levels):
        prefactor = _moment_series(alpha, l, cfg).enclosure.recip()
        mixtures.append(MixtureMeasure(alpha=alpha, shift=l, prefactor=prefactor))
    return MeasureSystem(q=alpha.q, mixtures=tuple(mixtures))


# --- the artifact ---


@dataclass
class CounterexampleArtifact:
    request: CounterexampleRequest
    tree: ModelTree
    window: Window
    omega: OmegaSpec
    alpha: AlphaFamily
    c: Interval
    weights: ModelWeights
    measures: MeasureSystem
    boundedness: str
    certificates: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.request.n

    def to_json_dict(self) -> dict:
        return _artifact_doc(self)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1) + "\n"


def _trunk_levels(kappa, window: Window) -> int:
    """Number of trunk weights |lambda_{-l}|^2 materialized (l = 0..L-1)."""
    if kappa == 0:
        return 0
    if kappa is INF:
        return window.max_trunk + 1
    return min(int(kappa) - 1, window.max_trunk) + 1


def _mixture_levels(kappa, window: Window) -> int:
    """Number of trunk measures materialized (levels 0..M-1, level 0 = vertex 0)."""
    if kappa is INF:
        return window.max_trunk + 1
    return min(int(kappa), window.max_trunk) + 1


def generate(request: CounterexampleRequest) -> CounterexampleArtifact:
    """Run the full pipeline and certify every promised identity."""
    cfg = request.cert
    kappa = request.kappa
    window = request.window if kappa is INF else Window(
        min(request.window.max_trunk, int(kappa)),
        request.window.max_branch,
        request.window.max_depth,
    )
    tree = ModelTree(eta=INF, kappa=kappa)

    boundedness = boundedness_guard(request.q, cfg)
    omega = choose_subsequence(request.q, cfg)
    alpha = AlphaFamily(q=request.q, omega=omega, power=request.n)
    c, norm_cert = normalize(alpha, cfg)
    trunk = trunk_weights(alpha, kappa, _trunk_levels(kappa, window), cfg)
    weights = ModelWeights(alpha=alpha, c=c, kappa=kappa, trunk=trunk)
    measures = build_measure_system(alpha, kappa, _mixture_levels(kappa, window), cfg)

    artifact = CounterexampleArtifact(
        request=request,
        tree=tree,
        window=window,
        omega=omega,
        alpha=alpha,
        c=c,
        weights=weights,
        measures=measures,
        boundedness=boundedness,
    )
    artifact.certificates = _certify(artifact, cfg)
    return artifact


def _certify(artifact: CounterexampleArtifact, cfg: CertConfig) -> dict:
    """All certificates attached to a generated artifact."""
    n = artifact.n
    alpha, c = artifact.alpha, artifact.c
    certs: dict = {}

    nd = {}
    for m in range(1, n + 2):
        nd[m] = power_series_certificate(alpha, m, cfg)
    certs["nd"] = nd

    # normalization: c * sum alpha_i must be 1 within enclosure width
    a0 = power_series_certificate(alpha, 0, cfg).enclosure
    certs["zgod_prime_residual"] = _one_residual(c * a0)

    # trunk identities from the actual weight table
    widly1 = {}
    P = coerce(Fraction(1))
    for l in range(1, len(artifact.weights.trunk) + 1):
        P = P * artifact.weights.trunk[l - 1]
        series = _moment_series(alpha, l, cfg).enclosure
        residual = _one_residual(P * c * series)
        kappa = artifact.request.kappa
        if kappa is not INF and l == kappa:
            certs["widly1_prime"] = {"l": l, "residual": residual, "holds_leq_1": True}
        else:
            widly1[l] = residual
    certs["widly1"] = widly1

    # mixture masses
    certs["mass_residuals"] = {
        l: _one_residual(mix.prefactor * _moment_series(alpha, l, cfg).enclosure)
        for l, mix in enumerate(artifact.measures.mixtures)
    }

    consist = consist6_residuals(artifact, cfg)
    certs["consist6"] = {
        "max_residual": max(
            (r.residual_upper for r in consist.values()), default=Fraction(0)
        ),
        "vertices_checked": len(consist),
    }

    data = wco.from_shift(artifact.tree, artifact.weights)
    cc = wco.cc_residual(data, artifact.measures, artifact.window, cfg)
    certs["cc"] = {
        "max_residual": cc.max_residual,
        "algebra_bound": cc.algebra_bound,
        "h_positive_on_support": cc.h_positive_on_support,
    }
    return certs


def _one_residual(iv: Interval) -> Fraction:
    """Upper bound on |iv - 1| given 1 must lie inside iv."""
    return max(abs(iv.lo - 1), abs(iv.hi - 1))


def checkable_vertices(tree: ModelTree, window: Window):
    """Window vertices where the consistency identity is verifiable: all of
    the trunk and vertex 0 (the mixture/child truncations agree atom by
    atom), and branch vertices whose chain child is inside the window."""
    for u in window_vertices(tree, window):
        if isinstance(u, Trunk):
            yield u
        elif u.j < window.max_depth:
            yield u


def consist6_residuals(
    artifact_or_parts, cfg: CertConfig = DEFAULT_CONFIG
) -> Dict[Vertex, ConsistencyResult]:
    """Consistency residual at every checkable window vertex of an artifact."""
    a = artifact_or_parts
    out: Dict[Vertex, ConsistencyResult] = {}
    for u in checkable_vertices(a.tree, a.window):
        kid_data = [
            (a.weights.squared_at(v), a.measures.measure_at(v))
            for v in children(a.tree, u, a.window)
        ]
        out[u] = check_consist6_at(
            a.measures.measure_at(u),
            a.measures.eps_at(u),
            kid_data,
            atom_limit=a.window.max_branch,
        )
    return out


# --- serialization ---


def _artifact_doc(a: CounterexampleArtifact) -> dict:
    W = a.window.max_branch
    doc = {
        "schema": SCHEMA,
        "request": a.request.to_json(),
        "tree": {"model": {"eta": "inf", "kappa": "inf" if a.request.kappa is INF else a.request.kappa}},
        "window": {
            "max_trunk": a.window.max_trunk,
            "max_branch": a.window.max_branch,
            "max_depth": a.window.max_depth,
        },
        "omega": a.omega.to_json(),
        "alpha": a.alpha.to_json(),
        "c": interval_to_json(a.c),
        "boundedness": a.boundedness,
        "weights": {
            "branch_first": [
                {"i": i, "w2": interval_to_json(a.weights.branch_first_squared(i))}
                for i in range(1, W + 1)
            ],
            "branch_tail": [
                {"i": i, "w2": rat_to_str(a.weights.branch_tail_squared(i))}
                for i in range(1, W + 1)
            ],
            "trunk": [
                {"l": l, "w2": interval_to_json(w)} for l, w in enumerate(a.weights.trunk)
            ],
        },
        "measures": {
            "branch_atoms": [
                {"i": i, "t": rat_to_str(a.measures.q.value(i))} for i in range(1, W + 1)
            ],
            "mixtures": [
                {
                    "shift": mix.shift,
                    "prefactor": interval_to_json(mix.prefactor),
                    "atoms": [
                        {"i": i, "mass": interval_to_json(mix.atom_mass(i))}
                        for i in range(1, W + 1)
                    ],
                }
                for mix in a.measures.mixtures
            ],
            "eps": [],
        },
        "certificates": _certs_json(a.certificates),
    }
    return doc


def _certs_json(certs: dict) -> dict:
    out = {
        "nd": {str(m): cert.to_json() for m, cert in certs["nd"].items()},
        "zgod_prime_residual": rat_to_str(certs["zgod_prime_residual"]),
        "widly1": [
            {"l": l, "residual": rat_to_str(r)} for l, r in sorted(certs["widly1"].items())
        ],
        "mass_residuals": [
            {"shift": l, "residual": rat_to_str(r)}
            for l, r in sorted(certs["mass_residuals"].items())
        ],
        "consist6": {
            "max_residual": rat_to_str(certs["consist6"]["max_residual"]),
            "vertices_checked": certs["consist6"]["vertices_checked"],
        },
        "cc": {
            "max_residual": rat_to_str(certs["cc"]["max_residual"]),
            "algebra_bound": rat_to_str(certs["cc"]["algebra_bound"]),
            "h_positive_on_support": certs["cc"]["h_positive_on_support"],
        },
    }
    if "widly1_prime" in certs:
        wp = certs["widly1_prime"]
        out["widly1_prime"] = {
            "l": wp["l"],
            "residual": rat_to_str(wp["residual"]),
            "holds_leq_1": wp["holds_leq_1"],
        }
    return out


def artifact_from_json_dict(doc: dict) -> CounterexampleArtifact:
    """Rebuild the rule-level artifact from a document (tables are re-derived
    from the rules; `verify` is what checks the stored tables)."""
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unknown artifact schema: {doc.get('schema')!r}")
    request = CounterexampleRequest.from_json(doc["request"])
    return generate(request)


# --- verification ---


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    vertex: Optional[str] = None
    residual: Optional[str] = None
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        where = f" vertex={self.vertex}" if self.vertex else ""
        res = f" residual={self.residual}" if self.residual is not None else ""
        tail = f" ({self.detail})" if self.detail else ""
        return f"[{status}] {self.name}{where}{res}{tail}"


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    records: Tuple[CheckRecord, ...]
    consist6_by_vertex: Tuple[Tuple[str, str], ...] = ()

    def failures(self) -> Tuple[CheckRecord, ...]:
        return tuple(r for r in self.records if not r.passed)


@dataclass(frozen=True)
class _TableWeights(ModelWeights):
    """ModelWeights whose in-window values come from stored tables (so that
    verification exercises the stored numbers, not the rules)."""

    first_table: Tuple[Interval, ...] = ()
    tail_table: Tuple[Fraction, ...] = ()

    def branch_first_squared(self, i: int):
        if i <= len(self.first_table):
            return self.first_table[i - 1]
        return super().branch_first_squared(i)

    def branch_tail_squared(self, i: int):
        if i <= len(self.tail_table):
            return self.tail_table[i - 1]
        return super().branch_tail_squared(i)


@dataclass(frozen=True)
class _TableMixture(MixtureMeasure):
    """Mixture whose in-window atom masses and locations come from tables."""

    mass_table: Tuple[Interval, ...] = ()
    location_table: Tuple[Fraction, ...] = ()

    def atom_mass(self, i: int):
        if i <= len(self.mass_table):
            return self.mass_table[i - 1]
        return super().atom_mass(i)

    def atom_location(self, i: int):
        if i <= len(self.location_table):
            return self.location_table[i - 1]
        return super().atom_location(i)


@dataclass(frozen=True)
class _TableMeasures:
    q: SequenceSpec
    mixtures: Tuple[_TableMixture, ...]
    locations: Tuple[Fraction, ...]

    def measure_at(self, v: Vertex):
        if isinstance(v, Branch):
            if v.i <= len(self.locations):
                return _cached_dirac_at(self.locations[v.i - 1])
            return _cached_dirac(self.q, v.i)
        if isinstance(v, Trunk) and v.k < len(self.mixtures):
            return self.mixtures[v.k]
        raise NoCertificateError(f"no stored measure for {v}")

    def eps_at(self, v: Vertex) -> Fraction:
        return Fraction(0)


def _parse_tables(doc: dict, alpha: AlphaFamily, c: Interval, kappa):
    wt = doc["weights"]
    first = tuple(interval_from_json(e["w2"]) for e in wt["branch_first"])
    tail = tuple(rat_from_str(e["w2"]) for e in wt["branch_tail"])
    trunk = tuple(interval_from_json(e["w2"]) for e in wt["trunk"])
    weights = _TableWeights(
        alpha=alpha, c=c, kappa=kappa, trunk=trunk, first_table=first, tail_table=tail
    )
    ms = doc["measures"]
    locations = tuple(rat_from_str(e["t"]) for e in ms["branch_atoms"])
    mixtures = []
    for m in ms["mixtures"]:
        mixtures.append(
            _TableMixture(
                alpha=alpha,
                shift=m["shift"],
                prefactor=interval_from_json(m["prefactor"]),
                mass_table=tuple(interval_from_json(e["mass"]) for e in m["atoms"]),
                location_table=locations,
            )
        )
    measures = _TableMeasures(q=alpha.q, mixtures=tuple(mixtures), locations=locations)
    return weights, measures


def verify(
    doc: Union[dict, CounterexampleArtifact],
    window: Optional[Window] = None,
    cfg: Optional[CertConfig] = None,
) -> VerificationReport:
    """Re-run every certificate check against the stored tables of an
    artifact document.

    Checks: stored values against rule reconstruction (two enclosures of the
    same quantity must intersect), the exact branch identities, consistency
    residuals at every checkable vertex, trunk product identities, CC on the
    window's atom algebra, mixture masses, the power-domain certificates with
    a recomputed divergence witness, and positivity of all weights.
    """
    if isinstance(doc, CounterexampleArtifact):
        doc = doc.to_json_dict()
    records = []

    def rec(name, passed, vertex=None, residual=None, detail=""):
        if residual is not None and isinstance(residual, Fraction):
            # human-facing summary: a short decimal approximation suffices
            residual = "0" if residual == 0 else "~" + rat_to_decimal(residual, 6)
        records.append(
            CheckRecord(
                name,
                bool(passed),
                vertex=None if vertex is None else str(vertex),
                residual=None if residual is None else str(residual),
                detail=detail,
            )
        )

    try:
        request = CounterexampleRequest.from_json(doc["request"])
    except Exception as exc:  # structural failure: nothing else can run
        return VerificationReport(
            False, (CheckRecord("parse-request", False, detail=str(exc)),)
        )
    cfg = cfg or request.cert
    tol = cfg.check_tol
    kappa = request.kappa
    n = request.n

    try:
        stored_window = Window(**doc["window"])
        eff = stored_window
        if window is not None:
            eff = Window(
                min(stored_window.max_trunk, window.max_trunk),
                min(stored_window.max_branch, window.max_branch),
                min(stored_window.max_depth, window.max_depth),
            )

        omega = OmegaSpec.from_json(doc["omega"])
        alpha = AlphaFamily(
            q=request.q, omega=omega, power=doc["alpha"]["power"],
            scale=Fraction(doc["alpha"]["scale"]),
        )
        c_stored = interval_from_json(doc["c"])
        weights, measures = _parse_tables(doc, alpha, c_stored, kappa)
    except Exception as exc:
        return VerificationReport(
            False, (CheckRecord("parse-artifact", False, detail=str(exc)),)
        )
    tree = ModelTree(eta=INF, kappa=kappa)
    W = min(eff.max_branch, len(weights.first_table))

    # omega reconstruction
    omega_expected = choose_subsequence(request.q, cfg)
    rec(
        "omega-reconstruction",
        omega == omega_expected,
        detail="greedy subsequence matches stored spec",
    )

    # rule reconstruction of c and stored tables
    c_expected, _ = normalize(alpha, cfg)
    rec(
        "normalization-constant",
        c_stored.intersects(c_expected),
        residual=c_stored.gap_to(c_expected),
    )
    fresh = ModelWeights(alpha=alpha, c=c_expected, kappa=kappa, trunk=())
    ok_all = True
    for i in range(1, W + 1):
        expected = fresh.branch_first_squared(i)
        stored = weights.first_table[i - 1]
        gap = stored.gap_to(expected)
        if gap > 0 or not stored.intersects(expected):
            ok_all = False
            rec("weight-reconstruction", False, vertex=Branch(i, 1), residual=gap)
        expected_tail = alpha.q.value(i)
        if weights.tail_table[i - 1] != expected_tail:
            ok_all = False
            rec(
                "weight-reconstruction",
                False,
                vertex=Branch(i, 2),
                residual=abs(weights.tail_table[i - 1] - expected_tail),
                detail="chain weight differs from rule",
            )
    trunk_expected = trunk_weights(alpha, kappa, _trunk_levels(kappa, stored_window), cfg)
    for l, stored in enumerate(weights.trunk):
        if l >= len(trunk_expected):
            ok_all = False
            rec("weight-reconstruction", False, vertex=Trunk(l), detail="extra trunk weight")
            continue
        gap = stored.gap_to(trunk_expected[l])
        if gap > 0:
            ok_all = False
            rec("weight-reconstruction", False, vertex=Trunk(l), residual=gap)
    if ok_all:
        rec("weight-reconstruction", True)

    ok_all = True
    for i in range(1, W + 1):
        if measures.locations[i - 1] != alpha.q.value(i):
            ok_all = False
            rec(
                "atom-reconstruction",
                False,
                vertex=Branch(i, 1),
                residual=abs(measures.locations[i - 1] - alpha.q.value(i)),
                detail="branch atom location differs from q",
            )
    mix_expected = build_measure_system(alpha, kappa, len(measures.mixtures), cfg)
    for l, mix in enumerate(measures.mixtures):
        ref = mix_expected.mixtures[l]
        gap = mix.prefactor.gap_to(ref.prefactor)
        if gap > 0:
            ok_all = False
            rec("atom-reconstruction", False, vertex=Trunk(l), residual=gap,
                detail="mixture prefactor off rule")
        for i in range(1, W + 1):
            gap = mix.mass_table[i - 1].gap_to(ref.atom_mass(i))
            if gap > 0:
                ok_all = False
                rec(
                    "atom-reconstruction",
                    False,
                    vertex=Trunk(l),
                    residual=gap,
                    detail=f"mixture atom i={i} off rule",
                )
    if ok_all:
        rec("atom-reconstruction", True)

    # zgod0: branch moments match weight products exactly (both reduce to
    # powers of the same rational, so the check is equality of that rational)
    ok_all = True
    for i in range(1, W + 1):
        t = measures.locations[i - 1]
        w2 = weights.tail_table[i - 1]
        if any(w2**m != t**m for m in range(1, 5)):
            ok_all = False
            rec("zgod0", False, vertex=Branch(i, 2), residual=abs(w2 - t))
    if ok_all:
        rec("zgod0", True, residual=0)

    # consistency residuals from stored tables
    parts = _VerifyParts(tree=tree, window=eff, weights=weights, measures=measures)
    worst = Fraction(0)
    worst_vertex = None
    consist_by_vertex = []
    for u, result in consist6_residuals(parts, cfg).items():
        upper = result.residual_upper
        consist_by_vertex.append(
            (str(u), "0" if upper == 0 else "~" + rat_to_decimal(upper, 6))
        )
        if upper > worst:
            worst, worst_vertex = upper, u
        if upper > tol:
            rec("consist6", False, vertex=u, residual=upper)
    if worst <= tol:
        rec("consist6", True, vertex=worst_vertex, residual=worst)

    # normalization identity and trunk identities from stored values
    a0 = power_series_certificate(alpha, 0, cfg).enclosure
    r = _one_residual(c_stored * a0)
    rec("zgod-prime", r <= tol, residual=r)
    P = coerce(Fraction(1))
    for l in range(1, len(weights.trunk) + 1):
        P = P * weights.trunk[l - 1]
        series = _moment_series(alpha, l, cfg).enclosure
        value = P * c_stored * series
        r = _one_residual(value)
        if kappa is not INF and l == kappa:
            rec(
                "widly1-prime",
                value.lo <= 1 + tol and r <= tol,
                vertex=Trunk(l - 1),
                residual=r,
                detail="terminal trunk inequality held as equality",
            )
        else:
            rec(f"widly1[l={l}]", r <= tol, vertex=Trunk(l - 1), residual=r)

    # mixture masses
    for l, mix in enumerate(measures.mixtures):
        r = _one_residual(mix.prefactor * _moment_series(alpha, l, cfg).enclosure)
        rec(f"mass[mu_-{l}]", r <= tol, vertex=Trunk(l), residual=r)

    # CC on the atom algebra
    data = wco.from_shift(tree, weights)
    cc = wco.cc_residual(data, measures, eff, cfg)
    rec("cc", cc.algebra_bound <= tol, residual=cc.algebra_bound)
    rec("h-positive-on-support", cc.h_positive_on_support)

    # power-domain certificates
    for m in range(1, n + 2):
        cert = power_series_certificate(alpha, m, cfg)
        stored = doc["certificates"]["nd"].get(str(m))
        if stored is None:
            rec(f"nd[{m}]", False, detail="certificate missing")
            continue
        expect_convergent = m <= n
        ok = cert.is_convergent == expect_convergent == (stored["verdict"] == "convergent")
        detail = ""
        if not cert.is_convergent and ok:
            K = cert.witness_index
            recomputed = witness_partial_sum(alpha, m, K)
            ok = (
                recomputed > cfg.divergence_threshold
                and dyadic_floor(recomputed) == Fraction(stored["witness_partial_lb"])
            )
            detail = f"witness partial sum at K={K} recomputed, exceeds {cfg.divergence_threshold}"
        rec(f"nd[{m}]", ok, residual=None, detail=detail or stored["verdict"])

    # positivity of every stored weight
    ok_all = True
    for i in range(1, W + 1):
        if weights.first_table[i - 1].lo <= 0 or weights.tail_table[i - 1] <= 0:
            ok_all = False
            rec("weights-positive", False, vertex=Branch(i, 1))
    for l, w in enumerate(weights.trunk):
        if w.lo <= 0:
            ok_all = False
            rec("weights-positive", False, vertex=Trunk(l))
    if ok_all:
        rec("weights-positive", True)

    return VerificationReport(
        all(r.passed for r in records),
        tuple(records),
        consist6_by_vertex=tuple(consist_by_vertex),
    )


@dataclass(frozen=True)
class _VerifyParts:
    tree: ModelTree
    window: Window
    weights: ModelWeights
    measures: object
