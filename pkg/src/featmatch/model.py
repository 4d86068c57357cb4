"""Domain types, validation and (de)serialization.

An :class:`Instance` bundles students, colleges with capacities and strict
preferences over students, a feature list, per-(student, feature, college)
utilities in [0, 1], and one weight distribution per student.  A student's
realized preference over colleges is the ranking by ``sum_f w_f * u_f(c)``
for a weight vector ``w`` drawn from her distribution on the simplex.

Utilities and discrete probabilities are exact :class:`fractions.Fraction`
values so that downstream probability computations can be equality-tested.
Students and colleges are referenced by dense integer indices internally;
external string ids are mapped at parse time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Union

import numpy as np

__all__ = [
    "ModelError",
    "ParseError",
    "ValidationError",
    "UniformSimplex",
    "DiscreteWeights",
    "BetaWeights",
    "WeightDistribution",
    "Instance",
    "Matching",
    "MatchingVerdict",
    "ProsResult",
    "parse_rational",
    "format_rational",
    "parse_instance",
    "serialize_instance",
    "instance_from_dict",
    "instance_to_dict",
    "validate_matching",
]


class ModelError(ValueError):
    """Base error for instance/matching construction and parsing."""


class ParseError(ModelError):
    """The input document is structurally malformed."""


class ValidationError(ModelError):
    """The input parses but violates a domain invariant."""


# ---------------------------------------------------------------------------
# rationals
# ---------------------------------------------------------------------------

Rational = Union[Fraction, int]


def parse_rational(value) -> Fraction:
    """Parse ``"p/q"`` strings, decimal literals and numbers to an exact Fraction.

    Decimal strings like ``"0.3"`` become 3/10 exactly.  Bare floats are
    converted through their shortest decimal repr so JSON ``0.3`` also maps
    to 3/10 rather than the binary expansion of the float.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ParseError(f"malformed document: expected a rational, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed document: bad rational {value!r}") from exc
    raise ParseError(f"malformed document: expected a rational, got {type(value).__name__}")


def format_rational(q: Fraction) -> str:
    """Render a Fraction as ``"p/q"`` (or ``"p"`` when integral)."""
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# weight distributions
# ---------------------------------------------------------------------------

_SUPPORT_TOL = Fraction(1, 10**9)


@dataclass(frozen=True)
class UniformSimplex:
    """Flat (all-ones Dirichlet) density over {w : w_f >= 0, sum_f w_f = 1}."""

    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValidationError("distribution dimension mismatch: dim must be >= 1")


@dataclass(frozen=True)
class DiscreteWeights:
    """Finite support over weight vectors; probabilities are exact rationals."""

    atoms: tuple[tuple[tuple[Fraction, ...], Fraction], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("discrete distribution needs at least one atom")
        dim = len(self.atoms[0][0])
        total = Fraction(0)
        for w, p in self.atoms:
            if len(w) != dim:
                raise ValidationError("distribution dimension mismatch: ragged support")
            if p <= 0:
                raise ValidationError("probabilities must sum to 1 and be positive")
            total += p
            if any(x < 0 for x in w):
                raise ValidationError(f"support vector has a negative weight: {w}")
            if abs(sum(w) - 1) > _SUPPORT_TOL:
                raise ValidationError(f"support vector does not sum to 1: {w}")
        if total != 1:
            raise ValidationError("probabilities must sum to 1")

    @property
    def dim(self) -> int:
        return len(self.atoms[0][0])


@dataclass(frozen=True)
class BetaWeights:
    """Two-feature parametric family: w_f1 ~ Beta(alpha, beta), w_f2 = 1 - w_f1."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValidationError("beta2 shape parameters must be positive")

    @property
    def dim(self) -> int:
        return 2


WeightDistribution = Union[UniformSimplex, DiscreteWeights, BetaWeights]


# ---------------------------------------------------------------------------
# instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Instance:
    """A validated school-choice instance.

    ``utilities[s][f][c]`` is student ``s``'s utility for college ``c`` on
    feature ``f`` (all dense indices).  ``college_prefs[c]`` lists student
    indices from most to least preferred and must be a permutation of all
    students.  Immutable after construction; safe to share across workers.
    """

    students: tuple[str, ...]
    colleges: tuple[str, ...]
    capacities: tuple[int, ...]
    college_prefs: tuple[tuple[int, ...], ...]
    features: tuple[str, ...]
    utilities: tuple[tuple[tuple[Fraction, ...], ...], ...]
    weight_dists: tuple[WeightDistribution, ...]

    def __post_init__(self):
        n, m, k = len(self.students), len(self.colleges), len(self.features)
        if n == 0 or m == 0 or k == 0:
            raise ValidationError("instance needs at least one student, college and feature")
        if len(set(self.students)) != n or len(set(self.colleges)) != m:
            raise ValidationError("duplicate student or college ids")
        if len(self.capacities) != m or len(self.college_prefs) != m:
            raise ValidationError("capacities/preferences must cover every college")
        for cap in self.capacities:
            if cap < 1:
                raise ValidationError("capacity must be positive")
        for c, order in enumerate(self.college_prefs):
            if sorted(order) != list(range(n)):
                raise ValidationError(
                    f"incomplete college preference: {self.colleges[c]} must rank every student exactly once"
                )
        if len(self.utilities) != n or len(self.weight_dists) != n:
            raise ValidationError("utilities/weight_dists must cover every student")
        for s, per_feature in enumerate(self.utilities):
            if len(per_feature) != k or any(len(row) != m for row in per_feature):
                raise ValidationError("utility table shape must be students x features x colleges")
            for row in per_feature:
                for u in row:
                    if not (0 <= u <= 1):
                        raise ValidationError(
                            f"utility outside [0,1]: student {self.students[s]} has {format_rational(u)}"
                        )
        for s, dist in enumerate(self.weight_dists):
            if dist.dim != k:
                raise ValidationError(
                    f"distribution dimension mismatch: student {self.students[s]} has dim "
                    f"{dist.dim}, instance has {k} features"
                )
            if isinstance(dist, BetaWeights) and k != 2:
                raise ValidationError("distribution dimension mismatch: beta2 requires exactly 2 features")

    @property
    def n(self) -> int:
        return len(self.students)

    @property
    def m(self) -> int:
        return len(self.colleges)

    @property
    def num_features(self) -> int:
        return len(self.features)

    @cached_property
    def college_rank(self) -> tuple[tuple[int, ...], ...]:
        """college_rank[c][s] = position of student s in c's list (0 = best)."""
        ranks = []
        for order in self.college_prefs:
            r = [0] * self.n
            for pos, s in enumerate(order):
                r[s] = pos
            ranks.append(tuple(r))
        return tuple(ranks)

    @cached_property
    def utilities_f64(self) -> np.ndarray:
        """Float view of the utility table, shape (n, |F|, m)."""
        return np.array(
            [[[float(u) for u in row] for row in per_feature] for per_feature in self.utilities],
            dtype=np.float64,
        )

    def student_index(self, sid: str) -> int:
        try:
            return self.students.index(sid)
        except ValueError:
            raise ValidationError(f"unknown student id: {sid!r}") from None

    def college_index(self, cid: str) -> int:
        try:
            return self.colleges.index(cid)
        except ValueError:
            raise ValidationError(f"unknown college id: {cid!r}") from None

    def utility(self, s: int, f: int, c: int) -> Fraction:
        return self.utilities[s][f][c]

    def prefers(self, c: int, s1: int, s2: int) -> bool:
        """True iff college c strictly prefers student s1 to s2."""
        return self.college_rank[c][s1] < self.college_rank[c][s2]


# ---------------------------------------------------------------------------
# matchings
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Matching:
    """Assignment of students to colleges (or None for unmatched)."""

    assignment: tuple[Union[int, None], ...]

    @cached_property
    def by_college(self) -> dict[int, frozenset[int]]:
        out: dict[int, set[int]] = {}
        for s, c in enumerate(self.assignment):
            if c is not None:
                out.setdefault(c, set()).add(s)
        return {c: frozenset(v) for c, v in out.items()}

    def college_of(self, s: int) -> Union[int, None]:
        return self.assignment[s]

    def students_of(self, c: int) -> frozenset[int]:
        return self.by_college.get(c, frozenset())

    @classmethod
    def from_ids(cls, inst: Instance, mapping: Mapping[str, Union[str, None]]) -> "Matching":
        """Build from external ids, e.g. {"s1": "c2", "s2": None}."""
        assignment: list[Union[int, None]] = [None] * inst.n
        for sid, cid in mapping.items():
            s = inst.student_index(sid)
            assignment[s] = None if cid is None else inst.college_index(cid)
        return cls(tuple(assignment))

    def to_ids(self, inst: Instance) -> dict[str, Union[str, None]]:
        return {
            inst.students[s]: (None if c is None else inst.colleges[c])
            for s, c in enumerate(self.assignment)
        }


@dataclass(frozen=True)
class MatchingVerdict:
    ok: bool
    violations: tuple[str, ...] = ()


def validate_matching(inst: Instance, matching: Matching) -> MatchingVerdict:
    """Check capacity feasibility and index consistency of a matching."""
    if len(matching.assignment) != inst.n:
        raise ValidationError("matching must assign every student (possibly to None)")
    violations = []
    for s, c in enumerate(matching.assignment):
        if c is not None and not (0 <= c < inst.m):
            raise ValidationError(f"unknown college index in matching: {c}")
    for c, enrolled in matching.by_college.items():
        if len(enrolled) > inst.capacities[c]:
            violations.append(
                f"college {inst.colleges[c]} over capacity: {len(enrolled)} > {inst.capacities[c]}"
            )
    return MatchingVerdict(ok=not violations, violations=tuple(violations))


# ---------------------------------------------------------------------------
# probability-of-stability results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProsResult:
    """A stability probability, tagged by how it was obtained.

    kind "exact": value is a Fraction computed by exact arithmetic.
    kind "closed_form": value is a float from a deterministic closed form
    (continuous parametric distributions with irrational cdf values).
    kind "estimate": Monte Carlo estimate with standard error, sample count
    and seed.  Estimation is never silently substituted for an exact path.
    """

    value: Union[Fraction, float]
    kind: str
    stderr: float = 0.0
    samples: int = 0
    seed: Union[int, None] = None

    def __post_init__(self):
        if self.kind not in ("exact", "closed_form", "estimate"):
            raise ValidationError(f"unknown ProsResult kind: {self.kind!r}")
        if self.kind == "exact" and not isinstance(self.value, Fraction):
            raise ValidationError("exact ProsResult must carry a Fraction")
        if not (0 <= self.value <= 1):
            raise ValidationError("probability must lie in [0,1]")
        if self.stderr < 0:
            raise ValidationError("standard error must be >= 0")

    def __float__(self) -> float:
        return float(self.value)

    def display(self) -> str:
        if self.kind == "exact":
            return format_rational(self.value)
        if self.kind == "closed_form":
            return f"{float(self.value):.12g}"
        return f"{float(self.value):.6f} (stderr {self.stderr:.2g}, {self.samples} samples, seed {self.seed})"


# ---------------------------------------------------------------------------
# JSON (de)serialization
# ---------------------------------------------------------------------------


def _dist_from_dict(doc, num_features: int, sid: str) -> WeightDistribution:
    if not isinstance(doc, dict) or "type" not in doc:
        raise ParseError(f"malformed document: weight_dists[{sid!r}] needs a 'type'")
    kind = doc["type"]
    if kind == "uniform_simplex":
        return UniformSimplex(dim=num_features)
    if kind == "discrete":
        try:
            atoms = tuple(
                (tuple(parse_rational(x) for x in atom["w"]), parse_rational(atom["p"]))
                for atom in doc["support"]
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed document: bad discrete support for {sid!r}") from exc
        return DiscreteWeights(atoms)
    if kind == "beta2":
        try:
            return BetaWeights(alpha=float(doc["alpha"]), beta=float(doc["beta"]))
        except KeyError as exc:
            raise ParseError(f"malformed document: beta2 needs alpha and beta for {sid!r}") from exc
    raise ParseError(f"malformed document: unknown distribution type {kind!r}")


def _dist_to_dict(dist: WeightDistribution):
    if isinstance(dist, UniformSimplex):
        return {"type": "uniform_simplex"}
    if isinstance(dist, DiscreteWeights):
        return {
            "type": "discrete",
            "support": [
                {"w": [format_rational(x) for x in w], "p": format_rational(p)}
                for w, p in dist.atoms
            ],
        }
    if isinstance(dist, BetaWeights):
        return {"type": "beta2", "alpha": dist.alpha, "beta": dist.beta}
    raise ModelError(f"unknown distribution object: {dist!r}")


def instance_from_dict(doc: Mapping) -> Instance:
    """Build and validate an Instance from the JSON document structure."""
    try:
        students = tuple(str(s) for s in doc["students"])
        colleges = tuple(str(c) for c in doc["colleges"])
        features = tuple(str(f) for f in doc["features"])
        caps_doc = doc["capacities"]
        prefs_doc = doc["college_prefs"]
        utils_doc = doc["utilities"]
        dists_doc = doc["weight_dists"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed document: {exc}") from exc

    s_index = {s: i for i, s in enumerate(students)}
    c_index = {c: i for i, c in enumerate(colleges)}

    capacities = []
    for c in colleges:
        if c not in caps_doc:
            raise ParseError(f"malformed document: missing capacity for {c!r}")
        cap = caps_doc[c]
        if not isinstance(cap, int) or isinstance(cap, bool):
            raise ParseError(f"malformed document: capacity for {c!r} must be an integer")
        capacities.append(cap)

    college_prefs = []
    for c in colleges:
        order = prefs_doc.get(c)
        if order is None:
            raise ValidationError(f"incomplete college preference: {c} has no list")
        try:
            college_prefs.append(tuple(s_index[s] for s in order))
        except KeyError as exc:
            raise ValidationError(f"unknown student id: {exc.args[0]!r} in preferences of {c}") from None

    utilities = []
    for s in students:
        per_student = utils_doc.get(s)
        if per_student is None:
            raise ParseError(f"malformed document: missing utilities for {s!r}")
        per_feature = []
        for f in features:
            row_doc = per_student.get(f)
            if row_doc is None:
                raise ParseError(f"malformed document: missing utilities for {s!r} on feature {f!r}")
            row = [Fraction(0)] * len(colleges)
            for cid, val in row_doc.items():
                if cid not in c_index:
                    raise ValidationError(f"unknown college id: {cid!r} in utilities of {s}")
                row[c_index[cid]] = parse_rational(val)
            missing = [colleges[j] for j in range(len(colleges)) if colleges[j] not in row_doc]
            if missing:
                raise ParseError(f"malformed document: {s!r} lacks a {f!r} utility for {missing[0]!r}")
            per_feature.append(tuple(row))
        utilities.append(tuple(per_feature))

    dists = []
    for s in students:
        if s not in dists_doc:
            raise ParseError(f"malformed document: missing weight distribution for {s!r}")
        dists.append(_dist_from_dict(dists_doc[s], len(features), s))

    return Instance(
        students=students,
        colleges=colleges,
        capacities=tuple(capacities),
        college_prefs=tuple(college_prefs),
        features=features,
        utilities=tuple(utilities),
        weight_dists=tuple(dists),
    )


def instance_to_dict(inst: Instance) -> dict:
    return {
        "students": list(inst.students),
        "colleges": list(inst.colleges),
        "capacities": {c: inst.capacities[j] for j, c in enumerate(inst.colleges)},
        "college_prefs": {
            c: [inst.students[s] for s in inst.college_prefs[j]] for j, c in enumerate(inst.colleges)
        },
        "features": list(inst.features),
        "utilities": {
            s: {
                f: {c: format_rational(inst.utilities[i][k][j]) for j, c in enumerate(inst.colleges)}
                for k, f in enumerate(inst.features)
            }
            for i, s in enumerate(inst.students)
        },
        "weight_dists": {s: _dist_to_dict(inst.weight_dists[i]) for i, s in enumerate(inst.students)},
    }


def parse_instance(text: str) -> Instance:
    """Parse the JSON instance format; raises ParseError/ValidationError."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("malformed document: top level must be an object")
    return instance_from_dict(doc)


def serialize_instance(inst: Instance, indent: Union[int, None] = 2) -> str:
    return json.dumps(instance_to_dict(inst), indent=indent, sort_keys=False)
