"""Standing-hypothesis checks for delayed positive systems.

Decides whether a system model and a delay model satisfy the regime the
stability theory needs: cooperativity of the undelayed field, monotonicity
of the delayed couplings, exact homogeneity against the declared dilation,
the sufficient positivity condition, and the delay admissibility conditions.

Verdicts are three-valued.  A "pass" backed by the coefficient test is a
proof (a polynomial whose monomials all have nonnegative coefficients is
nonnegative on the positive orthant); when coefficients are mixed we fall
back to sampling, which can only refute (witness) or stay undetermined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .delays import DelayModel, history_depth
from .model import PolyVectorField, SystemModel, Dilation, is_homogeneous, jacobian

PASS = "pass"
FAIL = "fail"
UNDETERMINED = "undetermined"

MODE_PROOF = "proof"
MODE_SAMPLED = "sampled"
MODE_DECLARED = "declared"

_NEG_TOL = 1e-12  # sampled values below this count as genuinely negative


@dataclass(frozen=True)
class SampleSpec:
    """Positive-orthant sample set used by the non-provable check paths.

    Log-uniform points over [lo, hi]**n (seeded, deterministic), preceded by
    the all-ones point and the standard basis rays so that witnesses come
    out in a recognizable form.
    """

    points: int = 200
    lo: float = 1e-3
    hi: float = 1e3
    seed: int = 31415

    def generate(self, n: int) -> list[tuple[float, ...]]:
        pts: list[tuple[float, ...]] = [(1.0,) * n]
        mags = np.geomspace(self.lo, self.hi, 9)
        for i in range(n):
            for m in [1.0, *mags]:
                ray = [0.0] * n
                ray[i] = float(m)
                pts.append(tuple(ray))
        for m in mags:
            pts.append((float(m),) * n)
        rng = np.random.default_rng(self.seed)
        u = rng.random((self.points, n))
        span = math.log(self.hi / self.lo)
        for row in u:
            pts.append(tuple(self.lo * math.exp(span * ui) for ui in row))
        return pts


DEFAULT_SAMPLES = SampleSpec()


@dataclass(frozen=True)
class CheckResult:
    name: str
    verdict: str
    mode: str = ""
    witness: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"verdict": self.verdict, "mode": self.mode}
        if self.witness is not None:
            d["witness"] = self.witness
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class HypothesisReport:
    """Named check results with an aggregate verdict (fail > undetermined > pass)."""

    checks: dict[str, CheckResult] = field(default_factory=dict)

    def add(self, result: CheckResult) -> None:
        self.checks[result.name] = result

    @property
    def verdict(self) -> str:
        verdicts = [c.verdict for c in self.checks.values()]
        if FAIL in verdicts:
            return FAIL
        if UNDETERMINED in verdicts:
            return UNDETERMINED
        return PASS

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "checks": {name: c.to_dict() for name, c in self.checks.items()},
        }


def _entry_nonneg_on_orthant(
    poly, point_builder, samples: list[tuple[float, ...]]
) -> tuple[str, str, dict | None]:
    """Classify one polynomial as >= 0 on the positive orthant.

    point_builder maps a raw sample to the evaluation point (used by the
    face-restricted positivity checks).  Returns (verdict, mode, witness).
    """
    if poly.has_nonnegative_coefficients:
        return PASS, MODE_PROOF, None
    for raw in samples:
        x = point_builder(raw)
        val = poly.evaluate(x)
        if val < -_NEG_TOL:
            return FAIL, MODE_SAMPLED, {"point": list(x), "value": val}
    return UNDETERMINED, MODE_SAMPLED, None


def check_homogeneity(
    F: PolyVectorField, d: Dilation, p: float, name: str = "homogeneity"
) -> CheckResult:
    """Exact test: every monomial of component i must have weighted degree
    p + r_i.  A pass is a proof, never a sampled verdict."""
    ok, witness = is_homogeneous(F, d, p)
    if ok:
        return CheckResult(name, PASS, MODE_PROOF)
    return CheckResult(name, FAIL, MODE_PROOF, witness)


def check_cooperative(
    F: PolyVectorField,
    sample_spec: SampleSpec = DEFAULT_SAMPLES,
    name: str = "cooperative",
) -> CheckResult:
    """Off-diagonal Jacobian entries must be nonnegative on the orthant."""
    J = jacobian(F)
    mixed = []
    for i in range(F.n):
        for j in range(F.n):
            if i == j:
                continue
            if not J[i][j].has_nonnegative_coefficients:
                mixed.append((i, j))
    if not mixed:
        return CheckResult(name, PASS, MODE_PROOF)
    samples = sample_spec.generate(F.n)
    for i, j in mixed:
        verdict, mode, witness = _entry_nonneg_on_orthant(J[i][j], lambda x: x, samples)
        if verdict == FAIL:
            witness["entry"] = [i, j]
            return CheckResult(name, FAIL, mode, witness)
    return CheckResult(
        name, UNDETERMINED, MODE_SAMPLED,
        note=f"mixed-sign off-diagonal entries; no violation found on {len(samples)} samples",
    )


def check_nondecreasing(
    G: PolyVectorField,
    sample_spec: SampleSpec = DEFAULT_SAMPLES,
    name: str = "nondecreasing",
) -> CheckResult:
    """All Jacobian entries (diagonal included) nonnegative on the orthant."""
    J = jacobian(G)
    mixed = []
    for i in range(G.n):
        for j in range(G.n):
            if not J[i][j].has_nonnegative_coefficients:
                mixed.append((i, j))
    if not mixed:
        return CheckResult(name, PASS, MODE_PROOF)
    samples = sample_spec.generate(G.n)
    for i, j in mixed:
        verdict, mode, witness = _entry_nonneg_on_orthant(J[i][j], lambda x: x, samples)
        if verdict == FAIL:
            witness["entry"] = [i, j]
            return CheckResult(name, FAIL, mode, witness)
    return CheckResult(
        name, UNDETERMINED, MODE_SAMPLED,
        note=f"mixed-sign entries; no violation found on {len(samples)} samples",
    )


def check_positivity_condition(
    model: SystemModel,
    sample_spec: SampleSpec = DEFAULT_SAMPLES,
    name: str = "positivity-condition",
) -> CheckResult:
    """Sufficient condition for forward invariance of the positive orthant.

    Continuous: every delayed coupling g_q >= 0 on the orthant, and each
    f_i >= 0 on the boundary face {x >= 0 : x_i = 0}.  Discrete: f >= 0 and
    every g_q >= 0 on the orthant.  The condition is sufficient only; with
    time-varying delays a system can be positive without it.
    """
    n = model.n
    samples = None

    def get_samples():
        nonlocal samples
        if samples is None:
            samples = sample_spec.generate(n)
        return samples

    undetermined = False

    # delayed couplings must be nonnegative everywhere on the orthant
    for q, g in enumerate(model.delayed_terms):
        for i in range(n):
            poly = g.component_poly(i)
            verdict, mode, witness = (
                (PASS, MODE_PROOF, None)
                if poly.has_nonnegative_coefficients
                else _entry_nonneg_on_orthant(poly, lambda x: x, get_samples())
            )
            if verdict == FAIL:
                witness["field"] = f"g_{q}"
                witness["component"] = i
                return CheckResult(name, FAIL, mode, witness)
            undetermined |= verdict == UNDETERMINED

    if model.is_discrete:
        for i in range(n):
            poly = model.f.component_poly(i)
            verdict, mode, witness = (
                (PASS, MODE_PROOF, None)
                if poly.has_nonnegative_coefficients
                else _entry_nonneg_on_orthant(poly, lambda x: x, get_samples())
            )
            if verdict == FAIL:
                witness["field"] = "f"
                witness["component"] = i
                return CheckResult(name, FAIL, mode, witness)
            undetermined |= verdict == UNDETERMINED
    else:
        # f_i restricted to the face x_i = 0 must be nonnegative there
        for i in range(n):
            restricted = model.f.component_poly(i).restrict_zero(i)

            def on_face(x, _i=i):
                y = list(x)
                y[_i] = 0.0
                return y

            verdict, mode, witness = (
                (PASS, MODE_PROOF, None)
                if restricted.has_nonnegative_coefficients
                else _entry_nonneg_on_orthant(restricted, on_face, get_samples())
            )
            if verdict == FAIL:
                witness["field"] = "f"
                witness["component"] = i
                witness["face"] = i
                return CheckResult(name, FAIL, mode, witness)
            undetermined |= verdict == UNDETERMINED

    if undetermined:
        return CheckResult(
            name, UNDETERMINED, MODE_SAMPLED,
            note="some components have mixed-sign coefficients; no violation sampled",
        )
    return CheckResult(name, PASS, MODE_PROOF)


@dataclass(frozen=True)
class DelayAssumptionReport:
    """Delay admissibility: divergence of t - tau(t), proportional ratio,
    delay supremum when bounded, and the initial-history depth."""

    a5: str
    a51: str
    alpha: float | None
    tau_sup: float | None
    history_depth: float
    mode: str
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "divergence(a5)": self.a5,
            "proportional_ratio(a51)": self.a51,
            "alpha": self.alpha,
            "tau_sup": self.tau_sup,
            "history_depth": self.history_depth,
            "mode": self.mode,
            **({"note": self.note} if self.note else {}),
        }


def check_delay_assumption(delay: DelayModel, horizon: float) -> DelayAssumptionReport:
    """Assess a delay model up to `horizon`.

    Families with declared structure get exact verdicts.  The reported
    alpha is a certified ratio bound sup_{T < t <= horizon} tau(t)/t with
    T = horizon / 10; for bounded delays it shrinks toward zero as the
    horizon grows, for proportional delays it equals the exact ratio.
    Unknown (custom) delays are sampled on a log-spaced grid and the
    verdicts are empirical.
    """
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    depth = float(history_depth(delay, probe_horizon=max(horizon, 10.0)))

    if delay.diverges is not None:
        a5 = PASS if delay.diverges else FAIL
        note = ""
        if delay.alpha_limit is not None and delay.alpha_limit < 1.0:
            a51 = PASS
            if delay.bounded and delay.tau_sup is not None:
                T = horizon / 10.0
                # certified ratio bound over (T, horizon]; exact sup for a
                # constant delay, a safe upper bound otherwise
                alpha = delay.tau_sup / T
                if alpha >= 1.0:
                    alpha = None
                    note = "horizon too short to certify a ratio bound below 1"
            else:
                alpha = delay.alpha_limit
        else:
            a51 = FAIL
            alpha = None
        return DelayAssumptionReport(
            a5=a5, a51=a51, alpha=alpha, tau_sup=delay.tau_sup,
            history_depth=depth, mode=MODE_DECLARED, note=note,
        )

    # sampled path for structurally unknown delays
    ts = np.geomspace(1e-3, horizon, 4096)
    w = np.array([t - delay.value(t) for t in ts])
    head = w[: max(8, len(w) // 20)]
    tail = w[-max(8, len(w) // 20):]
    a5 = PASS if (tail.min() > max(0.0, head.max())) else FAIL
    T = horizon / 10.0
    mask = ts > T
    ratios = np.array([delay.value(t) / t for t in ts[mask]])
    rmax = float(ratios.max()) if ratios.size else None
    if rmax is None or rmax >= 0.98:
        a51 = UNDETERMINED
        alpha = None
        note = "ratio too close to 1 within the horizon to certify a proportional bound"
    else:
        a51 = PASS
        alpha = rmax
        note = ""
    return DelayAssumptionReport(
        a5=a5, a51=a51, alpha=alpha, tau_sup=None,
        history_depth=depth, mode=MODE_SAMPLED, note=note,
    )


def check_model(
    model: SystemModel, sample_spec: SampleSpec = DEFAULT_SAMPLES
) -> HypothesisReport:
    """Run every structural hypothesis check the model's kind requires."""
    report = HypothesisReport()
    report.add(check_homogeneity(model.f, model.dilation, model.degree, name="homogeneity:f"))
    for q, g in enumerate(model.delayed_terms):
        report.add(check_homogeneity(g, model.dilation, model.degree, name=f"homogeneity:g_{q}"))
    if model.is_discrete:
        report.add(check_nondecreasing(model.f, sample_spec, name="nondecreasing:f"))
    else:
        report.add(check_cooperative(model.f, sample_spec, name="cooperative:f"))
    for q, g in enumerate(model.delayed_terms):
        report.add(check_nondecreasing(g, sample_spec, name=f"nondecreasing:g_{q}"))
    report.add(check_positivity_condition(model, sample_spec))
    return report
