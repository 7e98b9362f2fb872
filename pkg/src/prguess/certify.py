"""Solver-independent verification of LP optimality certificates, and the vertex test.

A certificate stores the problem metadata, a primal vector, a dual vector and
the claimed optimum.  Verification regenerates (A, b, c) from the metadata,
checks that the constraint order matches the stored hash, and then checks

    A p = b,  p >= 0,  A^T y >= c,  c^T p = b^T y = objective

exactly (exact mode) or to fixed tolerances (float mode).  It never looks at
solver state.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .behavior import Behavior
from .lp import LpProblem
from .nosig import ScenarioKind, exact_rank, normalization_rows, scenario_rows, system_rows_as_dicts
from .numeric import Mode, format_scalar, parse_scalar

FEAS_TOL = 1e-8
DUAL_TOL = 1e-9
OBJ_TOL = 1e-8

# scenario -> scenarios whose feasible set contains it
_CONTAINED_IN = {
    ScenarioKind.FULLNS: {ScenarioKind.FULLNS, ScenarioKind.TONS, ScenarioKind.ABNS, ScenarioKind.WTONS},
    ScenarioKind.TONS: {ScenarioKind.TONS, ScenarioKind.ABNS, ScenarioKind.WTONS},
    ScenarioKind.ABNS: {ScenarioKind.ABNS},
    ScenarioKind.WTONS: {ScenarioKind.WTONS},
}


class CertificateError(ValueError):
    pass


@dataclass
class Certificate:
    n: int
    scenario: ScenarioKind
    v: object
    mode: Mode
    formulation: str
    x_star: int
    y_star: int
    primal: dict
    dual: list
    objective: object
    order_hash: str
    timestamp: str | None = None

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "scenario": self.scenario.value,
            "v": format_scalar(self.v),
            "mode": self.mode.value,
            "formulation": self.formulation,
            "x_star": format(self.x_star, f"0{self.n}b"),
            "y_star": format(self.y_star, f"0{self.n}b"),
        }

    def payload(self) -> dict:
        return {
            "metadata": self.metadata(),
            "primal": [[int(j), format_scalar(v)] for j, v in sorted(self.primal.items())],
            "dual": [format_scalar(y) for y in self.dual],
            "objective": format_scalar(self.objective),
            "order_hash": self.order_hash,
        }

    def payload_hash(self) -> str:
        text = json.dumps(self.payload(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def to_dict(self) -> dict:
        out = self.payload()
        out["timestamp"] = self.timestamp
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: dict) -> "Certificate":
        try:
            meta = data["metadata"]
            mode = Mode.coerce(meta["mode"])
            n = int(meta["n"])
            return cls(
                n=n,
                scenario=ScenarioKind.coerce(meta["scenario"]),
                v=parse_scalar(meta["v"], mode),
                mode=mode,
                formulation=meta.get("formulation", "reduced"),
                x_star=int(meta.get("x_star", "0"), 2),
                y_star=int(meta.get("y_star", "0"), 2),
                primal={int(j): parse_scalar(s, mode) for j, s in data["primal"]},
                dual=[parse_scalar(s, mode) for s in data["dual"]],
                objective=parse_scalar(data["objective"], mode),
                order_hash=str(data["order_hash"]),
                timestamp=data.get("timestamp"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CertificateError(f"malformed certificate: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Certificate":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CertificateError(f"certificate is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def certificate_from_solution(result, timestamp: bool = True) -> Certificate:
    """Build a certificate from a solved :class:`GuessingResult`."""
    sol, prob = result.solution, result.problem
    if sol is None or prob is None:
        raise CertificateError("result carries no LP solution")
    stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds") if timestamp else None
    return Certificate(
        n=result.n, scenario=result.scenario, v=result.v, mode=result.mode,
        formulation=result.formulation, x_star=result.x_star, y_star=result.y_star,
        primal=dict(sol.primal), dual=list(sol.dual), objective=sol.objective,
        order_hash=prob.system.order_hash(), timestamp=stamp,
    )


def rebuild_problem(cert: Certificate) -> LpProblem:
    from .guessprob import assemble_full, assemble_reduced

    if cert.formulation == "reduced":
        return assemble_reduced(cert.n, cert.scenario, cert.v, cert.mode)
    if cert.formulation == "full":
        return assemble_full(cert.n, cert.scenario, cert.v, cert.x_star, cert.y_star, cert.mode)
    raise CertificateError(f"unknown formulation {cert.formulation!r}")


@dataclass
class Check:
    name: str
    passed: bool
    max_residual: float
    detail: str = ""


@dataclass
class VerificationReport:
    accepted: bool
    checks: list = field(default_factory=list)
    reason: str = ""
    objective: object = None

    def lines(self) -> list[str]:
        out = [f"{'PASS' if c.passed else 'FAIL'} {c.name}: max residual {c.max_residual:.3g}"
               + (f" ({c.detail})" if c.detail else "") for c in self.checks]
        out.append(("ACCEPT" if self.accepted else "REJECT") + (f": {self.reason}" if self.reason else ""))
        return out


def _close(x, tol, exact):
    return x == 0 if exact else abs(float(x)) <= tol


def _primal_checks(prob: LpProblem, primal: dict, exact: bool) -> list[Check]:
    sys_ = prob.system
    checks = []
    bad = [j for j in primal if not 0 <= j < sys_.num_vars]
    if bad:
        return [Check("primal indices", False, float("inf"), f"column {bad[0]} out of range")]
    neg = [(j, v) for j, v in sorted(primal.items()) if v < 0]
    worst_neg = float(-min((v for _, v in neg), default=0))
    bad_neg = neg if exact else [(j, v) for j, v in neg if v < -FEAS_TOL]
    checks.append(Check(
        "p >= 0", not bad_neg, worst_neg,
        f"column {bad_neg[0][0]} is {format_scalar(bad_neg[0][1])}" if bad_neg else "",
    ))
    worst, first = 0.0, None
    for r in range(sys_.num_rows):
        cols, coefs = sys_.row(r)
        acc = 0
        for j, a in zip(cols.tolist(), coefs.tolist()):
            pj = primal.get(j)
            if pj:
                acc += a * pj
        res = acc - sys_.rhs[r]
        worst = max(worst, abs(float(res)))
        if first is None and not _close(res, FEAS_TOL, exact):
            first = r
    detail = ""
    if first is not None:
        lab = sys_.label(first)
        detail = f"row {first} ({lab.family}, round {lab.round}, free {lab.free}, signal {lab.signal})"
    checks.append(Check("A p = b", first is None, worst, detail))
    return checks


def _dual_checks(prob: LpProblem, dual: list, exact: bool) -> list[Check]:
    sys_ = prob.system
    if len(dual) != sys_.num_rows:
        return [Check("dual length", False, float("inf"), f"{len(dual)} entries for {sys_.num_rows} rows")]
    csc = sys_.to_csr(dtype=np.int64).tocsc()
    csc.sort_indices()
    worst, first = 0.0, None
    if exact:
        den = 1
        for y in dual:
            den = den * y.denominator // np.gcd(den, y.denominator) if y else den
        Y = [int(y * den) for y in dual]
    else:
        ya = np.asarray([float(y) for y in dual])
        aty = csc.T @ ya
    for j in range(sys_.num_vars):
        cj = prob.objective.get(j, 0)
        if exact:
            lo, hi = csc.indptr[j], csc.indptr[j + 1]
            s = sum(int(a) * Y[i] for i, a in zip(csc.indices[lo:hi].tolist(), csc.data[lo:hi].tolist()))
            slack = Fraction(s, den) - cj
            ok = slack >= 0
        else:
            slack = aty[j] - float(cj)
            ok = slack >= -DUAL_TOL
        if slack < 0:
            worst = max(worst, -float(slack))
        if not ok and first is None:
            first = j
    detail = f"column {first}" if first is not None else ""
    return [Check("A^T y >= c", first is None, worst, detail)]


def _objectives(prob: LpProblem, primal: dict, dual: list):
    cp = sum((prob.objective.get(j, 0) * v for j, v in primal.items()), 0)
    by = sum((b * y for b, y in zip(prob.system.rhs, dual) if b), 0)
    return cp, by


def verify_certificate(cert: Certificate, problem: LpProblem | None = None) -> VerificationReport:
    """Check a certificate against freshly regenerated constraints."""
    exact = cert.mode is Mode.EXACT
    try:
        prob = problem if problem is not None else rebuild_problem(cert)
    except ValueError as exc:
        return VerificationReport(False, [], f"cannot regenerate problem: {exc}")
    if prob.system.order_hash() != cert.order_hash:
        return VerificationReport(False, [Check("order hash", False, float("inf"))],
                                  "order_hash does not match the regenerated constraint system")
    checks = [Check("order hash", True, 0.0)]
    checks += _primal_checks(prob, cert.primal, exact)
    checks += _dual_checks(prob, cert.dual, exact)
    if all(c.passed for c in checks):
        cp, by = _objectives(prob, cert.primal, cert.dual)
        gap = max(abs(float(cp - cert.objective)), abs(float(by - cert.objective)))
        ok = (cp == cert.objective == by) if exact else gap <= OBJ_TOL
        checks.append(Check("c^T p = b^T y = objective", ok, gap,
                            "" if ok else f"c^T p = {format_scalar(cp)}, b^T y = {format_scalar(by)}"))
    failed = [c for c in checks if not c.passed]
    reason = f"{failed[0].name} violated" + (f" at {failed[0].detail}" if failed[0].detail else "") if failed else ""
    return VerificationReport(not failed, checks, reason, cert.objective)


def verify_sandwich(lower: Certificate, upper: Certificate) -> VerificationReport:
    """Accept when a primal point of a smaller regime matches a dual point of a larger one.

    With feasible sets lower.scenario inside upper.scenario, a feasible primal
    value p for the lower regime and a feasible dual value d for the upper
    regime bracket both optima: p <= G_lower <= G_upper <= d.  Equality
    proves G_lower = G_upper = p.
    """
    if (lower.n, lower.v, lower.mode, lower.formulation) != (upper.n, upper.v, upper.mode, upper.formulation):
        return VerificationReport(False, [], "certificates describe different problems")
    if upper.scenario not in _CONTAINED_IN[lower.scenario]:
        return VerificationReport(
            False, [], f"{lower.scenario.value} is not contained in {upper.scenario.value}")
    exact = lower.mode is Mode.EXACT
    lp_lo, lp_up = rebuild_problem(lower), rebuild_problem(upper)
    checks = []
    for cert, prob in ((lower, lp_lo), (upper, lp_up)):
        ok = prob.system.order_hash() == cert.order_hash
        checks.append(Check(f"order hash ({cert.scenario.value})", ok, 0.0 if ok else float("inf")))
    checks += [Check(f"{c.name} ({lower.scenario.value})", c.passed, c.max_residual, c.detail)
               for c in _primal_checks(lp_lo, lower.primal, exact)]
    checks += [Check(f"{c.name} ({upper.scenario.value})", c.passed, c.max_residual, c.detail)
               for c in _dual_checks(lp_up, upper.dual, exact)]
    if all(c.passed for c in checks):
        cp, _ = _objectives(lp_lo, lower.primal, [])
        _, by = _objectives(lp_up, {}, upper.dual)
        ok = cp == by if exact else abs(float(cp - by)) <= OBJ_TOL
        checks.append(Check("primal value = dual value", ok, abs(float(cp - by))))
    failed = [c for c in checks if not c.passed]
    reason = f"{failed[0].name} violated" if failed else ""
    value = _objectives(lp_lo, lower.primal, [])[0] if not failed else None
    return VerificationReport(not failed, checks, reason, value)


def vertex_check(beh: Behavior, scenario) -> bool:
    """True iff ``beh`` is a vertex of the regime's polytope of normalized behaviors.

    The active constraints (all equality rows plus p_j >= 0 for every zero
    entry) must have full column rank; rank is computed exactly.
    """
    scenario = ScenarioKind.coerce(scenario)
    if beh.mode is not Mode.EXACT:
        raise ValueError("vertex_check needs an exact behavior")
    eq = scenario_rows(beh.n, scenario)
    norm = normalization_rows(beh.n)
    if not eq.is_satisfied(beh) or not norm.is_satisfied(beh) or not beh.is_nonnegative():
        raise ValueError(f"behavior is not in the {scenario.value} polytope")
    rows = [{j: 1} for j, p in enumerate(beh.entries) if p == 0]
    rows += system_rows_as_dicts(norm) + system_rows_as_dicts(eq)
    return exact_rank(rows) == 16**beh.n
