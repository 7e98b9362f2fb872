import dataclasses
import json
import random
from fractions import Fraction

import pytest

from prguess.behavior import Behavior, pr_box, pr_product, product
from prguess.certify import (
    Certificate, CertificateError, certificate_from_solution, rebuild_problem, verify_certificate,
    verify_sandwich, vertex_check,
)
from prguess.guessprob import guessing_probability
from prguess.nosig import ScenarioKind
from prguess.numeric import Mode

F = Fraction


@pytest.fixture(scope="module")
def tons_cert():
    return certificate_from_solution(guessing_probability(2, "tons", F(1, 2)))


def perturbed(cert, rng, prob):
    """A copy of ``cert`` with one coordinate moved by a random nonzero rational."""
    delta = F(rng.choice([-1, 1]) * rng.randint(1, 1000), rng.randint(1, 1000))
    kind = rng.choice(["primal", "dual", "objective"])
    if kind == "primal":
        j = rng.randrange(prob.system.num_vars)
        primal = dict(cert.primal)
        primal[j] = primal.get(j, 0) + delta
        return dataclasses.replace(cert, primal=primal)
    if kind == "dual":
        # a dual coordinate on a zero-rhs row can move without breaking the certificate
        rows = [r for r, b in enumerate(prob.system.rhs) if b != 0]
        r = rng.choice(rows)
        dual = list(cert.dual)
        dual[r] += delta
        return dataclasses.replace(cert, dual=dual)
    return dataclasses.replace(cert, objective=cert.objective + delta)


def test_accepts_solver_certificate(tons_cert):
    rep = verify_certificate(tons_cert)
    assert rep.accepted, rep.lines()
    assert rep.objective == F(5, 8)
    assert [c.name for c in rep.checks] == ["order hash", "p >= 0", "A p = b", "A^T y >= c", "c^T p = b^T y = objective"]
    assert rep.lines()[-1] == "ACCEPT"


def test_rejects_primal_bump(tons_cert):
    j = min(tons_cert.primal)
    primal = dict(tons_cert.primal)
    primal[j] += F(1, 1000)
    rep = verify_certificate(dataclasses.replace(tons_cert, primal=primal))
    assert not rep.accepted
    assert "A p = b" in rep.reason and "marginal" in rep.reason


def test_rejects_negative_entry(tons_cert):
    primal = dict(tons_cert.primal)
    j = next(j for j in range(256) if j not in primal)
    primal[j] = F(-1, 7)
    rep = verify_certificate(dataclasses.replace(tons_cert, primal=primal))
    assert not rep.accepted and rep.reason.startswith("p >= 0") and f"column {j}" in rep.reason


def test_rejects_dual_and_objective(tons_cert):
    rep = verify_certificate(dataclasses.replace(tons_cert, objective=F(3, 4)))
    assert not rep.accepted and "objective" in rep.reason
    dual = [y - 1 for y in tons_cert.dual]
    assert not verify_certificate(dataclasses.replace(tons_cert, dual=dual)).accepted
    assert not verify_certificate(dataclasses.replace(tons_cert, dual=tons_cert.dual[:-1])).accepted


def test_rejects_hash_mismatch(tons_cert):
    rep = verify_certificate(dataclasses.replace(tons_cert, order_hash="0" * 64))
    assert not rep.accepted and "order_hash" in rep.reason
    # metadata that regenerates a different system is caught the same way
    rep = verify_certificate(dataclasses.replace(tons_cert, scenario=ScenarioKind.ABNS))
    assert not rep.accepted and "order_hash" in rep.reason


@pytest.mark.parametrize("scenario", list(ScenarioKind))
def test_fuzzing(scenario):
    cert = certificate_from_solution(guessing_probability(2, scenario, F(1, 3)))
    prob = rebuild_problem(cert)
    assert verify_certificate(cert, prob).accepted
    rng = random.Random(7)
    for _ in range(100):
        assert not verify_certificate(perturbed(cert, rng, prob), prob).accepted


def test_json_round_trip(tmp_path, tons_cert):
    path = tmp_path / "c.json"
    tons_cert.save(path)
    back = Certificate.load(path)
    assert back.payload() == tons_cert.payload()
    assert verify_certificate(back).accepted
    data = json.loads(path.read_text())
    assert set(data) == {"metadata", "primal", "dual", "objective", "order_hash", "timestamp"}
    assert data["objective"] == "5/8" and data["metadata"]["x_star"] == "00"


def test_payload_hash_ignores_timestamp(tons_cert):
    other = dataclasses.replace(tons_cert, timestamp="1970-01-01T00:00:00+00:00")
    assert other.payload_hash() == tons_cert.payload_hash()


def test_malformed(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(CertificateError):
        Certificate.load(path)
    with pytest.raises(CertificateError):
        Certificate.from_dict({"metadata": {"n": 1}})


def test_full_formulation_certificate():
    r = guessing_probability(1, "abns", F(1, 2), formulation="full", x_star=1, y_star=1)
    cert = certificate_from_solution(r)
    assert cert.metadata()["x_star"] == "1"
    assert verify_certificate(cert).accepted and cert.objective == F(3, 4)


def test_float_certificate():
    cert = certificate_from_solution(guessing_probability(2, "abns", 0.5, "float"))
    rep = verify_certificate(cert)
    assert rep.accepted, rep.lines()
    assert cert.mode is Mode.FLOAT and abs(cert.objective - 23 / 32) < 1e-9
    back = Certificate.from_dict(json.loads(cert.to_json()))
    assert verify_certificate(back).accepted
    assert not verify_certificate(dataclasses.replace(cert, objective=cert.objective + 1e-3)).accepted


def test_sandwich():
    lo = certificate_from_solution(guessing_probability(2, "tons", F(1, 2)))
    hi = certificate_from_solution(guessing_probability(2, "wtons", F(1, 2)))
    rep = verify_sandwich(lo, hi)
    assert rep.accepted and rep.objective == F(5, 8)
    assert not verify_sandwich(hi, lo).accepted
    ab = certificate_from_solution(guessing_probability(2, "abns", F(1, 2)))
    # TONS is inside ABNS, but the ABNS dual value 23/32 exceeds 5/8
    rep = verify_sandwich(lo, ab)
    assert not rep.accepted and "primal value = dual value" in rep.reason
    other = certificate_from_solution(guessing_probability(2, "wtons", F(1, 3)))
    assert not verify_sandwich(lo, other).accepted


@pytest.mark.parametrize("scenario", list(ScenarioKind))
def test_vertex_pr_products(scenario):
    assert vertex_check(pr_box(1), scenario)
    assert vertex_check(product([pr_box(1), pr_box(1)]), scenario)
    assert not vertex_check(pr_product(-1, 2), scenario)


def test_vertex_mixture_not_vertex():
    half = Behavior(1, (pr_box(1).entries + pr_box(-1).entries) / 2)
    assert not vertex_check(half, "abns")


def test_vertex_rejects_infeasible():
    from prguess.behavior import deterministic_box

    bad = Behavior(1, pr_box(1).entries * 2)
    with pytest.raises(ValueError):
        vertex_check(bad, "tons")
    with pytest.raises(ValueError):
        vertex_check(pr_box(1.0, "float"), "tons")
    assert vertex_check(deterministic_box(1), "fullns")
