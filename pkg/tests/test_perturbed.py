"""
섭동된 벡터장 b_{λ,w}, 합성 흐름, push-forward 해 테스트
"""
from fractions import Fraction

import numpy as np
import pytest

from transport_selection.errors import ConstructionError, SingularTimeError
from transport_selection.dyadic import SquareId
from transport_selection.evolution import SolutionVariant, density_points
from transport_selection.fields import FieldSpec, builtin_field, eval_b, zero_field
from transport_selection.flow import flow_points
from transport_selection.transport import (
    PerturbedSolution,
    TransportedIndicator,
    composed_flow,
    composed_flow_between,
    composed_vs_direct,
    eval_perturbed_field,
    exact_part_vanishes,
)

F = Fraction


class BoxIndicator:
    def __init__(self, box):
        self.bounding_box = box

    def value(self, x):
        x0, y0, x1, y1 = self.bounding_box
        return ((x[:, 0] >= x0) & (x[:, 0] < x1) & (x[:, 1] >= y0) & (x[:, 1] < y1)).astype(float)


# ----------------------------------------------------------------------
# perturbed field
# ----------------------------------------------------------------------
def test_zero_perturbation_gives_exact_field():
    spec = FieldSpec.perturbed(0, zero_field())
    x = (F(1, 16), F(0))
    assert eval_perturbed_field(spec, F(1, 4), x) == eval_b(0, F(1, 4), x)


def test_perturbed_field_is_w_at_one():
    w = builtin_field("swirl", omega=1.5)
    spec = FieldSpec.perturbed(1, w)
    pts = np.random.default_rng(1).uniform(-1, 1, size=(30, 2))
    np.testing.assert_allclose(eval_perturbed_field(spec, 1.0, pts), w.value(1.0, pts))
    assert exact_part_vanishes(FieldSpec.perturbed(0, w, q=1), 1.25)
    assert not exact_part_vanishes(FieldSpec.perturbed(0, w, q=1), 1.75)


def test_perturbed_field_matches_exact_field_off_support():
    w = builtin_field("swirl")
    spec = FieldSpec.perturbed(0, w)
    pts = np.random.default_rng(2).uniform(1.0, 1.9, size=(40, 2))
    np.testing.assert_allclose(eval_perturbed_field(spec, 0.3, pts),
                               np.asarray(eval_b(0, 0.3, pts), dtype=float), atol=1e-12)


def test_perturbed_field_needs_perturbed_spec():
    with pytest.raises(ConstructionError):
        eval_perturbed_field(FieldSpec.building_block(0), 0.2, (0.1, 0.1))


# ----------------------------------------------------------------------
# composed flow
# ----------------------------------------------------------------------
def test_untruncated_composed_flow_is_singular():
    with pytest.raises(SingularTimeError):
        composed_flow(FieldSpec.perturbed(0, builtin_field("swirl")), 0.5, np.zeros(2))


def test_composed_flow_with_zero_perturbation():
    spec = FieldSpec.perturbed(0, zero_field(), q=1)
    pts = np.random.default_rng(3).uniform(0, 2, size=(20, 2))
    np.testing.assert_allclose(composed_flow_between(spec, 0.0, 2.0, pts), pts, atol=1e-12)
    np.testing.assert_allclose(composed_flow(spec, 0.25, pts),
                               flow_points(spec.exact_part, 1.0, 0.25, pts), atol=1e-12)


def test_composed_flow_inverts():
    spec = FieldSpec.perturbed(0, builtin_field("compression", alpha=0.4), q=1, symmetric=False)
    pts = np.random.default_rng(4).uniform(-0.5, 0.5, size=(10, 2))
    moved = composed_flow_between(spec, 0.2, 1.8, pts, h=1e-2)
    np.testing.assert_allclose(composed_flow_between(spec, 1.8, 0.2, moved, h=1e-2), pts,
                               atol=1e-6)


@pytest.mark.slow
@pytest.mark.parametrize("kind,params", [("swirl", {}), ("compression", {"alpha": 0.3})])
@pytest.mark.parametrize("lam", [0, 1])
@pytest.mark.parametrize("t", [0.25, 1.75])
def test_composed_flow_agrees_with_direct_integration(kind, params, lam, t):
    spec = FieldSpec.perturbed(lam, builtin_field(kind, **params), q=1)
    pts = np.random.default_rng(5).uniform(-1.0, 1.0, size=(120, 2))
    gap = composed_vs_direct(spec, t, pts)
    assert gap["points"] == 120
    assert gap["max_gap"] <= 1e-4


# ----------------------------------------------------------------------
# push-forward solutions
# ----------------------------------------------------------------------
def test_zero_perturbation_pairs_like_exact_solution():
    w = zero_field()
    sol = PerturbedSolution(0, w, SolutionVariant.unmixing())
    assert sol.pairing(0.0, TransportedIndicator(SquareId(0, (1, 0)), w, 0.0)) == pytest.approx(1.0)
    assert sol.pairing(0.5, TransportedIndicator(SquareId(1, (0, 0)), w, 0.5)) == pytest.approx(0.25)
    pts = np.random.default_rng(6).uniform(0, 2, size=(50, 2))
    np.testing.assert_array_equal(sol.density(0.75, pts),
                                  density_points(0, SolutionVariant.unmixing(), 0.75, pts))


def test_swirl_keeps_mass_in_invariant_box():
    sol = PerturbedSolution(0, builtin_field("swirl"), SolutionVariant.unmixing())
    assert sol.pairing(0.5, BoxIndicator((-1.0, -1.0, 1.0, 1.0))) == pytest.approx(2.0)


def test_density_respects_compression_bound():
    w = builtin_field("compression", alpha=0.5)
    sol = PerturbedSolution(0, w, SolutionVariant.unmixing())
    pts = np.random.default_rng(7).uniform(-0.8, 0.8, size=(200, 2))
    values = sol.density(0.5, pts)
    assert values.min() >= 0.0
    assert values.max() <= sol.density_bound() * (1 + 1e-6)
    assert sol.density_bound() == pytest.approx(np.exp(w.integrated_norm("div", 1.0, 2.0)))


def test_solution_field_specs():
    w = builtin_field("swirl")
    sym = PerturbedSolution(0, w, SolutionVariant.trunc_sym(2)).field_spec
    asym = PerturbedSolution(0, w, SolutionVariant.trunc_asym(2)).field_spec
    assert sym.is_symmetric and not asym.is_symmetric
    assert sym.q == asym.q == 2
    assert PerturbedSolution(0, w, SolutionVariant.mixed()).field_spec.q is None


def test_initial_datum_is_transported_chessboard():
    sol = PerturbedSolution(0, builtin_field("swirl"), SolutionVariant.unmixing())
    far = np.array([[1.5, 0.25], [1.25, 1.5]])
    np.testing.assert_allclose(sol.initial_datum.value(far), [1.0, 0.0])
