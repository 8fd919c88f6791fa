import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ppife.basis import (MINUS, PLUS, REFERENCE_Q1, IFEElementBasis, build_immersed_basis,
                         constraint_residuals, eval_shape, eval_shape_grad, interpolate,
                         monomials, partition_residual, standard_bilinear_basis, to_global)
from ppife.geometry import AxisRect, LineCurve, cut_rectangle, polygon_centroid
from ppife.mesh import build_mesh, classify_mesh

from conftest import make_space

UNIT = AxisRect(0.0, 0.0, 1.0, 1.0)


def test_standard_basis():
    c = standard_bilinear_basis(UNIT)
    assert c[0] == pytest.approx([1, -1, -1, 1])
    centre = monomials(0.5, 0.5)
    assert c @ centre == pytest.approx([0.25] * 4)
    assert c.sum(axis=0) == pytest.approx([1, 0, 0, 0])
    verts = UNIT.vertices()
    assert c @ monomials(verts[:, 0], verts[:, 1]).T == pytest.approx(np.eye(4))


def _line_cut():
    return cut_rectangle(LineCurve(1.0, 1.0, 0.5), UNIT)


def test_immersed_equal_beta_is_standard():
    b = build_immersed_basis(UNIT, _line_cut(), 1.0, 1.0)
    std = standard_bilinear_basis(UNIT)
    g = b.global_coeffs()
    for s in (MINUS, PLUS):
        assert np.abs(g[:, s] - std).max() <= 1e-12


def test_reference_to_global_matches_standard():
    rect = AxisRect(0.3, 0.6, 0.1, 0.1)
    g = to_global(REFERENCE_Q1, (rect.x0, rect.y0), rect.size)
    assert np.abs(g - standard_bilinear_basis(rect)).max() <= 1e-12


def test_immersed_constraints_and_partition_of_unity():
    b = build_immersed_basis(UNIT, _line_cut(), 1.0, 10.0)
    assert b.kind == "immersed"
    assert np.abs(constraint_residuals(b, UNIT, 1.0, 10.0)).max() <= 1e-12
    assert partition_residual(b) <= 1e-12
    g = b.global_coeffs()
    for s in (MINUS, PLUS):
        assert np.abs(g[:, s].sum(axis=0) - [1, 0, 0, 0]).max() <= 1e-12


def test_eval_shape_branches():
    cut = _line_cut()
    b = build_immersed_basis(UNIT, cut, 1.0, 10.0)
    for i in range(4):
        vm = monomials(*cut.D) @ b.global_coeffs()[i, MINUS]
        vp = monomials(*cut.D) @ b.global_coeffs()[i, PLUS]
        assert abs(vm - vp) <= 1e-10
    c = polygon_centroid(cut.minus_polygon)
    for i in range(4):
        cm = b.global_coeffs()[i, MINUS]
        assert eval_shape(b, i, c) == pytest.approx(monomials(*c) @ cm, abs=1e-15)
        g = eval_shape_grad(b, i, c)
        assert g == pytest.approx([cm[1] + cm[3] * c[1], cm[2] + cm[3] * c[0]])


def test_standard_gradient_at_origin():
    b = IFEElementBasis(coeffs=np.repeat(REFERENCE_Q1[:, None], 2, axis=1), side=-1)
    assert b.kind == "standard"
    assert eval_shape_grad(b, 0, (0.0, 0.0)) == pytest.approx([-1, -1])


def test_consistency_limit():
    b = build_immersed_basis(UNIT, _line_cut(), 1.0, 1.0 + 1e-8)
    assert np.abs(b.global_coeffs() - standard_bilinear_basis(UNIT)[:, None]).max() <= 1e-6


@pytest.mark.parametrize("n", [10, 40])
@pytest.mark.parametrize("beta", [(1.0, 10.0), (1.0, 10000.0)])
def test_all_interface_elements_satisfy_constraints(n, beta):
    space = make_space(n, beta)
    cl = space.classification
    for k, cut in cl.cuts.items():
        rect = space.mesh.element_rect(k)
        b = space.element_basis(k)
        res = constraint_residuals(b, rect, *beta)
        assert np.abs(res[:, :6]).max() <= 1e-10
        assert np.abs(res[:, 6]).max() <= 1e-12
        assert np.abs(res[:, 7]).max() <= 1e-10
        assert partition_residual(b) <= 1e-12
        # branches agree along the whole chord
        t = np.linspace(0.1, 0.9, 5)
        xi = b.local(cut.D + t[:, None] * (cut.E - cut.D))
        m = monomials(xi[:, 0], xi[:, 1])
        diff = m @ (b.coeffs[:, PLUS] - b.coeffs[:, MINUS]).T
        assert np.abs(diff).max() <= 1e-10


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.05, 0.95), st.floats(0, 2 * np.pi),
       st.floats(-4, 4))
def test_immersed_constraints_random_lines(px, py, angle, log_ratio):
    n = (np.cos(angle), np.sin(angle))
    cut = cut_rectangle(LineCurve(n[0], n[1], n[0] * px + n[1] * py), UNIT)
    if cut is None:
        return
    bp = 10.0**log_ratio
    b = build_immersed_basis(UNIT, cut, 1.0, bp)
    res = constraint_residuals(b, UNIT, 1.0, bp)
    assert np.abs(res[:, :7]).max() <= 1e-9
    assert np.abs(res[:, 7]).max() <= 1e-9 * max(1.0, bp)
    assert partition_residual(b) <= 1e-12


def test_global_space_layout(space10):
    mesh = space10.mesh
    assert space10.n_dofs == mesh.n_vertices
    assert space10.element_dofs.shape == (mesh.n_elements, 4)
    assert set(space10.boundary_dofs) == set(mesh.boundary_vertices)
    assert len(space10.boundary_dofs) == 40


def test_interpolate():
    mesh = build_mesh(UNIT, 2)
    cl = classify_mesh(mesh, LineCurve(1.0, 0.0, 0.3))
    from ppife.basis import build_global_space
    space = build_global_space(mesh, cl, (1.0, 10.0))
    assert np.all(interpolate(space, lambda x, y: 1.0) == 1.0)
    assert interpolate(space, lambda x, y: x) == pytest.approx([0, .5, 1, 0, .5, 1, 0, .5, 1])


def test_evaluate_reproduces_nodal_values(space10, rng):
    u = rng.standard_normal(space10.n_dofs)
    vals, _ = space10.evaluate(u, space10.mesh.vertices)
    assert np.abs(vals - u).max() <= 1e-10


def test_interpolation_h1_rate(ellipse):
    from ppife.error_analysis import h1_semi_error
    errs = []
    for n in (20, 40):
        space = make_space(n, problem=ellipse)
        u = interpolate(space, lambda x, y: ellipse.exact_u(x, y, 0.0))
        errs.append(h1_semi_error(space, u, ellipse.exact_grad_u, 0.0))
    rate = np.log2(errs[0] / errs[1])
    assert 0.9 <= rate <= 1.1
