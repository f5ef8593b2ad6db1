import numpy as np
import pytest

from fracsys import (DomainError, GridSpec, SampledField, ball_image_stats,
                     callback_rule, constant_field, constant_rule,
                     field_average, field_from_function, parse_rule,
                     periodic_rule, restrict_rescale, sign_rule, zero_rule)


def _grid(h=1 / 64, radius=1.0, dim=1):
    return GridSpec(dim=dim, h=h, radius=radius)


class TestGridSpec:
    def test_defaults_and_invariants(self):
        g = _grid()
        assert g.truncation_radius == pytest.approx(4.0)
        assert g.extent == pytest.approx(2.0)
        with pytest.raises(DomainError):
            GridSpec(dim=1, h=-0.1, radius=1.0)
        with pytest.raises(DomainError):
            GridSpec(dim=1, h=0.1, radius=1.0, truncation_radius=2.0)

    def test_nodes_cover_ball_and_collar(self):
        g = _grid(h=1 / 8)
        ax = g.axis()
        assert ax.min() <= -2.0 + 1e-12 and ax.max() >= 2.0 - 1e-12
        assert 0.0 in ax

    def test_periodic_layout(self):
        g = GridSpec(dim=1, h=2 * np.pi / 16, radius=np.pi, periodic=True)
        ax = g.axis()
        assert ax.size == 16
        assert ax[0] == pytest.approx(-np.pi)
        with pytest.raises(DomainError):
            GridSpec(dim=1, h=1.0, radius=np.pi, periodic=True)

    def test_index_of(self):
        g = _grid(h=0.25)
        assert g.points()[g.index_of([0.5])][0] == pytest.approx(0.5)
        with pytest.raises(DomainError):
            g.index_of([0.3])


class TestSampledField:
    def test_rejects_nonfinite(self):
        g = _grid(h=0.25)
        vals = np.zeros((*g.shape, 1))
        vals[0] = np.nan
        with pytest.raises(DomainError):
            SampledField(g, vals, zero_rule())

    def test_bound_enforced(self):
        g = _grid(h=0.25)
        vals = np.full((*g.shape, 1), 2.0)
        with pytest.raises(DomainError):
            SampledField(g, vals, zero_rule(), bound=1.0)
        SampledField(g, vals, zero_rule(), bound=2.0)

    def test_values_immutable(self):
        f = constant_field(_grid(h=0.25), [1.0, 0.0])
        with pytest.raises(ValueError):
            np.asarray(f.values)[0, 0] = 3.0

    def test_value_at_interpolates_and_uses_rule(self):
        g = _grid(h=0.25)
        f = field_from_function(g, lambda p: p[:, 0], callback_rule(lambda p: p[:, :1]), m=1)
        assert f.value_at([[0.13]])[0, 0] == pytest.approx(0.13, abs=1e-12)
        assert f.value_at([[7.5]])[0, 0] == pytest.approx(7.5)

    def test_periodic_wrap(self):
        g = GridSpec(dim=1, h=2 * np.pi / 64, radius=np.pi, periodic=True)
        f = field_from_function(g, lambda p: np.cos(p[:, 0]), periodic_rule(), m=1)
        assert f.value_at([[2 * np.pi]])[0, 0] == pytest.approx(1.0, abs=1e-3)

    def test_rule_names(self):
        assert parse_rule("zero").kind == "zero"
        assert parse_rule("constant:[1.0,2.0]").vector == (1.0, 2.0)
        assert parse_rule("sign").kind == "sign"
        assert parse_rule("radial_projection").kind == "radial_projection"
        with pytest.raises(DomainError):
            parse_rule("nope")

    def test_sign_rule_is_one_dimensional(self):
        with pytest.raises(DomainError):
            sign_rule().values(np.zeros((3, 2)), 1)


class TestFieldAverage:
    def test_constant(self):
        f = constant_field(_grid(), [3.0, -1.0])
        assert np.allclose(field_average(f, (np.zeros(1), 0.5)), [3.0, -1.0])

    def test_odd_function_cancels(self):
        g = _grid()
        f = field_from_function(g, lambda p: p[:, 0], zero_rule(), m=1)
        assert field_average(f, (np.zeros(1), 0.75))[0] == pytest.approx(0.0, abs=1e-14)

    def test_square_profile_matches_integral(self):
        # independent closed form: mean of x^2 over [-1, 1] is 1/3
        g = _grid(h=1 / 512)
        f = field_from_function(g, lambda p: p[:, 0] ** 2, zero_rule(), m=1)
        assert field_average(f, (np.zeros(1), 1.0))[0] == pytest.approx(1 / 3, abs=2e-3)

    def test_empty_ball_rejected(self):
        g = _grid(h=0.5)
        f = constant_field(g, [1.0])
        with pytest.raises(DomainError):
            field_average(f, (np.array([0.2]), 0.01))

    def test_linear_in_field(self):
        g = _grid(h=1 / 32)
        rng = np.random.default_rng(0)
        a = rng.normal(size=(*g.shape, 2))
        b = rng.normal(size=(*g.shape, 2))
        fa = SampledField(g, a, zero_rule())
        fb = SampledField(g, b, zero_rule())
        fab = SampledField(g, a + 2.0 * b, zero_rule())
        ball = (np.zeros(1), 0.6)
        assert np.allclose(field_average(fab, ball),
                           field_average(fa, ball) + 2.0 * field_average(fb, ball),
                           rtol=1e-12)


class TestBallImageStats:
    def test_constant_field(self):
        f = constant_field(_grid(), [0.5, 0.5])
        st = ball_image_stats(f, (np.zeros(1), 0.5))
        assert st.enclosing_radius == pytest.approx(0.0, abs=1e-14)
        assert np.allclose(st.enclosing_center, [0.5, 0.5])
        assert st.osc == pytest.approx(0.0, abs=1e-14)

    def test_sign_straddling_origin(self):
        g = _grid(h=1 / 64)
        f = field_from_function(g, lambda p: np.sign(p[:, 0]), sign_rule(), m=1)
        st = ball_image_stats(f, (np.zeros(1), 0.5))
        assert st.enclosing_radius == pytest.approx(1.0, rel=1e-12)
        assert st.enclosing_center[0] == pytest.approx(0.0, abs=1e-12)
        assert st.osc == pytest.approx(2.0, rel=1e-12)

    def test_enclosure_contains_all_values(self):
        g = _grid(h=1 / 32)
        rng = np.random.default_rng(3)
        f = SampledField(g, rng.normal(size=(*g.shape, 2)), zero_rule())
        st = ball_image_stats(f, (np.zeros(1), 0.9))
        pts = g.points().reshape(-1, 1)
        sel = np.abs(pts[:, 0]) <= 0.9 + 1e-12
        vals = np.asarray(f.values).reshape(-1, 2)[sel]
        d = np.linalg.norm(vals - st.enclosing_center, axis=1)
        assert np.max(d) <= st.enclosing_radius * (1 + 1e-12)
        assert st.osc <= 2 * st.enclosing_radius * (1 + 1e-12)
        assert vals[:, 0].min() - 1e-12 <= st.mean[0] <= vals[:, 0].max() + 1e-12


class TestRestrictRescale:
    def test_identity(self):
        g = _grid(h=1 / 32)
        f = field_from_function(g, lambda p: np.sin(p[:, 0]),
                                callback_rule(lambda p: np.sin(p[:, :1])), m=1)
        r = restrict_rescale(f, 1.0, 1.0)
        assert np.allclose(np.asarray(r.values), np.asarray(f.values), atol=1e-13)

    def test_bound_scales(self):
        f = constant_field(_grid(h=1 / 16), [0.5]).with_bound(0.5)
        r = restrict_rescale(f, 2.0, 1.0)
        assert r.bound == pytest.approx(1.0)

    def test_linear_closed_form(self):
        g = _grid(h=1 / 64)
        f = field_from_function(g, lambda p: p[:, 0],
                                callback_rule(lambda p: p[:, :1]), m=1)
        r = restrict_rescale(f, 3.0, 2.0)
        ax = g.axis()
        assert np.allclose(np.asarray(r.values)[:, 0], 6.0 * ax, atol=1e-10)

    def test_composition(self):
        g = _grid(h=1 / 64)
        f = field_from_function(g, lambda p: np.sin(p[:, 0]),
                                callback_rule(lambda p: np.sin(p[:, :1])), m=1)
        a = restrict_rescale(restrict_rescale(f, 2.0, 0.5), 3.0, 1.5)
        b = restrict_rescale(f, 6.0, 0.75)
        assert np.allclose(np.asarray(a.values), np.asarray(b.values), atol=1e-4)

    def test_rejects_bad_scale_and_periodic(self):
        f = constant_field(_grid(h=1 / 16), [1.0])
        with pytest.raises(DomainError):
            restrict_rescale(f, 1.0, -2.0)
        gp = GridSpec(dim=1, h=2 * np.pi / 16, radius=np.pi, periodic=True)
        fp = field_from_function(gp, lambda p: np.cos(p[:, 0]), periodic_rule(), m=1)
        with pytest.raises(DomainError):
            restrict_rescale(fp, 1.0, 0.5)


class TestTwoDimensionalFields:
    def test_restrict_rescale_bilinear(self):
        g = GridSpec(dim=2, h=1 / 16, radius=1.0)
        f = field_from_function(
            g, lambda p: p[:, 0] + 2 * p[:, 1],
            callback_rule(lambda p: (p[:, 0] + 2 * p[:, 1])[:, None]), m=1)
        r = restrict_rescale(f, 2.0, 0.5)
        pts = g.points().reshape(-1, 2)
        assert np.allclose(np.asarray(r.values).reshape(-1),
                           pts[:, 0] + 2 * pts[:, 1], atol=1e-10)

    def test_ball_stats_2d(self):
        g = GridSpec(dim=2, h=1 / 16, radius=1.0)
        f = field_from_function(g, lambda p: p[:, 0], zero_rule(), m=1)
        st = ball_image_stats(f, (np.zeros(2), 0.5))
        assert st.enclosing_radius == pytest.approx(0.5, rel=1e-10)
