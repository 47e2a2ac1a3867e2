#include <doctest.h>

#include <cmath>

#include "flowctl/errors.hpp"
#include "flowctl/taylor_green.hpp"

using namespace flowctl;

namespace {
const TaylorGreenParams prm{}; // U = 1, L = 1
} // namespace

TEST_SUITE("taylor_green") {

TEST_CASE("wall profile at frozen arguments") {
    CHECK(tg::y_het(prm, 0.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(tg::y_het(prm, 1.0) ==
          doctest::Approx(3.29280029978330504796256055165e-5).epsilon(1e-14));
    CHECK(tg::y_het(prm, -1.0) ==
          doctest::Approx(0.999967071997002166949520374395).epsilon(1e-15));
    CHECK(tg::y_het(prm, 0.5) ==
          doctest::Approx(0.00457841620921107536784959566847).epsilon(1e-14));
    CHECK(tg::y_het(prm, 0.25) ==
          doctest::Approx(0.0538596515239200543500814291302).epsilon(1e-14));
    // reflection form: no overflow far on either side
    CHECK(tg::y_het(prm, -30.0) == 1.0);
    CHECK(tg::y_het(prm, 30.0) > 0.0);
    CHECK(tg::y_het(prm, 30.0) < 1e-100);
}

TEST_CASE("profile inverse and its clamp") {
    for (double y : {0.1, 0.5, 0.77}) {
        CHECK(tg::y_het(prm, tg::a_of_y(prm, y)) == doctest::Approx(y).epsilon(1e-14));
    }
    for (double a : {0.3, 1.5}) {
        CHECK(tg::a_of_y(prm, tg::y_het(prm, a)) == doctest::Approx(a).epsilon(1e-12));
    }
    // deep on the upper approach y sits within ulp(1) of the wall, so the
    // wall distance itself only retains ~7 digits; the inverse can't do better
    CHECK(tg::a_of_y(prm, tg::y_het(prm, -2.0)) == doctest::Approx(-2.0).epsilon(1e-8));
    // out-of-range heights are clamped a margin inside the channel
    CHECK(std::isfinite(tg::a_of_y(prm, 0.0)));
    CHECK(tg::a_of_y(prm, 0.0) == tg::a_of_y(prm, 1e-12));
    CHECK(tg::a_of_y(prm, 1.0) == doctest::Approx(-tg::a_of_y(prm, 0.0)).epsilon(1e-12));
}

TEST_CASE("descent rate identity dy/da = -pi sin(pi y)") {
    const double h = 1e-6;
    for (double a : {-0.5, 0.2, 0.8}) {
        const double fd = (tg::y_het(prm, a + h) - tg::y_het(prm, a - h)) / (2.0 * h);
        CHECK(fd == doctest::Approx(-M_PI * std::sin(M_PI * tg::y_het(prm, a))).epsilon(1e-7));
    }
}

TEST_CASE("slice parameter at frozen heights") {
    CHECK(tg::p_of_y(prm, 0.5, 0.0, -1.0) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(tg::p_of_y(prm, 0.9, -0.9, -1.0) ==
          doctest::Approx(-0.286707588249202927496588999983).epsilon(1e-13));
    CHECK(tg::p_of_y(prm, 0.25, 0.3, -1.0) ==
          doctest::Approx(-1.21069818493208691086840173806).epsilon(1e-13));
}

TEST_CASE("target curve and its parameter derivative") {
    const double eps = 0.1, T = -1.0;
    const double p = -0.4, t = -0.7;
    const Vec2 xs = tg::desired(prm, ManifoldKind::stable, eps, T, p, t);
    CHECK(xs.y == doctest::Approx(tg::y_het(prm, t - T + p)).epsilon(1e-15));
    CHECK(xs.x ==
          doctest::Approx(1.0 + eps * std::exp(-p) * std::cos(t - p)).epsilon(1e-14));

    const Vec2 xu = tg::desired(prm, ManifoldKind::unstable, eps, 1.0, 0.3, 0.6);
    CHECK(xu.x ==
          doctest::Approx(1.0 + eps * std::exp(0.3) * std::cos(0.6 - 0.3)).epsilon(1e-14));
    CHECK(xu.y == doctest::Approx(tg::y_het(prm, 0.6 - 1.0 + 0.3)).epsilon(1e-15));

    const double h = 1e-6;
    auto check_dp = [&](ManifoldKind kind, double Tk, double pk, double tk) {
        const Vec2 d = tg::desired_dp(prm, kind, eps, Tk, pk, tk);
        const Vec2 hi = tg::desired(prm, kind, eps, Tk, pk + h, tk);
        const Vec2 lo = tg::desired(prm, kind, eps, Tk, pk - h, tk);
        CHECK(d.x == doctest::Approx((hi.x - lo.x) / (2 * h)).epsilon(1e-6));
        CHECK(d.y == doctest::Approx((hi.y - lo.y) / (2 * h)).epsilon(1e-6));
    };
    check_dp(ManifoldKind::stable, T, p, t);
    check_dp(ManifoldKind::unstable, 1.0, 0.3, 0.6);
}

TEST_CASE("horizontal slice of the target curve") {
    // frozen offset (slice_x - L)/(eps L) at height 0.9, t = -0.9
    CHECK(tg::slice_x(prm, ManifoldKind::stable, 0.1, -1.0, 0.9, -0.9) ==
          doctest::Approx(1.0 + 0.1 * 1.08928127952183371519129819053).epsilon(1e-13));
    // consistency: the slice through a curve point returns its abscissa
    const double p = -0.6, t = -0.3;
    const Vec2 x = tg::desired(prm, ManifoldKind::stable, 0.1, -1.0, p, t);
    CHECK(tg::slice_x(prm, ManifoldKind::stable, 0.1, -1.0, x.y, t) ==
          doctest::Approx(x.x).epsilon(1e-12));
}

TEST_CASE("guaranteed slice top") {
    // with T = p_end = -1 the top rides the heteroclinic profile at time t
    CHECK(tg::ymax(prm, -1.0, -1.0, -0.9) ==
          doctest::Approx(0.999911651971374933155598095342).epsilon(1e-15));
    CHECK(tg::ymax(prm, -1.0, -1.0, 0.2) ==
          doctest::Approx(0.0878712564557298149409693936934).epsilon(1e-14));
    CHECK(tg::ymax(prm, -1.0, -1.0, 0.5) ==
          doctest::Approx(0.00457841620921107536784959566847).epsilon(1e-14));
    CHECK(tg::ymax(prm, -1.0, -1.0, 1.5) ==
          doctest::Approx(2.36814356911887464389080799201e-7).epsilon(1e-13));
}

TEST_CASE("closed-form control") {
    // the vertical component vanishes on the wall and carries the divergence
    for (double y : {0.2, 0.5, 0.8}) {
        CHECK(std::abs(tg::control(prm, ManifoldKind::stable, -1.0, {1.0, y}, -0.4).y) < 1e-15);
    }
    // g_x depends on y only, g_y on x only: the field is divergence-free
    const double h = 1e-5, t = -0.4;
    const Vec2 q{0.85, 0.35};
    const double div =
        (tg::control(prm, ManifoldKind::stable, -1.0, {q.x + h, q.y}, t).x -
         tg::control(prm, ManifoldKind::stable, -1.0, {q.x - h, q.y}, t).x) /
            (2 * h) +
        (tg::control(prm, ManifoldKind::stable, -1.0, {q.x, q.y + h}, t).y -
         tg::control(prm, ManifoldKind::stable, -1.0, {q.x, q.y - h}, t).y) /
            (2 * h);
    CHECK(std::abs(div) < 1e-10);

    // mid-channel samples where the ripple phase is pure sine
    CHECK(tg::control(prm, ManifoldKind::stable, -1.0, {1.0, 0.5}, -1.0).x ==
          doctest::Approx(std::sin(1.0)).epsilon(1e-12));
    CHECK(tg::control(prm, ManifoldKind::unstable, 1.0, {1.0, 0.5}, 1.0).x ==
          doctest::Approx(-std::sin(1.0)).epsilon(1e-12));
}

TEST_CASE("factories") {
    CHECK_THROWS_AS(tg::make_desired(prm, ManifoldKind::stable, 0.0, -1.0), config_error);
    CHECK_THROWS_AS(tg::make_desired(prm, ManifoldKind::stable, -0.1, -1.0), config_error);

    const DesiredManifold des = tg::make_desired(prm, ManifoldKind::stable, 0.1, -1.0);
    CHECK(des.eps == 0.1);
    REQUIRE(static_cast<bool>(des.target));
    REQUIRE(static_cast<bool>(des.target_dp));
    const Vec2 v = des.value(-0.4, -0.7);
    const Vec2 w = tg::desired(prm, ManifoldKind::stable, 0.1, -1.0, -0.4, -0.7);
    CHECK(v.x == w.x);
    CHECK(v.y == w.y);
    const Vec2 d = des.dp(-0.4, -0.7);
    const Vec2 e = tg::desired_dp(prm, ManifoldKind::stable, 0.1, -1.0, -0.4, -0.7);
    CHECK(d.x == e.x);
    CHECK(d.y == e.y);

    const auto g = tg::make_control(prm, ManifoldKind::stable, -1.0);
    const Vec2 a = g({0.85, 0.3}, -0.5);
    const Vec2 b = tg::control(prm, ManifoldKind::stable, -1.0, {0.85, 0.3}, -0.5);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
}

} // TEST_SUITE
