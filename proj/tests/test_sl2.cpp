#include <doctest.h>

#include "qpsl2/sl2.hpp"
#include "test_util.hpp"

using namespace qpsl2;
using testutil::Rng;

TEST_CASE("quadratic form and bilinear companion") {
    CHECK(quad_form({0, 0, 1}) == doctest::Approx(1.0));
    CHECK(quad_form({1, 0, 0}) == doctest::Approx(-1.0));
    CHECK(quad_form({3, 4, 5}) == doctest::Approx(0.0));
    CHECK(kappa({1, 2, 3}, {4, 5, 6}) == doctest::Approx(-4 - 10 + 18));
    // q(v) = det of the matrix realization
    Rng rng(17);
    for (int i = 0; i < 50; ++i) {
        const AlgebraVector v{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        CHECK(quad_form(v) == doctest::Approx(v.matrix().det()).epsilon(1e-12));
        CHECK(v.matrix().trace() == doctest::Approx(0.0));
    }
}

TEST_CASE("minkowski norm") {
    CHECK(minkowski_norm({0, 0, 2}) == doctest::Approx(2.0));
    CHECK(minkowski_norm({0, 3, 5}) == doctest::Approx(4.0));
    CHECK_THROWS_AS((void)minkowski_norm({1, 0, 0}), Error);
    CHECK_THROWS_AS((void)minkowski_norm({0, 0, -1}), Error);
}

TEST_CASE("Ad action: invariance of q and N") {
    Rng rng(23);
    SUBCASE("identity and rotation fix the elliptic axis") {
        const AlgebraVector v{0.4, -0.2, 1.7};
        const AlgebraVector w = ad_action(Mat2R::identity(), v);
        CHECK(w.x == doctest::Approx(v.x));
        CHECK(w.y == doctest::Approx(v.y));
        CHECK(w.z == doctest::Approx(v.z));
        // oracle: conjugate {0,0,1} by R_0.3 directly as matrices
        const Mat2R r = Mat2R::rotation(0.3);
        const Mat2R conj = r * AlgebraVector{0, 0, 1}.matrix() * r.inverse();
        CHECK(conj.a == doctest::Approx(0.0).epsilon(1e-14));
        CHECK(conj.b == doctest::Approx(-1.0));
        CHECK(conj.c == doctest::Approx(1.0));
        const AlgebraVector fixed = ad_action(r, {0, 0, 1});
        CHECK(fixed.x == doctest::Approx(0.0));
        CHECK(fixed.y == doctest::Approx(0.0));
        CHECK(fixed.z == doctest::Approx(1.0));
    }
    SUBCASE("N(Ad(A).v) = N(v), direct conjugation oracle") {
        for (int i = 0; i < 100; ++i) {
            const Mat2R g = testutil::random_unimodular(rng, 1.2);
            const AlgebraVector v{0.1, 0.2, 1.0};
            // oracle path: plain matrix conjugation, then read the norm off det
            const Mat2R m = g * v.matrix() * g.inverse();
            const double n_oracle = std::sqrt(m.det());
            const AlgebraVector w = ad_action(g, v);
            CHECK(std::fabs(minkowski_norm(w) - n_oracle) <= 1e-10);
            CHECK(std::fabs(minkowski_norm(w) - minkowski_norm(v)) <= 1e-10);
        }
    }
    SUBCASE("q invariance, relative") {
        for (int i = 0; i < 200; ++i) {
            const Mat2R g = testutil::random_unimodular(rng, 1.5);
            const AlgebraVector v{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
            const double q0 = quad_form(v);
            const double q1 = quad_form(ad_action(g, v));
            CHECK(std::fabs(q1 - q0) <= 1e-10 * std::max(1.0, std::fabs(q0)));
        }
    }
    SUBCASE("rejects non-unimodular") {
        CHECK_THROWS_AS((void)ad_action(Mat2R::diagonal(2, 1), {0, 0, 1}), Error);
    }
}

TEST_CASE("cone membership") {
    CHECK(cone_membership({0, 0, 1}, 1.0));
    CHECK_FALSE(cone_membership({1, 0, 1}, 0.5));
    CHECK(cone_membership({0.3, 0.4, 1.0}, 0.9));
    CHECK_FALSE(cone_membership({0.3, 0.4, 1.0}, 1.1));
}

TEST_CASE("commutator bound and the acs identity") {
    SUBCASE("parallel vectors commute") {
        const auto r = commutator_defect({0, 0, 1}, {0, 0, 1});
        CHECK(r.bracket_norm == doctest::Approx(0.0));
        CHECK(r.bound == doctest::Approx(0.0));
    }
    SUBCASE("explicit 2x2 commutator oracle") {
        const AlgebraVector v{0, 0, 1}, w{0.3, 0, 1};
        const Mat2R a = v.matrix(), b = w.matrix();
        const Mat2R br = a * b - b * a;
        const double oracle = algebra_from_matrix(br).euclid();
        const auto r = commutator_defect(v, w);
        CHECK(r.bracket_norm == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(r.bracket_norm <= r.bound + 1e-10);
    }
    SUBCASE("random cone samples: acs residual and anti-Cauchy-Schwarz") {
        Rng rng(31);
        for (int i = 0; i < 2000; ++i) {
            const AlgebraVector v = testutil::random_cone_vector(rng, 0.5);
            const AlgebraVector w = testutil::random_cone_vector(rng, 0.5);
            const double lhs = quad_form(v) * quad_form(w);
            // the matrix commutator carries a factor 2 against the Minkowski
            // cross product, hence the quarter on q([v,w])
            const double rhs = kappa(v, w) * kappa(v, w) + 0.25 * quad_form(bracket(v, w));
            CHECK(std::fabs(lhs - rhs) <= 1e-10 * std::max(1.0, std::fabs(lhs)));
            CHECK(kappa(v, w) >= minkowski_norm(v) * minkowski_norm(w) - 1e-12);
            const auto r = commutator_defect(v, w);
            CHECK(r.bracket_norm <= r.bound + 1e-10);
        }
    }
    SUBCASE("near-light-cone rejection") {
        CHECK_THROWS_AS((void)commutator_defect({3, 4, 5.0000000001}, {0, 0, 1}), Error);
    }
}

TEST_CASE("anti-Minkowski superadditivity on E+") {
    Rng rng(41);
    for (int i = 0; i < 500; ++i) {
        const AlgebraVector v = testutil::random_cone_vector(rng, 0.2);
        const AlgebraVector w = testutil::random_cone_vector(rng, 0.2);
        CHECK(minkowski_norm(v + w) >= minkowski_norm(v) + minkowski_norm(w) - 1e-10);
    }
}

TEST_CASE("sl2 <-> su11 conversion") {
    SUBCASE("identity and rotations") {
        const Mat2C id = sl2_to_su11(Mat2R::identity());
        CHECK(std::abs(id.a - 1.0) <= 1e-14);
        CHECK(std::abs(id.b) <= 1e-14);
        const Mat2C d = sl2_to_su11(Mat2R::rotation(0.3));
        CHECK(std::abs(d.a - std::polar(1.0, 0.3)) <= 1e-14);
        CHECK(std::abs(d.d - std::polar(1.0, -0.3)) <= 1e-14);
        CHECK(std::abs(d.b) <= 1e-14);
        CHECK(std::abs(d.c) <= 1e-14);
    }
    SUBCASE("round trip and homomorphism") {
        Rng rng(53);
        for (int i = 0; i < 100; ++i) {
            const Mat2R a = testutil::random_unimodular(rng);
            const Mat2R b = testutil::random_unimodular(rng);
            const Mat2R back = su11_to_sl2(sl2_to_su11(a));
            CHECK((back - a).frob() <= 1e-12 * std::max(1.0, a.frob()));
            const Mat2C lhs = sl2_to_su11(a * b);
            const Mat2C rhs = sl2_to_su11(a) * sl2_to_su11(b);
            CHECK((lhs - rhs).frob() <= 1e-12 * std::max(1.0, lhs.frob()));
        }
    }
    SUBCASE("algebra coordinates line up: t = z, nu = x + iy") {
        const AlgebraVector v{0.3, -0.7, 1.1};
        const Mat2C u = conversion_matrix() * Mat2C::from_real(v.matrix()) * conversion_matrix_inv();
        const Su11Vector s = su11_algebra_from_matrix(u);
        CHECK(s.t == doctest::Approx(v.z));
        CHECK(s.nu.real() == doctest::Approx(v.x));
        CHECK(s.nu.imag() == doctest::Approx(v.y));
    }
}

TEST_CASE("moebius action") {
    SUBCASE("identity and diagonal") {
        CHECK(std::abs(moebius(Mat2C::identity(), cplx(0.3, -0.4)) - cplx(0.3, -0.4)) <= 1e-15);
        CHECK(std::abs(moebius(diagonal_d(0.5), cplx(0, 0))) <= 1e-15);
    }
    SUBCASE("C_z maps the lower half plane into itself; formula oracle") {
        // oracle: Im m_hat from the explicit fraction, evaluated independently
        const cplx z = std::polar(0.8, 0.2);
        const cplx m(0, -1);
        const cplx e = 0.5 * (z + 1.0 / z);
        const cplx f = (z - 1.0 / z) / cplx(0, 2);
        const double num = (std::norm(e) + std::norm(f)) * m.imag() +
                           (1.0 + std::norm(m)) * 0.25 * (std::norm(z) - 1.0 / std::norm(z));
        const double im_oracle = num / std::norm(f * m + e);
        const cplx image = moebius(rotation_c(z), m);
        CHECK(image.imag() == doctest::Approx(im_oracle).epsilon(1e-12));
        CHECK(image.imag() < 0.0);
    }
    SUBCASE("pole handling") {
        const Mat2C g{0, 1, 1, 0};  // m -> 1/m
        CHECK_THROWS_AS((void)moebius(g, cplx(0, 0)), Error);
        const auto proj = moebius_projective(g, cplx(0, 0));
        CHECK(proj.at_infinity);
        const auto inf_img = moebius_of_infinity(g);
        CHECK_FALSE(inf_img.at_infinity);
        CHECK(std::abs(inf_img.value) <= 1e-15);
    }
    SUBCASE("det C_z = 1") {
        Rng rng(67);
        for (int i = 0; i < 50; ++i) {
            const cplx z = std::polar(rng.uniform(0.1, 1.0), rng.uniform(-3, 3));
            CHECK(std::abs(rotation_c(z).det() - 1.0) <= 1e-12);
        }
    }
}

TEST_CASE("exp and log of 2x2 blocks") {
    Rng rng(71);
    for (int i = 0; i < 100; ++i) {
        const AlgebraVector v{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Mat2R e = exp_traceless(v.matrix());
        CHECK(e.det() == doctest::Approx(1.0).epsilon(1e-12));
        if (e.trace() > -2.0 + 1e-6 && v.matrix().det() < kPi * kPi * 0.9) {
            const Mat2R back = log_unimodular(e);
            CHECK((back - v.matrix()).frob() <= 1e-9 * std::max(1.0, v.matrix().frob()));
        }
    }
    // rotation exp against the closed form
    const Mat2R r = exp_traceless(AlgebraVector{0, 0, 0.7}.matrix());
    CHECK((r - Mat2R::rotation(0.7)).frob() <= 1e-12);
}

TEST_CASE("polar factorization angle") {
    Rng rng(73);
    for (int i = 0; i < 100; ++i) {
        const Mat2R a = testutil::random_unimodular(rng, 1.3);
        const double phi = polar_angle(a);
        const Mat2R r = polar_rotation(a);
        CHECK((r - Mat2R::rotation(phi)).frob() <= 1e-9);
        const Mat2R s = r.inverse() * a;  // must be symmetric positive
        CHECK(s.b == doctest::Approx(s.c).epsilon(1e-9));
        CHECK(s.trace() > 0.0);
    }
}
