#include <doctest.h>

#include "qpsl2/complex_rotation.hpp"
#include "test_util.hpp"

using namespace qpsl2;
using testutil::Rng;

namespace {

Sl2Map bounded_conjugator() {
    Sl2TrigPoly p;
    p.x = TrigPolyC::cosine(1, 0.23);
    p.y = TrigPolyC::sine(1, 0.31) + TrigPolyC::cosine(2, -0.12);
    p.z = TrigPolyC::sine(3, 0.14);
    return Sl2Map::exp_trig(p);
}

QpCocycle bounded_family(double alpha, double psi_turns) {
    return conjugate(bounded_conjugator(),
                     QpCocycle{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * psi_turns))});
}

}  // namespace

TEST_CASE("complexification") {
    const QpCocycle c{testutil::golden(), Sl2Map::constant(Mat2R::rotation(0.4))};
    SUBCASE("z = 1 leaves the map untouched") {
        const ComplexCocycle cc = complexify(c, 1.0);
        CHECK((cc.eval(0.3) - Mat2C::from_real(c.map.eval(0.3))).frob() <= 1e-14);
    }
    SUBCASE("z on the circle gives the real rotated map") {
        const double beta = 0.37;
        const ComplexCocycle cc = complexify(c, std::polar(1.0, beta));
        const Mat2C m = cc.eval(0.2);
        CHECK(m.max_imag() <= 1e-14);
        const Mat2R oracle = c.map.eval(0.2) * Mat2R::rotation(beta);
        CHECK((m.real_part() - oracle).frob() <= 1e-13);
    }
    SUBCASE("det C_z = 1 on random z") {
        Rng rng(301);
        for (int i = 0; i < 30; ++i) {
            const cplx z = std::polar(rng.uniform(0.05, 1.0), rng.uniform(-3, 3));
            CHECK(std::abs(rotation_c(z).det() - 1.0) <= 1e-12);
        }
    }
    SUBCASE("z = 0 and |z| > 1 are refused") {
        CHECK_THROWS_AS((void)complexify(c, 0.0), Error);
        CHECK_THROWS_AS((void)complexify(c, 1.5), Error);
    }
}

TEST_CASE("invariant sections") {
    const double alpha = testutil::golden();
    SUBCASE("identity cocycle: tau = 0 is the fixed section") {
        const ComplexCocycle cc = complexify({alpha, Sl2Map()}, 0.7);
        const DiskSection sec = invariant_section(cc, 256, 1e-12);
        for (const cplx& t : sec.tau) CHECK(std::abs(t) <= 1e-12);
        CHECK(section_residual(cc, sec) <= 1e-10);
    }
    SUBCASE("constant rotation: diagonal in su(1,1), tau = 0") {
        const ComplexCocycle cc =
            complexify({alpha, Sl2Map::constant(Mat2R::rotation(0.9))}, cplx(0.6, 0.3));
        const DiskSection sec = invariant_section(cc, 256, 1e-12);
        for (const cplx& t : sec.tau) CHECK(std::abs(t) <= 1e-12);
    }
    SUBCASE("bounded family at z = 0.9: fast convergence and uniqueness") {
        const QpCocycle c = bounded_family(alpha, 0.23);
        const ComplexCocycle cc = complexify(c, 0.9);
        const DiskSection a = invariant_section(cc, 1024, 1e-10, false, 10000, cplx(0, 0));
        const DiskSection b = invariant_section(cc, 1024, 1e-10, false, 10000, cplx(0.4, -0.2));
        CHECK(a.residual <= 1e-10);
        double gap = 0;
        for (int j = 0; j < a.size(); ++j) gap = std::max(gap, std::abs(a.tau[j] - b.tau[j]));
        CHECK(gap <= 1e-9);
        // equivariance defect is interpolation-limited; the auto version
        // doubles the grid until the target is met
        const DiskSection fine = invariant_section_auto(cc, 1e-6);
        CHECK(section_residual(cc, fine) <= 1e-6);
        // values stay inside the closed disk
        for (const cplx& t : a.tau) CHECK(std::abs(t) <= 1.0 + 1e-10);
    }
    SUBCASE("plus-side section of the identity cocycle is at infinity") {
        const ComplexCocycle cc = complexify({alpha, Sl2Map()}, 0.7);
        const DiskSection sec = invariant_section(cc, 128, 1e-12, true);
        // reciprocal coordinates: sigma = 1/tau_+ = 0
        for (const cplx& s : sec.tau) CHECK(std::abs(s) <= 1e-12);
    }
    SUBCASE("boundary z is refused for direct iteration") {
        const ComplexCocycle cc = complexify({alpha, Sl2Map()}, 1.0);
        CHECK_THROWS_AS((void)invariant_section(cc, 128), Error);
    }
}

TEST_CASE("zeta") {
    const double alpha = testutil::golden();
    SUBCASE("identity cocycle at z = 0.8: zeta = log(1/0.8), real") {
        // C_z has eigenvalues z and 1/z; the expanding rate is log(1/|z|)
        const ComplexCocycle cc = complexify({alpha, Sl2Map()}, 0.8);
        const DiskSection sec = invariant_section(cc, 512, 1e-12);
        const ZetaResult zr = zeta(cc, sec, 200000, 4);
        CHECK(zr.zeta.real() == doctest::Approx(std::log(1.0 / 0.8)).epsilon(1e-9));
        CHECK(std::fabs(std::remainder(zr.zeta.imag(), 1.0)) <= 1e-9);
        CHECK(std::fabs(zr.re_check - std::log(1.0 / 0.8)) <= 1e-4);
    }
    SUBCASE("rotation cocycle on the boundary limit: Im zeta = psi + beta/(2pi)") {
        // checked through radii extrapolation in the boundary scan below; here
        // at r slightly inside, Im zeta is already within grid error
        const double psi = 0.2, beta = 0.5;
        const QpCocycle c{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * psi))};
        const ComplexCocycle cc = complexify(c, std::polar(0.999, beta));
        const DiskSection sec = invariant_section(cc, 512, 1e-11);
        const ZetaResult zr = zeta(cc, sec, 20000, 4);
        const double expect = psi + beta / kTwoPi;
        CHECK(std::fabs(std::remainder(zr.zeta.imag() - expect, 1.0)) <= 1e-3);
        // strictly inside, the exponent of the constant block is -log r
        CHECK(std::fabs(zr.zeta.real() - std::log(1.0 / 0.999)) <= 1e-4);
    }
    SUBCASE("re and im cross-checks agree on the bounded family") {
        const QpCocycle c = bounded_family(alpha, 0.23);
        for (const cplx z : {cplx(0.9, 0.0), std::polar(0.9, 0.3)}) {
            const ComplexCocycle cc = complexify(c, z);
            const DiskSection sec = invariant_section(cc, 2048, 1e-10);
            const ZetaResult zr = zeta(cc, sec, 100000, 8);
            CHECK(std::fabs(zr.zeta.real() - zr.re_check) <= 1e-3);
            CHECK(std::fabs(std::remainder(zr.zeta.imag() - zr.im_check, 1.0)) <= 1e-3);
            CHECK(zr.zeta.real() >= -1e-8);
        }
    }
    SUBCASE("holomorphy probe: Cauchy-Riemann stencil at an interior point") {
        // conj(zeta) is the holomorphic object with our counterclockwise Im
        const QpCocycle c = bounded_family(alpha, 0.23);
        const cplx z0(0.62, 0.23);
        const double h = 1e-3;
        auto w_at = [&](cplx z) {
            const ComplexCocycle cc = complexify(c, z);
            const DiskSection sec = invariant_section(cc, 1024, 1e-11);
            const ZetaResult zr = zeta(cc, sec, 2000, 2);
            return std::conj(cplx(zr.zeta.real(), kTwoPi * zr.zeta.imag()));  // nats
        };
        const cplx dx = (w_at(z0 + h) - w_at(z0 - h)) / (2.0 * h);
        const cplx dy = (w_at(z0 + cplx(0, h)) - w_at(z0 - cplx(0, h))) / (2.0 * h);
        // CR: d/dy = i d/dx
        CHECK(std::abs(dy - cplx(0, 1) * dx) <= 1e-4 * std::max(1.0, std::abs(dx)));
    }
}

TEST_CASE("boundary scan") {
    const double alpha = testutil::golden();
    SUBCASE("pure rotations: Re -> 0, Im linear in beta") {
        const double psi = 0.2;
        const QpCocycle c{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * psi))};
        const auto rows = boundary_scan(c, {0.1, 0.3, 0.5}, {0.9, 0.99, 0.999}, 512, 1e-10, 20000);
        std::vector<BoundaryRow> limits;
        for (const auto& r : rows)
            if (r.r == 0.0) limits.push_back(r);
        REQUIRE(limits.size() == 3);
        for (const auto& r : limits) {
            CHECK(std::fabs(r.re) <= 1e-4);
            CHECK(r.zero_exponent_candidate);
            const double expect = psi + r.beta / kTwoPi;
            CHECK(std::fabs(std::remainder(r.im - expect, 1.0)) <= 1e-4);
            CHECK(std::fabs(std::remainder(r.rot_direct - expect, 1.0)) <= 1e-4);
        }
        // Im varies linearly: equal increments for equal beta steps
        const double d1 = std::remainder(limits[1].im - limits[0].im, 1.0);
        const double d2 = std::remainder(limits[2].im - limits[1].im, 1.0);
        CHECK(std::fabs(d1 - 0.2 / kTwoPi) <= 1e-4);
        CHECK(std::fabs(d2 - d1) <= 1e-4);
    }
    SUBCASE("constant hyperbolic: Re bounded away from zero near beta = 0") {
        const QpCocycle c{alpha, Sl2Map::constant(Mat2R::diagonal(std::exp(1.0), std::exp(-1.0)))};
        const auto rows = boundary_scan(c, {0.0, 0.05}, {0.9, 0.99}, 256, 1e-10, 20000);
        for (const auto& r : rows)
            if (r.r == 0.0) {
                CHECK(r.re > 0.5);
                CHECK_FALSE(r.zero_exponent_candidate);
                CHECK(r.lyap_direct > 0.5);
            }
    }
}

TEST_CASE("I - 4 Im J") {
    const double alpha = testutil::golden();
    SUBCASE("rotation cocycle saturates the identity") {
        const QpCocycle c{alpha, Sl2Map::constant(Mat2R::rotation(kTwoPi * 0.2))};
        const IjResult r = ij_defect(c, cplx(0.3, -0.05), 512);
        CHECK(std::fabs(r.defect) <= 1e-4 * std::max(1.0, std::fabs(r.i_value)));
    }
    SUBCASE("nonnegative on bounded families, either half plane") {
        const QpCocycle c = bounded_family(alpha, 0.23);
        for (const cplx lam : {cplx(0.2, -0.05), cplx(0.2, 0.05), cplx(-0.4, -0.07)}) {
            const IjResult r = ij_defect(c, lam, 512);
            CHECK(r.defect >= -1e-6);
        }
        // conjugation symmetry
        const IjResult a = ij_defect(c, cplx(0.2, 0.05), 512);
        const IjResult b = ij_defect(c, cplx(0.2, -0.05), 512);
        CHECK(a.defect == doctest::Approx(b.defect).epsilon(1e-10));
    }
    SUBCASE("Im of the lambda-derivative of zeta is nonnegative") {
        // real-direction finite difference of zeta (ccw orientation); on the
        // model block A = Id this is Im conj(-2i/(1+lambda^2)) = 2/|1+lambda^2| > 0
        const QpCocycle c = bounded_family(alpha, 0.23);
        auto zeta_of = [&](cplx lam) {
            const cplx z = (lam - cplx(0, 1)) / (cplx(0, 1) + lam);
            const ComplexCocycle cc = complexify(c, z);
            const DiskSection sec = invariant_section(cc, 1024, 1e-11);
            const ZetaResult zr = zeta(cc, sec, 2000, 2);
            return cplx(zr.zeta.real(), kTwoPi * zr.zeta.imag());
        };
        const cplx lam(0.25, 0.08);
        const double h = 1e-3;
        const cplx dw = (zeta_of(lam + h) - zeta_of(lam - h)) / (2.0 * h);
        CHECK(dw.imag() >= -1e-8);
    }
    SUBCASE("zero imaginary part is refused") {
        const QpCocycle c = bounded_family(alpha, 0.23);
        CHECK_THROWS_AS((void)ij_defect(c, cplx(0.2, 0.0)), Error);
    }
}

TEST_CASE("phase oscillation over the disk stays under a half turn") {
    // continuous lift of arg rho(z, theta, .) along a segment in the closed
    // disk: total variation below 1/2 turn
    const QpCocycle c = bounded_family(testutil::golden(), 0.23);
    Rng rng(907);
    for (int trial = 0; trial < 40; ++trial) {
        const cplx z = std::polar(rng.uniform(0.2, 1.0), rng.uniform(-3, 3));
        const ComplexCocycle cc = complexify(c, z);
        const Mat2C u = cc.eval_su11(rng.uniform());
        const cplx t1 = std::polar(rng.uniform(0.0, 0.999), rng.uniform(0, 6.28));
        const cplx t2 = std::polar(rng.uniform(0.0, 1.0), rng.uniform(0, 6.28));
        double acc = 0, prev = 0;
        const int steps = 64;
        for (int j = 0; j <= steps; ++j) {
            const cplx tau = t1 + (t2 - t1) * (static_cast<double>(j) / steps);
            const double a = std::arg(u.c * tau + u.d);
            if (j > 0) {
                double d = a - prev;
                while (d > kPi) d -= kTwoPi;
                while (d < -kPi) d += kTwoPi;
                acc += d;
            }
            prev = a;
        }
        CHECK(std::fabs(acc) / kTwoPi < 0.5 + 1e-9);
    }
}

TEST_CASE("complexified schrodinger cocycle") {
    const TrigPolyC v = TrigPolyC::cosine(1, 1.4);
    SUBCASE("real lambda gives a real matrix") {
        const ComplexSchrodinger s = schrodinger_complexify(testutil::golden(), v, 0.3);
        CHECK(s.eval(0.27).max_imag() <= 1e-15);
    }
    SUBCASE("inversion conjugacy holds pointwise") {
        const ComplexSchrodinger s =
            schrodinger_complexify(testutil::golden(), v, cplx(0.3, -0.2));
        for (double t : {0.0, 0.21, 0.68}) CHECK(schrodinger_inversion_defect(s, t) <= 1e-12);
    }
    SUBCASE("determinant is one") {
        const ComplexSchrodinger s =
            schrodinger_complexify(testutil::golden(), v, cplx(-0.7, 0.4));
        for (double t : {0.1, 0.5, 0.9}) CHECK(std::abs(s.eval(t).det() - 1.0) <= 1e-14);
    }
}
