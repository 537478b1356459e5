#include <doctest.h>

#include "qpsl2/cocycle.hpp"
#include "qpsl2/invariants.hpp"
#include "test_util.hpp"

using namespace qpsl2;
using testutil::Rng;

namespace {

Sl2TrigPoly small_trig_poly() {
    Sl2TrigPoly p;
    p.x = TrigPolyC::cosine(1, 0.21) + TrigPolyC::sine(2, -0.13);
    p.y = TrigPolyC::sine(1, 0.17) + TrigPolyC::cosine(3, 0.08);
    p.z = TrigPolyC::cosine(2, 0.11);
    return p;
}

}  // namespace

TEST_CASE("fibered products and the cocycle identity") {
    const QpCocycle c{testutil::golden(), Sl2Map::exp_trig(small_trig_poly())};
    SUBCASE("n = 0 and n = 1") {
        CHECK((fibered_product(c, 0, 0.37) - Mat2R::identity()).frob() == doctest::Approx(0.0));
        CHECK((fibered_product(c, 1, 0.37) - c.map.eval(0.37)).frob() == doctest::Approx(0.0));
    }
    SUBCASE("identity A_{n+m}(theta) = A_n(theta + m alpha) A_m(theta)") {
        Rng rng(5);
        for (int i = 0; i < 20; ++i) {
            const long long n = static_cast<long long>(rng.uniform(-50, 50));
            const long long m = static_cast<long long>(rng.uniform(-50, 50));
            const double theta = rng.uniform();
            const Mat2R lhs = fibered_product(c, n + m, theta);
            const Mat2R rhs =
                fibered_product(c, n, theta + static_cast<double>(m) * c.alpha) *
                fibered_product(c, m, theta);
            CHECK((lhs - rhs).frob() <= 1e-9 * std::max(1.0, rhs.frob()));
        }
    }
    SUBCASE("inverse direction matches the direct product oracle") {
        // A_{-7}(theta) = A(theta-7a)^{-1} ... A(theta-a)^{-1}, leftmost factor first
        const double theta = 0.21;
        Mat2R oracle = c.map.eval(theta - 7 * c.alpha).inverse();
        for (int k = 6; k >= 1; --k)
            oracle = oracle * c.map.eval(theta - k * c.alpha).inverse();
        CHECK((fibered_product(c, -7, theta) - oracle).frob() <= 1e-12);
    }
}

TEST_CASE("degree") {
    CHECK(degree(Sl2Map::rot_path(3)) == 3);
    CHECK(degree(Sl2Map::rot_path(-2)) == -2);
    CHECK(degree(Sl2Map::constant(Mat2R::rotation(0.9))) == 0);
    SUBCASE("additivity, checked against a direct winding count") {
        const Sl2Map m = Sl2Map::product(
            Sl2Map::product(Sl2Map::rot_path(2), Sl2Map::rot_path(-1)),
            Sl2Map::constant(exp_traceless(AlgebraVector{0.4, 0.2, 0.1}.matrix())));
        CHECK(degree(m) == 1);
        // oracle: winding of the image of e1 through atan2 accumulation
        const int n = 4096;
        double prev = 0, total = 0;
        for (int j = 0; j <= n; ++j) {
            const Mat2R g = m.eval(static_cast<double>(j) / n);
            const double ang = std::atan2(g.c, g.a);
            if (j > 0) {
                double d = ang - prev;
                while (d > kPi) d -= kTwoPi;
                while (d < -kPi) d += kTwoPi;
                total += d;
            }
            prev = ang;
        }
        CHECK(std::llround(total / kTwoPi) == 1);
    }
    SUBCASE("degree stable under small perturbation") {
        Rng rng(11);
        for (int r = -2; r <= 2; ++r) {
            Sl2TrigPoly noise;
            noise.x = TrigPolyC::cosine(1, 5e-4 * rng.uniform());
            noise.y = TrigPolyC::sine(2, 5e-4 * rng.uniform());
            noise.z = TrigPolyC::cosine(1, 5e-4 * rng.uniform());
            const Sl2Map m = Sl2Map::product(Sl2Map::rot_path(r), Sl2Map::exp_trig(noise));
            CHECK(degree(m) == r);
        }
    }
    SUBCASE("coarse grids on fast loops are refused") {
        CHECK_THROWS_AS((void)degree(Sl2Map::rot_path(600), 1024), Error);
    }
}

TEST_CASE("conjugation") {
    const QpCocycle c{testutil::golden(), Sl2Map::constant(Mat2R::rotation(kTwoPi * 0.25))};
    SUBCASE("by the identity") {
        const QpCocycle cc = conjugate(Sl2Map::constant(Mat2R::identity()), c);
        CHECK((cc.map.eval(0.3) - c.map.eval(0.3)).frob() <= 1e-15);
    }
    SUBCASE("conjugate then undo") {
        const Sl2Map b = Sl2Map::exp_trig(small_trig_poly());
        const QpCocycle cc = conjugate(b, c);
        const QpCocycle back = conjugate(Sl2Map::inverse(b), cc);
        for (int j = 0; j < 16; ++j) {
            const double t = j / 16.0;
            CHECK((back.map.eval(t) - c.map.eval(t)).frob() <= 1e-10);
        }
    }
}

TEST_CASE("schrodinger block") {
    SUBCASE("zero potential") {
        const Sl2Map m = schrodinger_map(TrigPolyC{}, 0.0);
        const Mat2R g = m.eval(0.123);
        CHECK(g.a == doctest::Approx(0.0));
        CHECK(g.b == doctest::Approx(1.0));
        CHECK(g.c == doctest::Approx(-1.0));
        CHECK(g.d == doctest::Approx(0.0));
        CHECK(degree(m) == 0);
    }
    SUBCASE("cos potential matches direct evaluation") {
        const Sl2Map m = schrodinger_map(TrigPolyC::cosine(1, 2.0), 0.0);
        for (const double t : {0.0, 0.25, 0.5}) {
            const Mat2R g = m.eval(t);
            CHECK(g.a == doctest::Approx(2.0 * std::cos(kTwoPi * t)));
            CHECK(g.b == doctest::Approx(1.0));
            CHECK(g.d == doctest::Approx(0.0));
            CHECK(g.det() == doctest::Approx(1.0));
        }
    }
    SUBCASE("unimodular at all grid nodes") {
        const Sl2Map m = schrodinger_map(TrigPolyC::cosine(1, 2.0), 0.7);
        CHECK(m.grid_det_defect(512) <= 1e-14);
    }
}

TEST_CASE("l operator") {
    SUBCASE("rotation path gives the constant generator {0,0,2 pi r}") {
        for (int r : {1, 2, -1}) {
            const auto lu = l_operator(Sl2Map::rot_path(r), 256);
            for (int j : {0, 85, 200}) {
                CHECK(lu[j].x == doctest::Approx(0.0).epsilon(1e-8));
                CHECK(lu[j].y == doctest::Approx(0.0).epsilon(1e-8));
                CHECK(lu[j].z == doctest::Approx(kTwoPi * r).epsilon(1e-10));
            }
        }
        // symbolic check at three nodes: dE_r/dtheta E_r^{-1} = 2 pi r J
        const Sl2Map e2 = Sl2Map::rot_path(2);
        for (double t : {0.0, 0.3, 0.77}) {
            const AlgebraVector v = l_operator_at(e2, t);
            CHECK(v.z == doctest::Approx(2 * kTwoPi).epsilon(1e-8));
            CHECK(std::hypot(v.x, v.y) <= 1e-6);
        }
    }
    SUBCASE("constant map gives zero") {
        const auto lu = l_operator(Sl2Map::constant(Mat2R::rotation(1.0)), 256);
        for (const auto& v : lu) CHECK(v.euclid() <= 1e-10);
    }
    SUBCASE("product rule L(uv) = Lu + Ad(u).Lv") {
        const Sl2Map u = Sl2Map::exp_trig(small_trig_poly());
        Sl2TrigPoly q;
        q.x = TrigPolyC::sine(1, 0.3);
        q.z = TrigPolyC::cosine(1, 0.25);
        const Sl2Map v = Sl2Map::exp_trig(q);
        const int n = 512;
        const auto luv = l_operator(Sl2Map::product(u, v), n);
        const auto lu = l_operator(u, n);
        const auto lv = l_operator(v, n);
        for (int j = 0; j < n; j += 37) {
            const double t = static_cast<double>(j) / n;
            const AlgebraVector rhs = lu[j] + ad_action(u.eval(t), lv[j]);
            CHECK((luv[j] - rhs).euclid() <= 1e-7 * std::max(1.0, rhs.euclid()));
        }
    }
    SUBCASE("L(u^{-1}) = -Ad(u^{-1}).L(u)") {
        const Sl2Map u = Sl2Map::exp_trig(small_trig_poly());
        const int n = 512;
        const auto lu = l_operator(u, n);
        const auto linv = l_operator(Sl2Map::inverse(u), n);
        for (int j = 0; j < n; j += 41) {
            const double t = static_cast<double>(j) / n;
            const AlgebraVector rhs = -1.0 * ad_action(u.eval(t).inverse(), lu[j]);
            CHECK((linv[j] - rhs).euclid() <= 1e-7 * std::max(1.0, rhs.euclid()));
        }
    }
}

TEST_CASE("boundedness probe") {
    SUBCASE("rotations are isometries") {
        const QpCocycle c{testutil::golden(), Sl2Map::constant(Mat2R::rotation(1.0))};
        const auto rep = boundedness_probe(c, 50, 64);
        CHECK(rep.sup == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(rep.overflowed);
    }
    SUBCASE("constant hyperbolic grows like e^K") {
        const QpCocycle c{testutil::golden(),
                          Sl2Map::constant(Mat2R::diagonal(std::exp(1.0), std::exp(-1.0)))};
        const auto rep = boundedness_probe(c, 20, 8);
        CHECK(std::log(rep.sup) == doctest::Approx(20.0).epsilon(1e-9));
        CHECK(rep.argmax_k == 20);
    }
    SUBCASE("conjugated rotations stay bounded by (max |B|)^2; product oracle at K=200") {
        const Sl2Map b = Sl2Map::exp_trig(small_trig_poly());
        QpCocycle c{testutil::golden(), Sl2Map::constant(Mat2R::rotation(kTwoPi * 0.17))};
        c = conjugate(b, c);
        double bmax = 0;
        for (int j = 0; j < 512; ++j) bmax = std::max(bmax, b.eval(j / 512.0).norm());
        const auto rep = boundedness_probe(c, 200, 64);
        CHECK(rep.sup <= bmax * bmax + 1e-6);
        // oracle: direct long product at one theta
        Mat2R prod = Mat2R::identity();
        for (int k = 0; k < 200; ++k) prod = c.map.eval(0.11 + k * c.alpha) * prod;
        CHECK(prod.norm() <= bmax * bmax + 1e-6);
    }
}

TEST_CASE("lift table") {
    SUBCASE("invariant: the lifted image projects back onto the direction image") {
        const Sl2Map m = Sl2Map::exp_trig(small_trig_poly());
        auto fn = [&](double t) { return m.eval(t); };
        const int nt = 256, nx = 64;
        const LiftTable lift(fn, 0.0, 1.0, nt, nx);
        Rng rng(7);
        for (int i = 0; i < 200; ++i) {
            // exact at table nodes; interpolation applies only between them
            const double t = static_cast<double>(static_cast<int>(rng.uniform() * nt)) / nt;
            const double x = static_cast<double>(static_cast<int>(rng.uniform() * nx)) / nx;
            const double f = lift.eval(t, x);
            const double raw = direction_displacement(m.eval(t), x);
            const double diff = f - raw;
            CHECK(std::fabs(diff - std::round(diff)) <= 1e-8);
        }
    }
    SUBCASE("E_r needs the 2-d table, and its lift drifts by r per period") {
        auto fn = [](double t) { return Mat2R::rotation(kTwoPi * 2.0 * t); };
        const LiftTable lift(fn, 0.0, 1.0, 512, 32);
        CHECK(lift.eval(1.0, 0.25) - lift.eval(0.0, 0.25) == doctest::Approx(2.0).epsilon(1e-6));
    }
    SUBCASE("x-periodicity f(t, x+1) = f(t, x)") {
        const Sl2Map m = Sl2Map::exp_trig(small_trig_poly());
        auto fn = [&](double t) { return m.eval(t); };
        const LiftTable lift(fn, 0.0, 1.0, 128, 64);
        CHECK(lift.eval(0.4, 0.2) == doctest::Approx(lift.eval(0.4, 1.2)).epsilon(1e-12));
    }
}

TEST_CASE("map serialization round trip") {
    const Sl2Map m = Sl2Map::product(
        Sl2Map::conj(Sl2Map::exp_trig(small_trig_poly()),
                     Sl2Map::shift(Sl2Map::rot_path(1), 0.125)),
        Sl2Map::inverse(schrodinger_map(TrigPolyC::cosine(1, 1.5), 0.3)));
    const auto j = m.to_json();
    const Sl2Map back = Sl2Map::from_json(j);
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        const double t = rng.uniform(-2, 2);
        CHECK((back.eval(t) - m.eval(t)).frob() <= 1e-12);
    }
}

TEST_CASE("grid cache is idempotent and unimodular") {
    const Sl2Map m = Sl2Map::product(Sl2Map::exp_trig(small_trig_poly()), Sl2Map::rot_path(1));
    const auto& g1 = m.grid(512);
    const auto& g2 = m.grid(512);
    CHECK(&g1 == &g2);  // refresh returns the same cache
    for (const auto& s : g1) CHECK(std::fabs(s.det() - 1.0) <= 1e-10);
    CHECK_THROWS_AS((void)m.grid(500), Error);  // not a power of two
}

TEST_CASE("period-2 maps") {
    const Sl2Map half = Sl2Map::rot_path(0.5);
    CHECK(half.period() == 2);
    // half-degree rotation path closes up only after two periods
    CHECK((half.eval(2.0) - half.eval(0.0)).frob() <= 1e-12);
    CHECK((half.eval(1.0) + half.eval(0.0)).frob() <= 1e-12);  // antiperiodic
}
