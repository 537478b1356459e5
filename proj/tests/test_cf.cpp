#include <doctest.h>

#include "qpsl2/continued_fraction.hpp"
#include "test_util.hpp"

using namespace qpsl2;
using testutil::Rng;

TEST_CASE("golden mean expansion: all ones, Fibonacci convergents") {
    const auto cf = expand(testutil::golden(), 20);
    REQUIRE(cf.depth() >= 20);
    for (int k = 1; k <= 20; ++k) CHECK(cf.a[k] == 1);
    const long long fib[] = {1, 1, 2, 3, 5, 8, 13, 21, 34, 55};
    for (int k = 1; k <= 9; ++k) CHECK(static_cast<long long>(cf.q[k]) == fib[k]);
    // alpha_k stays at the Gauss fixed point
    for (int k = 0; k <= 15; ++k) CHECK(cf.alpha_k[k] == doctest::Approx(testutil::golden()).epsilon(1e-9));
}

TEST_CASE("first quotient is the floor of 1/alpha") {
    const auto cf = expand(0.22, 5);
    CHECK(cf.a[1] == 4);
}

TEST_CASE("determinant identity is exact in integers") {
    Rng rng(97);
    for (int trial = 0; trial < 25; ++trial) {
        const double alpha = trial == 0 ? std::sqrt(2.0) - 1.0 : rng.uniform(1e-3, 1.0 - 1e-3);
        const auto cf = expand(alpha, 30);
        for (int k = 1; k <= cf.depth(); ++k) {
            const int128 det = cf.q[k] * cf.p[k - 1] - cf.q[k - 1] * cf.p[k];
            CHECK(det == ((k % 2 == 0) ? 1 : -1));
        }
    }
}

TEST_CASE("beta identities and bounds") {
    const auto cf = expand(std::sqrt(2.0) - 1.0, 25);
    for (int k = 0; k + 1 <= cf.depth(); ++k) {
        // beta_k = (-1)^k (q_k alpha - p_k)
        const double direct = (k % 2 == 0 ? 1.0 : -1.0) *
                              (static_cast<double>(cf.q[k]) * cf.alpha - static_cast<double>(cf.p[k]));
        CHECK(std::fabs(cf.beta[k] - direct) <= 1e-12 * static_cast<double>(cf.q[k + 1]));
        // 1/(q_{k+1} + q_k) < beta_k < 1/q_{k+1}
        CHECK(cf.beta[k] > 1.0 / static_cast<double>(cf.q[k + 1] + cf.q[k]) - 1e-15);
        CHECK(cf.beta[k] < 1.0 / static_cast<double>(cf.q[k + 1]) + 1e-15);
    }
    // beta_{k-2} = a_k beta_{k-1} + beta_k
    for (int k = 2; k <= cf.depth(); ++k) {
        const double lhs = cf.beta[k - 2];
        const double rhs = static_cast<double>(cf.a[k]) * cf.beta[k - 1] + cf.beta[k];
        CHECK(std::fabs(lhs - rhs) <= 1e-14 * std::max(1.0, std::fabs(lhs)));
    }
}

TEST_CASE("rational inputs stop with partial data") {
    const auto cf = expand(1.0 / 3.0, 10);
    CHECK(cf.status == CfStatus::rational_stop);
    CHECK(cf.depth() >= 1);
}

TEST_CASE("cd condition") {
    SUBCASE("golden mean passes a generous window") {
        const auto cert = cd_test(testutil::golden(), 3.0, 1.5, 10000);
        CHECK(cert.valid());
    }
    SUBCASE("rationals fail at the denominator") {
        const auto cert = cd_test(1.0 / 3.0, 3.0, 1.5, 10);
        CHECK_FALSE(cert.valid());
        CHECK(cert.worst_k == 3);
        CHECK(cert.margin <= 1e-12);
    }
    SUBCASE("margin is monotone nonincreasing in K") {
        double prev = std::numeric_limits<double>::infinity();
        for (long long k : {10LL, 100LL, 1000LL, 10000LL}) {
            const auto cert = cd_test(testutil::golden(), 3.0, 1.5, k);
            CHECK(cert.margin <= prev + 1e-15);
            prev = cert.margin;
        }
    }
}

TEST_CASE("diophantine with respect to alpha") {
    const double alpha = testutil::golden();
    SUBCASE("rho = alpha/2 is rational w.r.t. alpha with k0 = 1") {
        const auto cert = diophantine_wrt(alpha / 2.0, alpha, 1.0, 2.0, 100);
        CHECK(cert.rational);
        CHECK(cert.k0 == 1);
    }
    SUBCASE("rho = 0 is rational with k0 = 0") {
        const auto cert = diophantine_wrt(0.0, alpha, 1.0, 2.0, 100);
        CHECK(cert.rational);
        CHECK(cert.k0 == 0);
    }
    SUBCASE("generic rho gets a positive margin") {
        const double rho = testutil::golden() / kPi;
        const auto cert = diophantine_wrt(rho, alpha, 10.0, 2.0, 1000);
        CHECK_FALSE(cert.rational);
        CHECK(cert.margin > 0.0);
    }
}

TEST_CASE("sigma window search") {
    SUBCASE("golden mean never enters (1/5, 1/4]") {
        const auto cf = expand(testutil::golden(), 20);
        CHECK(sigma_window_search(cf, 10.0, 1.5).empty());
    }
    SUBCASE("CF [0;4,4,...] sits inside the window at every depth") {
        const auto cf = expand(testutil::sqrt5m2(), 18);
        const auto ks = sigma_window_search(cf, 10.0, 1.5);
        CHECK(ks.size() >= 10);
        for (int k : ks) {
            CHECK(cf.alpha_k[static_cast<std::size_t>(k)] > 0.2);
            CHECK(cf.alpha_k[static_cast<std::size_t>(k)] <= 0.25);
            // in the window the next quotient is forced to 4
            CHECK(cf.a[static_cast<std::size_t>(k) + 1] == 4);
        }
    }
}

TEST_CASE("basis matrices") {
    SUBCASE("k = l gives the identity") {
        const auto cf = expand(testutil::golden(), 10);
        const auto m = basis_matrix(cf, 4, 4);
        CHECK(m == BasisMatrix{});
    }
    SUBCASE("l = 0 recovers the convergent matrix (golden, k = 2)") {
        const auto cf = expand(testutil::golden(), 10);
        const auto m = basis_matrix(cf, 2, 0);
        CHECK(static_cast<long long>(m.m1) == 1);
        CHECK(static_cast<long long>(m.m2) == -1);
        CHECK(static_cast<long long>(m.m3) == -1);
        CHECK(static_cast<long long>(m.m4) == 2);
    }
    SUBCASE("sign pattern and convergent identification for random alpha") {
        Rng rng(101);
        for (int trial = 0; trial < 10; ++trial) {
            const auto cf = expand(rng.uniform(0.05, 0.95), 12);
            for (int k = 2; k <= std::min(10, cf.depth()); k += 2) {
                const auto m = basis_matrix(cf, k, 0);
                CHECK(m.m1 >= 0);
                CHECK(m.m4 >= 0);
                CHECK(m.m2 <= 0);
                CHECK(m.m3 <= 0);
                CHECK(m.m1 == cf.p[k - 1]);
                CHECK(m.m2 == -cf.q[k - 1]);
                CHECK(m.m3 == -cf.p[k]);
                CHECK(m.m4 == cf.q[k]);
            }
        }
    }
    SUBCASE("eigen-relation against the direct product oracle") {
        const auto cf = expand(std::sqrt(2.0) - 1.0, 12);
        for (auto [k, l] : std::vector<std::pair<int, int>>{{2, 0}, {4, 2}, {6, 2}}) {
            const auto m = basis_matrix(cf, k, l);
            // oracle: multiply the factor matrices directly
            BasisMatrix oracle;
            for (int j = k; j >= l + 1; --j)
                oracle = oracle.mul(BasisMatrix{0, 1, 1, -static_cast<int128>(cf.a[j])});
            CHECK(m == oracle);
            // (|m4| |m2|; |m3| |m1|) (1, alpha_k)^T = (beta_{l-1}/beta_{k-1}) (1, alpha_l)^T
            const double ak = cf.alpha_k[k], al = cf.alpha_k[l];
            const double scale = cf.beta_prev(l) / cf.beta_prev(k);
            auto absd = [](int128 v) { return std::fabs(static_cast<double>(v)); };
            const double r1 = absd(m.m4) + absd(m.m2) * ak;
            const double r2 = absd(m.m3) + absd(m.m1) * ak;
            CHECK(std::fabs(r1 - scale) <= 1e-9 * scale);
            CHECK(std::fabs(r2 - scale * al) <= 1e-9 * scale);
        }
    }
    SUBCASE("functoriality basis(k,l) basis(l,j) = basis(k,j)") {
        const auto cf = expand(testutil::sqrt2m1(), 12);
        const auto a = basis_matrix(cf, 8, 4);
        const auto b = basis_matrix(cf, 4, 2);
        const auto c = basis_matrix(cf, 8, 2);
        CHECK(a.mul(b) == c);
    }
    SUBCASE("odd gaps are refused") {
        const auto cf = expand(testutil::golden(), 10);
        CHECK_THROWS_AS((void)basis_matrix(cf, 3, 0), Error);
    }
}
