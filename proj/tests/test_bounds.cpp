#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "paccert/bounds.hpp"
#include "support/oracle.hpp"

using namespace paccert::bounds;

namespace {
// frozen long-double oracle values (tests/support/oracle.hpp reproduces them)
constexpr double kCEta1 = 1.5819767068693264;
constexpr double kCEta2 = 1.1565176427496657;
constexpr double kCDelta01 = 17.193807738308020;
constexpr double kCDelta001 = 25.356508080773888;
}  // namespace

TEST_CASE("c_eta matches the oracle and its limits") {
    CHECK(c_eta(1.0) == doctest::Approx(kCEta1).epsilon(1e-15));
    CHECK(c_eta(2.0) == doctest::Approx(kCEta2).epsilon(1e-15));
    CHECK(std::abs(c_eta(1.0) - static_cast<double>(oracle::c_eta(1.0L))) < 1e-15);
    CHECK(c_eta(50.0) - 1.0 < 1e-20);  // e^{-eta} -> 0
    CHECK(c_eta(0.3) > 1.0);
    CHECK_THROWS_AS(c_eta(0.0), std::domain_error);
    CHECK_THROWS_AS(c_eta(-1.0), std::domain_error);
    CHECK_THROWS_AS(c_eta(std::numeric_limits<double>::infinity()), std::domain_error);
}

TEST_CASE("c_delta matches the oracle") {
    CHECK(c_delta(0.1) == doctest::Approx(kCDelta01).epsilon(1e-15));
    CHECK(c_delta(0.01) == doctest::Approx(kCDelta001).epsilon(1e-15));
    CHECK(c_delta(1.0 - 1e-12) == doctest::Approx(4.0).epsilon(1e-5));  // ln(1/delta) -> 0
    CHECK_THROWS_AS(c_delta(0.0), std::domain_error);
    CHECK_THROWS_AS(c_delta(1.0), std::domain_error);
}

TEST_CASE("phi endpoints, round trip, and convexity") {
    for (double ratio : {0.01, 0.1, 1.0, 5.0}) {
        const long k = 100;
        const double lambda = ratio * static_cast<double>(k);
        CHECK(std::abs(phi(0.0, lambda, k)) <= 1e-14);
        CHECK(std::abs(phi(1.0, lambda, k) - 1.0) <= 1e-14);
        for (double x = 0.01; x < 0.995; x += 0.014) {
            const double y = phi(x, lambda, k);
            CHECK(std::abs(phi_inv(y, lambda, k) - x) <= 1e-12);
            CHECK(std::abs(y - static_cast<double>(oracle::phi(x, lambda, k))) <= 1e-13);
        }
        // convexity: central second difference stays nonnegative up to noise
        const double h = 1e-3;
        for (double x = 0.05; x < 0.95; x += 0.01) {
            const double second =
                phi(x + h, lambda, k) - 2.0 * phi(x, lambda, k) + phi(x - h, lambda, k);
            CHECK(second / (h * h) >= -1e-9);
        }
    }
    CHECK(std::abs(phi(0.3, 50.0, 100) -
                   static_cast<double>(oracle::phi(0.3L, 50.0L, 100))) < 1e-15);
    // x beyond 1/(1 - e^{-lambda/k}) pushes the log argument nonpositive
    CHECK_THROWS_AS(phi(200.0, 0.01, 1), std::domain_error);
    CHECK_THROWS_AS(phi(0.5, -1.0, 10), std::domain_error);
}

TEST_CASE("phi_inv endpoints and domain") {
    CHECK(phi_inv(0.0, 7.0, 3) == 0.0);
    CHECK(std::abs(phi_inv(1.0, 7.0, 3) - 1.0) <= 1e-15);
    CHECK_THROWS_AS(phi_inv(std::nan(""), 7.0, 3), std::domain_error);
}

TEST_CASE("per-sample multiplier is identically one") {
    CHECK(std::abs(per_sample_multiplier(0.3, 0.5) - 1.0) <= 1e-14);
    CHECK(std::abs(per_sample_multiplier(0.5, 2.0) - 1.0) <= 1e-14);
    CHECK(std::abs(per_sample_multiplier(1e-12, 1.0) - 1.0) <= 1e-13);  // q -> 0
    for (int qi = 1; qi <= 10; ++qi)
        for (int ei = 1; ei <= 10; ++ei) {
            const double q = qi / 11.0, eta = 0.3 * ei;
            CHECK(std::abs(per_sample_multiplier(q, eta) - 1.0) <= 1e-13);
        }
    CHECK_THROWS_AS(per_sample_multiplier(0.0, 1.0), std::domain_error);
    CHECK_THROWS_AS(per_sample_multiplier(0.5, 0.0), std::domain_error);
}

TEST_CASE("data_pac_bound values and structure") {
    CatoniParams p{1.0, 1000, 500, 0.1};
    const auto b = data_pac_bound(0.0, 0.0, p);
    CHECK(b.total == doctest::Approx(0.0072852719654022443).epsilon(1e-14));
    CHECK(b.empirical_term == 0.0);
    CHECK(b.kl_term == 0.0);
    CHECK(b.total == b.empirical_term + b.confidence_term + b.kl_term);

    // monotone in eta: eta C_eta increases everywhere
    double prev = 0.0;
    for (double eta = 0.25; eta < 16.0; eta *= 2.0) {
        const auto bb = data_pac_bound(0.0, 1.0, CatoniParams{eta, 1000, 500, 0.1});
        CHECK(bb.empirical_term > prev);
        prev = bb.empirical_term;
    }
    CHECK_THROWS_AS(data_pac_bound(-1.0, 0.0, p), std::domain_error);
    CHECK_THROWS_AS(data_pac_bound(0.0, 0.0, CatoniParams{1.0, 500, 500, 0.1}), std::domain_error);
}

TEST_CASE("data_pac_bound dominates the exact Phi-inversion") {
    // Phi^{-1}(emp + (kl + ln(1/delta))/lambda) <= theorem total, via 1 - e^{-x} <= x
    for (double emp : {0.0, 0.05, 0.2, 0.5})
        for (double kl : {0.0, 1.0, 10.0})
            for (double eta : {0.3, 1.0, 2.0}) {
                CatoniParams p{eta, 2000, 1000, 0.1};
                const double y = emp + (kl + std::log(10.0)) / p.lambda();
                const auto b = data_pac_bound(kl, emp, p);
                if (y <= 1.0) {
                    const double exact = phi_inv(y, p.lambda(), p.complement_size());
                    CHECK(b.total >= exact - 1e-12);
                }
            }
}

TEST_CASE("fgd_bound frozen example and degenerate cases") {
    CatoniParams p{1.0, 60000, 30000, 0.1};
    const auto b = fgd_bound(0.02, 5.0, 1000000, 1000, p);
    CHECK(b.total == doctest::Approx(0.037383106981548515).epsilon(1e-13));
    CHECK(b.total ==
          doctest::Approx(static_cast<double>(oracle::fgd_total(0.02L, 5.0L, 1000000, 1000, 1.0L,
                                                                60000, 30000, 0.1L)))
              .epsilon(1e-13));

    const auto zero = fgd_bound(0.0, 0.0, 1000000, 1000, p);
    CHECK(zero.empirical_term == 0.0);
    CHECK(zero.kl_term == 0.0);
    CHECK(zero.total ==
          doctest::Approx(c_eta(1.0) * (std::log(10.0) + 3.0) / 30000.0).epsilon(1e-15));

    CHECK_THROWS_AS(fgd_bound(0.0, 0.0, 1, 1, p), std::domain_error);  // dT <= 1
    CHECK_THROWS_AS(fgd_bound(0.0, -1.0, 10, 10, p), std::domain_error);
}

TEST_CASE("fsgd_bound mirrors fgd on a single realization") {
    CatoniParams p{1.0, 60000, 30000, 0.1};
    const auto a = fgd_bound(0.03, 2.0, 100, 50, p);
    const auto b = fsgd_bound(0.03, 2.0, 100, 50, p);
    CHECK(a.total == b.total);
    CHECK(b.theorem == Theorem::Fsgd);
    const auto conf_only = fsgd_bound(0.0, 0.0, 100, 50, p);
    CHECK(conf_only.total == conf_only.confidence_term);
}

TEST_CASE("gld_bound frozen example and scaling") {
    CatoniParams p{1.0, 2000, 1000, 0.1};
    const auto b = gld_bound(0.1, 100.0, p);
    CHECK(b.kl_term == doctest::Approx(0.0013600101672196431).epsilon(1e-13));
    CHECK(b.kl_term ==
          doctest::Approx(static_cast<double>(oracle::gld_kl_term(100.0L, 1.0L, 2000, 1000, 0.1L)))
              .epsilon(1e-13));
    CHECK(gld_bound(0.1, 0.0, p).kl_term == 0.0);

    // algebraic check at two m values: kl ~ 1/((n-m) m)
    const auto b500 = gld_bound(0.0, 100.0, CatoniParams{1.0, 2000, 500, 0.1});
    const auto b1000 = gld_bound(0.0, 100.0, CatoniParams{1.0, 2000, 1000, 0.1});
    CHECK(b1000.kl_term / b500.kl_term == doctest::Approx((1500.0 * 500.0) / (1000.0 * 1000.0)));
    CHECK(b1000.confidence_term / b500.confidence_term == doctest::Approx(1500.0 / 1000.0));

    CHECK_THROWS_AS(gld_bound(0.0, 1.0, CatoniParams{1.0, 2000, 0, 0.1}), std::domain_error);
}

TEST_CASE("sgld_bound frozen example and b -> infinity limit") {
    CatoniParams p{1.0, 2000, 1000, 0.1};
    const auto b = sgld_bound(0.0, 100.0, 4, p);
    CHECK(b.kl_term == doctest::Approx(0.15955768085415229).epsilon(1e-13));
    CHECK(b.kl_term ==
          doctest::Approx(static_cast<double>(oracle::sgld_kl_term(100.0L, 4, 1.0L, 2000, 1000, 0.1L)))
              .epsilon(1e-13));
    const auto huge_b = sgld_bound(0.0, 100.0, 2000000000, p);
    const auto gld = gld_bound(0.0, 100.0, p);
    CHECK(huge_b.kl_term == doctest::Approx(gld.kl_term).epsilon(1e-6));
    CHECK(sgld_bound(0.0, 0.0, 4, p).kl_term == 0.0);
    CHECK_THROWS_AS(sgld_bound(0.0, 1.0, 0, p), std::domain_error);
}

TEST_CASE("sgld_bound_subgaussian uses the printed constants verbatim") {
    const auto b = sgld_bound_subgaussian(0.0, 1.0, 10.0, 100, 10, 2000, 1000, 0.1);
    CHECK(b.kl_term == doctest::Approx(0.0018063651061849630).epsilon(1e-13));
    CHECK(b.kl_term == doctest::Approx(static_cast<double>(
                           oracle::sgld_subg_kl_term(1.0L, 10.0L, 100, 10, 2000, 1000, 0.1L)))
                           .epsilon(1e-13));
    CHECK(sgld_bound_subgaussian(0.2, 0.0, 10.0, 100, 10, 2000, 1000, 0.1).kl_term == 0.0);
    CHECK(sgld_bound_subgaussian(0.2, 1.0, 10.0, 100, 10, 2000, 1000, 0.1).empirical_term ==
          doctest::Approx(5.1 * 0.2));
    // the two SGLD evaluators are different routes over one trajectory
    CatoniParams p{1.0, 2000, 1000, 0.1};
    CHECK(sgld_bound_subgaussian(0.0, 1.0, 10.0, 100, 10, 2000, 1000, 0.1).kl_term !=
          sgld_bound(0.0, 10.0, 4, p).kl_term);
}

TEST_CASE("cld_bound limits and monotonicity in the horizon") {
    CatoniParams p{1.0, 2000, 1000, 0.1};
    CHECK(cld_bound(0.0, 1.0, 1.0, 0.5, 1.0, 0.0, p).kl_term == 0.0);  // T -> 0

    const double sat = c_eta(1.0) * c_delta(0.1) * 1.0 * 1.0 * std::exp(4.0) /
                       (2.0 * 1.0 * 1000.0 * 1000.0);
    const auto far = cld_bound(0.0, 1.0, 1.0, 0.5, 1.0, 1e9, p);
    CHECK(far.kl_term == doctest::Approx(sat).epsilon(1e-12));

    const auto mid = cld_bound(0.0, 1.0, 1.0, 0.5, 1.0, 10.0, p);
    CHECK(mid.kl_term ==
          doctest::Approx(static_cast<double>(
                              oracle::cld_kl_term(1.0L, 1.0L, 0.5L, 1.0L, 10.0L, 1.0L, 2000, 1000, 0.1L)))
              .epsilon(1e-13));

    double prev = -1.0;
    for (double T = 0.5; T < 400.0; T *= 1.7) {
        const double kl = cld_bound(0.0, 1.0, 1.0, 0.5, 1.0, T, p).kl_term;
        CHECK(kl > prev);
        prev = kl;
    }
    CHECK_THROWS_AS(cld_bound(0.0, 0.0, 1.0, 0.5, 1.0, 1.0, p), std::domain_error);
    CHECK_THROWS_AS(cld_bound(0.0, 1.0, -1.0, 0.5, 1.0, 1.0, p), std::domain_error);
    CHECK_THROWS_AS(cld_bound(0.0, 1.0, 1.0, 0.0, 1.0, 1.0, p), std::domain_error);
}

TEST_CASE("rgd_bound shares the fgd shape") {
    CatoniParams p{1.0, 60000, 30000, 0.1};
    // with eps_t == eps, sum_t gamma^2 ||g||^2 / eps^2 equals the fgd weighted sum
    const double eps = 0.05;
    const double gamma_sq_sum = 5.0 * eps * eps;  // so the fgd-style weighted sum is 5.0
    const auto r = rgd_bound(0.02, gamma_sq_sum, eps, 1e-6, 1000000, 1000, p);
    const auto f = fgd_bound(0.02, 5.0, 1000000, 1000, p);
    CHECK(r.kl_term == doctest::Approx(f.kl_term).epsilon(1e-12));
    CHECK(r.confidence_term == f.confidence_term);

    const auto half_eps = rgd_bound(0.02, gamma_sq_sum, eps / 2.0, 1e-6, 1000000, 1000, p);
    CHECK(half_eps.kl_term == doctest::Approx(4.0 * r.kl_term).epsilon(1e-12));

    CHECK(rgd_bound(0.0, 0.0, 0.5, 0.1, 100, 10, p).total ==
          rgd_bound(0.0, 0.0, 0.5, 0.1, 100, 10, p).confidence_term);
    CHECK_THROWS_AS(rgd_bound(0.0, 1.0, 1.5, 0.1, 100, 10, p), std::domain_error);
    CHECK_THROWS_AS(rgd_bound(0.0, 1.0, 0.5, 0.5, 100, 10, p), std::domain_error);
}

TEST_CASE("every bound is monotone in emp, sum and 1/delta") {
    CatoniParams lo{1.0, 2000, 1000, 0.2}, hi{1.0, 2000, 1000, 0.1};
    auto mono = [&](auto&& eval) {
        CHECK(eval(0.1, 1.0, lo) <= eval(0.2, 1.0, lo));
        CHECK(eval(0.1, 1.0, lo) <= eval(0.1, 2.0, lo));
        CHECK(eval(0.1, 1.0, lo) <= eval(0.1, 1.0, hi));
    };
    mono([](double e, double s, const CatoniParams& p) { return data_pac_bound(s, e, p).total; });
    mono([](double e, double s, const CatoniParams& p) { return fgd_bound(e, s, 100, 50, p).total; });
    mono([](double e, double s, const CatoniParams& p) { return gld_bound(e, s, p).total; });
    mono([](double e, double s, const CatoniParams& p) { return sgld_bound(e, s, 8, p).total; });
    mono([](double e, double s, const CatoniParams& p) {
        return cld_bound(e, 1.0, 1.0, 0.5, s, 5.0, p).total;
    });
    mono([](double e, double s, const CatoniParams& p) {
        return rgd_bound(e, s, 0.5, 0.01, 100, 50, p).total;
    });
    mono([](double e, double s, const CatoniParams& p) {
        return sgld_bound_subgaussian(e, 1.0, s, 100, 10, p.n, p.m, p.delta).total;
    });
}

TEST_CASE("vacuous flag trips at one") {
    CatoniParams p{1.0, 2000, 1000, 0.1};
    CHECK_FALSE(fgd_bound(0.01, 0.1, 100, 50, p).vacuous());
    CHECK(fgd_bound(0.9, 100.0, 100, 50, p).vacuous());
}

TEST_CASE("printed presets reproduce the appendix formulas term for term") {
    // MNIST: the preset IS the eta = 1 theorem at n - m = 30000, d = 1407370.
    const long d = 1407370, T = 990;
    const auto preset = mnist_fgd_printed(0.011, 0.4, d, T);
    const auto theorem = fgd_bound(0.011, 0.4, d, T, CatoniParams{1.0, 60000, 30000, 0.1});
    CHECK(preset.empirical_term == theorem.empirical_term);
    CHECK(preset.confidence_term == theorem.confidence_term);
    CHECK(preset.kl_term == theorem.kl_term);

    // CIFAR: printed with coefficient 3 and 1/(1-e^{-3}), and no ln(dT)/(n-m)
    // factor on the sum.
    const double c3 = 1.0 / (1.0 - std::exp(-3.0));
    const auto cifar = cifar_fsgd_printed(0.05, 0.02);
    CHECK(cifar.empirical_term == doctest::Approx(c3 * 3.0 * 0.05).epsilon(1e-15));
    CHECK(cifar.confidence_term == doctest::Approx(c3 * (std::log(10.0) + 3.0) / 40000.0).epsilon(1e-15));
    CHECK(cifar.kl_term == doctest::Approx(c3 * 0.02).epsilon(1e-15));
    // emp and confidence terms coincide with the eta = 3 theorem at n - m = 40000
    const auto t3 = fsgd_bound(0.05, 0.02, 100, 50, CatoniParams{3.0, 50000, 10000, 0.1});
    CHECK(cifar.empirical_term == doctest::Approx(t3.empirical_term).epsilon(1e-15));
    CHECK(cifar.confidence_term == doctest::Approx(t3.confidence_term).epsilon(1e-15));

    // appendix GLD restatement
    const auto g = gld_bound_printed(0.1, 2.0, 3.0, 2000, 1000, 0.1);
    CHECK(g.empirical_term == doctest::Approx(5.1 * 0.1).epsilon(1e-15));
    CHECK(g.confidence_term == doctest::Approx(1.01 * std::log(10.0) / 1000.0).epsilon(1e-15));
    CHECK(g.kl_term ==
          doctest::Approx(0.505 * c_delta(0.1) * 4.0 * 3.0 / (1000.0 * 1000.0)).epsilon(1e-15));
}

TEST_CASE("theorem names round trip") {
    for (Theorem t : {Theorem::DataPac, Theorem::Fgd, Theorem::Fsgd, Theorem::Gld, Theorem::Sgld,
                      Theorem::SgldSubg, Theorem::Cld, Theorem::Rgd})
        CHECK(theorem_from_name(theorem_name(t)) == t);
    CHECK_THROWS_AS(theorem_from_name("nope"), std::domain_error);
}
