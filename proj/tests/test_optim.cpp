#include <doctest.h>

#include <cmath>
#include <sstream>

#include "paccert/optim.hpp"
#include "support/toy_models.hpp"

using namespace paccert;
using namespace paccert::optim;

namespace {

Schedule make_schedule(long T, double gamma, double eps, double sigma) {
    Schedule s;
    s.T = T;
    s.gamma = Schedule::constant(T, gamma);
    if (eps > 0) s.eps = Schedule::constant(T, eps);
    if (sigma > 0) s.sigma = Schedule::constant(T, sigma);
    return s;
}

}  // namespace

TEST_CASE("fgd hand-traced single step") {
    // grad f(0, z) = -z; S = {-0.30, -1.24} gives grad f(S) = 0.77 and
    // grad f(S_J) = 0.30 with J = {0}; eps = 0.2 floors 2.35 to 2.
    const std::vector<std::vector<double>> rows = {{-0.30}, {-1.24}};
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(1);
    data::IndexSplit split;
    split.n = 2;
    split.prior = {0};
    split.complement = {1};
    OptimState st{{0.0}, {0.0}};
    const auto sch = make_schedule(1, 1.0, 0.2, 0.0);
    const auto rec = step_fgd(st, model, ds, split, sch, 1);
    CHECK(st.w[0] == doctest::Approx(-0.70).epsilon(1e-12));
    CHECK(rec.grad_diff_sq == doctest::Approx(0.47 * 0.47).epsilon(1e-12));
    CHECK(rec.grad_diff_sq_weighted_eps ==
          doctest::Approx((1.0 / 0.2) * (1.0 / 0.2) * 0.47 * 0.47).epsilon(1e-12));
}

TEST_CASE("fgd with huge eps degenerates to prior-only steps") {
    const std::vector<std::vector<double>> rows = {{1.0}, {3.0}};
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(1);
    data::IndexSplit split;
    split.n = 2;
    split.prior = {0};
    split.complement = {1};
    OptimState st{{0.0}, {0.0}};
    const auto sch = make_schedule(1, 0.1, 100.0, 0.0);
    step_fgd(st, model, ds, split, sch, 1);
    // prior-only: w1 = -gamma * (0 - 1) = 0.1
    CHECK(st.w[0] == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("fgd converges to gd as eps -> 0 and is bit-deterministic") {
    Rng gen(3);
    const long d = 5, n = 20, T = 100;
    std::vector<std::vector<double>> rows(n, std::vector<double>(d));
    for (auto& r : rows)
        for (double& x : r) x = gen.normal();
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(d);
    const auto split = data::sample_prior_indices(n, 10, 5);

    const auto sch_f = make_schedule(T, 0.1, 1e-9, 0.0);
    OptimState fgd{std::vector<double>(d, 0.5), std::vector<double>(d, 0.5)};
    OptimState fgd2 = fgd;
    OptimState gd = fgd;
    for (long t = 1; t <= T; ++t) {
        step_fgd(fgd, model, ds, split, sch_f, t);
        step_fgd(fgd2, model, ds, split, sch_f, t);
        step_gd(gd, model, ds, sch_f, t);
    }
    CHECK(fgd.w == fgd2.w);  // bit-identical reruns
    double dist = 0.0;
    for (long k = 0; k < d; ++k) dist = std::max(dist, std::abs(fgd.w[k] - gd.w[k]));
    CHECK(dist <= 1e-6);
}

TEST_CASE("momentum follows the hand recursion with zero initial velocity") {
    // duplicate data makes the gradient difference vanish, so the floored
    // term is exactly zero and FGD reduces to momentum descent on S_J
    const std::vector<std::vector<double>> rows = {{1.0}, {1.0}};
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(1);
    data::IndexSplit split;
    split.n = 2;
    split.prior = {0};
    split.complement = {1};
    auto sch = make_schedule(3, 0.1, 7.0, 0.0);
    sch.alpha = 0.5;

    OptimState fgd{{0.0}, {0.0}}, gd{{0.0}, {0.0}};
    double w = 0.0, w_prev = 0.0;  // reference recursion
    for (long t = 1; t <= 3; ++t) {
        step_fgd(fgd, model, ds, split, sch, t);
        step_gd(gd, model, ds, sch, t);
        const double next = w + 0.5 * (w - w_prev) - 0.1 * (w - 1.0);
        w_prev = w;
        w = next;
        CHECK(fgd.w[0] == doctest::Approx(w).epsilon(1e-14));
        CHECK(gd.w[0] == doctest::Approx(w).epsilon(1e-14));
    }
    CHECK(w == doctest::Approx(0.386).epsilon(1e-12));
}

TEST_CASE("fsgd full-batch reduces to fgd quantities") {
    const auto ds = data::synth_blobs(40, 2, 2, 3.0, 8);
    nets::SoftmaxNet model({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2});
    const auto split = data::sample_prior_indices(40, 20, 9);
    const auto w0 = nets::init_params(model.arch(), 1);
    const auto sch = make_schedule(1, 0.2, 0.05, 0.0);

    OptimState a{w0, w0}, b{w0, w0};
    const auto rec_f = step_fgd(a, model, ds, split, sch, 1);
    Rng rng(4);
    const auto rec_s = step_fsgd(b, model, ds, split, sch,
                                 data::BatchSpec{40, data::BatchMode::WithoutReplacement, 0, 0}, 1,
                                 rng);
    CHECK(rec_s.grad_diff_sq == doctest::Approx(rec_f.grad_diff_sq).epsilon(1e-12));
    CHECK_FALSE(rec_s.empty_prior_batch);
}

TEST_CASE("fsgd stratified sampling avoids empty intersections; tiny priors get flagged") {
    const auto ds = data::synth_blobs(50, 2, 2, 3.0, 18);
    nets::SoftmaxNet model({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2});
    const auto w0 = nets::init_params(model.arch(), 2);
    const auto sch = make_schedule(200, 0.1, 0.05, 0.0);

    const auto split = data::sample_prior_indices(50, 25, 3);
    Rng rng(5);
    OptimState st{w0, w0};
    for (long t = 1; t <= 50; ++t) {
        const auto rec = step_fsgd(st, model, ds, split, sch,
                                   data::BatchSpec{10, data::BatchMode::StratifiedIJ, 5, 5}, t, rng);
        CHECK_FALSE(rec.empty_prior_batch);
    }

    // a batch drawn entirely from I misses J by construction: flagged, g2 = 0
    const auto tiny = data::sample_prior_indices(50, 1, 3);
    OptimState st2{w0, w0};
    const auto rec_empty =
        step_fsgd(st2, model, ds, tiny, sch,
                  data::BatchSpec{4, data::BatchMode::StratifiedIJ, 4, 0}, 1, rng);
    CHECK(rec_empty.empty_prior_batch);

    Rng r2(6);
    OptimState st3{w0, w0};
    CHECK_THROWS_AS(step_fsgd(st3, model, ds, split, sch,
                              data::BatchSpec{5, data::BatchMode::WithReplacement, 0, 0}, 1, r2),
                    std::invalid_argument);
}

TEST_CASE("rgd single-step expectation matches the fair coin") {
    const std::vector<std::vector<double>> rows = {{-0.47}};  // grad at w=0 is 0.47
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(1);
    data::IndexSplit split;
    split.n = 1;
    split.prior = {};
    split.complement = {0};
    const auto sch = make_schedule(1, 1.0, 0.2, 0.0);

    // E[W1] = -eps (floor(gamma g / eps) + 1/2) = -0.2 (2 + 0.5) = -0.5
    Rng rng(77);
    double mean = 0.0;
    const long trials = 100000;
    for (long t = 0; t < trials; ++t) {
        OptimState st{{0.0}, {0.0}};
        const auto rec = step_rgd(st, model, ds, split, sch, 1, rng);
        mean += st.w[0];
        CHECK(rec.round_residual_max < 0.2 + 1e-12);
    }
    mean /= trials;
    const double sigma = 0.2 * 0.5 / std::sqrt(static_cast<double>(trials));
    CHECK(std::abs(mean - (-0.5)) <= 4.0 * sigma);

    Rng a(42), b(42);
    OptimState s1{{0.0}, {0.0}}, s2{{0.0}, {0.0}};
    step_rgd(s1, model, ds, split, sch, 1, a);
    step_rgd(s2, model, ds, split, sch, 1, b);
    CHECK(s1.w == s2.w);
}

TEST_CASE("gld recovers gd in the small-noise limit and logs the gaussian kl") {
    const auto ds = data::synth_blobs(30, 2, 2, 3.0, 21);
    nets::SoftmaxNet model({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2});
    const auto split = data::sample_prior_indices(30, 15, 2);
    const auto w0 = nets::init_params(model.arch(), 3);

    const auto sch = make_schedule(50, 0.1, 0.0, 1e-12);
    Rng rng(9);
    OptimState gld{w0, w0}, gd{w0, w0};
    for (long t = 1; t <= 50; ++t) {
        step_gld(gld, model, ds, split, sch, t, rng);
        step_gd(gd, model, ds, sch, t);
    }
    for (std::size_t k = 0; k < gld.w.size(); ++k) CHECK(std::abs(gld.w[k] - gd.w[k]) <= 1e-9);

    // per-step Gaussian KL = gamma^2 ||ddiff||^2 / (2 sigma^2) = logged/2
    const auto sch2 = make_schedule(1, 0.3, 0.0, 0.7);
    OptimState st{w0, w0};
    Rng rng2(11);
    const auto rec = step_gld(st, model, ds, split, sch2, 1, rng2);
    const auto all = nets::full_view(ds.n);
    const auto gs = model.loss_grad(w0, ds, all);
    const auto gj = model.loss_grad(w0, ds, split.prior);
    double diff_sq = 0.0;
    for (std::size_t k = 0; k < gs.grad.size(); ++k)
        diff_sq += (gs.grad[k] - gj.grad[k]) * (gs.grad[k] - gj.grad[k]);
    CHECK(rec.grad_diff_sq_weighted_sigma / 2.0 ==
          doctest::Approx(0.3 * 0.3 * diff_sq / (2.0 * 0.7 * 0.7)).epsilon(1e-9));
}

TEST_CASE("gld noise-only variance matches the schedule") {
    toy::ZeroModel model(4);
    const std::vector<std::vector<double>> rows = {{0.0, 0.0, 0.0, 0.0}};
    const auto ds = toy::vector_dataset(rows);
    data::IndexSplit split;
    split.n = 1;
    split.complement = {0};
    const long T = 8;
    const auto sch = make_schedule(T, 1.0, 0.0, 0.5);

    const long reps = 20000;
    Rng rng(31);
    double var_acc = 0.0;
    for (long r = 0; r < reps; ++r) {
        OptimState st{std::vector<double>(4, 0.0), std::vector<double>(4, 0.0)};
        for (long t = 1; t <= T; ++t) step_gld(st, model, ds, split, sch, t, rng);
        for (double w : st.w) var_acc += w * w;
    }
    const double sample_var = var_acc / (4.0 * reps);
    const double expect = T * 0.25;  // sum sigma_t^2
    // chi-square 4 sigma band for the variance estimate
    CHECK(std::abs(sample_var - expect) <=
          4.0 * expect * std::sqrt(2.0 / (4.0 * static_cast<double>(reps))));
}

TEST_CASE("sgld batch gradient is unbiased and modes are enforced") {
    const auto ds = data::synth_blobs(40, 2, 2, 3.0, 51);
    nets::SoftmaxNet model({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2});
    const auto split = data::sample_prior_indices(40, 20, 4);
    const auto w0 = nets::init_params(model.arch(), 6);
    const auto all = nets::full_view(ds.n);
    const auto gs = model.loss_grad(w0, ds, all);

    Rng rng(13);
    std::vector<double> mean(gs.grad.size(), 0.0);
    const long draws = 10000;
    for (long i = 0; i < draws; ++i) {
        const auto b = data::sample_batch(split, {8, data::BatchMode::WithReplacement, 0, 0}, rng);
        const auto gb = model.loss_grad(w0, ds, b);
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += gb.grad[k];
    }
    for (std::size_t k = 0; k < mean.size(); ++k) {
        mean[k] /= draws;
        CHECK(std::abs(mean[k] - gs.grad[k]) <= 4.0 * 1.0 / std::sqrt(8.0 * draws) + 1e-3);
    }

    const auto sch = make_schedule(1, 0.1, 0.0, 0.5);
    OptimState st{w0, w0};
    CHECK_THROWS_AS(step_sgld(st, model, ds, split, sch,
                              data::BatchSpec{8, data::BatchMode::WithoutReplacement, 0, 0}, 1, rng),
                    std::invalid_argument);

    Rng a(21), b2(21);
    OptimState s1{w0, w0}, s2{w0, w0};
    step_sgld(s1, model, ds, split, sch, {8, data::BatchMode::WithReplacement, 0, 0}, 1, a);
    step_sgld(s2, model, ds, split, sch, {8, data::BatchMode::WithReplacement, 0, 0}, 1, b2);
    CHECK(s1.w == s2.w);
}

TEST_CASE("cld euler-maruyama: OU stationary variance and init distribution") {
    toy::ZeroModel model(1);
    const std::vector<std::vector<double>> rows = {{0.0}};
    const auto ds = toy::vector_dataset(rows);
    data::IndexSplit split;
    split.n = 1;
    split.complement = {0};

    const double lambda = 1.0, beta = 2.0, dt = 0.01;
    Schedule sch;
    sch.T = 400;
    sch.beta = beta;
    sch.lambda_reg = lambda;

    // W_0 drawn from the stationary law; the EM chain stays near it
    Rng rng(71);
    const long reps = 4000;
    double acc = 0.0;
    for (long r = 0; r < reps; ++r) {
        OptimState st;
        st.w = cld_init(1, lambda, beta, rng);
        st.w_prev = st.w;
        for (long t = 1; t <= sch.T; ++t)
            step_cld_em(st, model, ds, split, sch, dt, 0.5, t, rng);
        acc += st.w[0] * st.w[0];
    }
    const double var = acc / reps;
    const double expect = 1.0 / (lambda * beta);
    // EM bias factor 2/(2 - lambda dt) ~ 1.005 sits well inside the 4 sigma band
    CHECK(std::abs(var - expect) <= 4.0 * expect * std::sqrt(2.0 / reps) + 0.01 * expect);

    Rng rng2(72);
    double init_acc = 0.0;
    for (long r = 0; r < 20000; ++r) {
        const auto w = cld_init(1, lambda, beta, rng2);
        init_acc += w[0] * w[0];
    }
    CHECK(std::abs(init_acc / 20000 - expect) <= 4.0 * expect * std::sqrt(2.0 / 20000));
}

TEST_CASE("cld weak order: halving dt moves the endpoint mean by O(dt)") {
    // quadratic drift toward z = 1 plus the l2 pull; deterministic part is a
    // linear contraction, so E[W_T] has a closed form per resolution
    const std::vector<std::vector<double>> rows = {{1.0}};
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(1);
    data::IndexSplit split;
    split.n = 1;
    split.complement = {0};

    auto endpoint_mean = [&](double dt, long steps, std::uint64_t seed) {
        Schedule sch;
        sch.T = steps;
        sch.beta = 4.0;
        sch.lambda_reg = 1.0;
        Rng rng(seed);
        const long reps = 4000;
        double acc = 0.0;
        for (long r = 0; r < reps; ++r) {
            OptimState st{{0.0}, {0.0}};
            for (long t = 1; t <= steps; ++t)
                step_cld_em(st, model, ds, split, sch, dt, 0.5, t, rng);
            acc += st.w[0];
        }
        return acc / reps;
    };
    const double horizon = 1.0;
    const double m1 = endpoint_mean(0.1, static_cast<long>(horizon / 0.1), 5);
    const double m2 = endpoint_mean(0.05, static_cast<long>(horizon / 0.05), 6);
    // exact continuous mean: drift dW = -(2W - 1)dt from w0 = 0 -> 0.5(1 - e^{-2T})
    const double exact = 0.5 * (1.0 - std::exp(-2.0 * horizon));
    const double mc_noise = 4.0 * std::sqrt(1.0 / 8.0 / 4000.0);
    CHECK(std::abs(m1 - exact) <= 0.2 * 0.1 + mc_noise);
    CHECK(std::abs(m2 - exact) <= 0.2 * 0.05 + mc_noise);

    Schedule bad;
    bad.T = 1;
    bad.beta = 0.0;
    bad.lambda_reg = 1.0;
    OptimState st{{0.0}, {0.0}};
    Rng rng(1);
    CHECK_THROWS_AS(step_cld_em(st, model, ds, split, bad, 0.1, 0.5, 1, rng), std::domain_error);
}

TEST_CASE("run orchestration") {
    const auto ds = data::synth_blobs(400, 2, 2, 4.0, 61);
    const auto split = data::sample_prior_indices(400, 200, 62);
    nets::SoftmaxNet model({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2});
    const auto w0 = nets::init_params(model.arch(), 63);

    SUBCASE("T = 0 logs only the initial risks") {
        RunSpec spec;
        spec.algo = Algorithm::Fgd;
        spec.schedule = make_schedule(0, 0.1, 0.05, 0.0);
        const auto log = run(model, w0, ds, split, spec);
        CHECK(log.steps.empty());
        CHECK(log.risks.size() == 1);
        CHECK(log.final_risks.step == 0);
    }

    SUBCASE("fgd on separable blobs trains below 5% at gamma = 0.1") {
        RunSpec spec;
        spec.algo = Algorithm::Fgd;
        spec.schedule = make_schedule(500, 0.1, 0.05, 0.0);
        spec.risk_cadence = 100;
        const auto log = run(model, w0, ds, split, spec);
        CHECK(log.final_risks.train_S <= 0.05);
        CHECK(log.T == 500);
        CHECK(static_cast<long>(log.steps.size()) == 500);
        // weighted sums are non-negative and additive over step ranges
        double manual = 0.0;
        for (const auto& s : log.steps) {
            CHECK(s.grad_diff_sq_weighted_eps >= 0.0);
            manual += s.grad_diff_sq_weighted_eps;
        }
        CHECK(manual == doctest::Approx(log.sum_grad_diff_eps()));
    }

    SUBCASE("snapshots are captured when requested") {
        RunSpec spec;
        spec.algo = Algorithm::Fgd;
        spec.schedule = make_schedule(5, 0.1, 0.05, 0.0);
        spec.log_snapshots = true;
        std::vector<double> final_params;
        const auto log = run(model, w0, ds, split, spec, nullptr, &final_params);
        REQUIRE(log.snapshots.size() == 5);
        CHECK(log.snapshots.back() == final_params);
    }

    SUBCASE("step errors carry the step index") {
        RunSpec spec;
        spec.algo = Algorithm::Sgld;
        spec.schedule = make_schedule(3, 0.1, 0.0, 0.5);
        spec.batch = {8, data::BatchMode::WithoutReplacement, 0, 0};  // wrong mode
        try {
            run(model, w0, ds, split, spec);
            CHECK(false);
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()).find("step 1") != std::string::npos);
        }
    }
}

TEST_CASE("decaying learning rate keeps the gld weighted sum bounded") {
    Rng gen(81);
    std::vector<std::vector<double>> rows(10, std::vector<double>(2));
    for (auto& r : rows)
        for (double& x : r) x = gen.normal();
    const auto ds = toy::vector_dataset(rows);
    toy::QuadraticModel model(2);
    data::IndexSplit split;
    split.n = 10;
    for (long i = 0; i < 5; ++i) split.prior.push_back(i);
    for (long i = 5; i < 10; ++i) split.complement.push_back(i);

    const double c = 0.5, sigma = 1.0;
    double prev_sum = 0.0;
    double grad_sup = 0.0;
    for (long T : {100L, 1000L, 10000L}) {
        Schedule sch;
        sch.T = T;
        sch.sigma = Schedule::constant(T, sigma);
        sch.gamma.resize(T);
        for (long t = 1; t <= T; ++t) sch.gamma[t - 1] = c / static_cast<double>(t);
        RunSpec spec;
        spec.algo = Algorithm::Gld;
        spec.schedule = sch;
        spec.opt_seed = 7;
        const auto log = run(model, {std::vector<double>(2, 0.0)}, ds, split, spec);
        const double sum = log.sum_lw_sigma();
        CHECK(sum >= prev_sum);
        prev_sum = sum;
        grad_sup = std::max(grad_sup, log.grad_sup);
        // analytic tail: sum <= L_max^2 (c/sigma)^2 sum 1/t^2 < L_max^2 (c/sigma)^2 pi^2/6
        CHECK(sum <= grad_sup * grad_sup * (c / sigma) * (c / sigma) * 1.6449340668482264 + 1e-9);
    }
}

TEST_CASE("trajectory csv column order is pinned") {
    const auto ds = data::synth_blobs(20, 2, 2, 3.0, 91);
    const auto split = data::sample_prior_indices(20, 10, 92);
    nets::SoftmaxNet model({nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2});
    const auto w0 = nets::init_params(model.arch(), 93);
    RunSpec spec;
    spec.algo = Algorithm::Fgd;
    spec.schedule = make_schedule(2, 0.1, 0.05, 0.0);
    const auto log = run(model, w0, ds, split, spec);

    std::ostringstream a, b;
    log.write_csv(a);
    log.write_csv(b);
    CHECK(a.str() == b.str());
    CHECK(a.str().substr(0, a.str().find('\n')) ==
          "step,gamma,eps,sigma,grad_diff_sq,grad_diff_w_eps,grad_diff_w_sigma,lw_sq_weighted,"
          "cld_quad,empty_prior,risk_train_S,risk_train_I,risk_train_J,risk_test");
    // 1 header + 1 initial-risk row + T step rows
    long lines = 0;
    for (char ch : a.str()) lines += (ch == '\n');
    CHECK(lines == 2 + 2);

    std::ostringstream js;
    log.write_summary_json(js, "digest123");
    CHECK(js.str().find("\"schema\":\"paccert-trajectory-v1\"") != std::string::npos);
    CHECK(js.str().find("digest123") != std::string::npos);

    std::ostringstream with_digest;
    log.write_csv(with_digest, "digest123");
    CHECK(with_digest.str().rfind("# config_digest=digest123\n", 0) == 0);
}

TEST_CASE("algorithm names round trip") {
    for (Algorithm a : {Algorithm::Fgd, Algorithm::Fsgd, Algorithm::Rgd, Algorithm::Gld,
                        Algorithm::Sgld, Algorithm::CldEm, Algorithm::Gd, Algorithm::Sgd})
        CHECK(algorithm_from_name(algorithm_name(a)) == a);
}
