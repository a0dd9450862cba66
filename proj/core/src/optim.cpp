#include "paccert/optim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "paccert/grid_noise.hpp"
#include "paccert/json_writer.hpp"

namespace paccert::optim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sq_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// grad f(S) assembled from the split parts by linearity; one pass over the
// data instead of a pass over S plus a pass over S_J.
struct SplitGrads {
    std::vector<double> full;   // grad f(W, S)
    std::vector<double> prior;  // grad f(W, S_J)
    std::vector<double> diff;   // full - prior
};

SplitGrads split_grads(const nets::Model& model, std::span<const double> w,
                       const data::Dataset& ds, const data::IndexSplit& split) {
    SplitGrads g;
    const double n = static_cast<double>(split.n);
    const double m = static_cast<double>(split.m());
    auto gi = model.loss_grad(w, ds, split.complement);
    if (split.m() == 0) {
        g.full = std::move(gi.grad);
        g.prior.assign(g.full.size(), 0.0);
        g.diff = g.full;
        return g;
    }
    auto gj = model.loss_grad(w, ds, split.prior);
    g.full.resize(gj.grad.size());
    g.diff.resize(gj.grad.size());
    for (std::size_t k = 0; k < g.full.size(); ++k) {
        g.full[k] = (m * gj.grad[k] + (n - m) * gi.grad[k]) / n;
        g.diff[k] = g.full[k] - gj.grad[k];
    }
    g.prior = std::move(gj.grad);
    return g;
}

double sched_at(const std::vector<double>& v, long t, const char* name) {
    if (t < 1 || t > static_cast<long>(v.size()))
        throw std::domain_error(std::string("schedule: no ") + name + " entry for step " +
                                std::to_string(t));
    return v[t - 1];
}

// W_t = W_{t-1} + alpha (W_{t-1} - W_{t-2}) + delta, then shift the state.
void apply_update(OptimState& st, double alpha, std::span<const double> delta) {
    std::vector<double> next(st.w.size());
    for (std::size_t k = 0; k < st.w.size(); ++k)
        next[k] = st.w[k] + alpha * (st.w[k] - st.w_prev[k]) + delta[k];
    st.w_prev = std::move(st.w);
    st.w = std::move(next);
}

std::vector<long> intersect_with_prior(std::span<const long> batch,
                                       const data::IndexSplit& split) {
    std::vector<char> in_prior(split.n, 0);
    for (long j : split.prior) in_prior[j] = 1;
    std::vector<long> out;
    for (long b : batch)
        if (in_prior[b]) out.push_back(b);
    return out;
}

}  // namespace

const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::Fgd: return "fgd";
        case Algorithm::Fsgd: return "fsgd";
        case Algorithm::Rgd: return "rgd";
        case Algorithm::Gld: return "gld";
        case Algorithm::Sgld: return "sgld";
        case Algorithm::CldEm: return "cld-em";
        case Algorithm::Gd: return "gd";
        case Algorithm::Sgd: return "sgd";
    }
    return "?";
}

Algorithm algorithm_from_name(std::string_view name) {
    if (name == "fgd") return Algorithm::Fgd;
    if (name == "fsgd") return Algorithm::Fsgd;
    if (name == "rgd") return Algorithm::Rgd;
    if (name == "gld") return Algorithm::Gld;
    if (name == "sgld") return Algorithm::Sgld;
    if (name == "cld-em" || name == "cld") return Algorithm::CldEm;
    if (name == "gd") return Algorithm::Gd;
    if (name == "sgd") return Algorithm::Sgd;
    throw std::domain_error("unknown algorithm name: " + std::string(name));
}

std::vector<double> Schedule::constant(long T, double v) { return std::vector<double>(T, v); }

std::vector<double> Schedule::geometric(long T, double v0, double factor, long interval) {
    if (interval < 1) throw std::domain_error("schedule: decay interval must be >= 1");
    std::vector<double> out(T);
    for (long t = 1; t <= T; ++t) out[t - 1] = v0 * std::pow(factor, (t - 1) / interval);
    return out;
}

void Schedule::validate(Algorithm algo) const {
    if (T < 0) throw std::domain_error("schedule: T must be >= 0");
    auto need = [&](const std::vector<double>& v, const char* name) {
        if (static_cast<long>(v.size()) < T)
            throw std::domain_error(std::string("schedule: ") + name + " shorter than T");
        for (long t = 0; t < T; ++t)
            if (!(v[t] > 0.0))
                throw std::domain_error(std::string("schedule: ") + name + " must be positive at step " +
                                        std::to_string(t + 1));
    };
    if (algo != Algorithm::CldEm) need(gamma, "gamma");
    switch (algo) {
        case Algorithm::Fgd:
        case Algorithm::Fsgd:
        case Algorithm::Rgd:
            need(eps, "eps");
            break;
        case Algorithm::Gld:
        case Algorithm::Sgld:
            need(sigma, "sigma");
            break;
        case Algorithm::CldEm:
            if (!(beta > 0.0) || !(lambda_reg > 0.0))
                throw std::domain_error("schedule: CLD needs beta > 0 and lambda_reg > 0");
            break;
        default:
            break;
    }
    if (alpha < 0.0) throw std::domain_error("schedule: momentum must be >= 0");
}

double TrajectoryLog::sum_grad_diff_eps() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.grad_diff_sq_weighted_eps;
    return s;
}
double TrajectoryLog::sum_grad_diff_sigma() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.grad_diff_sq_weighted_sigma;
    return s;
}
double TrajectoryLog::sum_grad_diff_gamma_sq() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.gamma * r.gamma * r.grad_diff_sq;
    return s;
}
double TrajectoryLog::sum_lw_sigma() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.lw_sq_weighted;
    return s;
}
double TrajectoryLog::sum_cld_quad() const {
    double s = 0.0;
    for (const auto& r : steps) s += r.cld_quad;
    return s;
}
long TrajectoryLog::empty_prior_steps() const {
    long c = 0;
    for (const auto& r : steps) c += r.empty_prior_batch;
    return c;
}

StepRecord step_fgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch, long t) {
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const double eps = sched_at(sch.eps, t, "eps");
    if (!(eps > 0.0)) throw std::domain_error("step_fgd: eps must be positive");
    const auto g = split_grads(model, st.w, ds, split);

    std::vector<double> scaled(g.diff.size());
    for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = gamma * g.diff[k] / eps;
    const auto floored = noise::floor_signmag(scaled);

    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k)
        delta[k] = -gamma * g.prior[k] - eps * static_cast<double>(floored[k]);
    apply_update(st, sch.alpha, delta);

    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.eps = eps;
    rec.grad_diff_sq = sq_norm(g.diff);  // the unfloored difference
    rec.grad_diff_sq_weighted_eps = (gamma / eps) * (gamma / eps) * rec.grad_diff_sq;
    return rec;
}

StepRecord step_gd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                   const Schedule& sch, long t) {
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const auto g = model.loss_grad(st.w, ds, nets::full_view(ds.n));
    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = -gamma * g.grad[k];
    apply_update(st, sch.alpha, delta);
    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    return rec;
}

StepRecord step_fsgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                     const data::IndexSplit& split, const Schedule& sch,
                     const data::BatchSpec& batch, long t, Rng& rng) {
    if (batch.mode == data::BatchMode::WithReplacement)
        throw std::invalid_argument("step_fsgd: batch must be without replacement or stratified");
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const double eps = sched_at(sch.eps, t, "eps");
    const auto b = data::sample_batch(split, batch, rng);
    const auto jb = intersect_with_prior(b, split);

    const auto g1 = model.loss_grad(st.w, ds, b);
    std::vector<double> g2(st.w.size(), 0.0);
    bool empty = jb.empty();  // grad over an empty set is defined as zero, flagged
    if (!empty) g2 = model.loss_grad(st.w, ds, jb).grad;

    std::vector<double> diff(st.w.size());
    for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = g1.grad[k] - g2[k];
    std::vector<double> scaled(diff.size());
    for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = gamma * diff[k] / eps;
    const auto floored = noise::floor_signmag(scaled);

    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k)
        delta[k] = -gamma * g2[k] - eps * static_cast<double>(floored[k]);
    apply_update(st, sch.alpha, delta);

    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.eps = eps;
    rec.grad_diff_sq = sq_norm(diff);
    rec.grad_diff_sq_weighted_eps = (gamma / eps) * (gamma / eps) * rec.grad_diff_sq;
    rec.empty_prior_batch = empty;
    return rec;
}

StepRecord step_sgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch,
                    const data::BatchSpec& batch, long t, Rng& rng) {
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const auto b = data::sample_batch(split, batch, rng);
    const auto g = model.loss_grad(st.w, ds, b);
    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k) delta[k] = -gamma * g.grad[k];
    apply_update(st, sch.alpha, delta);
    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    return rec;
}

StepRecord step_rgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch, long t, Rng& rng) {
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const double eps = sched_at(sch.eps, t, "eps");
    if (!(eps > 0.0)) throw std::domain_error("step_rgd: eps must be positive");
    const auto g = split_grads(model, st.w, ds, split);

    std::vector<double> scaled(g.full.size());
    for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = gamma * g.full[k] / eps;
    const auto rounded = noise::round_stochastic(scaled, rng);

    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.eps = eps;
    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k) {
        delta[k] = -eps * static_cast<double>(rounded[k]);
        rec.round_residual_max = std::max(
            rec.round_residual_max, std::abs(gamma * g.full[k] + delta[k]));
    }
    apply_update(st, 0.0, delta);

    rec.grad_diff_sq = sq_norm(g.diff);
    rec.grad_diff_sq_weighted_eps = (gamma / eps) * (gamma / eps) * rec.grad_diff_sq;
    return rec;
}

StepRecord step_gld(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch, long t, Rng& rng) {
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const double sigma = sched_at(sch.sigma, t, "sigma");
    if (!(sigma > 0.0)) throw std::domain_error("step_gld: sigma must be positive");
    const double lw = model.per_example_grad_norm_max(st.w, ds, nets::full_view(ds.n));
    const auto g = split_grads(model, st.w, ds, split);

    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k)
        delta[k] = -gamma * g.full[k] + sigma * rng.normal();
    apply_update(st, 0.0, delta);

    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.sigma = sigma;
    rec.grad_diff_sq = sq_norm(g.diff);
    const double w = (gamma / sigma) * (gamma / sigma);
    rec.grad_diff_sq_weighted_sigma = w * rec.grad_diff_sq;
    rec.lw_sq_weighted = w * lw * lw;
    return rec;
}

StepRecord step_sgld(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                     const data::IndexSplit& split, const Schedule& sch,
                     const data::BatchSpec& batch, long t, Rng& rng) {
    if (batch.mode != data::BatchMode::WithReplacement)
        throw std::invalid_argument("step_sgld: batch mode must be with replacement");
    const double gamma = sched_at(sch.gamma, t, "gamma");
    const double sigma = sched_at(sch.sigma, t, "sigma");
    if (!(sigma > 0.0)) throw std::domain_error("step_sgld: sigma must be positive");
    const double lw = model.per_example_grad_norm_max(st.w, ds, nets::full_view(ds.n));
    const auto g = split_grads(model, st.w, ds, split);  // diagnostics for the certificate
    const auto b = data::sample_batch(split, batch, rng);
    const auto gb = model.loss_grad(st.w, ds, b);

    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k)
        delta[k] = -gamma * gb.grad[k] + sigma * rng.normal();
    apply_update(st, 0.0, delta);

    StepRecord rec;
    rec.t = t;
    rec.gamma = gamma;
    rec.sigma = sigma;
    rec.grad_diff_sq = sq_norm(g.diff);
    const double w = (gamma / sigma) * (gamma / sigma);
    rec.grad_diff_sq_weighted_sigma = w * rec.grad_diff_sq;
    rec.lw_sq_weighted = w * lw * lw;
    return rec;
}

StepRecord step_cld_em(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                       const data::IndexSplit& split, const Schedule& sch, double dt,
                       double c_bound, long t, Rng& rng) {
    if (!(dt > 0.0)) throw std::domain_error("step_cld_em: dt must be positive");
    if (!(sch.beta > 0.0) || !(sch.lambda_reg > 0.0))
        throw std::domain_error("step_cld_em: beta and lambda_reg must be positive");
    const double lw = model.per_example_grad_norm_max(st.w, ds, nets::full_view(ds.n));
    const auto g = split_grads(model, st.w, ds, split);

    const double noise_scale = std::sqrt(2.0 * dt / sch.beta);
    std::vector<double> delta(st.w.size());
    for (std::size_t k = 0; k < delta.size(); ++k)
        delta[k] = -(g.full[k] + sch.lambda_reg * st.w[k]) * dt + noise_scale * rng.normal();
    apply_update(st, 0.0, delta);

    StepRecord rec;
    rec.t = t;
    rec.sigma = noise_scale;
    rec.grad_diff_sq = sq_norm(g.diff);  // the regularizer cancels in the difference
    const double horizon = static_cast<double>(sch.T) * dt;
    const double quad_alpha = sch.lambda_reg / std::exp(8.0 * sch.beta * c_bound);
    rec.cld_quad =
        std::exp(quad_alpha * (static_cast<double>(t - 1) * dt - horizon)) * rec.grad_diff_sq * dt;
    rec.lw_sq_weighted = lw * lw;  // unweighted; CLD has no gamma/sigma schedule
    return rec;
}

std::vector<double> cld_init(long d, double lambda_reg, double beta, Rng& rng) {
    if (!(lambda_reg > 0.0) || !(beta > 0.0))
        throw std::domain_error("cld_init: lambda_reg and beta must be positive");
    const double scale = 1.0 / std::sqrt(lambda_reg * beta);
    std::vector<double> w(d);
    for (double& x : w) x = scale * rng.normal();
    return w;
}

namespace {

RiskPoint eval_risks(const nets::Model& model, std::span<const double> w,
                     const data::Dataset& train, const data::IndexSplit& split,
                     const data::Dataset* test, long step) {
    RiskPoint r;
    r.step = step;
    const auto all = nets::full_view(train.n);
    r.train_S = model.zero_one_risk(w, train, all);
    r.train_I = model.zero_one_risk(w, train, split.complement);
    r.train_J = split.m() > 0 ? model.zero_one_risk(w, train, split.prior) : kNaN;
    r.test = test ? model.zero_one_risk(w, *test, nets::full_view(test->n)) : kNaN;
    return r;
}

}  // namespace

TrajectoryLog run(const nets::Model& model, std::span<const double> w0, const data::Dataset& train,
                  const data::IndexSplit& split, const RunSpec& spec, const data::Dataset* test,
                  std::vector<double>* final_params) {
    spec.schedule.validate(spec.algo);
    if (split.n != train.n) throw std::invalid_argument("run: split and dataset disagree on n");
    split.validate();

    Rng rng(spec.opt_seed);
    OptimState st;
    if (spec.algo == Algorithm::CldEm) {
        st.w = cld_init(model.dim(), spec.schedule.lambda_reg, spec.schedule.beta, rng);
    } else {
        if (static_cast<long>(w0.size()) != model.dim())
            throw std::invalid_argument("run: w0 size does not match model dimension");
        st.w.assign(w0.begin(), w0.end());
    }
    st.w_prev = st.w;

    TrajectoryLog log;
    log.algo = spec.algo;
    log.opt_seed = spec.opt_seed;
    log.rng_algorithm = Rng::algorithm();
    log.T = spec.schedule.T;
    log.d = model.dim();
    log.n = split.n;
    log.m = split.m();
    log.batch_size = spec.batch.size;
    if (spec.algo == Algorithm::CldEm) {
        log.cld_dt = spec.cld_dt;
        log.cld_horizon = static_cast<double>(spec.schedule.T) * spec.cld_dt;
        log.cld_c_bound = spec.cld_c_bound;
        log.cld_alpha = spec.schedule.lambda_reg / std::exp(8.0 * spec.schedule.beta * spec.cld_c_bound);
    }
    log.steps.reserve(spec.schedule.T);
    log.risks.push_back(eval_risks(model, st.w, train, split, test, 0));

    for (long t = 1; t <= spec.schedule.T; ++t) {
        try {
            StepRecord rec;
            switch (spec.algo) {
                case Algorithm::Fgd: rec = step_fgd(st, model, train, split, spec.schedule, t); break;
                case Algorithm::Gd: rec = step_gd(st, model, train, spec.schedule, t); break;
                case Algorithm::Fsgd:
                    rec = step_fsgd(st, model, train, split, spec.schedule, spec.batch, t, rng);
                    break;
                case Algorithm::Sgd:
                    rec = step_sgd(st, model, train, split, spec.schedule, spec.batch, t, rng);
                    break;
                case Algorithm::Rgd:
                    rec = step_rgd(st, model, train, split, spec.schedule, t, rng);
                    break;
                case Algorithm::Gld:
                    rec = step_gld(st, model, train, split, spec.schedule, t, rng);
                    break;
                case Algorithm::Sgld:
                    rec = step_sgld(st, model, train, split, spec.schedule, spec.batch, t, rng);
                    break;
                case Algorithm::CldEm:
                    rec = step_cld_em(st, model, train, split, spec.schedule, spec.cld_dt,
                                      spec.cld_c_bound, t, rng);
                    break;
            }
            if (rec.sigma > 0.0 && rec.gamma > 0.0)
                log.schedule_sum_sigma += (rec.gamma / rec.sigma) * (rec.gamma / rec.sigma);
            log.steps.push_back(rec);
            if (spec.log_snapshots) log.snapshots.push_back(st.w);
        } catch (const std::exception& e) {
            throw std::runtime_error("run: step " + std::to_string(t) + ": " + e.what());
        }
        if (spec.risk_cadence > 0 && t % spec.risk_cadence == 0 && t != spec.schedule.T)
            log.risks.push_back(eval_risks(model, st.w, train, split, test, t));
    }

    if (spec.schedule.T > 0)
        log.risks.push_back(eval_risks(model, st.w, train, split, test, spec.schedule.T));
    log.final_risks = log.risks.back();
    for (const auto& r : log.steps)
        if (r.lw_sq_weighted > 0.0 && r.sigma > 0.0 && r.gamma > 0.0)
            log.grad_sup = std::max(log.grad_sup, r.sigma / r.gamma * std::sqrt(r.lw_sq_weighted));
    if (spec.algo == Algorithm::CldEm)
        for (const auto& r : log.steps) log.grad_sup = std::max(log.grad_sup, std::sqrt(r.lw_sq_weighted));
    if (final_params) *final_params = st.w;
    return log;
}

void TrajectoryLog::write_csv(std::ostream& out, std::string_view config_digest) const {
    if (!config_digest.empty()) out << "# config_digest=" << config_digest << "\n";
    out << "step,gamma,eps,sigma,grad_diff_sq,grad_diff_w_eps,grad_diff_w_sigma,lw_sq_weighted,"
           "cld_quad,empty_prior,risk_train_S,risk_train_I,risk_train_J,risk_test\n";
    auto fmt = [&](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    auto risk_at = [&](long step) -> const RiskPoint* {
        for (const auto& r : risks)
            if (r.step == step) return &r;
        return nullptr;
    };
    auto risk_cols = [&](const RiskPoint* r) {
        for (double v : {r ? r->train_S : kNaN, r ? r->train_I : kNaN, r ? r->train_J : kNaN,
                         r ? r->test : kNaN}) {
            out << ',';
            if (!std::isnan(v)) fmt(v);
        }
    };
    // step 0 carries only the initial risks
    out << "0,,,,,,,,,";
    risk_cols(risk_at(0));
    out << "\n";
    for (const auto& s : steps) {
        out << s.t << ',';
        fmt(s.gamma);
        out << ',';
        fmt(s.eps);
        out << ',';
        fmt(s.sigma);
        out << ',';
        fmt(s.grad_diff_sq);
        out << ',';
        fmt(s.grad_diff_sq_weighted_eps);
        out << ',';
        fmt(s.grad_diff_sq_weighted_sigma);
        out << ',';
        fmt(s.lw_sq_weighted);
        out << ',';
        fmt(s.cld_quad);
        out << ',' << (s.empty_prior_batch ? 1 : 0);
        risk_cols(risk_at(s.t));
        out << "\n";
    }
}

void TrajectoryLog::write_summary_json(std::ostream& out, std::string_view config_digest) const {
    JsonWriter w(out);
    w.begin_object();
    w.kv("schema", "paccert-trajectory-v1");
    w.kv("algorithm", algorithm_name(algo));
    w.kv("seed", static_cast<std::uint64_t>(opt_seed));
    w.kv("rng", rng_algorithm);
    w.kv("T", T);
    w.kv("d", d);
    w.kv("n", n);
    w.kv("m", m);
    w.kv("batch_size", batch_size);
    w.key("sums").begin_object();
    w.kv("grad_diff_weighted_eps", sum_grad_diff_eps());
    w.kv("grad_diff_weighted_sigma", sum_grad_diff_sigma());
    w.kv("grad_diff_gamma_sq", sum_grad_diff_gamma_sq());
    w.kv("lw_weighted_sigma", sum_lw_sigma());
    w.kv("cld_quad", sum_cld_quad());
    w.kv("schedule_sigma", schedule_sum_sigma);
    w.end_object();
    w.kv("grad_sup", grad_sup);
    w.kv("empty_prior_steps", empty_prior_steps());
    double eps_const = steps.empty() ? 0.0 : steps.front().eps;
    for (const auto& r : steps)
        if (r.eps != eps_const) eps_const = 0.0;
    w.kv("eps_const", eps_const);
    if (algo == Algorithm::CldEm) {
        w.key("cld").begin_object();
        w.kv("dt", cld_dt);
        w.kv("horizon", cld_horizon);
        w.kv("alpha", cld_alpha);
        w.kv("c_bound", cld_c_bound);
        w.end_object();
    }
    auto risk_obj = [&](const RiskPoint& r) {
        w.begin_object();
        w.kv("step", r.step);
        w.kv("train_S", r.train_S);
        w.kv("train_I", r.train_I);
        w.kv("train_J", r.train_J);
        w.kv("test", r.test);
        w.end_object();
    };
    w.key("initial_risks");
    risk_obj(risks.front());
    w.key("final_risks");
    risk_obj(final_risks);
    w.kv("config_digest", config_digest);
    w.end_object();
    out << "\n";
}

}  // namespace paccert::optim
