#include "paccert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "paccert/grid_noise.hpp"

#include "paccert/errors.hpp"
#include "paccert/json_writer.hpp"

namespace paccert::certify {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return Rng(base).split(a).split(b).base_seed();
}

void require(bool ok, const std::string& field) {
    if (!ok) throw std::invalid_argument("certify: trajectory is missing " + field);
}

bool has_eps_weighted(const optim::TrajectoryLog& log) {
    for (const auto& s : log.steps)
        if (s.eps > 0.0) return true;
    return log.steps.empty();  // a T = 0 log degenerately has a zero sum
}

bool has_sigma_weighted(const optim::TrajectoryLog& log) {
    for (const auto& s : log.steps)
        if (s.sigma > 0.0 && s.gamma > 0.0) return true;
    return log.steps.empty();
}

// Mean/stdev over a sample (population std for k = 1 is 0).
std::pair<double, double> mean_std(std::span<const double> xs) {
    if (xs.empty()) return {kNaN, kNaN};
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    if (xs.size() == 1) return {mean, 0.0};
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return {mean, std::sqrt(var)};
}

// Fan tasks out over a few threads; each slot is written exactly once, so
// aggregation stays deterministic regardless of scheduling.
void parallel_tasks(long count, const std::function<void(long)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) fn(i);
        return;
    }
    const unsigned workers = std::min<unsigned>(hw, static_cast<unsigned>(count));
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&, w] {
            for (long i = w; i < count; i += workers) fn(i);
        });
    for (auto& t : pool) t.join();
}

}  // namespace

bounds::BoundBreakdown BoundReport::reevaluate() const {
    bounds::CatoniParams p{eta, n, m, delta};
    switch (theorem) {
        case bounds::Theorem::DataPac: return bounds::data_pac_bound(extra_kl, train_I, p);
        case bounds::Theorem::Fgd: return bounds::fgd_bound(train_I, sum_used, d, T, p);
        case bounds::Theorem::Fsgd: return bounds::fsgd_bound(train_I, sum_used, d, T, p);
        case bounds::Theorem::Gld: return bounds::gld_bound(train_I, sum_used, p);
        case bounds::Theorem::Sgld: return bounds::sgld_bound(train_I, sum_used, batch_size, p);
        case bounds::Theorem::SgldSubg:
            return bounds::sgld_bound_subgaussian(train_I, extra_grad_sup, sum_used, T, d, n, m,
                                                  delta);
        case bounds::Theorem::Cld:
            return bounds::cld_bound(train_I, extra_beta, extra_lambda, extra_c_bound,
                                     extra_lipschitz, cld_horizon, p);
        case bounds::Theorem::Rgd:
            return bounds::rgd_bound(train_I, sum_used, extra_eps, extra_grid_p, d, T, p);
    }
    throw std::logic_error("reevaluate: unknown theorem");
}

BoundReport certify(const optim::TrajectoryLog& log, bounds::Theorem theorem,
                    const bounds::CatoniParams& params, const CertifyExtras& extras,
                    std::string_view config_digest) {
    params.validate();
    if (params.n != log.n || params.m != log.m)
        throw std::invalid_argument("certify: params (n, m) disagree with the trajectory");

    BoundReport rep;
    rep.theorem = theorem;
    rep.eta = params.eta;
    rep.delta = params.delta;
    rep.n = log.n;
    rep.m = log.m;
    rep.d = log.d;
    rep.T = log.T;
    rep.seed = log.opt_seed;
    rep.rng_algorithm = log.rng_algorithm;
    rep.config_digest = std::string(config_digest);
    rep.sum_provenance = "single-realization";
    rep.train_S = log.final_risks.train_S;
    rep.train_I = log.final_risks.train_I;
    rep.train_J = log.final_risks.train_J;
    rep.test = log.final_risks.test;
    rep.s_vs_si_gap = rep.train_S - rep.train_I;
    require(std::isfinite(rep.train_I), "final_risks.train_I");

    using bounds::Theorem;
    switch (theorem) {
        case Theorem::DataPac:
            rep.extra_kl = extras.kl;
            rep.breakdown = bounds::data_pac_bound(extras.kl, rep.train_I, params);
            break;
        case Theorem::Fgd:
        case Theorem::Fsgd: {
            require(has_eps_weighted(log), "grad_diff_sq_weighted_eps (eps-weighted differences)");
            rep.sum_used = log.sum_grad_diff_eps();
            rep.breakdown = theorem == Theorem::Fgd
                                ? bounds::fgd_bound(rep.train_I, rep.sum_used, log.d, log.T, params)
                                : bounds::fsgd_bound(rep.train_I, rep.sum_used, log.d, log.T, params);
            if (const long k = log.empty_prior_steps(); k > 0)
                rep.note = std::to_string(k) + " steps had empty J.B intersection (g2 := 0)";
            break;
        }
        case Theorem::Gld: {
            require(has_sigma_weighted(log), "lw_sq_weighted (sigma-weighted gradient-norm maxima)");
            rep.sum_used = log.sum_lw_sigma();
            rep.breakdown = bounds::gld_bound(rep.train_I, rep.sum_used, params);
            break;
        }
        case Theorem::Sgld: {
            require(has_sigma_weighted(log), "lw_sq_weighted (sigma-weighted gradient-norm maxima)");
            rep.batch_size = extras.batch > 0 ? extras.batch : log.batch_size;
            require(rep.batch_size > 0, "batch_size");
            rep.sum_used = log.sum_lw_sigma();
            rep.breakdown = bounds::sgld_bound(rep.train_I, rep.sum_used, rep.batch_size, params);
            break;
        }
        case Theorem::SgldSubg: {
            require(has_sigma_weighted(log), "schedule_sum_sigma (gamma/sigma schedule)");
            rep.extra_grad_sup = extras.grad_sup > 0.0 ? extras.grad_sup : log.grad_sup;
            require(rep.extra_grad_sup > 0.0 || log.T == 0, "grad_sup (L0)");
            rep.sum_used = log.schedule_sum_sigma;
            rep.breakdown = bounds::sgld_bound_subgaussian(rep.train_I, rep.extra_grad_sup,
                                                           rep.sum_used, log.T, log.d, log.n,
                                                           log.m, params.delta);
            rep.note = "printed constants 5.1/1.01 imply eta ~= 5.05; eta parameter unused";
            break;
        }
        case Theorem::Cld: {
            require(log.algo == optim::Algorithm::CldEm, "cld quadrature (run cld-em)");
            rep.extra_beta = extras.beta;
            rep.extra_lambda = extras.lambda_reg;
            rep.extra_c_bound = extras.c_bound;
            if (!(rep.extra_beta > 0.0) || !(rep.extra_lambda > 0.0) || !(rep.extra_c_bound > 0.0))
                throw std::invalid_argument("certify: cld needs extras beta, lambda_reg, c_bound");
            rep.extra_lipschitz = extras.lipschitz > 0.0 ? extras.lipschitz : log.grad_sup;
            if (extras.lipschitz <= 0.0)
                rep.note = "L estimated as max per-example gradient norm along the path";
            rep.cld_horizon = log.cld_horizon;
            rep.breakdown = bounds::cld_bound(rep.train_I, rep.extra_beta, rep.extra_lambda,
                                              rep.extra_c_bound, rep.extra_lipschitz,
                                              rep.cld_horizon, params);
            break;
        }
        case Theorem::Rgd: {
            require(has_eps_weighted(log), "grad_diff_sq (gradient differences)");
            double eps = extras.rgd_eps;
            if (eps <= 0.0) {
                for (const auto& s : log.steps) {
                    if (eps <= 0.0) eps = s.eps;
                    if (s.eps != eps)
                        throw std::invalid_argument(
                            "certify: rgd needs a constant eps (or pass extras.rgd_eps)");
                }
            }
            require(eps > 0.0, "eps (rounding grid)");
            rep.extra_eps = eps;
            rep.extra_grid_p =
                extras.grid_p > 0.0 ? extras.grid_p : noise::default_p(log.T, log.d);
            rep.sum_used = log.sum_grad_diff_gamma_sq();
            rep.breakdown = bounds::rgd_bound(rep.train_I, rep.sum_used, eps, rep.extra_grid_p,
                                              log.d, log.T, params);
            break;
        }
    }
    rep.vacuous = rep.breakdown.vacuous();
    return rep;
}

BoundReport certify_averaged(std::span<const optim::TrajectoryLog> logs, bounds::Theorem theorem,
                             const bounds::CatoniParams& params, const CertifyExtras& extras,
                             std::string_view config_digest) {
    if (logs.empty()) throw std::invalid_argument("certify_averaged: no trajectories");
    // Average the per-trajectory sums and risks by certifying a synthetic log
    // whose aggregates are the means.
    optim::TrajectoryLog avg = logs.front();
    const double k = static_cast<double>(logs.size());
    double sum_eps = 0.0, sum_lw = 0.0, sum_gamma_sq = 0.0, sched = 0.0, grad_sup = 0.0;
    double tS = 0.0, tI = 0.0, tJ = 0.0, tt = 0.0;
    for (const auto& log : logs) {
        if (log.n != avg.n || log.m != avg.m || log.T != avg.T || log.d != avg.d ||
            log.algo != avg.algo)
            throw std::invalid_argument("certify_averaged: trajectories disagree on shape");
        sum_eps += log.sum_grad_diff_eps();
        sum_lw += log.sum_lw_sigma();
        sum_gamma_sq += log.sum_grad_diff_gamma_sq();
        sched += log.schedule_sum_sigma;
        grad_sup = std::max(grad_sup, log.grad_sup);
        tS += log.final_risks.train_S;
        tI += log.final_risks.train_I;
        tJ += log.final_risks.train_J;
        tt += log.final_risks.test;
    }
    // The synthetic record mirrors what the source algorithm actually logged,
    // so the missing-quantity contract still holds on averaged certificates.
    const bool eps_family = avg.algo == optim::Algorithm::Fgd ||
                            avg.algo == optim::Algorithm::Fsgd ||
                            avg.algo == optim::Algorithm::Rgd;
    const bool sigma_family =
        avg.algo == optim::Algorithm::Gld || avg.algo == optim::Algorithm::Sgld;
    avg.steps.clear();
    avg.steps.resize(1);
    avg.steps[0].t = 1;
    avg.steps[0].gamma = 1.0;
    if (eps_family) {
        avg.steps[0].eps = 1.0;
        avg.steps[0].grad_diff_sq_weighted_eps = sum_eps / k;
        avg.steps[0].grad_diff_sq = sum_gamma_sq / k;  // gamma = 1 keeps the gamma^2 sum
    }
    if (sigma_family) {
        avg.steps[0].sigma = 1.0;
        avg.steps[0].lw_sq_weighted = sum_lw / k;
    }
    avg.schedule_sum_sigma = sched / k;
    avg.grad_sup = grad_sup;
    avg.final_risks.train_S = tS / k;
    avg.final_risks.train_I = tI / k;
    avg.final_risks.train_J = tJ / k;
    avg.final_risks.test = tt / k;

    CertifyExtras ex = extras;
    if (theorem == bounds::Theorem::Rgd && ex.rgd_eps <= 0.0) {
        for (const auto& s : logs.front().steps)
            if (s.eps > 0.0) {
                ex.rgd_eps = s.eps;
                break;
            }
    }
    BoundReport rep = certify(avg, theorem, params, ex, config_digest);
    rep.sum_provenance = "averaged-over-" + std::to_string(logs.size()) + "-seeds";
    return rep;
}

void BoundReport::write_json(std::ostream& out) const {
    JsonWriter w(out);
    w.begin_object();
    w.kv("schema", "paccert-report-v1");
    w.kv("theorem", bounds::theorem_name(theorem));
    w.key("breakdown").begin_object();
    w.kv("empirical_term", breakdown.empirical_term);
    w.kv("confidence_term", breakdown.confidence_term);
    w.kv("kl_term", breakdown.kl_term);
    w.kv("total", breakdown.total);
    w.end_object();
    w.kv("vacuous", vacuous);
    w.key("inputs").begin_object();
    w.kv("eta", eta);
    w.kv("delta", delta);
    w.kv("n", n);
    w.kv("m", m);
    w.kv("d", d);
    w.kv("T", T);
    w.kv("batch_size", batch_size);
    w.kv("sum_used", sum_used);
    w.kv("kl", extra_kl);
    w.kv("beta", extra_beta);
    w.kv("lambda_reg", extra_lambda);
    w.kv("c_bound", extra_c_bound);
    w.kv("lipschitz", extra_lipschitz);
    w.kv("grad_sup", extra_grad_sup);
    w.kv("eps", extra_eps);
    w.kv("grid_p", extra_grid_p);
    w.kv("cld_horizon", cld_horizon);
    w.end_object();
    w.key("risks").begin_object();
    w.kv("train_S", train_S);
    w.kv("train_I", train_I);
    w.kv("train_J", train_J);
    w.kv("test", test);
    w.kv("s_vs_si_gap", s_vs_si_gap);
    w.end_object();
    w.key("metadata").begin_object();
    w.kv("seed", static_cast<std::uint64_t>(seed));
    w.kv("rng", rng_algorithm);
    w.kv("config_digest", config_digest);
    w.kv("sum_provenance", sum_provenance);
    w.kv("note", note);
    w.end_object();
    w.end_object();
    out << "\n";
}

void BoundReport::write_human(std::ostream& out) const {
    char buf[256];
    out << "certificate (" << bounds::theorem_name(theorem) << ")\n";
    std::snprintf(buf, sizeof(buf), "  empirical term   %.6g   <- eta C_eta R(W_T, S_I)\n",
                  breakdown.empirical_term);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  confidence term  %.6g\n", breakdown.confidence_term);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  kl term          %.6g\n", breakdown.kl_term);
    out << buf;
    std::snprintf(buf, sizeof(buf), "  total            %.6g%s\n", breakdown.total,
                  vacuous ? "   [vacuous]" : "");
    out << buf;
    std::snprintf(buf, sizeof(buf),
                  "  risks: train_S %.4g | train_I %.4g | train_J %.4g | test %.4g (gap %.3g)\n",
                  train_S, train_I, train_J, test, s_vs_si_gap);
    out << buf;
    out << "  sum " << sum_used << " (" << sum_provenance << ")";
    if (!note.empty()) out << "  note: " << note;
    out << "\n";
}

void Experiment::validate() const {
    if (m < 0) throw ConfigError("experiment: m must be >= 0");
    if (source == Source::Blobs) {
        // for idx sources n comes from the file; run_experiment checks m there
        if (n < 2) throw ConfigError("experiment: n must be >= 2");
        if (m >= n) throw ConfigError("experiment: need 0 <= m < n");
        if (num_classes < 2 || input_dim < 1) throw ConfigError("experiment: bad blob shape");
        if (n < num_classes) throw ConfigError("experiment: n < num_classes");
    } else if (idx_images.empty() || idx_labels.empty()) {
        throw ConfigError("experiment: idx source needs image and label paths");
    }
    if (corrupt_portion < 0.0 || corrupt_portion > 1.0)
        throw ConfigError("experiment: corrupt_portion must lie in [0,1]");
    if (!(eta > 0.0)) throw ConfigError("experiment: eta must be positive");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("experiment: delta must lie in (0,1)");
    arch.validate();
    try {
        run.schedule.validate(run.algo);
    } catch (const std::domain_error& e) {
        throw ConfigError(std::string("experiment: ") + e.what());
    }
}

std::string Experiment::canonical() const {
    std::ostringstream ss;
    ss << "source=" << (source == Source::Blobs ? "blobs" : "idx") << ";n=" << n
       << ";input_dim=" << input_dim << ";classes=" << num_classes << ";sep=" << separation
       << ";data_seed=" << data_seed << ";idx=" << idx_images << "," << idx_labels
       << ";subset=" << subset << ";corrupt=" << corrupt_portion << "@" << corrupt_seed
       << ";m=" << m << ";split_seed=" << split_seed
       << ";arch=" << (arch.kind == nets::ModelArch::Kind::Mlp ? "mlp" : "linear");
    for (int h : arch.hidden) ss << "-" << h;
    ss << ";init_seed=" << init_seed << ";algo=" << optim::algorithm_name(run.algo)
       << ";T=" << run.schedule.T << ";alpha=" << run.schedule.alpha
       << ";beta=" << run.schedule.beta << ";lambda=" << run.schedule.lambda_reg
       << ";dt=" << run.cld_dt << ";C=" << run.cld_c_bound << ";batch=" << run.batch.size << "/"
       << static_cast<int>(run.batch.mode) << "/" << run.batch.from_complement << "+"
       << run.batch.from_prior << ";opt_seed=" << run.opt_seed << ";cadence=" << run.risk_cadence
       << ";gamma=";
    for (long t = 0; t < std::min<long>(run.schedule.T, 3); ++t) ss << run.schedule.gamma[t] << ",";
    ss << "...;eps=";
    for (long t = 0; t < std::min<long>(run.schedule.T, 3) && t < (long)run.schedule.eps.size(); ++t)
        ss << run.schedule.eps[t] << ",";
    ss << ";sigma=";
    for (long t = 0; t < std::min<long>(run.schedule.T, 3) && t < (long)run.schedule.sigma.size(); ++t)
        ss << run.schedule.sigma[t] << ",";
    ss << ";theorem=" << bounds::theorem_name(theorem) << ";eta=" << eta << ";delta=" << delta
       << ";test_n=" << test_n << ";test_seed=" << test_seed;
    return ss.str();
}

std::string Experiment::digest() const {
    const std::string c = canonical();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : c) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunArtifacts run_experiment(const Experiment& exp) {
    exp.validate();
    RunArtifacts art;
    if (exp.source == Experiment::Source::Blobs) {
        art.train = data::synth_blobs(exp.n, exp.input_dim, exp.num_classes, exp.separation,
                                      exp.data_seed);
    } else {
        art.train = data::load_idx(exp.idx_images, exp.idx_labels);
        if (exp.subset > 0 && exp.subset < art.train.n) {
            // Seeded row sample without replacement; keeps the desk-scale runs cheap.
            Rng rng(exp.data_seed);
            data::Dataset sub;
            sub.input_dim = art.train.input_dim;
            sub.num_classes = art.train.num_classes;
            sub.n = exp.subset;
            std::vector<long> rows(art.train.n);
            for (long i = 0; i < art.train.n; ++i) rows[i] = i;
            for (long i = 0; i < exp.subset; ++i) {
                const long j =
                    i + static_cast<long>(rng.uniform_below(static_cast<std::uint64_t>(art.train.n - i)));
                std::swap(rows[i], rows[j]);
            }
            for (long i = 0; i < exp.subset; ++i) {
                const auto r = art.train.row(rows[i]);
                sub.features.insert(sub.features.end(), r.begin(), r.end());
                sub.labels.push_back(art.train.labels[rows[i]]);
            }
            art.train = std::move(sub);
        }
    }
    if (exp.corrupt_portion > 0.0)
        art.train = data::corrupt_labels(art.train, exp.corrupt_portion, exp.corrupt_seed);
    if (art.train.input_dim != exp.arch.input_dim || art.train.num_classes != exp.arch.num_classes)
        throw ConfigError("experiment: model arch does not match the dataset shape");
    if (exp.m >= art.train.n) throw ConfigError("experiment: m >= dataset rows");

    art.split = data::sample_prior_indices(art.train.n, exp.m, exp.split_seed);
    nets::SoftmaxNet model(exp.arch);
    const auto w0 = nets::init_params(exp.arch, exp.init_seed);

    data::Dataset test;
    const data::Dataset* test_ptr = nullptr;
    if (exp.test_n > 0 && exp.source == Experiment::Source::Blobs) {
        test = data::synth_blobs(exp.test_n, exp.input_dim, exp.num_classes, exp.separation,
                                 exp.test_seed);
        test_ptr = &test;
    }
    art.log = optim::run(model, w0, art.train, art.split, exp.run, test_ptr, &art.final_params);
    return art;
}

BoundReport certify_experiment(const Experiment& exp, const CertifyExtras& extras) {
    const auto art = run_experiment(exp);
    bounds::CatoniParams params{exp.eta, art.log.n, art.log.m, exp.delta};
    return certify(art.log, exp.theorem, params, extras, exp.digest());
}

namespace {

struct RunOutcome {
    bool ok = false;
    double sum = 0.0, total = 0.0, train_I = 0.0, train_S = 0.0, test = 0.0;
    std::string error;
};

RunOutcome one_run(const Experiment& exp) {
    RunOutcome out;
    try {
        const auto art = run_experiment(exp);
        bounds::CatoniParams params{exp.eta, art.log.n, art.log.m, exp.delta};
        const auto rep = certify(art.log, exp.theorem, params, {}, exp.digest());
        out.sum = rep.sum_used;
        out.total = rep.breakdown.total;
        out.train_I = rep.train_I;
        out.train_S = rep.train_S;
        out.test = rep.test;
        out.ok = true;
    } catch (const std::exception& e) {
        out.error = e.what();
    }
    return out;
}

SweepTable aggregate(const std::string& axis_name, const std::string& digest,
                     std::span<const double> axis_values, int repeats,
                     const std::vector<RunOutcome>& outcomes, bool collect_failures) {
    SweepTable table;
    table.axis_name = axis_name;
    table.config_digest = digest;
    for (std::size_t i = 0; i < axis_values.size(); ++i) {
        SweepRow row;
        row.axis = axis_values[i];
        std::vector<double> sums, totals, tis, tss, tests;
        for (int r = 0; r < repeats; ++r) {
            const auto& o = outcomes[i * repeats + r];
            if (!o.ok) {
                row.failures++;
                if (row.first_error.empty()) row.first_error = o.error;
                continue;
            }
            sums.push_back(o.sum);
            totals.push_back(o.total);
            tis.push_back(o.train_I);
            tss.push_back(o.train_S);
            tests.push_back(o.test);
        }
        if (row.failures > 0 && !collect_failures)
            throw std::runtime_error("sweep: run failed at " + axis_name + "=" +
                                     std::to_string(row.axis) + ": " + row.first_error);
        std::tie(row.mean_sum, row.std_sum) = mean_std(sums);
        std::tie(row.mean_total, row.std_total) = mean_std(totals);
        row.mean_train_I = mean_std(tis).first;
        row.mean_train_S = mean_std(tss).first;
        row.mean_test = mean_std(tests).first;
        table.rows.push_back(std::move(row));
    }
    return table;
}

SweepTable sweep_impl(const Experiment& base, const std::string& axis_name,
                      std::span<const double> axis_values, int repeats, std::uint64_t base_seed,
                      const std::function<void(Experiment&, double)>& apply_axis,
                      bool collect_failures) {
    if (repeats < 1) throw std::invalid_argument("sweep: repeats must be >= 1");
    const long total = static_cast<long>(axis_values.size()) * repeats;
    std::vector<RunOutcome> outcomes(total);
    parallel_tasks(total, [&](long task) {
        const std::size_t i = static_cast<std::size_t>(task) / repeats;
        const int r = static_cast<int>(task % repeats);
        Experiment exp = base;
        apply_axis(exp, axis_values[i]);
        exp.split_seed = mix_seed(base_seed, 2 * i, r);
        exp.init_seed = mix_seed(base_seed, 2 * i + 1, r);
        exp.run.opt_seed = mix_seed(base_seed, 1000 + i, r);
        exp.corrupt_seed = mix_seed(base_seed, 2000 + i, r);
        outcomes[task] = one_run(exp);
        if (!outcomes[task].ok)
            outcomes[task].error += " (seed " + std::to_string(exp.split_seed) + ")";
    });
    return aggregate(axis_name, base.digest(), axis_values, repeats, outcomes, collect_failures);
}

}  // namespace

SweepTable sweep_m(const Experiment& base, std::span<const long> m_values, int repeats,
                   std::uint64_t base_seed, bool collect_failures) {
    for (std::size_t i = 1; i < m_values.size(); ++i)
        if (m_values[i] <= m_values[i - 1])
            throw std::invalid_argument("sweep_m: m values must be strictly increasing");
    for (long m : m_values)
        if (m < 0 || m >= base.n) throw std::invalid_argument("sweep_m: m out of range");
    std::vector<double> axis(m_values.begin(), m_values.end());
    return sweep_impl(base, "m", axis, repeats, base_seed,
                      [](Experiment& e, double v) { e.m = static_cast<long>(v); },
                      collect_failures);
}

SweepTable random_label_curve(const Experiment& base, std::span<const double> portions,
                              int repeats, std::uint64_t base_seed, bool collect_failures) {
    for (double p : portions)
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("random_label_curve: portion outside [0,1]");
    return sweep_impl(base, "portion", portions, repeats, base_seed,
                      [](Experiment& e, double v) { e.corrupt_portion = v; }, collect_failures);
}

SweepTable sweep_eta(const Experiment& base, std::span<const double> etas, int repeats,
                     std::uint64_t base_seed, bool collect_failures) {
    for (double e : etas)
        if (!(e > 0.0)) throw std::invalid_argument("sweep_eta: eta must be positive");
    return sweep_impl(base, "eta", etas, repeats, base_seed,
                      [](Experiment& e, double v) { e.eta = v; }, collect_failures);
}

void SweepTable::write_csv(std::ostream& out) const {
    if (!config_digest.empty()) out << "# config_digest=" << config_digest << "\n";
    out << axis_name
        << ",mean_sum,std_sum,mean_total,std_total,mean_train_I,mean_train_S,mean_test,failures,"
           "first_error\n";
    char buf[64];
    for (const auto& r : rows) {
        auto put = [&](double v) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << buf << ',';
        };
        put(r.axis);
        put(r.mean_sum);
        put(r.std_sum);
        put(r.mean_total);
        put(r.std_total);
        put(r.mean_train_I);
        put(r.mean_train_S);
        put(r.mean_test);
        out << r.failures << ',' << r.first_error << "\n";
    }
}

DivergenceTable compare_variants(const Experiment& base, VariantPair pair) {
    Experiment exp = base;
    exp.validate();
    if (pair == VariantPair::FgdVsGd) {
        if (base.run.algo != optim::Algorithm::Fgd)
            throw std::invalid_argument("compare_variants: base experiment must run fgd");
    } else if (base.run.algo != optim::Algorithm::Fsgd) {
        throw std::invalid_argument("compare_variants: base experiment must run fsgd");
    }

    const auto train = exp.source == Experiment::Source::Blobs
                           ? data::synth_blobs(exp.n, exp.input_dim, exp.num_classes,
                                               exp.separation, exp.data_seed)
                           : data::load_idx(exp.idx_images, exp.idx_labels);
    const auto split = data::sample_prior_indices(train.n, exp.m, exp.split_seed);
    nets::SoftmaxNet model(exp.arch);
    const auto w0 = nets::init_params(exp.arch, exp.init_seed);

    data::Dataset test;
    const data::Dataset* test_ptr = nullptr;
    if (exp.test_n > 0 && exp.source == Experiment::Source::Blobs) {
        test = data::synth_blobs(exp.test_n, exp.input_dim, exp.num_classes, exp.separation,
                                 exp.test_seed);
        test_ptr = &test;
    }

    optim::OptimState a{std::vector<double>(w0.begin(), w0.end()),
                        std::vector<double>(w0.begin(), w0.end())};
    optim::OptimState b = a;
    Rng rng_a(exp.run.opt_seed), rng_b(exp.run.opt_seed);  // identical batch streams

    DivergenceTable table;
    table.variant_a = pair == VariantPair::FgdVsGd ? "fgd" : "fsgd";
    table.variant_b = pair == VariantPair::FgdVsGd ? "gd" : "sgd";
    const auto all_test = test_ptr ? nets::full_view(test_ptr->n) : std::vector<long>{};
    const auto all_train = nets::full_view(train.n);

    for (long t = 1; t <= exp.run.schedule.T; ++t) {
        if (pair == VariantPair::FgdVsGd) {
            step_fgd(a, model, train, split, exp.run.schedule, t);
            step_gd(b, model, train, exp.run.schedule, t);
        } else {
            step_fsgd(a, model, train, split, exp.run.schedule, exp.run.batch, t, rng_a);
            step_sgd(b, model, train, split, exp.run.schedule, exp.run.batch, t, rng_b);
        }
        DivergenceRow row;
        row.step = t;
        for (std::size_t k = 0; k < a.w.size(); ++k)
            row.param_dist_inf = std::max(row.param_dist_inf, std::abs(a.w[k] - b.w[k]));
        const bool cadence =
            (exp.run.risk_cadence > 0 && t % exp.run.risk_cadence == 0) || t == exp.run.schedule.T;
        if (cadence) {
            row.train_S_a = model.zero_one_risk(a.w, train, all_train);
            row.train_S_b = model.zero_one_risk(b.w, train, all_train);
            if (test_ptr) {
                row.test_a = model.zero_one_risk(a.w, *test_ptr, all_test);
                row.test_b = model.zero_one_risk(b.w, *test_ptr, all_test);
            } else {
                row.test_a = row.test_b = kNaN;
            }
        } else {
            row.train_S_a = row.train_S_b = row.test_a = row.test_b = kNaN;
        }
        table.rows.push_back(row);
    }
    if (!table.rows.empty()) table.final_param_dist_inf = table.rows.back().param_dist_inf;
    return table;
}

void DivergenceTable::write_csv(std::ostream& out) const {
    out << "step,param_dist_inf,train_S_" << variant_a << ",train_S_" << variant_b << ",test_"
        << variant_a << ",test_" << variant_b << "\n";
    char buf[64];
    auto put = [&](double v, bool last) {
        if (std::isnan(v)) {
            out << (last ? "\n" : ",");
            return;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf << (last ? "\n" : ",");
    };
    for (const auto& r : rows) {
        out << r.step << ',';
        put(r.param_dist_inf, false);
        put(r.train_S_a, false);
        put(r.train_S_b, false);
        put(r.test_a, false);
        put(r.test_b, true);
    }
}

}  // namespace paccert::certify
