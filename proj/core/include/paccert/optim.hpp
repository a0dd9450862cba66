#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paccert/dataset.hpp"
#include "paccert/net.hpp"
#include "paccert/rng.hpp"

// Update rules, each instrumented to log exactly the per-step quantities its
// certificate consumes. GD and SGD carry no certificate; they exist for the
// paired-divergence comparisons.

namespace paccert::optim {

enum class Algorithm { Fgd, Fsgd, Rgd, Gld, Sgld, CldEm, Gd, Sgd };

const char* algorithm_name(Algorithm a);
Algorithm algorithm_from_name(std::string_view name);

struct Schedule {
    std::vector<double> gamma;  // learning rates; gamma[t-1] drives step t
    std::vector<double> eps;    // precisions (floored/rounded algorithms)
    std::vector<double> sigma;  // noise scales (Langevin algorithms)
    double alpha = 0.0;         // momentum coefficient (FGD/FSGD/GD/SGD)
    double beta = 0.0;          // inverse temperature (CLD)
    double lambda_reg = 0.0;    // l2 coefficient (CLD)
    long T = 0;

    static std::vector<double> constant(long T, double v);
    // v0 * factor^{floor((t-1)/interval)}, the decay shape used throughout.
    static std::vector<double> geometric(long T, double v0, double factor, long interval);

    void validate(Algorithm algo) const;
};

struct StepRecord {
    long t = 0;
    double gamma = 0.0, eps = 0.0, sigma = 0.0;
    double grad_diff_sq = 0.0;                // ||g_t||^2, the algorithm's gradient difference
    double grad_diff_sq_weighted_eps = 0.0;   // (gamma/eps)^2 ||g_t||^2
    double grad_diff_sq_weighted_sigma = 0.0; // (gamma/sigma)^2 ||g_t||^2
    double lw_sq_weighted = 0.0;              // (gamma/sigma)^2 L(W_{t-1})^2
    double cld_quad = 0.0;                    // e^{alpha((t-1)dt - T)} ||g_t||^2 dt
    double round_residual_max = 0.0;          // RGD: max_k |gamma grad_k - eps round_k|
    bool empty_prior_batch = false;           // FSGD: J cap B_t was empty, g2 defined as 0
};

struct RiskPoint {
    long step = 0;
    double train_S = 0.0, train_I = 0.0, train_J = 0.0;
    double test = 0.0;  // NaN when no held-out set was provided
};

struct TrajectoryLog {
    Algorithm algo = Algorithm::Fgd;
    std::uint64_t opt_seed = 0;
    std::string rng_algorithm;
    long T = 0, d = 0, n = 0, m = 0, batch_size = 0;
    double cld_dt = 0.0, cld_horizon = 0.0, cld_alpha = 0.0, cld_c_bound = 0.0;

    std::vector<StepRecord> steps;   // length T
    std::vector<RiskPoint> risks;    // cadence points, always includes step 0 and step T
    std::vector<std::vector<double>> snapshots;  // per-step parameters, only when requested
    RiskPoint final_risks{};
    double grad_sup = 0.0;           // max_t L(W_{t-1}) over steps where L was computed
    double schedule_sum_sigma = 0.0; // sum_t (gamma_t/sigma_t)^2

    double sum_grad_diff_eps() const;
    double sum_grad_diff_sigma() const;
    double sum_grad_diff_gamma_sq() const;  // sum_t gamma_t^2 ||g_t||^2 (RGD certificate)
    double sum_lw_sigma() const;
    double sum_cld_quad() const;
    long empty_prior_steps() const;

    // One row per step; risk columns are filled only on cadence rows. The
    // column order is part of the external interface. A non-empty digest is
    // recorded as a leading "# config_digest=" comment line.
    void write_csv(std::ostream& out, std::string_view config_digest = {}) const;
    void write_summary_json(std::ostream& out, std::string_view config_digest) const;
};

struct OptimState {
    std::vector<double> w;       // W_{t-1} on entry to step t
    std::vector<double> w_prev;  // W_{t-2}; equal to w at t = 1 (zero initial velocity)
};

// Individual update rules. `t` is 1-based. Every step returns its log record.
StepRecord step_fgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch, long t);
StepRecord step_gd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                   const Schedule& sch, long t);
StepRecord step_fsgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                     const data::IndexSplit& split, const Schedule& sch,
                     const data::BatchSpec& batch, long t, Rng& rng);
StepRecord step_sgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch,
                    const data::BatchSpec& batch, long t, Rng& rng);
StepRecord step_rgd(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch, long t, Rng& rng);
StepRecord step_gld(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                    const data::IndexSplit& split, const Schedule& sch, long t, Rng& rng);
StepRecord step_sgld(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                     const data::IndexSplit& split, const Schedule& sch,
                     const data::BatchSpec& batch, long t, Rng& rng);
// Euler-Maruyama step of dW = -grad(f + lambda/2 ||w||^2) dt + sqrt(2/beta) dB.
// Logs the left-endpoint quadrature term of the certificate integral with
// alpha = lambda / e^{8 beta C}.
StepRecord step_cld_em(OptimState& st, const nets::Model& model, const data::Dataset& ds,
                       const data::IndexSplit& split, const Schedule& sch, double dt,
                       double c_bound, long t, Rng& rng);

// W_0 ~ N(0, 1/(lambda beta) I_d), the CLD initial distribution.
std::vector<double> cld_init(long d, double lambda_reg, double beta, Rng& rng);

struct RunSpec {
    Algorithm algo = Algorithm::Fgd;
    Schedule schedule;
    data::BatchSpec batch;    // Fsgd / Sgld / Sgd
    std::uint64_t opt_seed = 1;
    long risk_cadence = 0;    // evaluate risks every k steps; 0 = endpoints only
    bool log_snapshots = false;
    double cld_dt = 0.0;
    double cld_c_bound = 0.0;
};

// Full training loop. For CldEm the initial point is drawn internally from
// cld_init (w0 is ignored) so a run is reproducible from opt_seed alone.
// Step failures are rethrown with the step index attached.
TrajectoryLog run(const nets::Model& model, std::span<const double> w0, const data::Dataset& train,
                  const data::IndexSplit& split, const RunSpec& spec,
                  const data::Dataset* test = nullptr, std::vector<double>* final_params = nullptr);

}  // namespace paccert::optim
