#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "paccert/bounds.hpp"
#include "paccert/dataset.hpp"
#include "paccert/net.hpp"
#include "paccert/optim.hpp"

// Turns trajectory logs into theorem-tagged certificates, and orchestrates
// the m-sweep / random-label / paired-variant experiments around them.

namespace paccert::certify {

struct BoundReport {
    bounds::Theorem theorem = bounds::Theorem::Fgd;
    bounds::BoundBreakdown breakdown;
    double eta = 0.0, delta = 0.0;
    long n = 0, m = 0, d = 0, T = 0;
    long batch_size = 0;
    double sum_used = 0.0;
    std::string sum_provenance;  // "single-realization" | "averaged-over-k-seeds"
    double train_S = 0.0, train_I = 0.0, train_J = 0.0, test = 0.0;
    double s_vs_si_gap = 0.0;  // R(W_T,S) - R(W_T,S_I), diagnostic
    bool vacuous = false;
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    std::string config_digest;
    std::string note;
    // extras echoed for re-evaluation
    double extra_beta = 0.0, extra_lambda = 0.0, extra_c_bound = 0.0, extra_lipschitz = 0.0;
    double extra_grad_sup = 0.0, extra_eps = 0.0, extra_grid_p = 0.0, extra_kl = 0.0;
    double cld_horizon = 0.0;

    // Recompute the breakdown from the echoed inputs; report self-consistency
    // means this reproduces `breakdown` to float noise.
    bounds::BoundBreakdown reevaluate() const;
    void write_json(std::ostream& out) const;
    void write_human(std::ostream& out) const;
};

struct CertifyExtras {
    double kl = 0.0;          // DataPac: explicit KL value
    long batch = 0;           // Sgld: override for b (default: log.batch_size)
    double beta = 0.0;        // Cld
    double lambda_reg = 0.0;  // Cld
    double c_bound = 0.0;     // Cld
    double lipschitz = 0.0;   // Cld: 0 = use the path estimate log.grad_sup
    double grad_sup = 0.0;    // SgldSubg: L0; 0 = use log.grad_sup
    double rgd_eps = 0.0;     // Rgd: 0 = take the (constant) eps from the log
    double grid_p = 0.0;      // Rgd: 0 = default_p(T, d)
};

// Builds the certificate for one realized trajectory. Missing logged
// quantities raise std::invalid_argument naming the field.
BoundReport certify(const optim::TrajectoryLog& log, bounds::Theorem theorem,
                    const bounds::CatoniParams& params, const CertifyExtras& extras = {},
                    std::string_view config_digest = "");

// Same-config logs from k independent seeds; the weighted sum and the
// empirical risks are averaged (the expectation form of the FSGD theorem).
BoundReport certify_averaged(std::span<const optim::TrajectoryLog> logs, bounds::Theorem theorem,
                             const bounds::CatoniParams& params, const CertifyExtras& extras = {},
                             std::string_view config_digest = "");

// A fully described desk-scale experiment: data, split, model, run, theorem.
struct Experiment {
    enum class Source { Blobs, Idx };
    Source source = Source::Blobs;
    long n = 2000;
    int input_dim = 2;
    int num_classes = 2;
    double separation = 4.0;
    std::uint64_t data_seed = 1;
    std::string idx_images, idx_labels;
    long subset = 0;  // optional row cap after an IDX load (0 = all)
    double corrupt_portion = 0.0;
    std::uint64_t corrupt_seed = 7;

    long m = 1000;
    std::uint64_t split_seed = 2;

    nets::ModelArch arch{nets::ModelArch::Kind::LinearSoftmax, {}, 2, 2};
    std::uint64_t init_seed = 3;

    optim::RunSpec run;

    bounds::Theorem theorem = bounds::Theorem::Fgd;
    double eta = 1.0;
    double delta = 0.1;

    long test_n = 0;  // fresh held-out sample size (Blobs only), 0 = none
    std::uint64_t test_seed = 99;

    void validate() const;
    std::string digest() const;  // FNV-1a over the canonical serialization
    std::string canonical() const;
};

struct RunArtifacts {
    optim::TrajectoryLog log;
    std::vector<double> final_params;
    data::Dataset train;
    data::IndexSplit split;
};

RunArtifacts run_experiment(const Experiment& exp);
BoundReport certify_experiment(const Experiment& exp, const CertifyExtras& extras = {});

struct SweepRow {
    double axis = 0.0;  // m, portion, or eta
    double mean_sum = 0.0, std_sum = 0.0;
    double mean_total = 0.0, std_total = 0.0;
    double mean_train_I = 0.0, mean_train_S = 0.0, mean_test = 0.0;
    long failures = 0;
    std::string first_error;
};

struct SweepTable {
    std::string axis_name;
    std::string config_digest;  // of the base experiment
    std::vector<SweepRow> rows;
    void write_csv(std::ostream& out) const;
};

// k runs per m (seeds derived from base_seed, m index and repeat index);
// reports mean/std of the cumulative weighted gradient-difference sum and of
// the certificate total. With collect_failures the table carries per-row
// failure counts instead of aborting on the first failed run.
SweepTable sweep_m(const Experiment& base, std::span<const long> m_values, int repeats,
                   std::uint64_t base_seed, bool collect_failures = false);

SweepTable random_label_curve(const Experiment& base, std::span<const double> portions,
                              int repeats, std::uint64_t base_seed,
                              bool collect_failures = false);

SweepTable sweep_eta(const Experiment& base, std::span<const double> etas, int repeats,
                     std::uint64_t base_seed, bool collect_failures = false);

enum class VariantPair { FgdVsGd, FsgdVsSgd };

struct DivergenceRow {
    long step = 0;
    double param_dist_inf = 0.0;
    double train_S_a = 0.0, train_S_b = 0.0;
    double test_a = 0.0, test_b = 0.0;
};

struct DivergenceTable {
    std::string variant_a, variant_b;
    std::vector<DivergenceRow> rows;  // one per step; risks filled on cadence rows
    double final_param_dist_inf = 0.0;
    void write_csv(std::ostream& out) const;
};

// Runs both variants of the pair with the identical schedule and batch
// stream, recording per-step parameter distance and risk deltas.
DivergenceTable compare_variants(const Experiment& base, VariantPair pair);

}  // namespace paccert::certify
