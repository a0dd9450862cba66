#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paccert/dataset.hpp"
#include "paccert/net.hpp"
#include "paccert/rng.hpp"

// Exact-enumeration and Monte Carlo verification of the supporting lemmas.
// Every verifier emits a machine-checkable pass/fail with the slack it used:
// 4-sigma sampling bands for Monte Carlo, 1e-12 for exact enumeration.
// Verifiers own their random streams; they never touch an optimizer's.

namespace paccert::lab {

struct VerificationReport {
    std::string lemma_id;
    double claimed = 0.0;   // bound / expected value at the binding grid point
    double observed = 0.0;  // empirical or enumerated value there
    long trials = 0;
    double slack = 0.0;
    bool pass = false;
    std::string detail;

    void write_json(std::ostream& out) const;
};

// ---- without-replacement variance ------------------------------------------

// E_J || (1/m) sum_k g[J_k] ||^2 for J drawn without replacement, via the
// closed form (sigma_bar^2/m) (n-m)/(n-1) after centering the vectors.
double exact_variance_wor(std::span<const std::vector<double>> vectors, long m);

// The pre-centering two-term form from the proof:
// (1/m) avg||g_i||^2 + (m-1)/(m n (n-1)) (||sum g||^2 - sum ||g_i||^2).
double exact_variance_wor_general(std::span<const std::vector<double>> vectors, long m);

// Brute force over all C(n,m) subsets; the oracle side of the pair.
double variance_wor_enumerated(std::span<const std::vector<double>> vectors, long m);

VerificationReport verify_variance_wor(Rng& rng);

// ---- modified McDiarmid (without replacement) -------------------------------

struct McdiarmidConfig {
    long n = 50;
    long m = 10;
    double c = 0.0;  // bounded-difference constant of phi
    std::vector<double> eps_grid;
    long trials = 100000;
    bool strict_proof_form = false;  // denominator c^2 sum((n-i-1)/(n-i))^2 instead of m c^2
    bool negative_control = false;   // deliberately quarter c; the tail claim must then fail
};

using IndexFunction = std::function<double(std::span<const long>)>;

VerificationReport verify_mcdiarmid_wor(const IndexFunction& phi, const McdiarmidConfig& cfg,
                                        Rng& rng);

// Phi(J) = sqrt(sum_t w_t ||mean_S grads_t - mean_J grads_t||^2) for a frozen
// trajectory; per-example gradients are precomputed so J-evaluation is cheap.
struct FrozenTrajectoryPhi {
    std::vector<std::vector<double>> example_grads;  // [t]: n*d row-major
    std::vector<double> weights;                     // w_t = (gamma_t/sigma_t)^2
    long n = 0, d = 0;

    double operator()(std::span<const long> J) const;
    double bounded_diff_c(long m) const;  // (2/m) sqrt(sum_t w_t L_t^2)
};

FrozenTrajectoryPhi build_trajectory_phi(const nets::Model& model, const data::Dataset& ds,
                                         std::span<const std::vector<double>> param_snapshots,
                                         std::span<const double> weights);

// ---- Catoni moment identity -------------------------------------------------

struct CatoniMmtConfig {
    std::vector<double> q_grid;
    double eta = 1.0;
    long k = 10;           // exact binomial enumeration for k <= 20, Monte Carlo beyond
    long trials = 100000;  // Monte Carlo fallback
};

VerificationReport verify_catoni_mmt(const CatoniMmtConfig& cfg, Rng& rng);

// ---- end-to-end data-dependent PAC-Bayes -------------------------------------

enum class ToyFamily {
    FixedMixture,  // Q = P = uniform over two fixed thresholds; KL = 0
    EmpSelected,   // Q picks the empirically better threshold on S; KL = ln 2
};

struct DataPacConfig {
    long n = 200;
    long m = 100;
    double delta = 0.1;
    double eta = 1.0;
    ToyFamily family = ToyFamily::FixedMixture;
    long replicas = 10000;
    bool negative_control = false;  // drop the Catoni constants; validity must then fail
};

VerificationReport verify_data_pac_end_to_end(const DataPacConfig& cfg, Rng& rng);

// ---- norm-subGaussian concentration ------------------------------------------

struct NormSubgConfig {
    long T = 10, d = 10;  // stacked dimension T*d
    long m = 25;
    std::vector<double> eps_grid;
    long trials = 100000;
};

// `vectors` are the stacked G_i per the lemma layout; L >= max_i ||G_i||.
VerificationReport verify_norm_subgaussian(std::span<const std::vector<double>> vectors, double L,
                                           const NormSubgConfig& cfg, Rng& rng);

std::vector<std::vector<double>> random_unit_vectors(long count, long dim, Rng& rng);

// ---- MGF / tail conversions ----------------------------------------------------

struct EexpSpec {
    enum class Kind {
        Zero,               // A = 0
        UnitExponential,    // A ~ Exp(1): tail e^{-eps}, E[e^{A/5}] = 1.25
        ShiftedExponential  // A = ln(2K) + Exp(1): the extremal tail 2K e^{-eps}
    };
    Kind kind = Kind::UnitExponential;
    double K = 1.0;
};

VerificationReport verify_prob_eexp(const EexpSpec& spec, long trials, Rng& rng);

// ---- KL chain rule on finite Markov chains -------------------------------------

struct MarkovChain {
    int states = 2;
    std::vector<double> init;   // length states
    std::vector<double> trans;  // row-major states x states
};

MarkovChain random_chain(int states, Rng& rng);

VerificationReport verify_kl_chain_rule(const MarkovChain& p, const MarkovChain& q, int horizon);

// ---- pathwise FGD KL accounting --------------------------------------------------

struct FgdPathwiseConfig {
    long n = 60;
    int input_dim = 2, num_classes = 2;
    double separation = 4.0;
    long m = 30;
    long T = 100;
    double gamma = 0.1, eps = 0.05;
    double p = 0.0;  // 0 = default 1/(T d)
    std::uint64_t data_seed = 11, split_seed = 12, init_seed = 13;
    bool duplicate_data = false;  // S = (base, base), J = first copy, so g_t = 0
};

VerificationReport verify_fgd_kl_pathwise(const FgdPathwiseConfig& cfg);

// ---- discretized CLD gradient-difference integral --------------------------------

struct CldIntegralConfig {
    long n = 60;
    int input_dim = 2, num_classes = 2;
    double separation = 4.0;
    long m = 30;
    long T = 100;
    double dt = 0.01;
    double beta = 2.0, lambda_reg = 1.0, c_bound = 0.5;
    std::vector<double> deltas{0.1, 0.05};
    long trials = 2000;
    std::uint64_t data_seed = 21, init_seed = 23;
};

VerificationReport verify_cld_grad_integral(const CldIntegralConfig& cfg, Rng& rng);

// Corollary-level KL bound with the printed 31.5 = 5 * 6.3 constant; the
// theorem-level evaluator uses its printed 16 (discrepancy noted, not
// resolved).
double subgaussian_kl_corollary_bound(double L0, double schedule_sum, long T, long d, long m,
                                      double delta);

// ---- suite registry ---------------------------------------------------------------

struct SuiteOptions {
    std::uint64_t seed = 12345;
    double trial_scale = 1.0;  // shrink factor for smoke runs
    bool negative_control = false;
    bool strict_mcdiarmid = false;
};

// Selector: "all" or one of {variance-wor, new-mcd, catoni-mmt, data-pac,
// norm-subg, prob-eexp, chain-kl, fgd-kl-pathwise, cld-grad-integral}.
std::vector<VerificationReport> run_suite(std::string_view selector, const SuiteOptions& opt);

}  // namespace paccert::lab
