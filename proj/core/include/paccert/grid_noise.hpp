#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "paccert/rng.hpp"

// The discrete grid distribution xi underlying the floored-GD prior:
//   Pr[xi = (a_1,...,a_d)] = Z(p)^{-d} exp(-ln(1/p) sum_k a_k^2),
//   Z(p) = sum_{i in Z} p^{i^2},  p in (0, 1/3),
// together with the two integer-grid primitives the optimizers use. The
// sign-magnitude floor (floor toward zero, used by FGD) and the stochastic
// round (standard floor plus a fair coin, used by RGD) are distinct
// operations and are named differently on purpose.

namespace paccert::noise {

struct GridNoiseSpec {
    double p = 0.1;            // grid decay, in (0, 1/3)
    int d = 1;                 // dimension
    int truncation_radius = 1; // series cutoff: smallest r with p^{r^2} < 1e-16

    static GridNoiseSpec make(double p, int d);
};

// Componentwise sign-magnitude floor: floor(|x|) with the sign of x.
std::vector<long long> floor_signmag(std::span<const double> x);

// Componentwise stochastic rounding: standard floor plus a fair coin, so the
// mean is floor(x) + 1/2 for every component.
std::vector<long long> round_stochastic(std::span<const double> x, Rng& rng);

// Z(p), truncated where terms drop below 1e-16. Satisfies 1 < Z(p) < 1 + 3p.
double xi_normalizer(double p);

// ln Pr[xi = a] for the grid distribution parameterized by `spec`.
double xi_log_pmf(std::span<const long long> a, const GridNoiseSpec& spec);

// One draw of xi, componentwise inverse-CDF over the truncated 1-D lattice.
std::vector<long long> xi_sample(const GridNoiseSpec& spec, Rng& rng);

// Per-step KL contribution ln(1/Pr[xi = a]) = -xi_log_pmf(a).
double per_step_kl_exact(std::span<const long long> a, const GridNoiseSpec& spec);

// Closed-form dominating bound 3 d p + ln(1/p) (gamma/eps)^2 ||grad_diff||^2;
// always >= per_step_kl_exact(floor_signmag(gamma*grad_diff/eps)).
double per_step_kl_bound(std::span<const double> grad_diff, double gamma, double eps,
                         const GridNoiseSpec& spec);

// The proof's default p = 1/(T d); rejects T*d <= 3 where p would leave (0,1/3).
double default_p(long T, long d);

}  // namespace paccert::noise
