#include "paccert/grid_noise.hpp"

#include <cmath>
#include <stdexcept>

namespace paccert::noise {

namespace {

void check_p(double p) {
    if (!(p > 0.0 && p < 1.0 / 3.0)) throw std::domain_error("grid noise: p must lie in (0, 1/3)");
}

int radius_for(double p) {
    int r = 1;
    while (std::pow(p, static_cast<double>(r) * r) >= 1e-16) ++r;
    return r;
}

// 1-D marginal pmf over {-r,...,r}, exactly normalized by the truncated sum.
std::vector<double> marginal_pmf(const GridNoiseSpec& spec) {
    const int r = spec.truncation_radius;
    std::vector<double> pmf(2 * r + 1);
    double z = 0.0;
    for (int a = -r; a <= r; ++a) {
        pmf[a + r] = std::pow(spec.p, static_cast<double>(a) * a);
        z += pmf[a + r];
    }
    for (double& v : pmf) v /= z;
    return pmf;
}

}  // namespace

GridNoiseSpec GridNoiseSpec::make(double p, int d) {
    check_p(p);
    if (d < 1) throw std::domain_error("grid noise: dimension must be >= 1");
    return GridNoiseSpec{p, d, radius_for(p)};
}

std::vector<long long> floor_signmag(std::span<const double> x) {
    std::vector<long long> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw std::domain_error("floor_signmag: non-finite component");
        const double mag = std::floor(std::abs(x[i]));
        out[i] = static_cast<long long>(x[i] >= 0.0 ? mag : -mag);
    }
    return out;
}

std::vector<long long> round_stochastic(std::span<const double> x, Rng& rng) {
    std::vector<long long> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i])) throw std::domain_error("round_stochastic: non-finite component");
        const long long f = static_cast<long long>(std::floor(x[i]));
        out[i] = f + static_cast<long long>(rng.next_u64() & 1u);
    }
    return out;
}

double xi_normalizer(double p) {
    check_p(p);
    double z = 1.0;
    for (int i = 1;; ++i) {
        const double term = std::pow(p, static_cast<double>(i) * i);
        if (term < 1e-16) break;
        z += 2.0 * term;
    }
    return z;
}

double xi_log_pmf(std::span<const long long> a, const GridNoiseSpec& spec) {
    if (static_cast<int>(a.size()) != spec.d)
        throw std::invalid_argument("xi_log_pmf: vector length does not match spec dimension");
    check_p(spec.p);
    double sum_sq = 0.0;
    for (long long ak : a) sum_sq += static_cast<double>(ak) * static_cast<double>(ak);
    return -static_cast<double>(spec.d) * std::log(xi_normalizer(spec.p)) -
           std::log(1.0 / spec.p) * sum_sq;
}

std::vector<long long> xi_sample(const GridNoiseSpec& spec, Rng& rng) {
    check_p(spec.p);
    const auto pmf = marginal_pmf(spec);
    const int r = spec.truncation_radius;
    std::vector<long long> out(spec.d);
    for (int k = 0; k < spec.d; ++k) {
        const double u = rng.uniform();
        double cum = 0.0;
        long long value = r;  // fall through to the last lattice point
        for (int a = -r; a <= r; ++a) {
            cum += pmf[a + r];
            if (u < cum) {
                value = a;
                break;
            }
        }
        out[k] = value;
    }
    return out;
}

double per_step_kl_exact(std::span<const long long> a, const GridNoiseSpec& spec) {
    return -xi_log_pmf(a, spec);
}

double per_step_kl_bound(std::span<const double> grad_diff, double gamma, double eps,
                         const GridNoiseSpec& spec) {
    check_p(spec.p);
    if (!(eps > 0.0)) throw std::domain_error("per_step_kl_bound: eps must be positive");
    if (!(gamma >= 0.0)) throw std::domain_error("per_step_kl_bound: gamma must be >= 0");
    double norm_sq = 0.0;
    for (double g : grad_diff) norm_sq += g * g;
    const double ratio = gamma / eps;
    return 3.0 * spec.d * spec.p + std::log(1.0 / spec.p) * ratio * ratio * norm_sq;
}

double default_p(long T, long d) {
    if (T < 1 || d < 1 || T * d <= 3)
        throw std::domain_error("default_p: T*d must be >= 4 so that p = 1/(Td) < 1/3");
    return 1.0 / (static_cast<double>(T) * static_cast<double>(d));
}

}  // namespace paccert::noise
