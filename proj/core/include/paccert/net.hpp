#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "paccert/dataset.hpp"

// Desk-scale differentiable classifiers with exact hand-derived gradients.
// Cross-entropy is the differentiable surrogate the optimizers descend on;
// the certified quantity is the 0/1 risk.

namespace paccert::nets {

struct ModelArch {
    enum class Kind { LinearSoftmax, Mlp };
    Kind kind = Kind::LinearSoftmax;
    std::vector<int> hidden;  // ReLU widths, empty for LinearSoftmax
    int input_dim = 0;
    int num_classes = 0;

    long param_count() const;
    void validate() const;
};

struct GradEval {
    double loss = 0.0;
    std::vector<double> grad;
};

// Interface the optimizers drive. Parameters are an externally owned flat
// vector; evaluation is pure.
class Model {
public:
    virtual ~Model() = default;
    virtual long dim() const = 0;

    // Mean cross-entropy loss and its exact gradient over the view.
    virtual GradEval loss_grad(std::span<const double> params, const data::Dataset& ds,
                               std::span<const long> view) const = 0;

    virtual double loss(std::span<const double> params, const data::Dataset& ds,
                        std::span<const long> view) const {
        return loss_grad(params, ds, view).loss;
    }

    // Mean argmax misclassification over the view.
    virtual double zero_one_risk(std::span<const double> params, const data::Dataset& ds,
                                 std::span<const long> view) const = 0;

    // L(w) = max_i ||grad f(w, z_i)|| over the view, computed exactly by
    // iterating examples.
    virtual double per_example_grad_norm_max(std::span<const double> params,
                                             const data::Dataset& ds,
                                             std::span<const long> view) const = 0;
};

// LinearSoftmax or ReLU MLP (depth <= 3, width <= 256 at desk scale).
class SoftmaxNet final : public Model {
public:
    explicit SoftmaxNet(ModelArch arch);

    long dim() const override { return arch_.param_count(); }
    const ModelArch& arch() const { return arch_; }

    GradEval loss_grad(std::span<const double> params, const data::Dataset& ds,
                       std::span<const long> view) const override;
    double loss(std::span<const double> params, const data::Dataset& ds,
                std::span<const long> view) const override;
    double zero_one_risk(std::span<const double> params, const data::Dataset& ds,
                         std::span<const long> view) const override;
    double per_example_grad_norm_max(std::span<const double> params, const data::Dataset& ds,
                                     std::span<const long> view) const override;

private:
    ModelArch arch_;
    std::vector<int> widths_;  // input_dim, hidden..., num_classes
};

// All indices [0, n) as a reusable view.
std::vector<long> full_view(long n);

// Scaled uniform initialization, scale 1/sqrt(fan_in) per layer.
std::vector<double> init_params(const ModelArch& arch, std::uint64_t seed);

// Checkpoints: small header (arch descriptor, d, seed) followed by the flat
// parameter vector as little-endian 64-bit floats.
struct Checkpoint {
    ModelArch arch;
    std::uint64_t seed = 0;
    std::vector<double> params;
};

void save_checkpoint(const std::string& path, const ModelArch& arch, std::uint64_t seed,
                     std::span<const double> params);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace paccert::nets
