#include "paccert/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "paccert/errors.hpp"
#include "paccert/rng.hpp"

namespace paccert::nets {

namespace {

std::vector<int> layer_widths(const ModelArch& arch) {
    std::vector<int> w;
    w.push_back(arch.input_dim);
    if (arch.kind == ModelArch::Kind::Mlp)
        w.insert(w.end(), arch.hidden.begin(), arch.hidden.end());
    w.push_back(arch.num_classes);
    return w;
}

void check_view(std::span<const long> view, const char* who) {
    if (view.empty()) throw std::invalid_argument(std::string(who) + ": empty view");
}

// Workspace for one example's forward/backward pass.
struct Scratch {
    std::vector<std::vector<double>> act;    // act[l], l = 0..L (act[0] = input)
    std::vector<std::vector<double>> delta;  // delta[l], l = 1..L
};

Scratch make_scratch(const std::vector<int>& widths) {
    Scratch s;
    s.act.resize(widths.size());
    s.delta.resize(widths.size());
    for (std::size_t l = 0; l < widths.size(); ++l) {
        s.act[l].resize(widths[l]);
        s.delta[l].resize(widths[l]);
    }
    return s;
}

// Forward to logits; hidden activations are ReLU (subgradient 0 at 0).
void forward(std::span<const double> params, const std::vector<int>& widths,
             std::span<const double> x, Scratch& s) {
    std::copy(x.begin(), x.end(), s.act[0].begin());
    std::size_t off = 0;
    const std::size_t L = widths.size() - 1;
    for (std::size_t l = 1; l <= L; ++l) {
        const int in = widths[l - 1], out = widths[l];
        const double* W = params.data() + off;
        const double* b = params.data() + off + static_cast<std::size_t>(out) * in;
        for (int o = 0; o < out; ++o) {
            double z = b[o];
            const double* wrow = W + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) z += wrow[i] * s.act[l - 1][i];
            s.act[l][o] = (l == L) ? z : (z > 0.0 ? z : 0.0);
        }
        off += static_cast<std::size_t>(out) * in + out;
    }
}

// Cross-entropy of the logits in s.act.back() against label y, with the
// usual max-shifted softmax.
double ce_loss_and_dlogits(Scratch& s, int y, bool want_grad) {
    auto& logits = s.act.back();
    auto& dlogits = s.delta.back();
    const double zmax = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - zmax);
    const double lse = zmax + std::log(sum);
    if (want_grad) {
        for (std::size_t c = 0; c < logits.size(); ++c)
            dlogits[c] = std::exp(logits[c] - lse) - (static_cast<int>(c) == y ? 1.0 : 0.0);
    }
    return lse - logits[y];
}

// Backprop from s.delta.back() and add this example's gradient into grad.
void backward_accumulate(std::span<const double> params, const std::vector<int>& widths,
                         Scratch& s, std::span<double> grad) {
    const std::size_t L = widths.size() - 1;
    // Parameter offsets per layer.
    std::vector<std::size_t> off(L + 1, 0);
    for (std::size_t l = 1; l <= L; ++l)
        off[l] = off[l - 1] + (l >= 2 ? static_cast<std::size_t>(widths[l - 1]) * widths[l - 2] +
                                            widths[l - 1]
                                      : 0);
    for (std::size_t l = L; l >= 1; --l) {
        const int in = widths[l - 1], out = widths[l];
        const double* W = params.data() + off[l];
        double* gW = grad.data() + off[l];
        double* gb = gW + static_cast<std::size_t>(out) * in;
        const auto& d = s.delta[l];
        for (int o = 0; o < out; ++o) {
            const double dv = d[o];
            double* grow = gW + static_cast<std::size_t>(o) * in;
            for (int i = 0; i < in; ++i) grow[i] += dv * s.act[l - 1][i];
            gb[o] += dv;
        }
        if (l > 1) {
            auto& dprev = s.delta[l - 1];
            std::fill(dprev.begin(), dprev.end(), 0.0);
            for (int o = 0; o < out; ++o) {
                const double dv = d[o];
                const double* wrow = W + static_cast<std::size_t>(o) * in;
                for (int i = 0; i < in; ++i) dprev[i] += dv * wrow[i];
            }
            for (int i = 0; i < in; ++i)
                if (s.act[l - 1][i] <= 0.0) dprev[i] = 0.0;  // ReLU subgradient, 0 at the kink
        }
    }
}

}  // namespace

long ModelArch::param_count() const {
    long total = 0;
    int prev = input_dim;
    if (kind == Kind::Mlp)
        for (int h : hidden) {
            total += static_cast<long>(h) * prev + h;
            prev = h;
        }
    total += static_cast<long>(num_classes) * prev + num_classes;
    return total;
}

void ModelArch::validate() const {
    if (input_dim < 1 || num_classes < 2) throw std::domain_error("arch: need input_dim >= 1, classes >= 2");
    if (kind == Kind::LinearSoftmax && !hidden.empty())
        throw std::domain_error("arch: linear softmax takes no hidden layers");
    for (int h : hidden)
        if (h < 1) throw std::domain_error("arch: hidden widths must be positive");
}

SoftmaxNet::SoftmaxNet(ModelArch arch) : arch_(std::move(arch)) {
    arch_.validate();
    widths_ = layer_widths(arch_);
}

GradEval SoftmaxNet::loss_grad(std::span<const double> params, const data::Dataset& ds,
                               std::span<const long> view) const {
    check_view(view, "loss_grad");
    GradEval out;
    out.grad.assign(params.size(), 0.0);
    Scratch s = make_scratch(widths_);
    double loss_sum = 0.0;
    for (long idx : view) {
        forward(params, widths_, ds.row(idx), s);
        loss_sum += ce_loss_and_dlogits(s, ds.labels[idx], true);
        backward_accumulate(params, widths_, s, out.grad);
    }
    const double inv = 1.0 / static_cast<double>(view.size());
    out.loss = loss_sum * inv;
    for (double& g : out.grad) g *= inv;
    return out;
}

double SoftmaxNet::loss(std::span<const double> params, const data::Dataset& ds,
                        std::span<const long> view) const {
    check_view(view, "loss");
    Scratch s = make_scratch(widths_);
    double loss_sum = 0.0;
    for (long idx : view) {
        forward(params, widths_, ds.row(idx), s);
        loss_sum += ce_loss_and_dlogits(s, ds.labels[idx], false);
    }
    return loss_sum / static_cast<double>(view.size());
}

double SoftmaxNet::zero_one_risk(std::span<const double> params, const data::Dataset& ds,
                                 std::span<const long> view) const {
    check_view(view, "zero_one_risk");
    Scratch s = make_scratch(widths_);
    long errors = 0;
    for (long idx : view) {
        forward(params, widths_, ds.row(idx), s);
        const auto& logits = s.act.back();
        const int pred = static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                                          logits.begin());  // first max wins ties
        errors += (pred != ds.labels[idx]);
    }
    return static_cast<double>(errors) / static_cast<double>(view.size());
}

double SoftmaxNet::per_example_grad_norm_max(std::span<const double> params,
                                             const data::Dataset& ds,
                                             std::span<const long> view) const {
    check_view(view, "per_example_grad_norm_max");
    Scratch s = make_scratch(widths_);
    std::vector<double> grad(params.size());
    double best = 0.0;
    for (long idx : view) {
        std::fill(grad.begin(), grad.end(), 0.0);
        forward(params, widths_, ds.row(idx), s);
        ce_loss_and_dlogits(s, ds.labels[idx], true);
        backward_accumulate(params, widths_, s, grad);
        double sq = 0.0;
        for (double g : grad) sq += g * g;
        best = std::max(best, sq);
    }
    return std::sqrt(best);
}

std::vector<long> full_view(long n) {
    std::vector<long> v(n);
    std::iota(v.begin(), v.end(), 0L);
    return v;
}

std::vector<double> init_params(const ModelArch& arch, std::uint64_t seed) {
    arch.validate();
    const auto widths = layer_widths(arch);
    std::vector<double> params(arch.param_count());
    Rng rng(seed);
    std::size_t off = 0;
    for (std::size_t l = 1; l < widths.size(); ++l) {
        const int in = widths[l - 1], out = widths[l];
        const double scale = 1.0 / std::sqrt(static_cast<double>(in));
        const std::size_t count = static_cast<std::size_t>(out) * in + out;
        for (std::size_t i = 0; i < count; ++i)
            params[off + i] = scale * (2.0 * rng.uniform() - 1.0);
        off += count;
    }
    return params;
}

namespace {

constexpr char kCheckpointMagic[4] = {'P', 'C', 'K', '1'};

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    out.write(reinterpret_cast<const char*>(b), 4);
}
void put_u64(std::ostream& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
}
std::uint32_t get_u32(std::istream& in, const std::string& path, long long off) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError(path + ": truncated checkpoint header", off);
    return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
           (std::uint32_t(b[3]) << 24);
}
std::uint64_t get_u64(std::istream& in, const std::string& path, long long off) {
    const std::uint64_t lo = get_u32(in, path, off);
    const std::uint64_t hi = get_u32(in, path, off + 4);
    return lo | (hi << 32);
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelArch& arch, std::uint64_t seed,
                     std::span<const double> params) {
    if (static_cast<long>(params.size()) != arch.param_count())
        throw std::invalid_argument("save_checkpoint: params size does not match arch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError(path + ": cannot open for writing");
    out.write(kCheckpointMagic, 4);
    put_u32(out, arch.kind == ModelArch::Kind::Mlp ? 1 : 0);
    put_u32(out, static_cast<std::uint32_t>(arch.input_dim));
    put_u32(out, static_cast<std::uint32_t>(arch.num_classes));
    put_u32(out, static_cast<std::uint32_t>(arch.hidden.size()));
    for (int h : arch.hidden) put_u32(out, static_cast<std::uint32_t>(h));
    put_u64(out, seed);
    put_u64(out, static_cast<std::uint64_t>(params.size()));
    for (double v : params) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        put_u64(out, bits);
    }
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(path + ": cannot open");
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
        throw FormatError(path + ": bad checkpoint magic", 0);
    Checkpoint ck;
    const std::uint32_t kind = get_u32(in, path, 4);
    ck.arch.kind = kind == 1 ? ModelArch::Kind::Mlp : ModelArch::Kind::LinearSoftmax;
    ck.arch.input_dim = static_cast<int>(get_u32(in, path, 8));
    ck.arch.num_classes = static_cast<int>(get_u32(in, path, 12));
    const std::uint32_t n_hidden = get_u32(in, path, 16);
    for (std::uint32_t i = 0; i < n_hidden; ++i)
        ck.arch.hidden.push_back(static_cast<int>(get_u32(in, path, 20 + 4LL * i)));
    ck.seed = get_u64(in, path, 20 + 4LL * n_hidden);
    const std::uint64_t d = get_u64(in, path, 28 + 4LL * n_hidden);
    if (d != static_cast<std::uint64_t>(ck.arch.param_count()))
        throw FormatError(path + ": parameter count does not match arch descriptor");
    ck.params.resize(d);
    for (std::uint64_t i = 0; i < d; ++i) {
        const std::uint64_t bits = get_u64(in, path, 36 + 4LL * n_hidden + 8LL * i);
        std::memcpy(&ck.params[i], &bits, 8);
    }
    return ck;
}

}  // namespace paccert::nets
