#include "paccert/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "paccert/errors.hpp"

namespace paccert::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& path, long long offset) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    if (!in) throw FormatError(path + ": truncated while reading 32-bit field", offset);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) | (std::uint32_t(b[2]) << 8) |
           std::uint32_t(b[3]);
}

void write_be32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

// First `m` slots of a Fisher-Yates shuffle over [0, n); uniform over all
// m-permutations.
std::vector<long> partial_shuffle(long n, long m, Rng& rng) {
    std::vector<long> idx(n);
    for (long i = 0; i < n; ++i) idx[i] = i;
    for (long i = 0; i < m; ++i) {
        const long j = i + static_cast<long>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
}

std::vector<long> draw_without_replacement(std::span<const long> pool, long count, Rng& rng) {
    std::vector<long> scratch(pool.begin(), pool.end());
    const long n = static_cast<long>(scratch.size());
    for (long i = 0; i < count; ++i) {
        const long j = i + static_cast<long>(rng.uniform_below(static_cast<std::uint64_t>(n - i)));
        std::swap(scratch[i], scratch[j]);
    }
    scratch.resize(count);
    return scratch;
}

}  // namespace

void Dataset::validate() const {
    if (n < 0 || input_dim <= 0 || num_classes <= 0)
        throw std::domain_error("dataset: dimensions must be positive");
    if (static_cast<long>(labels.size()) != n ||
        features.size() != static_cast<std::size_t>(n) * input_dim)
        throw std::domain_error("dataset: feature/label sizes inconsistent with n");
    for (double f : features)
        if (!std::isfinite(f)) throw std::domain_error("dataset: non-finite feature");
    for (int y : labels)
        if (y < 0 || y >= num_classes) throw std::domain_error("dataset: label out of range");
}

void IndexSplit::validate() const {
    if (static_cast<long>(prior.size() + complement.size()) != n)
        throw std::invalid_argument("index split: |J| + |I| != n");
    std::vector<char> seen(n, 0);
    for (long j : prior) {
        if (j < 0 || j >= n) throw std::invalid_argument("index split: prior index out of range");
        if (seen[j]++) throw std::invalid_argument("index split: duplicate prior index");
    }
    for (long i : complement) {
        if (i < 0 || i >= n)
            throw std::invalid_argument("index split: complement index out of range");
        if (seen[i]++) throw std::invalid_argument("index split: complement overlaps the prior");
    }
}

Dataset load_idx(const std::string& image_path, const std::string& label_path) {
    std::ifstream img(image_path, std::ios::binary);
    if (!img) throw FormatError(image_path + ": cannot open");
    const std::uint32_t img_magic = read_be32(img, image_path, 0);
    if (img_magic != kImageMagic)
        throw FormatError(image_path + ": bad image magic " + std::to_string(img_magic), 0);
    const std::uint32_t count = read_be32(img, image_path, 4);
    const std::uint32_t rows = read_be32(img, image_path, 8);
    const std::uint32_t cols = read_be32(img, image_path, 12);

    std::ifstream lab(label_path, std::ios::binary);
    if (!lab) throw FormatError(label_path + ": cannot open");
    const std::uint32_t lab_magic = read_be32(lab, label_path, 0);
    if (lab_magic != kLabelMagic)
        throw FormatError(label_path + ": bad label magic " + std::to_string(lab_magic), 0);
    const std::uint32_t lab_count = read_be32(lab, label_path, 4);
    if (lab_count != count)
        throw FormatError(label_path + ": label count " + std::to_string(lab_count) +
                              " does not match image count " + std::to_string(count),
                          4);

    Dataset ds;
    ds.n = count;
    ds.input_dim = static_cast<int>(rows * cols);
    ds.features.resize(static_cast<std::size_t>(count) * rows * cols);

    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < count; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!img)
            throw FormatError(image_path + ": truncated pixel data at image " + std::to_string(i),
                              16 + static_cast<long long>(i) * buf.size());
        for (std::size_t j = 0; j < buf.size(); ++j)
            ds.features[static_cast<std::size_t>(i) * buf.size() + j] = buf[j] / 255.0;
    }

    ds.labels.resize(count);
    int max_label = 0;
    for (std::uint32_t i = 0; i < count; ++i) {
        unsigned char y;
        lab.read(reinterpret_cast<char*>(&y), 1);
        if (!lab)
            throw FormatError(label_path + ": truncated label data at row " + std::to_string(i),
                              8 + static_cast<long long>(i));
        ds.labels[i] = y;
        max_label = std::max(max_label, static_cast<int>(y));
    }
    ds.num_classes = std::max(10, max_label + 1);
    ds.validate();
    return ds;
}

void write_idx(const std::string& image_path, const std::string& label_path,
               std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels, long n,
               int rows, int cols) {
    if (static_cast<long>(labels.size()) != n ||
        pixels.size() != static_cast<std::size_t>(n) * rows * cols)
        throw std::domain_error("write_idx: buffer sizes inconsistent with n/rows/cols");
    std::ofstream img(image_path, std::ios::binary);
    if (!img) throw FormatError(image_path + ": cannot open for writing");
    write_be32(img, kImageMagic);
    write_be32(img, static_cast<std::uint32_t>(n));
    write_be32(img, static_cast<std::uint32_t>(rows));
    write_be32(img, static_cast<std::uint32_t>(cols));
    img.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));

    std::ofstream lab(label_path, std::ios::binary);
    if (!lab) throw FormatError(label_path + ": cannot open for writing");
    write_be32(lab, kLabelMagic);
    write_be32(lab, static_cast<std::uint32_t>(n));
    lab.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

Dataset synth_blobs(long n, int input_dim, int num_classes, double separation, std::uint64_t seed) {
    if (n < num_classes || input_dim < 1 || num_classes < 1)
        throw std::domain_error("synth_blobs: need n >= num_classes and positive dimensions");
    if (!(separation >= 0.0)) throw std::domain_error("synth_blobs: separation must be >= 0");

    // Class centers at hypercube corners (binary code of the class index),
    // falling back to axis cycling when 2^dim < classes.
    auto center = [&](int c, int j) -> double {
        if (input_dim < 60 && num_classes > (1L << input_dim))
            return (j == c % input_dim) ? separation * (1 + c / input_dim) : 0.0;
        const int bit = (j < 31) ? ((c >> j) & 1) : 0;
        return separation * (bit ? 0.5 : -0.5);
    };

    Rng rng(seed);
    Dataset ds;
    ds.n = n;
    ds.input_dim = input_dim;
    ds.num_classes = num_classes;
    ds.features.resize(static_cast<std::size_t>(n) * input_dim);
    ds.labels.resize(n);
    for (long i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % num_classes);
        ds.labels[i] = c;
        for (int j = 0; j < input_dim; ++j)
            ds.features[static_cast<std::size_t>(i) * input_dim + j] = center(c, j) + rng.normal();
    }
    return ds;
}

Dataset corrupt_labels(const Dataset& ds, double portion, std::uint64_t seed) {
    if (!(portion >= 0.0 && portion <= 1.0))
        throw std::domain_error("corrupt_labels: portion must lie in [0,1]");
    Dataset out = ds;
    const long count = std::lround(static_cast<double>(ds.n) * portion);
    Rng rng(seed);
    const auto rows = partial_shuffle(ds.n, count, rng);
    for (long r : rows)
        out.labels[r] = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(ds.num_classes)));
    return out;
}

IndexSplit sample_prior_indices(long n, long m, std::uint64_t seed) {
    if (m < 0 || m >= n) throw std::domain_error("sample_prior_indices: need 0 <= m < n");
    Rng rng(seed);
    IndexSplit split;
    split.n = n;
    split.prior = partial_shuffle(n, m, rng);
    std::vector<char> in_prior(n, 0);
    for (long j : split.prior) in_prior[j] = 1;
    split.complement.reserve(n - m);
    for (long i = 0; i < n; ++i)
        if (!in_prior[i]) split.complement.push_back(i);
    return split;
}

std::vector<long> sample_batch(const IndexSplit& split, const BatchSpec& spec, Rng& rng) {
    const long n = split.n;
    switch (spec.mode) {
        case BatchMode::WithoutReplacement: {
            if (spec.size < 1 || spec.size > n)
                throw std::domain_error("sample_batch: size must lie in [1, n]");
            return partial_shuffle(n, spec.size, rng);
        }
        case BatchMode::WithReplacement: {
            if (spec.size < 1) throw std::domain_error("sample_batch: size must be >= 1");
            std::vector<long> out(spec.size);
            for (long& v : out) v = static_cast<long>(rng.uniform_below(static_cast<std::uint64_t>(n)));
            return out;
        }
        case BatchMode::StratifiedIJ: {
            if (spec.from_complement + spec.from_prior != spec.size)
                throw std::domain_error("sample_batch: stratified counts must sum to batch size");
            if (spec.from_complement > static_cast<long>(split.complement.size()) ||
                spec.from_prior > static_cast<long>(split.prior.size()))
                throw std::domain_error("sample_batch: stratified count exceeds side size");
            auto out = draw_without_replacement(split.complement, spec.from_complement, rng);
            const auto from_j = draw_without_replacement(split.prior, spec.from_prior, rng);
            out.insert(out.end(), from_j.begin(), from_j.end());
            return out;
        }
    }
    throw std::domain_error("sample_batch: unknown mode");
}

void write_csv(const Dataset& ds, std::ostream& out) {
    out << "index,label";
    for (int j = 0; j < ds.input_dim; ++j) out << ",f" << j;
    out << "\n";
    char buf[32];
    for (long i = 0; i < ds.n; ++i) {
        out << i << ',' << ds.labels[i];
        const auto r = ds.row(i);
        for (double v : r) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out << ',' << buf;
        }
        out << "\n";
    }
}

}  // namespace paccert::data
