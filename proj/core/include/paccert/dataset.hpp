#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "paccert/rng.hpp"

namespace paccert::data {

// Immutable after construction; features are row-major n x input_dim.
struct Dataset {
    std::vector<double> features;
    std::vector<int> labels;
    long n = 0;
    int input_dim = 0;
    int num_classes = 0;

    std::span<const double> row(long i) const {
        return {features.data() + static_cast<std::size_t>(i) * input_dim,
                static_cast<std::size_t>(input_dim)};
    }
    void validate() const;
};

// Prior index sequence J (order kept, elements distinct) and the sorted
// complement I. Consumers needing set semantics use the element set of J.
struct IndexSplit {
    std::vector<long> prior;       // J, as drawn
    std::vector<long> complement;  // I = [n] \ J, sorted
    long n = 0;

    long m() const { return static_cast<long>(prior.size()); }
    // checks the partition: J distinct, J and I disjoint, union = [0, n)
    void validate() const;
};

enum class BatchMode {
    WithoutReplacement,  // FSGD: b distinct indices from [n]
    WithReplacement,     // SGLD: b iid uniform draws, duplicates allowed
    StratifiedIJ,        // fixed counts drawn without replacement from I and from J
};

struct BatchSpec {
    long size = 0;
    BatchMode mode = BatchMode::WithoutReplacement;
    long from_complement = 0;  // StratifiedIJ only; counts must sum to size
    long from_prior = 0;
};

// IDX ingestion (big-endian, magic 0x803 images / 0x801 labels); raw bytes
// are scaled to [0,1].
Dataset load_idx(const std::string& image_path, const std::string& label_path);

// Companion writer, used by datagen to emit fixtures. Pixels are the raw
// bytes (callers pass values in [0,255]).
void write_idx(const std::string& image_path, const std::string& label_path,
               std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> labels,
               long n, int rows, int cols);

// Unit-variance Gaussian clusters at deterministic class centers (hypercube
// corners scaled by `separation`), reproducible per seed.
Dataset synth_blobs(long n, int input_dim, int num_classes, double separation, std::uint64_t seed);

// Resamples the labels of exactly round(n*portion) rows, chosen without
// replacement, uniformly over [0, num_classes). A resampled row may keep its
// original label by chance.
Dataset corrupt_labels(const Dataset& ds, double portion, std::uint64_t seed);

// J: m indices uniform over all m-permutations of [n] without replacement.
IndexSplit sample_prior_indices(long n, long m, std::uint64_t seed);

std::vector<long> sample_batch(const IndexSplit& split, const BatchSpec& spec, Rng& rng);

// CSV export with header "index,label,f0,f1,...".
void write_csv(const Dataset& ds, std::ostream& out);

}  // namespace paccert::data
