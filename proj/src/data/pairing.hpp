#pragma once

#include <cstdint>
#include <vector>

#include "data/dataset.hpp"

namespace caa::data {

struct Pair {
    int original_index = 0;
    std::uint8_t original_label = 0;
    int target_index = 0;
    std::uint8_t target_label = 0;
};

struct PairStream {
    std::vector<Pair> pairs;
    std::uint8_t target_class = 0;
    std::uint64_t seed = 0;
};

// One pair per test sample whose label differs from target_class; the target
// is drawn uniformly from the target class. The original sequence is the test
// order and does not depend on the seed; only target assignments do.
PairStream pair_sampler(const StandardizedSet& test_set, std::uint8_t target_class,
                        std::uint64_t seed);

// All ten per-class streams, each with a child seed derived from master_seed.
std::vector<PairStream> full_pairing(const StandardizedSet& test_set,
                                     std::uint64_t master_seed);

} // namespace caa::data
