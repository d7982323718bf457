#include "data/pairing.hpp"

#include "core/error.hpp"
#include "core/rng.hpp"

namespace caa::data {

PairStream pair_sampler(const StandardizedSet& test_set, std::uint8_t target_class,
                        std::uint64_t seed) {
    if (target_class > 9) raise(ErrorKind::Protocol, "target class out of range");

    std::vector<int> class_members;
    for (int i = 0; i < test_set.count(); ++i)
        if (test_set.labels[std::size_t(i)] == target_class) class_members.push_back(i);
    if (class_members.empty())
        raise(ErrorKind::Protocol, "no samples of target class " +
                                       std::to_string(int(target_class)) + " in test set");

    PairStream stream;
    stream.target_class = target_class;
    stream.seed = seed;

    Rng rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, class_members.size() - 1);
    for (int i = 0; i < test_set.count(); ++i) {
        const std::uint8_t label = test_set.labels[std::size_t(i)];
        if (label == target_class) continue;
        Pair p;
        p.original_index = i;
        p.original_label = label;
        p.target_index = class_members[pick(rng)];
        p.target_label = target_class;
        stream.pairs.push_back(p);
    }
    return stream;
}

std::vector<PairStream> full_pairing(const StandardizedSet& test_set,
                                     std::uint64_t master_seed) {
    std::vector<PairStream> out;
    out.reserve(10);
    for (int c = 0; c < 10; ++c)
        out.push_back(pair_sampler(test_set, std::uint8_t(c),
                                   child_seed(master_seed, std::uint64_t(c))));
    return out;
}

} // namespace caa::data
