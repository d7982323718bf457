#pragma once

#include <cstddef>
#include <vector>

namespace caa {

// Reusable thread-local buffer for large layer temporaries. Avoids the
// mmap/page-fault churn of allocating tens of MB per forward call. Each slot
// is an independent buffer; a call site picks a fixed slot and must not hold
// the pointer across calls into other layer code that may use the same slot.
inline float* scratch_floats(int slot, std::size_t n) {
    constexpr int kSlots = 6;
    static thread_local std::vector<float> bufs[kSlots];
    auto& b = bufs[slot % kSlots];
    if (b.size() < n) b.resize(n);
    return b.data();
}

} // namespace caa
