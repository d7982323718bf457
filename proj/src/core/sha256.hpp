#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace caa {

// Minimal streaming SHA-256. Content hashes link checkpoints, records and
// manifests together, so the implementation must be stable across builds.
class Sha256 {
public:
    Sha256() { reset(); }

    void reset();
    void update(const void* data, std::size_t len);
    std::array<std::uint8_t, 32> digest();

    static std::string hex(const void* data, std::size_t len);
    static std::string hex_of_file(const std::string& path);

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t total_len_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffer_len_ = 0;
};

std::string to_hex(const std::array<std::uint8_t, 32>& digest);

} // namespace caa
