#include "data/idx.hpp"

#include <zlib.h>

#include <cstring>

#include "core/error.hpp"

namespace caa::data {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

// gzread handles both gzip streams and plain files, so one reader covers the
// uncompressed originals and their .gz variants.
class GzReader {
public:
    explicit GzReader(const std::string& path) : path_(path) {
        f_ = gzopen(path.c_str(), "rb");
        if (!f_) raise(ErrorKind::Io, "cannot open: " + path);
    }
    ~GzReader() {
        if (f_) gzclose(f_);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    // Reads exactly n bytes or raises a corruption error.
    void read_exact(void* dst, std::size_t n) {
        std::size_t got = 0;
        auto* p = static_cast<std::uint8_t*>(dst);
        while (got < n) {
            const unsigned chunk = unsigned(std::min<std::size_t>(n - got, 1u << 20));
            const int r = gzread(f_, p + got, chunk);
            if (r <= 0)
                raise(ErrorKind::Corruption,
                      "truncated payload in " + path_ + " (wanted " + std::to_string(n) +
                          " bytes, got " + std::to_string(got) + ")");
            got += std::size_t(r);
        }
    }

    bool at_eof() {
        std::uint8_t probe;
        const int r = gzread(f_, &probe, 1);
        return r == 0;
    }

    std::uint32_t read_be_u32() {
        std::uint8_t b[4];
        read_exact(b, 4);
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }

private:
    std::string path_;
    gzFile f_ = nullptr;
};

} // namespace

IdxArray load_idx(const std::string& path, IdxKind kind) {
    GzReader in(path);

    const std::uint32_t magic = in.read_be_u32();
    const std::uint32_t expected = kind == IdxKind::Images ? kImagesMagic : kLabelsMagic;
    if (magic != expected)
        raise(ErrorKind::Format, "bad IDX magic in " + path + ": got 0x" +
                                     [&] {
                                         char buf[16];
                                         std::snprintf(buf, sizeof buf, "%08x", magic);
                                         return std::string(buf);
                                     }() +
                                     ", expected 0x" +
                                     (kind == IdxKind::Images ? "00000803" : "00000801"));

    const int ndims = kind == IdxKind::Images ? 3 : 1;
    IdxArray arr;
    arr.dims.resize(std::size_t(ndims));
    std::uint64_t total = 1;
    for (int i = 0; i < ndims; ++i) {
        arr.dims[std::size_t(i)] = in.read_be_u32();
        total *= arr.dims[std::size_t(i)];
    }
    if (total > (1ull << 32))
        raise(ErrorKind::Format, "implausible IDX payload size in " + path);

    arr.bytes.resize(std::size_t(total));
    in.read_exact(arr.bytes.data(), arr.bytes.size());
    if (!in.at_eof())
        raise(ErrorKind::Corruption, "trailing bytes after declared payload in " + path);
    return arr;
}

std::vector<float> idx_images_to_float(const IdxArray& arr) {
    std::vector<float> out(arr.bytes.size());
    for (std::size_t i = 0; i < arr.bytes.size(); ++i) out[i] = float(arr.bytes[i]) / 255.0f;
    return out;
}

} // namespace caa::data
