#include "report/grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "core/error.hpp"
#include "core/rng.hpp"

namespace caa::report {

namespace {

constexpr int kCell = 32;
constexpr int kGutter = 2;

// 5x7 glyphs for the Yes/No annotations.
struct Glyph {
    char ch;
    const char* rows[7];
};

const Glyph kGlyphs[] = {
    {'Y', {"10001", "10001", "01010", "00100", "00100", "00100", "00100"}},
    {'e', {"00000", "00000", "01110", "10001", "11111", "10000", "01110"}},
    {'s', {"00000", "00000", "01111", "10000", "01110", "00001", "11110"}},
    {'N', {"10001", "11001", "11001", "10101", "10011", "10011", "10001"}},
    {'o', {"00000", "00000", "01110", "10001", "10001", "10001", "01110"}},
};

const Glyph* find_glyph(char c) {
    for (const auto& g : kGlyphs)
        if (g.ch == c) return &g;
    return nullptr;
}

void draw_text(GrayImage& img, int y0, int x0, const std::string& text, int scale) {
    int x = x0;
    for (char c : text) {
        const Glyph* g = find_glyph(c);
        if (!g) {
            x += 4 * scale;
            continue;
        }
        for (int gy = 0; gy < 7; ++gy)
            for (int gx = 0; gx < 5; ++gx)
                if (g->rows[gy][gx] == '1')
                    for (int sy = 0; sy < scale; ++sy)
                        for (int sx = 0; sx < scale; ++sx) {
                            const int py = y0 + gy * scale + sy;
                            const int px = x + gx * scale + sx;
                            if (py >= 0 && py < img.height && px >= 0 && px < img.width)
                                img.at(py, px) = 255;
                        }
        x += 6 * scale;
    }
}

// De-standardize, clamp to [0,1], upscale, and blit.
void blit_cell(GrayImage& img, int y0, int x0, const float* cell32,
               const data::StandardizationStats& stats, int scale) {
    for (int y = 0; y < kCell * scale; ++y) {
        for (int x = 0; x < kCell * scale; ++x) {
            const float v = cell32[(y / scale) * kCell + (x / scale)];
            const double raw = double(v) * stats.std + stats.mean;
            const double clamped = std::clamp(raw, 0.0, 1.0);
            img.at(y0 + y, x0 + x) = std::uint8_t(std::lround(clamped * 255.0));
        }
    }
}

} // namespace

GrayImage render_grid(const data::StandardizedSet& test_set,
                      const data::StandardizationStats& stats,
                      const std::vector<VariantColumn>& columns, const GridOptions& options) {
    if (columns.empty()) raise(ErrorKind::Protocol, "render_grid needs at least one variant");
    if (options.n_examples < 1) raise(ErrorKind::InvalidArgument, "n_examples must be >= 1");
    const int scale = std::max(1, options.cell_scale);

    // pair ids present in every variant column
    std::map<std::int64_t, std::vector<int>> row_of; // pair_id -> per-column record row
    for (std::size_t ci = 0; ci < columns.size(); ++ci) {
        for (std::size_t ri = 0; ri < columns[ci].records.size(); ++ri) {
            const auto& rec = columns[ci].records[ri];
            auto& rows = row_of[rec.pair_id];
            if (rows.size() == ci) rows.push_back(int(ri));
        }
    }
    std::vector<std::int64_t> common;
    for (const auto& [pid, rows] : row_of)
        if (rows.size() == columns.size()) common.push_back(pid);
    if (common.empty())
        raise(ErrorKind::Protocol, "no pair ids shared by all variant record sets");

    int n = options.n_examples;
    if (n > int(common.size())) {
        std::fprintf(stderr,
                     "[caa] render-grid: requested %d examples but only %zu pairs "
                     "available; clipping\n",
                     n, common.size());
        n = int(common.size());
    }
    Rng rng = make_rng(options.seed);
    std::shuffle(common.begin(), common.end(), rng);
    common.resize(std::size_t(n));
    std::sort(common.begin(), common.end());

    const int cols = 2 + int(columns.size());
    const int cell_px = kCell * scale;
    GrayImage img;
    img.width = cols * cell_px + (cols + 1) * kGutter;
    img.height = n * cell_px + (n + 1) * kGutter;
    img.pixels.assign(std::size_t(img.width) * img.height, 32); // dark separators

    for (int row = 0; row < n; ++row) {
        const std::int64_t pid = common[std::size_t(row)];
        const auto& rows = row_of[pid];
        const auto& rec0 = columns[0].records[std::size_t(rows[0])];
        const int y0 = kGutter + row * (cell_px + kGutter);

        blit_cell(img, y0, kGutter, test_set.image(rec0.orig_index), stats, scale);
        blit_cell(img, y0, kGutter + (cell_px + kGutter), test_set.image(rec0.target_index),
                  stats, scale);

        for (std::size_t ci = 0; ci < columns.size(); ++ci) {
            const auto& col = columns[ci];
            const auto& rec = col.records[std::size_t(rows[ci])];
            const int x0 = kGutter + int(2 + ci) * (cell_px + kGutter);
            blit_cell(img, y0, x0,
                      col.xa_images.data() + std::int64_t(rows[ci]) * kCell * kCell, stats,
                      scale);
            // darken a strip so the annotation stays legible
            const int strip_h = 9 * scale / 2 + 2;
            for (int y = 0; y < strip_h; ++y)
                for (int x = 0; x < 6 * 4 * scale / 2; ++x)
                    img.at(y0 + y, x0 + x) = std::uint8_t(img.at(y0 + y, x0 + x) / 3);
            draw_text(img, y0 + 1, x0 + 1, rec.fooled ? "Yes" : "No",
                      std::max(1, scale / 2));
        }
    }
    return img;
}

} // namespace caa::report
