#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace segsweep {

// Row-major 2-D array for one CT section.
template <typename T>
struct Grid {
    int rows = 0;
    int cols = 0;
    std::vector<T> values;

    Grid() = default;
    Grid(int r, int c, T fill = T{})
        : rows(r), cols(c), values(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}

    std::size_t size() const { return values.size(); }

    T& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }

    std::span<const T> view() const { return values; }

    bool operator==(const Grid&) const = default;
};

using ProbabilityGrid = Grid<float>;
// 0/1 per pixel; uint8_t rather than bool so the storage is contiguous.
using MaskGrid = Grid<std::uint8_t>;

inline std::size_t count_nonzero(const MaskGrid& g) {
    std::size_t n = 0;
    for (auto v : g.values) n += (v != 0);
    return n;
}

} // namespace segsweep
