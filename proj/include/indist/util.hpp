#pragma once

#include <charconv>
#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace indist {

inline double clamp01(double v) {
    if (v < 0.0) return 0.0;
    if (v > 1.0) return 1.0;
    return v;
}

// Shortest round-trip decimal representation; stable across runs, so report
// files are byte-identical for identical inputs.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (const double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Lightweight view over a row-major matrix.
struct MatrixView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::span<const double> row(std::size_t i) const { return {data + i * cols, cols}; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    bool empty() const { return rows == 0; }
};

} // namespace indist
