#pragma once

#include <cstddef>

namespace nlresp {

/// Uniform time axis t_k = k * step, k = 0 .. count-1, in fs.
struct TimeGrid {
    double step_fs = 1.0;
    std::size_t count = 1;

    double at(std::size_t k) const { return step_fs * static_cast<double>(k); }
    double last() const { return at(count - 1); }
    /// Throws DomainError unless step > 0 and count >= 1.
    void validate() const;
};

} // namespace nlresp
