// Path ensemble storage.
//
// Fields are stored time-major: the cross-section at a fixed time node is
// contiguous, because every distorted quantity in this toolkit is a
// functional of time-slices (empirical ranks across paths at fixed t).
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "prospect/errors.hpp"
#include "prospect/model.hpp"

namespace prospect {

class TimeMajor {
public:
    TimeMajor() = default;
    TimeMajor(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& at(std::size_t row, std::size_t col) { return data_[row * cols_ + col]; }
    double at(std::size_t row, std::size_t col) const { return data_[row * cols_ + col]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

struct PathEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;

    TimeMajor increments;  // dW, rows = steps
    TimeMajor state;       // X,  rows = steps + 1
    TimeMajor control;     // realized u, rows = steps + 1 (node N carried forward)
    TimeMajor kernel;      // pricing kernel rho, rows = steps + 1 (optional)

    // Number of (node, path) slots where an additive scheme was clipped at
    // the positivity floor.
    std::size_t floor_hits = 0;

    bool has_kernel() const { return !kernel.empty(); }
};

} // namespace prospect
