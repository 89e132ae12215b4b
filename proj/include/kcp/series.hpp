#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "kcp/errors.hpp"

namespace kcp {

/// An ordered sample X_1..X_n of d-dimensional observations, stored row-major.
struct Series {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> data;  // n * dim, row i = observation X_{i+1}

    Series() = default;

    Series(std::size_t n_, std::size_t dim_)
        : n(n_), dim(dim_), data(n_ * dim_, 0.0) {}

    Series(std::size_t n_, std::size_t dim_, std::vector<double> values)
        : n(n_), dim(dim_), data(std::move(values)) {
        if (data.size() != n * dim)
            throw invalid_input("series: data size does not match n * dim");
    }

    static Series from_scalar(std::vector<double> values) {
        const std::size_t n = values.size();
        return Series(n, 1, std::move(values));
    }

    static Series scalar(std::initializer_list<double> values) {
        return from_scalar(std::vector<double>(values));
    }

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }

    double& at(std::size_t i, std::size_t j) { return data[i * dim + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * dim + j]; }
};

}  // namespace kcp
