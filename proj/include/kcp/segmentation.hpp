#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kcp/errors.hpp"

namespace kcp {

/// A segmentation of {1..n}: strictly increasing boundaries
/// 0 = tau_0 < tau_1 < ... < tau_D = n. Segment l is {tau_{l-1}+1, ..., tau_l}.
class Segmentation {
public:
    Segmentation() = default;

    explicit Segmentation(std::vector<std::size_t> boundaries)
        : boundaries_(std::move(boundaries)) {
        validate();
    }

    Segmentation(std::initializer_list<std::size_t> boundaries)
        : boundaries_(boundaries) {
        validate();
    }

    /// The one-segment segmentation [0, n].
    static Segmentation trivial(std::size_t n) {
        return Segmentation({0, n});
    }

    /// The n-segment segmentation [0, 1, ..., n].
    static Segmentation singletons(std::size_t n) {
        std::vector<std::size_t> b(n + 1);
        for (std::size_t i = 0; i <= n; ++i) b[i] = i;
        return Segmentation(std::move(b));
    }

    const std::vector<std::size_t>& boundaries() const { return boundaries_; }
    std::size_t n() const { return boundaries_.back(); }
    std::size_t num_segments() const { return boundaries_.size() - 1; }

    std::size_t segment_begin(std::size_t l) const { return boundaries_[l]; }
    std::size_t segment_end(std::size_t l) const { return boundaries_[l + 1]; }
    std::size_t segment_length(std::size_t l) const {
        return boundaries_[l + 1] - boundaries_[l];
    }

    /// Inner change-points tau_1 .. tau_{D-1}.
    std::span<const std::size_t> inner_changepoints() const {
        return {boundaries_.data() + 1, boundaries_.size() - 2};
    }

    std::size_t min_segment_length() const {
        std::size_t m = n();
        for (std::size_t l = 0; l < num_segments(); ++l)
            m = std::min(m, segment_length(l));
        return m;
    }

    std::size_t max_segment_length() const {
        std::size_t m = 0;
        for (std::size_t l = 0; l < num_segments(); ++l)
            m = std::max(m, segment_length(l));
        return m;
    }

    double lambda_min() const {
        return static_cast<double>(min_segment_length()) / static_cast<double>(n());
    }

    double lambda_max() const {
        return static_cast<double>(max_segment_length()) / static_cast<double>(n());
    }

    /// Index of the segment containing 1-based observation i.
    std::size_t segment_of(std::size_t i) const {
        const auto it =
            std::lower_bound(boundaries_.begin() + 1, boundaries_.end(), i);
        return static_cast<std::size_t>(it - boundaries_.begin()) - 1;
    }

    /// New segmentation with an extra change-point at b.
    Segmentation refined_with(std::size_t b) const {
        if (b == 0 || b >= n())
            throw invalid_input("refined_with: change-point must lie strictly inside (0, n)");
        std::vector<std::size_t> out = boundaries_;
        const auto it = std::lower_bound(out.begin(), out.end(), b);
        if (it != out.end() && *it == b)
            throw invalid_input("refined_with: change-point already present");
        out.insert(it, b);
        return Segmentation(std::move(out));
    }

    bool operator==(const Segmentation& other) const {
        return boundaries_ == other.boundaries_;
    }

    std::string to_string() const {
        std::string s = "[";
        for (std::size_t i = 0; i < boundaries_.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(boundaries_[i]);
        }
        s += "]";
        return s;
    }

private:
    void validate() const {
        if (boundaries_.size() < 2)
            throw invalid_input("segmentation needs at least boundaries [0, n]");
        if (boundaries_.front() != 0)
            throw invalid_input("segmentation must start at 0");
        for (std::size_t i = 1; i < boundaries_.size(); ++i)
            if (boundaries_[i] <= boundaries_[i - 1])
                throw invalid_input("segmentation boundaries must be strictly increasing");
    }

    std::vector<std::size_t> boundaries_;
};

}  // namespace kcp
