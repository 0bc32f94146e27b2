#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mixsde {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniform grid t_k = k*T/n, k = 0..n, on [0, T].
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t steps);

    double horizon() const noexcept { return horizon_; }
    std::size_t steps() const noexcept { return steps_; }
    std::size_t points() const noexcept { return steps_ + 1; }
    double step() const noexcept { return horizon_ / static_cast<double>(steps_); }
    double time(std::size_t k) const noexcept {
        return k == steps_ ? horizon_ : horizon_ * static_cast<double>(k) / static_cast<double>(steps_);
    }
    /// Grid index of time t; throws unless t lies on the grid (to 1e-9 relative).
    std::size_t index_of(double t) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t steps_;
};

/// Values of a d-dimensional process on a TimeGrid, one row per grid point.
class SamplePath {
public:
    SamplePath(TimeGrid grid, std::size_t dimension, std::vector<std::string> labels = {});
    SamplePath(TimeGrid grid, RowMatrix values, std::vector<std::string> labels = {});

    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    const RowMatrix& values() const noexcept { return values_; }
    RowMatrix& values() noexcept { return values_; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }

    double operator()(std::size_t k, std::size_t component) const {
        return values_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(component));
    }
    double& operator()(std::size_t k, std::size_t component) {
        return values_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(component));
    }
    auto row(std::size_t k) const { return values_.row(static_cast<Eigen::Index>(k)); }
    auto row(std::size_t k) { return values_.row(static_cast<Eigen::Index>(k)); }

    /// Single component as a scalar path.
    SamplePath component(std::size_t c) const;

    bool all_finite() const { return values_.allFinite(); }

private:
    TimeGrid grid_;
    RowMatrix values_;
    std::vector<std::string> labels_;
};

/// max_k |p(t_k)| (Euclidean norm of each value vector).
double sup_norm(const SamplePath& p);

enum class HolderMode {
    Exact,     ///< all O(n^2) grid pairs
    Windowed,  ///< pairs with t - s <= T/8, plus power-of-two lags beyond
    Auto,      ///< Exact for n <= 2^13, Windowed above
};

/// max over grid pairs s < t of |p(t) - p(s)| / (t - s)^theta.
double holder_seminorm(const SamplePath& p, double theta, HolderMode mode = HolderMode::Auto);

/// Keeps every `stride`-th grid point. Increments of the result are exact sums of the
/// original increments, so a fine noise path restricts to a coarse one exactly.
SamplePath restrict_path(const SamplePath& p, std::size_t stride);

/// CSV: header "t,<labels...>", then one row per grid point. Lines of `preamble`
/// are written first, each prefixed with "# ".
void write_csv(std::ostream& out, const SamplePath& p, const std::vector<std::string>& preamble = {});
SamplePath read_csv(std::istream& in);

}  // namespace mixsde
