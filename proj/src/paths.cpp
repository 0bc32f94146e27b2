#include "mixsde/paths.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "mixsde/error.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

TimeGrid::TimeGrid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw Error("time horizon must be positive and finite");
    if (steps == 0) throw Error("time grid needs at least one step");
}

std::size_t TimeGrid::index_of(double t) const {
    const double k = t / step();
    const double rounded = std::round(k);
    if (rounded < 0.0 || rounded > static_cast<double>(steps_) || std::abs(k - rounded) > 1e-9 * std::max(1.0, k))
        throw Error("time " + format_double(t) + " is not a grid point");
    return static_cast<std::size_t>(rounded);
}

SamplePath::SamplePath(TimeGrid grid, std::size_t dimension, std::vector<std::string> labels)
    : SamplePath(grid, RowMatrix::Zero(static_cast<Eigen::Index>(grid.points()), static_cast<Eigen::Index>(dimension)),
                 std::move(labels)) {}

SamplePath::SamplePath(TimeGrid grid, RowMatrix values, std::vector<std::string> labels)
    : grid_(grid), values_(std::move(values)), labels_(std::move(labels)) {
    if (static_cast<std::size_t>(values_.rows()) != grid_.points())
        throw Error("sample path needs one value per grid point");
    if (labels_.empty()) {
        for (Eigen::Index c = 0; c < values_.cols(); ++c) labels_.push_back("x" + std::to_string(c + 1));
    }
    if (labels_.size() != static_cast<std::size_t>(values_.cols())) throw Error("one label per component required");
}

SamplePath SamplePath::component(std::size_t c) const {
    RowMatrix col = values_.col(static_cast<Eigen::Index>(c));
    return SamplePath(grid_, std::move(col), {labels_.at(c)});
}

double sup_norm(const SamplePath& p) {
    return p.values().rowwise().norm().maxCoeff();
}

namespace {

double increment_norm(const RowMatrix& v, Eigen::Index s, Eigen::Index t) {
    return (v.row(t) - v.row(s)).norm();
}

}  // namespace

double holder_seminorm(const SamplePath& p, double theta, HolderMode mode) {
    if (!(theta > 0.0 && theta < 1.0)) throw Error("Hoelder exponent must lie in (0,1)");
    const auto n = static_cast<Eigen::Index>(p.grid().steps());
    const double h = p.grid().step();
    if (mode == HolderMode::Auto) mode = n <= (Eigen::Index{1} << 13) ? HolderMode::Exact : HolderMode::Windowed;
    const RowMatrix& v = p.values();

    double best = 0.0;
    auto scan_lag = [&](Eigen::Index lag) {
        const double scale = std::pow(static_cast<double>(lag) * h, -theta);
        double m = 0.0;
        if (v.cols() == 1) {
            for (Eigen::Index s = 0; s + lag <= n; ++s) m = std::max(m, std::abs(v(s + lag, 0) - v(s, 0)));
        } else {
            for (Eigen::Index s = 0; s + lag <= n; ++s) m = std::max(m, increment_norm(v, s, s + lag));
        }
        best = std::max(best, m * scale);
    };

    if (mode == HolderMode::Exact) {
        for (Eigen::Index lag = 1; lag <= n; ++lag) scan_lag(lag);
    } else {
        const Eigen::Index window = std::max<Eigen::Index>(1, n / 8);
        for (Eigen::Index lag = 1; lag <= window; ++lag) scan_lag(lag);
        for (Eigen::Index lag = 1; lag <= n; lag *= 2)
            if (lag > window) scan_lag(lag);
        if (n > window) scan_lag(n);
    }
    return best;
}

SamplePath restrict_path(const SamplePath& p, std::size_t stride) {
    const std::size_t n = p.grid().steps();
    if (stride == 0 || n % stride != 0) throw Error("restriction stride must divide the number of steps");
    TimeGrid coarse(p.grid().horizon(), n / stride);
    RowMatrix values(static_cast<Eigen::Index>(coarse.points()), p.values().cols());
    for (std::size_t k = 0; k < coarse.points(); ++k) values.row(static_cast<Eigen::Index>(k)) = p.row(k * stride);
    return SamplePath(coarse, std::move(values), p.labels());
}

void write_csv(std::ostream& out, const SamplePath& p, const std::vector<std::string>& preamble) {
    for (const auto& line : preamble) out << "# " << line << '\n';
    out << 't';
    for (const auto& label : p.labels()) out << ',' << label;
    out << '\n';
    for (std::size_t k = 0; k < p.grid().points(); ++k) {
        out << format_double(p.grid().time(k));
        for (std::size_t c = 0; c < p.dimension(); ++c) out << ',' << format_double(p(k, c));
        out << '\n';
    }
}

SamplePath read_csv(std::istream& in) {
    std::string line;
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split(line, ',');
        if (!header) {
            if (fields.empty() || fields[0] != "t") throw Error("CSV path must start with a 't' column");
            labels.assign(fields.begin() + 1, fields.end());
            header = true;
            continue;
        }
        if (fields.size() != labels.size() + 1) throw Error("CSV row has wrong number of columns");
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_double(f));
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw Error("CSV path needs at least two rows");
    const double horizon = rows.back()[0];
    TimeGrid grid(horizon, rows.size() - 1);
    RowMatrix values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(labels.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        if (std::abs(rows[k][0] - grid.time(k)) > 1e-9 * horizon) throw Error("CSV path grid is not uniform");
        for (std::size_t c = 0; c < labels.size(); ++c)
            values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) = rows[k][c + 1];
    }
    return SamplePath(grid, std::move(values), std::move(labels));
}

}  // namespace mixsde
