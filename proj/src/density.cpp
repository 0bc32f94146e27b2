#include "mixsde/density.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mixsde/error.hpp"
#include "mixsde/norris.hpp"
#include "mixsde/sde.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

std::string EnsembleConfig::fingerprint() const {
    if (!system) throw Error("ensemble needs a coefficient system");
    std::string text;
    for (const auto& line : system->describe()) text += line + "\n";
    for (Eigen::Index i = 0; i < x0.size(); ++i) text += format_double(x0(i)) + ",";
    text += "\nT=" + format_double(grid.horizon()) + " n=" + std::to_string(grid.steps());
    text += " H=" + format_double(H.value()) + " seed=" + std::to_string(seed);
    return hex64(fnv1a(text));
}

std::vector<double> Ensemble::column(std::size_t c) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = samples(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    return out;
}

Ensemble Ensemble::from_samples(RowMatrix samples) {
    Ensemble e;
    e.samples = std::move(samples);
    for (std::size_t i = 0; i < e.size(); ++i) e.path_ids.push_back(i);
    e.fingerprint = "synthetic";
    return e;
}

Ensemble run_ensemble(const EnsembleConfig& config, double t, std::size_t paths) {
    if (!config.system) throw Error("ensemble needs a coefficient system");
    if (paths == 0) throw Error("ensemble needs at least one path");
    const CoefficientSystem& sys = *config.system;
    const std::size_t t_index = config.grid.index_of(t);
    const NoiseModel model(config.grid, sys.m(), sys.l(), config.H);

    Ensemble e;
    e.t = config.grid.time(t_index);
    e.fingerprint = config.fingerprint();
    e.master_seed = config.seed;
    e.samples.resize(static_cast<Eigen::Index>(paths), static_cast<Eigen::Index>(sys.d()));
    e.path_ids.resize(paths);
    parallel_for(paths, [&](std::size_t p) {
        const NoiseBundle noise = model.draw(config.seed, p);
        SamplePath X = [&] {
            try {
                return solve_mixed_euler(sys, config.x0, noise);
            } catch (const SolverError& err) {
                throw SolverError(err.reason() + " (path " + std::to_string(p) + ", seed " +
                                      std::to_string(config.seed) + ")",
                                  err.step());
            }
        }();
        e.samples.row(static_cast<Eigen::Index>(p)) = X.row(t_index);
        e.path_ids[p] = p;
    });
    return e;
}

double silverman_bandwidth(std::span<const double> samples) {
    const double sd = std::sqrt(stats::variance(samples));
    std::vector<double> v(samples.begin(), samples.end());
    const double iqr = stats::quantile(v, 0.75) - stats::quantile(v, 0.25);
    const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
    return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityTable kde(std::span<const double> samples, std::optional<double> bandwidth) {
    if (samples.size() < 100) throw Error("KDE needs at least 100 samples");
    if (stats::variance(samples) <= 0.0) throw Error("KDE of a zero-variance sample");
    DensityTable table;
    table.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(samples);
    if (!(table.bandwidth > 0.0)) throw Error("KDE bandwidth must be positive");
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    const double start = *lo - 3.0 * table.bandwidth;
    const double stop = *hi + 3.0 * table.bandwidth;
    constexpr std::size_t points = 512;
    const double norm = 1.0 / (static_cast<double>(samples.size()) * table.bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < points; ++i) {
        const double x = start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
        double s = 0.0;
        for (double v : samples) {
            const double z = (x - v) / table.bandwidth;
            s += std::exp(-0.5 * z * z);
        }
        table.x.push_back(x);
        table.density.push_back(s * norm);
    }
    for (std::size_t i = 1; i < points; ++i)
        table.mass += 0.5 * (table.density[i] + table.density[i - 1]) * (table.x[i] - table.x[i - 1]);
    return table;
}

DensityTable kde(const Ensemble& ensemble, std::size_t component, std::optional<double> bandwidth) {
    if (component >= ensemble.dimension()) throw Error("component out of range");
    return kde(ensemble.column(component), bandwidth);
}

GaussianReport gaussian_check(const Ensemble& ensemble, const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov,
                              double level) {
    const auto d = static_cast<Eigen::Index>(ensemble.dimension());
    if (ensemble.size() < 100) throw Error("Gaussian check needs at least 100 samples");
    if (mean.size() != d || cov.rows() != d || cov.cols() != d) throw Error("target has wrong dimension");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success || (llt.matrixL().toDenseMatrix().diagonal().array() <= 1e-300).any())
        throw Error("target covariance is singular");
    const Eigen::MatrixXd L = llt.matrixL();

    std::vector<std::vector<double>> white(static_cast<std::size_t>(d), std::vector<double>(ensemble.size()));
    for (std::size_t i = 0; i < ensemble.size(); ++i) {
        const Eigen::VectorXd x = ensemble.samples.row(static_cast<Eigen::Index>(i)).transpose() - mean;
        const Eigen::VectorXd z = L.triangularView<Eigen::Lower>().solve(x);
        for (Eigen::Index c = 0; c < d; ++c) white[static_cast<std::size_t>(c)][i] = z(c);
    }
    GaussianReport report;
    report.level = level;
    report.threshold = level / static_cast<double>(d);
    report.pass = true;
    for (auto& column : white) {
        auto ks = stats::ks_test(std::move(column), stats::normal_cdf);
        report.pass = report.pass && ks.p_value >= report.threshold;
        report.components.push_back(ks);
    }
    return report;
}

std::vector<SmallBallRow> small_ball_probe(const Ensemble& ensemble, const Eigen::VectorXd& center,
                                           std::span<const double> radii) {
    if (center.size() != static_cast<Eigen::Index>(ensemble.dimension())) throw Error("center has wrong dimension");
    std::vector<double> dist(ensemble.size());
    for (std::size_t i = 0; i < dist.size(); ++i)
        dist[i] = (ensemble.samples.row(static_cast<Eigen::Index>(i)).transpose() - center).norm();
    std::vector<SmallBallRow> rows;
    const double dim = static_cast<double>(ensemble.dimension());
    for (double r : radii) {
        if (!(r > 0.0)) throw Error("radii must be positive");
        const auto hits = std::count_if(dist.begin(), dist.end(), [r](double v) { return v <= r; });
        const double freq = static_cast<double>(hits) / static_cast<double>(dist.size());
        rows.push_back({r, freq, freq / std::pow(r, dim)});
    }
    return rows;
}

IntegrabilityExponents IntegrabilityExponents::compute(double H, double theta) {
    IntegrabilityExponents e;
    e.H = H;
    e.theta = theta;
    e.q_star = std::min(4.0 * H / (2.0 * (H + theta) + 1.0), (2.0 * H + 1.0) / (4.0 * H));
    e.theta_star = mixsde::theta_star(H);
    return e;
}

IntegrabilityTable holder_integrability_study(const EnsembleConfig& config, double theta,
                                              std::span<const double> K_grid, std::span<const double> q_grid,
                                              std::size_t paths) {
    if (!config.system) throw Error("study needs a coefficient system");
    if (!(theta > 0.0 && theta < 0.5)) throw Error("theta must lie in (0, 1/2)");
    if (paths == 0) throw Error("study needs at least one path");
    const CoefficientSystem& sys = *config.system;
    const NoiseModel model(config.grid, sys.m(), sys.l(), config.H);

    IntegrabilityTable table;
    table.exponents = IntegrabilityExponents::compute(config.H.value(), theta);
    table.paths = paths;
    table.seminorms.resize(2 * paths);
    parallel_for(2 * paths, [&](std::size_t p) {
        const NoiseBundle noise = model.draw(config.seed, p);
        table.seminorms[p] = holder_seminorm(solve_mixed_euler(sys, config.x0, noise), theta);
    });

    constexpr double kExpLimit = 700.0;
    for (double K : K_grid)
        for (double q : q_grid) {
            IntegrabilityCell cell{K, q};
            double sum_n = 0.0, sum_2n = 0.0;
            for (std::size_t p = 0; p < 2 * paths; ++p) {
                const double expo = K * std::pow(table.seminorms[p], q);
                if (expo > kExpLimit) cell.overflow = true;
                const double v = std::exp(std::min(expo, kExpLimit));
                if (p < paths) sum_n += v;
                sum_2n += v;
            }
            cell.estimate_N = sum_n / static_cast<double>(paths);
            cell.estimate_2N = sum_2n / static_cast<double>(2 * paths);
            cell.ratio = cell.estimate_2N / cell.estimate_N;
            table.cells.push_back(cell);
        }
    return table;
}

}  // namespace mixsde
