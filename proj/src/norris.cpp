#include "mixsde/norris.hpp"

#include <algorithm>
#include <cmath>

#include "mixsde/error.hpp"
#include "mixsde/sde.hpp"
#include "mixsde/stats.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

double theta_star(double H) { return (H - 0.5) / (3.0 - 4.0 * H); }

NorrisPartition::NorrisPartition(std::size_t blocks, std::size_t fine_steps)
    : blocks_(blocks), fine_steps_(fine_steps) {
    if (blocks == 0 || fine_steps == 0) throw Error("partition needs M >= 1 and r >= 1");
}

std::size_t NorrisPartition::stride(const TimeGrid& grid) const {
    if (std::abs(grid.horizon() - 1.0) > 1e-12) throw Error("Norris statistics are defined on [0,1]");
    if (grid.steps() % fine_points() != 0) throw Error("path grid does not refine the partition");
    return grid.steps() / fine_points();
}

double quadratic_covariation(const SamplePath& xi, const SamplePath& zeta, std::size_t block,
                             const NorrisPartition& partition) {
    if (!(xi.grid() == zeta.grid())) throw Error("paths live on different grids");
    if (xi.dimension() != 1 || zeta.dimension() != 1) throw Error("scalar paths required");
    if (block >= partition.blocks()) throw Error("block out of range");
    const std::size_t s = partition.stride(xi.grid());
    const std::size_t r = partition.fine_steps();
    double sum = 0.0;
    for (std::size_t n = block * r; n < (block + 1) * r; ++n) {
        const std::size_t a = n * s, b = (n + 1) * s;
        sum += (xi(b, 0) - xi(a, 0)) * (zeta(b, 0) - zeta(a, 0));
    }
    return sum;
}

namespace {

// V_N for columns u, v of two multi-component paths.
double block_covariation(const SamplePath& X, std::size_t u, const SamplePath& Y, std::size_t v, std::size_t block,
                         std::size_t stride, std::size_t r) {
    double sum = 0.0;
    for (std::size_t n = block * r; n < (block + 1) * r; ++n) {
        const std::size_t a = n * stride, b = (n + 1) * stride;
        sum += (X(b, u) - X(a, u)) * (Y(b, v) - Y(a, v));
    }
    return sum;
}

}  // namespace

RStatistics r_statistics(const SamplePath& W, const SamplePath& B, const NorrisPartition& partition, Hurst H) {
    if (!(W.grid() == B.grid())) throw Error("paths live on different grids");
    const std::size_t stride = partition.stride(W.grid());
    const std::size_t r = partition.fine_steps();
    const double Delta = partition.coarse();
    const double delta = partition.fine();
    const double h = H.value();
    const std::size_t m = W.dimension(), l = B.dimension();

    RStatistics R;
    const double w_target = std::sqrt(Delta);
    const double b_target = std::sqrt(Delta) * std::pow(delta, h - 0.5);
    for (std::size_t N = 0; N < partition.blocks(); ++N) {
        for (std::size_t u = 0; u < m; ++u)
            for (std::size_t v = 0; v < m; ++v) {
                const double V = block_covariation(W, u, W, v, N, stride, r);
                R.wiener += std::abs((u == v ? w_target : 0.0) - std::sqrt(std::abs(V)));
            }
        for (std::size_t u = 0; u < l; ++u)
            for (std::size_t v = 0; v < l; ++v) {
                const double V = block_covariation(B, u, B, v, N, stride, r);
                R.fractional += std::abs((u == v ? b_target : 0.0) - std::sqrt(std::abs(V)));
            }
        for (std::size_t u = 0; u < m; ++u)
            for (std::size_t v = 0; v < l; ++v)
                R.mixed += std::sqrt(std::abs(block_covariation(W, u, B, v, N, stride, r)));
    }
    R.wiener *= std::pow(Delta, 0.75) * std::pow(delta, -0.25);
    R.fractional *= std::pow(Delta, h - 1.5) * std::sqrt(delta);
    R.mixed *= std::pow(Delta, 0.75) * std::pow(delta, -0.5 * h);
    return R;
}

TailFit concentration_tail(std::span<const double> samples, std::span<const double> h_grid) {
    if (samples.size() < 100) throw Error("concentration tail needs at least 100 samples");
    const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    if (*lo == *hi) throw Error("degenerate sample: all values equal");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    TailFit fit;
    std::vector<double> xs, ys;
    for (double h : h_grid) {
        const auto count = static_cast<std::size_t>(sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), h));
        fit.h.push_back(h);
        fit.exceedances.push_back(count);
        fit.frequency.push_back(static_cast<double>(count) / n);
        if (count >= 10) {
            xs.push_back(h * h);
            ys.push_back(std::log(static_cast<double>(count) / n));
        }
    }
    fit.bins_used = xs.size();
    const bool distinct = !xs.empty() && std::any_of(xs.begin(), xs.end(), [&](double v) { return v != xs.front(); });
    if (xs.size() >= 2 && distinct) {
        const auto line = stats::least_squares(xs, ys);
        fit.slope = line.slope;
        fit.intercept = line.intercept;
        fit.fitted = true;
    }
    return fit;
}

std::vector<double> tail_grid(std::span<const double> samples, std::size_t points) {
    if (samples.empty() || points < 2) throw Error("tail grid needs samples and two points");
    std::vector<double> v(samples.begin(), samples.end());
    const double lo = stats::quantile(v, 0.5);
    const double hi = *std::max_element(v.begin(), v.end());
    std::vector<double> grid;
    for (std::size_t i = 0; i < points; ++i)
        grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1));
    return grid;
}

std::vector<std::string> norris_warnings(double H, double theta) {
    std::vector<std::string> out;
    if (!(H > 0.5 && H < 2.0 / 3.0)) out.push_back("H = " + format_double(H) + " lies outside (1/2, 2/3)");
    if (H < 0.75) {
        const double lower = theta_star(H);
        if (!(theta > lower && theta < 0.5))
            out.push_back("theta = " + format_double(theta) + " lies outside (theta_*, 1/2) = (" +
                          format_double(lower) + ", 0.5)");
    } else {
        out.push_back("theta_* is undefined or >= 1/2 for H = " + format_double(H));
    }
    return out;
}

std::vector<NorrisTrial> norris_trials(const NorrisConfig& config, std::size_t trials) {
    if (!config.system) throw Error("Norris experiment needs a coefficient system");
    if (config.oversample == 0) throw Error("oversampling factor must be positive");
    const CoefficientSystem& sys = *config.system;
    const NorrisPartition partition(config.blocks, config.fine_steps);
    const TimeGrid grid(1.0, partition.fine_points() * config.oversample);
    const NoiseModel model(grid, sys.m(), sys.l(), config.H);

    std::vector<NorrisTrial> out(trials);
    parallel_for(trials, [&](std::size_t p) {
        const NoiseBundle noise = model.draw(config.seed, p);
        const SamplePath Y = solve_mixed_euler(sys, config.x0, noise);
        const auto d = static_cast<Eigen::Index>(sys.d());
        Eigen::MatrixXd b(d, static_cast<Eigen::Index>(sys.m())), c(d, static_cast<Eigen::Index>(sys.l()));
        NorrisTrial trial;
        trial.path = p;
        trial.sup_Y = sup_norm(Y);
        for (std::size_t k = 0; k < grid.points(); ++k) {
            const Eigen::VectorXd x = Y.row(k).transpose();
            std::span<const double> state(x.data(), sys.d());
            sys.eval_wiener(grid.time(k), state, b);
            sys.eval_fractional(grid.time(k), state, c);
            trial.sup_b = std::max(trial.sup_b, b.norm());
            trial.sup_c = std::max(trial.sup_c, c.norm());
        }
        trial.R = r_statistics(noise.W, noise.B, partition, config.H);
        out[p] = trial;
    });
    return out;
}

double norris_frequency(std::span<const NorrisTrial> trials, double eps, double q) {
    if (trials.empty()) throw Error("no trials");
    const double threshold = std::pow(eps, q);
    std::size_t hits = 0;
    for (const auto& t : trials) hits += (t.sup_Y < eps && t.sup_b + t.sup_c > threshold) ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(trials.size());
}

double norris_experiment(const NorrisConfig& config, double eps, double q, std::size_t trials) {
    const auto records = norris_trials(config, trials);
    return norris_frequency(records, eps, q);
}

}  // namespace mixsde
