#include "mixsde/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "mixsde/density.hpp"
#include "mixsde/error.hpp"
#include "mixsde/hormander.hpp"
#include "mixsde/malliavin.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/norris.hpp"
#include "mixsde/sde.hpp"
#include "mixsde/stats.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Collects artifacts in memory; nothing touches the disk until the command succeeded.
class Artifacts {
public:
    Artifacts(const RunConfig& config, std::string command)
        : config_(config), command_(std::move(command)), fingerprint_(config.fingerprint()) {}

    std::vector<std::string> preamble() const {
        return {"command=" + command_, "fingerprint=" + fingerprint_, "seed=" + std::to_string(config_.run.seed)};
    }

    std::string csv_header() const {
        std::string out;
        for (const auto& line : preamble()) out += "# " + line + "\n";
        return out;
    }

    json stamp(json body) const {
        json out;
        out["command"] = command_;
        out["fingerprint"] = fingerprint_;
        out["seed"] = config_.run.seed;
        out["result"] = std::move(body);
        return out;
    }

    void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
    void add_json(const std::string& name, json body) { add(name, stamp(std::move(body)).dump(2) + "\n"); }

    std::vector<std::string> flush() {
        // out and threads do not change results; keep them out so the copy matches across machines
        RunConfig stored = config_;
        stored.run.out = RunBlock{}.out;
        stored.run.threads = RunBlock{}.threads;
        add("config.ini", csv_header() + stored.serialize());
        std::string manifest = csv_header();
        for (const auto& [name, content] : files_) manifest += hex64(fnv1a(content)) + "  " + name + "\n";
        const fs::path dir = fs::path(config_.run.out) / command_;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
        std::vector<std::string> written;
        auto write = [&](const std::string& name, const std::string& content) {
            std::ofstream out(dir / name, std::ios::binary);
            out << content;
            if (!out) throw Error("cannot write '" + (dir / name).string() + "'");
            written.push_back(name);
        };
        for (const auto& [name, content] : files_) write(name, content);
        write("MANIFEST", manifest);
        return written;
    }

private:
    const RunConfig& config_;
    std::string command_;
    std::string fingerprint_;
    std::map<std::string, std::string> files_;
};

std::string num(double v) { return format_double(v); }

json vec(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

json mat(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec(m.row(i).transpose()));
    return out;
}

TimeGrid model_grid(const RunConfig& c) { return TimeGrid(c.model.T, c.model.n); }

double time_or_horizon(const std::optional<double>& t, const RunConfig& c) { return t.value_or(c.model.T); }

json moments(const Ensemble& e) {
    const auto d = static_cast<Eigen::Index>(e.dimension());
    Eigen::VectorXd mean = e.samples.colwise().mean().transpose();
    Eigen::MatrixXd centered = e.samples.rowwise() - mean.transpose();
    const double denom = e.size() > 1 ? static_cast<double>(e.size() - 1) : 1.0;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / denom;
    json out;
    out["mean"] = vec(mean);
    out["covariance"] = mat(cov);
    json se = json::array();
    for (Eigen::Index i = 0; i < d; ++i) se.push_back(std::sqrt(cov(i, i) / static_cast<double>(e.size())));
    out["standard_error"] = se;
    return out;
}

void cmd_simulate(const RunConfig& c, Artifacts& art) {
    const auto sys = std::make_shared<const CoefficientSystem>(c.build_system());
    const TimeGrid grid = model_grid(c);
    const Eigen::VectorXd x0 = c.initial_state();
    const NoiseModel model(grid, sys->m(), sys->l(), Hurst(c.model.H));

    const SamplePath X = solve_mixed_euler(*sys, x0, model.draw(c.run.seed, 0));
    std::ostringstream path_csv;
    write_csv(path_csv, X, art.preamble());
    art.add("path.csv", path_csv.str());

    EnsembleConfig ec{sys, x0, grid, Hurst(c.model.H), c.run.seed};
    const double t = time_or_horizon(c.simulate.t, c);
    const Ensemble e = run_ensemble(ec, t, c.simulate.paths);
    std::ostringstream ens;
    ens << art.csv_header() << "path,wiener_seed,fractional_seed";
    for (std::size_t i = 0; i < e.dimension(); ++i) ens << ",X" << i + 1;
    ens << "\n";
    for (std::size_t p = 0; p < e.size(); ++p) {
        ens << p << "," << derive_seed(c.run.seed, p, Stream::Wiener) << ","
            << derive_seed(c.run.seed, p, Stream::Fractional);
        for (std::size_t i = 0; i < e.dimension(); ++i)
            ens << "," << num(e.samples(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(i)));
        ens << "\n";
    }
    art.add("ensemble.csv", ens.str());

    json body;
    body["system"] = sys->describe();
    body["paths"] = c.simulate.paths;
    body["t"] = e.t;
    body["steps"] = grid.steps();
    body["terminal"] = vec(X.row(grid.steps()).transpose());
    body["path_sup_norm"] = sup_norm(X);
    body["ensemble"] = moments(e);
    art.add_json("summary.json", body);
}

void cmd_malliavin(const RunConfig& c, Artifacts& art) {
    SpectrumConfig sc;
    sc.system = std::make_shared<const CoefficientSystem>(c.build_system());
    sc.x0 = c.initial_state();
    sc.grid = model_grid(c);
    sc.H = Hurst(c.model.H);
    sc.seed = c.run.seed;
    sc.t = time_or_horizon(c.malliavin.t, c);
    sc.eps_grid = c.malliavin.eps;
    const SpectrumSummary s = spectrum_ensemble(sc, c.malliavin.paths);

    std::ostringstream csv;
    csv << art.csv_header() << "path,lambda_min_C,lambda_min_M,det_M,det_C,consistency\n";
    for (const auto& r : s.samples)
        csv << r.path << "," << num(r.lambda_min_C) << "," << num(r.lambda_min_M) << "," << num(r.det_M) << ","
            << num(r.det_C) << "," << num(r.consistency) << "\n";
    art.add("spectrum.csv", csv.str());

    json body;
    body["paths"] = c.malliavin.paths;
    body["t"] = sc.t;
    body["quantile_levels"] = s.probabilities;
    body["lambda_min_C_quantiles"] = s.lambda_quantiles;
    body["det_M_quantiles"] = s.det_M_quantiles;
    json freq = json::array();
    for (std::size_t i = 0; i < s.eps_grid.size(); ++i)
        freq.push_back({{"eps", s.eps_grid[i]}, {"frequency", s.frequency[i]}});
    body["small_eigenvalue_frequency"] = freq;
    double worst = 0.0;
    for (const auto& r : s.samples) worst = std::max(worst, r.consistency);
    body["max_consistency_residual"] = worst;
    art.add_json("summary.json", body);
}

json rank_json(const RankDecision& r) {
    json out;
    out["rank"] = r.rank;
    out["satisfied"] = r.satisfied;
    out["achieved_level"] = r.achieved_level ? json(*r.achieved_level) : json(nullptr);
    out["singular_values"] = r.singular_values;
    out["tolerance"] = r.tolerance;
    return out;
}

void cmd_hormander(const RunConfig& c, Artifacts& art) {
    const CoefficientSystem sys = c.build_system();
    if (sys.time_dependent()) throw ConfigError("system.time_dependent", "bracket checks need an autonomous system");
    const Eigen::VectorXd x0 = c.initial_state();
    const std::span<const double> x(x0.data(), static_cast<std::size_t>(x0.size()));
    const VectorFieldSet fields = sys.vector_fields();
    const HormanderBlock& h = c.hormander;

    HierarchyOptions opts{h.n0, h.include_drift, h.max_nodes};
    const auto nodes = bracket_hierarchy(fields, x, opts);
    std::ostringstream csv;
    csv << art.csv_header() << "level,word";
    for (std::size_t i = 0; i < sys.d(); ++i) csv << ",v" << i + 1;
    csv << ",norm,cumulative_rank,field\n";
    // Replacing the columns seen so far by U*S keeps the singular values while the matrix stays d x (d+1).
    const auto d = static_cast<Eigen::Index>(sys.d());
    Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(d, 0);
    for (const auto& node : nodes) {
        Eigen::MatrixXd cols(d, basis.cols() + 1);
        cols << basis, node.value_at_x0;
        const RankDecision rank = rank_decision(cols, h.tol);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(cols, Eigen::ComputeThinU);
        basis = svd.matrixU() * svd.singularValues().asDiagonal();

        std::string word;
        for (std::size_t i = 0; i < node.word.size(); ++i) word += (i ? " " : "") + std::to_string(node.word[i]);
        csv << node.level << "," << word;
        for (Eigen::Index i = 0; i < node.value_at_x0.size(); ++i) csv << "," << num(node.value_at_x0(i));
        csv << "," << num(node.value_at_x0.norm()) << "," << rank.rank << ",\"";
        for (std::size_t i = 0; i < node.field.size(); ++i) csv << (i ? "; " : "") << node.field[i].to_string();
        csv << "\"\n";
    }
    art.add("brackets.csv", csv.str());

    json body;
    body["x0"] = vec(x0);
    body["n0"] = h.n0;
    body["include_drift"] = h.include_drift;
    body["bracket_count"] = nodes.size();
    body["simplified"] = rank_json(check_simplified(sys, x, 0.0, h.tol));
    body["strong"] = rank_json(check_strong(fields, x, h.n0, h.tol, h.include_drift, h.max_nodes));
    art.add_json("summary.json", body);
}

json tail_json(const std::vector<double>& samples) {
    json out;
    if (samples.size() < 100) {
        out["fitted"] = false;
        out["reason"] = "needs at least 100 trials";
        return out;
    }
    try {
        const TailFit fit = concentration_tail(samples, tail_grid(samples));
        out["fitted"] = fit.fitted;
        out["slope"] = fit.slope;
        out["intercept"] = fit.intercept;
        out["c"] = -fit.slope;
        out["bins_used"] = fit.bins_used;
        out["h"] = fit.h;
        out["frequency"] = fit.frequency;
        out["exceedances"] = fit.exceedances;
    } catch (const Error& err) {
        out["fitted"] = false;
        out["reason"] = err.what();
    }
    return out;
}

void cmd_norris(const RunConfig& c, Artifacts& art) {
    if (c.model.T != 1.0) throw ConfigError("model.T", "the norris experiment runs on [0, 1]");
    const NorrisBlock& b = c.norris;
    NorrisConfig nc;
    nc.system = std::make_shared<const CoefficientSystem>(c.build_system());
    nc.x0 = c.initial_state();
    nc.blocks = b.M;
    nc.fine_steps = b.r;
    nc.oversample = b.oversample;
    nc.H = Hurst(c.model.H);
    nc.theta = b.theta;
    nc.seed = c.run.seed;
    const auto trials = norris_trials(nc, b.trials);

    std::ostringstream csv;
    csv << art.csv_header() << "path,wiener_seed,fractional_seed,sup_Y,sup_b,sup_c,R_W,R_B,R_WB";
    for (double q : b.q)
        for (double eps : b.eps) csv << ",event_eps" << num(eps) << "_q" << num(q);
    csv << "\n";
    std::vector<double> rw, rb, rwb;
    for (const auto& t : trials) {
        csv << t.path << "," << derive_seed(c.run.seed, t.path, Stream::Wiener) << ","
            << derive_seed(c.run.seed, t.path, Stream::Fractional) << "," << num(t.sup_Y) << "," << num(t.sup_b)
            << "," << num(t.sup_c) << "," << num(t.R.wiener) << "," << num(t.R.fractional) << "," << num(t.R.mixed);
        for (double q : b.q)
            for (double eps : b.eps) csv << "," << (t.sup_Y < eps && t.sup_b + t.sup_c > std::pow(eps, q) ? 1 : 0);
        csv << "\n";
        rw.push_back(t.R.wiener);
        rb.push_back(t.R.fractional);
        rwb.push_back(t.R.mixed);
    }
    art.add("trials.csv", csv.str());

    json freq = json::array();
    for (double q : b.q)
        for (double eps : b.eps) {
            const double f = norris_frequency(trials, eps, q);
            freq.push_back({{"eps", eps},
                            {"q", q},
                            {"frequency", f},
                            {"standard_error", std::sqrt(f * (1.0 - f) / static_cast<double>(trials.size()))}});
        }
    json body;
    body["warnings"] = norris_warnings(c.model.H, b.theta);
    body["theta_star"] = theta_star(c.model.H);
    body["trials"] = b.trials;
    body["steps"] = b.M * b.r * b.oversample;
    body["event_frequency"] = freq;
    body["tail_fit"] = {{"R_W", tail_json(rw)}, {"R_B", tail_json(rb)}, {"R_WB", tail_json(rwb)}};
    art.add_json("summary.json", body);
}

void cmd_density(const RunConfig& c, Artifacts& art) {
    const DensityBlock& b = c.density;
    const auto sys = std::make_shared<const CoefficientSystem>(c.build_system());
    const Eigen::VectorXd x0 = c.initial_state();
    EnsembleConfig ec{sys, x0, model_grid(c), Hurst(c.model.H), c.run.seed};
    const Ensemble e = run_ensemble(ec, time_or_horizon(b.t, c), b.paths);

    json body;
    body["paths"] = b.paths;
    body["t"] = e.t;
    body["ensemble"] = moments(e);

    const std::size_t comp = b.component - 1;
    if (stats::variance(e.column(comp)) > 0.0) {
        const DensityTable table = kde(e, comp, b.bandwidth);
        std::ostringstream csv;
        csv << art.csv_header() << "x,density\n";
        for (std::size_t i = 0; i < table.x.size(); ++i) csv << num(table.x[i]) << "," << num(table.density[i]) << "\n";
        art.add("kde.csv", csv.str());
        body["kde"] = {{"component", b.component}, {"bandwidth", table.bandwidth}, {"mass", table.mass}};
    } else {
        body["kde"] = {{"component", b.component}, {"skipped", "zero-variance sample (point mass)"}};
    }

    Eigen::VectorXd center = x0;
    for (std::size_t i = 0; i < b.center.size(); ++i) center(static_cast<Eigen::Index>(i)) = b.center[i];
    const auto probe = small_ball_probe(e, center, b.radii);
    std::ostringstream sb;
    sb << art.csv_header() << "radius,frequency,ratio\n";
    for (const auto& row : probe) sb << num(row.radius) << "," << num(row.frequency) << "," << num(row.ratio) << "\n";
    art.add("small_ball.csv", sb.str());

    if (!b.target_mean.empty()) {
        const auto d = static_cast<Eigen::Index>(e.dimension());
        Eigen::VectorXd mean(d);
        Eigen::MatrixXd cov(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            mean(i) = b.target_mean[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < d; ++j) cov(i, j) = b.target_cov[static_cast<std::size_t>(i * d + j)];
        }
        const GaussianReport report = gaussian_check(e, mean, cov);
        json comps = json::array();
        for (const auto& ks : report.components) comps.push_back({{"statistic", ks.statistic}, {"p_value", ks.p_value}});
        body["gaussian_check"] = {
            {"level", report.level}, {"threshold", report.threshold}, {"pass", report.pass}, {"components", comps}};
    }

    if (b.integrability_paths > 0) {
        const auto ex = IntegrabilityExponents::compute(c.model.H, b.theta);
        std::vector<double> q = b.q;
        if (q.empty()) q.push_back(0.8 * ex.q_star);
        const auto table = holder_integrability_study(ec, b.theta, b.K, q, b.integrability_paths);
        json cells = json::array();
        for (const auto& cell : table.cells)
            cells.push_back({{"K", cell.K},
                             {"q", cell.q},
                             {"estimate_N", cell.estimate_N},
                             {"estimate_2N", cell.estimate_2N},
                             {"ratio", cell.ratio},
                             {"overflow", cell.overflow},
                             {"below_q_star", cell.q < ex.q_star}});
        body["integrability"] = {{"theta", b.theta},  {"q_star", ex.q_star}, {"theta_star", ex.theta_star},
                                 {"N", table.paths}, {"cells", cells}};
    }
    art.add_json("summary.json", body);
}

}  // namespace

const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"simulate", "malliavin", "hormander", "norris", "density"};
    return names;
}

std::vector<std::string> run_command(const std::string& command, const RunConfig& config) {
    config.validate();
    if (config.run.threads > 0) set_worker_threads(config.run.threads);
    Artifacts art(config, command);
    if (command == "simulate")
        cmd_simulate(config, art);
    else if (command == "malliavin")
        cmd_malliavin(config, art);
    else if (command == "hormander")
        cmd_hormander(config, art);
    else if (command == "norris")
        cmd_norris(config, art);
    else if (command == "density")
        cmd_density(config, art);
    else
        throw Error("unknown command '" + command + "'");
    return art.flush();
}

json error_json(const std::exception& err) {
    json e;
    e["message"] = err.what();
    if (const auto* c = dynamic_cast<const ConfigError*>(&err)) {
        e["kind"] = "config";
        e["field"] = c->field();
    } else if (const auto* s = dynamic_cast<const SolverError*>(&err)) {
        e["kind"] = "solver";
        e["step"] = s->step();
    } else if (dynamic_cast<const DomainError*>(&err)) {
        e["kind"] = "domain";
    } else if (const auto* p = dynamic_cast<const ParseError*>(&err)) {
        e["kind"] = "parse";
        e["position"] = p->position();
    } else {
        e["kind"] = "error";
    }
    return json{{"error", e}};
}

}  // namespace mixsde
