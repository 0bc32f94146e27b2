#include "mixsde/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mixsde/error.hpp"
#include "mixsde/util.hpp"

namespace mixsde {

namespace {

namespace pt = boost::property_tree;

// Typed access to one section; remembers which keys were consumed so leftovers can be
// reported as unknown.
class Section {
public:
    Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

    std::string path(const std::string& key) const { return name_ + "." + key; }

    std::optional<std::string> raw(const std::string& key) {
        used_.insert(key);
        if (!tree_) return std::nullopt;
        auto child = tree_->get_child_optional(key);
        if (!child) return std::nullopt;
        return trim(child->data());
    }

    std::optional<double> number(const std::string& key) {
        auto text = raw(key);
        if (!text) return std::nullopt;
        try {
            return parse_double(*text);
        } catch (const std::exception&) {
            throw ConfigError(path(key), "expected a number, got '" + *text + "'");
        }
    }

    std::optional<std::size_t> count(const std::string& key) {
        auto v = number(key);
        if (!v) return std::nullopt;
        if (*v < 0.0 || *v != std::floor(*v) || *v > 1e15)
            throw ConfigError(path(key), "expected a non-negative integer");
        return static_cast<std::size_t>(*v);
    }

    std::optional<bool> flag(const std::string& key) {
        auto text = raw(key);
        if (!text) return std::nullopt;
        if (*text == "true" || *text == "1") return true;
        if (*text == "false" || *text == "0") return false;
        throw ConfigError(path(key), "expected true or false");
    }

    std::optional<std::vector<double>> list(const std::string& key) {
        auto text = raw(key);
        if (!text) return std::nullopt;
        std::vector<double> out;
        if (text->empty()) return out;
        for (const auto& item : split(*text, ',')) {
            try {
                out.push_back(parse_double(trim(item)));
            } catch (const std::exception&) {
                throw ConfigError(path(key), "bad list entry '" + trim(item) + "'");
            }
        }
        return out;
    }

    std::vector<std::string> keys() const {
        std::vector<std::string> out;
        if (tree_)
            for (const auto& [k, v] : *tree_) out.push_back(k);
        return out;
    }

    void reject_unknown() const {
        for (const auto& k : keys())
            if (!used_.count(k)) throw ConfigError(path(k), "unknown key");
    }

private:
    const pt::ptree* tree_;
    std::string name_;
    std::set<std::string> used_;
};

const std::set<std::string> kSections{"system", "model", "run", "simulate", "malliavin", "hormander", "norris", "density"};

std::string join(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
    return out;
}

void require_positive(double v, const std::string& field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
}

}  // namespace

RunConfig RunConfig::parse(std::istream& in) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& err) {
        throw ConfigError("config", "line " + std::to_string(err.line()) + ": " + err.message());
    }
    for (const auto& [name, child] : tree) {
        if (!kSections.count(name)) throw ConfigError(name, "unknown section");
        if (child.empty() && !child.data().empty()) throw ConfigError(name, "key outside a section");
    }
    auto section = [&](const std::string& name) {
        auto child = tree.get_child_optional(name);
        return Section(child ? &*child : nullptr, name);
    };

    RunConfig c;
    {
        Section s = section("system");
        if (auto p = s.raw("preset")) {
            c.system.preset = *p;
            for (const auto& k : s.keys()) {
                if (k == "preset") continue;
                c.system.params[k] = *s.number(k);
            }
        } else {
            c.system.d = s.count("d").value_or(0);
            c.system.m = s.count("m").value_or(0);
            c.system.l = s.count("l").value_or(0);
            c.system.time_dependent = s.flag("time_dependent").value_or(false);
            static const std::regex entry(R"(a[1-9][0-9]*|[bc][1-9][0-9]*_[1-9][0-9]*)");
            for (const auto& k : s.keys()) {
                if (k == "d" || k == "m" || k == "l" || k == "time_dependent") continue;
                if (!std::regex_match(k, entry)) throw ConfigError(s.path(k), "unknown key");
                c.system.entries[k] = *s.raw(k);
            }
        }
        s.reject_unknown();
    }
    {
        Section s = section("model");
        auto H = s.number("H");
        if (!H) throw ConfigError("model.H", "missing");
        c.model.H = *H;
        c.model.T = s.number("T").value_or(1.0);
        auto n = s.count("n");
        if (!n) throw ConfigError("model.n", "missing");
        c.model.n = *n;
        c.model.x0 = s.list("x0").value_or(std::vector<double>{});
        s.reject_unknown();
    }
    {
        Section s = section("run");
        if (auto v = s.raw("seed")) {
            try {
                std::size_t used = 0;
                c.run.seed = std::stoull(*v, &used);
                if (used != v->size() || v->front() == '-') throw std::invalid_argument("seed");
            } catch (const std::exception&) {
                throw ConfigError("run.seed", "expected an unsigned integer");
            }
        }
        if (auto v = s.count("threads")) c.run.threads = static_cast<int>(*v);
        if (auto v = s.raw("out")) c.run.out = *v;
        s.reject_unknown();
    }
    {
        Section s = section("simulate");
        c.simulate.paths = s.count("paths").value_or(c.simulate.paths);
        c.simulate.t = s.number("t");
        s.reject_unknown();
    }
    {
        Section s = section("malliavin");
        c.malliavin.paths = s.count("paths").value_or(c.malliavin.paths);
        c.malliavin.t = s.number("t");
        c.malliavin.eps = s.list("eps").value_or(c.malliavin.eps);
        s.reject_unknown();
    }
    {
        Section s = section("hormander");
        c.hormander.n0 = s.count("n0").value_or(c.hormander.n0);
        c.hormander.tol = s.number("tol").value_or(c.hormander.tol);
        c.hormander.include_drift = s.flag("include_drift").value_or(false);
        c.hormander.max_nodes = s.count("max_nodes").value_or(c.hormander.max_nodes);
        s.reject_unknown();
    }
    {
        Section s = section("norris");
        c.norris.M = s.count("M").value_or(c.norris.M);
        c.norris.r = s.count("r").value_or(c.norris.r);
        c.norris.oversample = s.count("oversample").value_or(c.norris.oversample);
        c.norris.trials = s.count("trials").value_or(c.norris.trials);
        c.norris.theta = s.number("theta").value_or(c.norris.theta);
        c.norris.eps = s.list("eps").value_or(c.norris.eps);
        c.norris.q = s.list("q").value_or(c.norris.q);
        s.reject_unknown();
    }
    {
        Section s = section("density");
        DensityBlock& b = c.density;
        b.paths = s.count("paths").value_or(b.paths);
        b.t = s.number("t");
        b.component = s.count("component").value_or(b.component);
        if (auto bw = s.raw("bandwidth"); bw && *bw != "auto") b.bandwidth = s.number("bandwidth");
        b.radii = s.list("radii").value_or(b.radii);
        b.center = s.list("center").value_or(b.center);
        b.target_mean = s.list("target_mean").value_or(b.target_mean);
        b.target_cov = s.list("target_cov").value_or(b.target_cov);
        b.integrability_paths = s.count("integrability_paths").value_or(0);
        b.theta = s.number("theta").value_or(b.theta);
        b.K = s.list("K").value_or(b.K);
        b.q = s.list("q").value_or(b.q);
        s.reject_unknown();
    }
    c.validate();
    return c;
}

RunConfig RunConfig::parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse(in);
}

void RunConfig::validate() const {
    if (!(model.H > 0.5 && model.H < 1.0)) throw ConfigError("model.H", "must lie in (1/2, 1)");
    require_positive(model.T, "model.T");
    if (!is_power_of_two(model.n)) throw ConfigError("model.n", "must be a power of two");

    std::size_t d = 0;
    try {
        d = build_system().d();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& err) {
        throw ConfigError(system.preset.empty() ? "system" : "system.preset", err.what());
    }
    if (!model.x0.empty() && model.x0.size() != d)
        throw ConfigError("model.x0", "expected " + std::to_string(d) + " values");
    for (double v : model.x0)
        if (!std::isfinite(v)) throw ConfigError("model.x0", "must be finite");

    auto check_time = [&](const std::optional<double>& t, const std::string& field) {
        if (t && !(*t >= 0.0 && *t <= model.T)) throw ConfigError(field, "must lie in [0, T]");
    };
    if (simulate.paths == 0) throw ConfigError("simulate.paths", "must be at least 1");
    check_time(simulate.t, "simulate.t");
    if (malliavin.paths < 100) throw ConfigError("malliavin.paths", "must be at least 100");
    check_time(malliavin.t, "malliavin.t");
    for (double e : malliavin.eps) require_positive(e, "malliavin.eps");

    if (hormander.n0 < 1) throw ConfigError("hormander.n0", "must be at least 1");
    require_positive(hormander.tol, "hormander.tol");
    if (hormander.max_nodes == 0) throw ConfigError("hormander.max_nodes", "must be at least 1");

    if (norris.M == 0) throw ConfigError("norris.M", "must be at least 1");
    if (norris.r == 0) throw ConfigError("norris.r", "must be at least 1");
    if (norris.oversample == 0) throw ConfigError("norris.oversample", "must be at least 1");
    if (norris.trials == 0) throw ConfigError("norris.trials", "must be at least 1");
    if (!(norris.theta > 0.0 && norris.theta < 0.5)) throw ConfigError("norris.theta", "must lie in (0, 1/2)");
    if (norris.eps.empty()) throw ConfigError("norris.eps", "must not be empty");
    for (double e : norris.eps) require_positive(e, "norris.eps");
    if (norris.q.empty()) throw ConfigError("norris.q", "must not be empty");
    for (double q : norris.q) require_positive(q, "norris.q");

    if (density.paths < 100) throw ConfigError("density.paths", "must be at least 100");
    check_time(density.t, "density.t");
    if (density.component < 1 || density.component > d)
        throw ConfigError("density.component", "must lie in 1.." + std::to_string(d));
    if (density.bandwidth) require_positive(*density.bandwidth, "density.bandwidth");
    for (double r : density.radii) require_positive(r, "density.radii");
    for (std::size_t i = 1; i < density.radii.size(); ++i)
        if (!(density.radii[i] < density.radii[i - 1])) throw ConfigError("density.radii", "must be decreasing");
    if (!density.center.empty() && density.center.size() != d)
        throw ConfigError("density.center", "expected " + std::to_string(d) + " values");
    if (density.target_mean.empty() != density.target_cov.empty())
        throw ConfigError(density.target_mean.empty() ? "density.target_mean" : "density.target_cov",
                          "target_mean and target_cov go together");
    if (!density.target_mean.empty() && density.target_mean.size() != d)
        throw ConfigError("density.target_mean", "expected " + std::to_string(d) + " values");
    if (!density.target_cov.empty() && density.target_cov.size() != d * d)
        throw ConfigError("density.target_cov", "expected " + std::to_string(d * d) + " values");
    if (!(density.theta > 0.0 && density.theta < 0.5)) throw ConfigError("density.theta", "must lie in (0, 1/2)");
    for (double q : density.q) require_positive(q, "density.q");
    for (double K : density.K)
        if (!(K >= 0.0)) throw ConfigError("density.K", "must be non-negative");
}

CoefficientSystem RunConfig::build_system() const {
    if (!system.preset.empty()) return preset(system.preset, system.params);
    const std::size_t d = system.d, m = system.m, l = system.l;
    if (d == 0) throw ConfigError("system.d", "missing (or give system.preset)");
    if (m + l == 0) throw ConfigError("system.m", "need at least one noise component (m or l)");
    std::vector<std::string> a(d, "0"), b(d * m, "0"), c(d * l, "0");
    for (const auto& [key, text] : system.entries) {
        const std::string field = "system." + key;
        const char kind = key[0];
        const auto us = key.find('_');
        const std::size_t i = std::stoul(key.substr(1, us == std::string::npos ? std::string::npos : us - 1));
        if (i > d) throw ConfigError(field, "row exceeds d");
        if (kind == 'a') {
            a[i - 1] = text;
            continue;
        }
        const std::size_t k = std::stoul(key.substr(us + 1));
        if (kind == 'b') {
            if (k > m) throw ConfigError(field, "column exceeds m");
            b[(i - 1) * m + k - 1] = text;
        } else {
            if (k > l) throw ConfigError(field, "column exceeds l");
            c[(i - 1) * l + k - 1] = text;
        }
    }
    auto parse_all = [&](const std::vector<std::string>& src, char kind, std::size_t cols) {
        std::vector<Expr> out;
        for (std::size_t idx = 0; idx < src.size(); ++idx) {
            try {
                out.push_back(Expr::parse(src[idx], static_cast<int>(d), system.time_dependent));
            } catch (const std::exception& err) {
                std::string key(1, kind);
                key += kind == 'a' ? std::to_string(idx + 1)
                                   : std::to_string(idx / cols + 1) + "_" + std::to_string(idx % cols + 1);
                throw ConfigError("system." + key, err.what());
            }
        }
        return out;
    };
    return CoefficientSystem(d, m, l, parse_all(a, 'a', 1), parse_all(b, 'b', m), parse_all(c, 'c', l),
                             system.time_dependent);
}

Eigen::VectorXd RunConfig::initial_state() const {
    const std::size_t d = build_system().d();
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < model.x0.size(); ++i) x0(static_cast<Eigen::Index>(i)) = model.x0[i];
    return x0;
}

namespace {

std::string serialize_impl(const RunConfig& c, bool with_run_output) {
    std::ostringstream o;
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
    o << "[system]\n";
    if (!c.system.preset.empty()) {
        o << "preset = " << c.system.preset << "\n";
        for (const auto& [k, v] : c.system.params) o << k << " = " << format_double(v) << "\n";
    } else {
        o << "d = " << c.system.d << "\nm = " << c.system.m << "\nl = " << c.system.l << "\n";
        o << "time_dependent = " << (c.system.time_dependent ? "true" : "false") << "\n";
        for (const auto& [k, v] : c.system.entries) o << k << " = " << v << "\n";
    }
    o << "\n[model]\nH = " << format_double(c.model.H) << "\nT = " << format_double(c.model.T)
      << "\nn = " << c.model.n << "\nx0 = " << join(c.model.x0) << "\n";
    o << "\n[run]\nseed = " << c.run.seed << "\n";
    if (with_run_output) o << "threads = " << c.run.threads << "\nout = " << c.run.out << "\n";
    o << "\n[simulate]\npaths = " << c.simulate.paths << "\n";
    if (c.simulate.t) o << "t = " << opt(c.simulate.t) << "\n";
    o << "\n[malliavin]\npaths = " << c.malliavin.paths << "\n";
    if (c.malliavin.t) o << "t = " << opt(c.malliavin.t) << "\n";
    o << "eps = " << join(c.malliavin.eps) << "\n";
    o << "\n[hormander]\nn0 = " << c.hormander.n0 << "\ntol = " << format_double(c.hormander.tol)
      << "\ninclude_drift = " << (c.hormander.include_drift ? "true" : "false")
      << "\nmax_nodes = " << c.hormander.max_nodes << "\n";
    o << "\n[norris]\nM = " << c.norris.M << "\nr = " << c.norris.r << "\noversample = " << c.norris.oversample
      << "\ntrials = " << c.norris.trials << "\ntheta = " << format_double(c.norris.theta)
      << "\neps = " << join(c.norris.eps) << "\nq = " << join(c.norris.q) << "\n";
    const DensityBlock& b = c.density;
    o << "\n[density]\npaths = " << b.paths << "\n";
    if (b.t) o << "t = " << opt(b.t) << "\n";
    o << "component = " << b.component << "\nbandwidth = " << (b.bandwidth ? opt(b.bandwidth) : "auto")
      << "\nradii = " << join(b.radii) << "\ncenter = " << join(b.center) << "\ntarget_mean = " << join(b.target_mean)
      << "\ntarget_cov = " << join(b.target_cov) << "\nintegrability_paths = " << b.integrability_paths
      << "\ntheta = " << format_double(b.theta) << "\nK = " << join(b.K) << "\nq = " << join(b.q) << "\n";
    return o.str();
}

}  // namespace

std::string RunConfig::serialize() const { return serialize_impl(*this, true); }

std::string RunConfig::fingerprint() const { return hex64(fnv1a(serialize_impl(*this, false))); }

}  // namespace mixsde
