#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mixsde/commands.hpp"
#include "mixsde/config.hpp"
#include "mixsde/error.hpp"

using namespace mixsde;
namespace fs = std::filesystem;

namespace {

const char* kBase = R"(# comment
[system]
preset = additive
sigma = 2
gamma = 3

[model]
H = 0.75
T = 1
n = 256
x0 = 0.5

[run]
seed = 42

[simulate]
paths = 20

[malliavin]
paths = 100

[norris]
trials = 200
eps = 0.9, 0.7, 0.5
q = 0.5, 1

[density]
paths = 200
target_mean = 0.5
target_cov = 13
integrability_paths = 100
)";

std::string field_of(const std::string& text) {
    try {
        RunConfig::parse_string(text);
    } catch (const ConfigError& err) {
        return err.field();
    }
    return "";
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
    const auto at = text.find(from);
    REQUIRE(at != std::string::npos);
    return text.replace(at, from.size(), to);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("mixsde_cli_test_" + name);
    fs::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config parses and round-trips") {
    const RunConfig c = RunConfig::parse_string(kBase);
    CHECK(c.system.preset == "additive");
    CHECK(c.system.params.at("gamma") == 3.0);
    CHECK(c.model.n == 256);
    CHECK(c.run.seed == 42);
    CHECK(c.norris.q == std::vector<double>{0.5, 1.0});
    CHECK_FALSE(c.density.bandwidth.has_value());
    const RunConfig back = RunConfig::parse_string(c.serialize());
    CHECK(back == c);
    CHECK(back.serialize() == c.serialize());
    CHECK(back.fingerprint() == c.fingerprint());

    RunConfig moved = c;
    moved.run.out = "elsewhere";
    moved.run.threads = 3;
    CHECK(moved.fingerprint() == c.fingerprint());
    moved.run.seed = 43;
    CHECK(moved.fingerprint() != c.fingerprint());
}

TEST_CASE("inline systems") {
    const std::string text = R"([system]
d = 2
m = 1
l = 1
a1 = -x1
b1_1 = 1
c2_1 = 0.5*x1
[model]
H = 0.6
n = 64
x0 = 1, 2
)";
    const RunConfig c = RunConfig::parse_string(text);
    const CoefficientSystem sys = c.build_system();
    CHECK(sys.d() == 2);
    CHECK(sys.drift(1).is_zero());
    CHECK(sys.fractional(1, 0).to_string() == "0.5*x1");
    CHECK(c.initial_state() == Eigen::Vector2d(1, 2));
    CHECK(RunConfig::parse_string(c.serialize()) == c);

    CHECK(field_of(replace(text, "c2_1 = 0.5*x1", "c2_1 = 0.5*x3")) == "system.c2_1");
    CHECK(field_of(replace(text, "c2_1", "c2_2")) == "system.c2_2");
    CHECK(field_of(replace(text, "a1 = -x1", "z = 1")) == "system.z");
}

TEST_CASE("validation names the offending field") {
    CHECK(field_of(replace(kBase, "H = 0.75\n", "")) == "model.H");
    CHECK(field_of(replace(kBase, "n = 256", "n = 1000")) == "model.n");
    CHECK(field_of(replace(kBase, "H = 0.75", "H = 0.5")) == "model.H");
    CHECK(field_of(replace(kBase, "H = 0.75", "H = abc")) == "model.H");
    CHECK(field_of(replace(kBase, "x0 = 0.5", "x0 = 0.5, 1")) == "model.x0");
    CHECK(field_of(std::string(kBase) + "[hormander]\nn0 = 0\n") == "hormander.n0");
    CHECK(field_of(replace(kBase, "preset = additive", "preset = lorenz")) == "system.preset");
    CHECK(field_of(replace(kBase, "seed = 42", "seed = -1")) == "run.seed");
    CHECK(field_of(replace(kBase, "[simulate]", "[simulate]\nstep = 3")) == "simulate.step");
    CHECK(field_of(std::string(kBase) + "[extra]\na = 1\n") == "extra");
    CHECK(field_of(replace(kBase, "trials = 200", "trials = 200\ntheta = 0.7")) == "norris.theta");
    CHECK(field_of(std::string(kBase) + "radii = 0.1, 0.2\n") == "density.radii");
    CHECK(field_of(replace(kBase, "paths = 100", "paths = 10")) == "malliavin.paths");
}

TEST_CASE("hormander command") {
    const fs::path out = scratch("hormander");
    std::string text = replace(kBase, "preset = additive\nsigma = 2\ngamma = 3", "preset = heisenberg");
    text = replace(text, "x0 = 0.5", "x0 = 0, 0");
    text = replace(text, "target_mean = 0.5\ntarget_cov = 13\n", "");
    RunConfig c = RunConfig::parse_string(text);
    c.run.out = out.string();
    run_command("hormander", c);
    const auto summary = nlohmann::json::parse(slurp(out / "hormander" / "summary.json"));
    CHECK(summary["result"]["strong"]["satisfied"] == true);
    CHECK(summary["result"]["strong"]["achieved_level"] == 2);
    CHECK(summary["seed"] == 42);
    CHECK(summary["fingerprint"] == c.fingerprint());

    c.system.preset = "degenerate";
    run_command("hormander", c);
    const auto deg = nlohmann::json::parse(slurp(out / "hormander" / "summary.json"));
    CHECK(deg["result"]["strong"]["satisfied"] == false);
    fs::remove_all(out);
}

TEST_CASE("norris command reports warnings and monotone frequencies") {
    const fs::path out = scratch("norris");
    RunConfig c = RunConfig::parse_string(replace(kBase, "trials = 200", "trials = 200\ntheta = 0.05"));
    c.model.H = 0.6;
    c.run.out = out.string();
    run_command("norris", c);
    const auto s = nlohmann::json::parse(slurp(out / "norris" / "summary.json"))["result"];
    CHECK(s["warnings"].size() == 1);
    const auto& f = s["event_frequency"];
    for (std::size_t i = 1; i < 3; ++i) CHECK(f[i]["frequency"].get<double>() <= f[i - 1]["frequency"].get<double>());
    CHECK(slurp(out / "norris" / "trials.csv").rfind("# command=norris\n# fingerprint=" + c.fingerprint(), 0) == 0);

    c.model.T = 2.0;
    CHECK_THROWS_AS(run_command("norris", c), ConfigError);
    fs::remove_all(out);
}

TEST_CASE("every command is byte-identical on rerun") {
    for (const auto& cmd : command_names()) {
        RunConfig c = RunConfig::parse_string(kBase);
        if (cmd == "hormander") c.system.preset = "geometric", c.system.params.clear();
        const fs::path a = scratch(cmd + "_a"), b = scratch(cmd + "_b");
        c.run.out = a.string();
        const auto files = run_command(cmd, c);
        c.run.out = b.string();
        c.run.threads = 2;
        CHECK(run_command(cmd, c) == files);
        CHECK(files.back() == "MANIFEST");
        for (const auto& f : files) {
            const std::string content = slurp(a / cmd / f);
            CHECK_MESSAGE(content == slurp(b / cmd / f), (cmd + "/" + f));
            if (f.ends_with(".csv") || f == "MANIFEST") CHECK(content.find("seed=42") != std::string::npos);
            if (f.ends_with(".json")) CHECK(content.find(c.fingerprint()) != std::string::npos);
        }
        fs::remove_all(a);
        fs::remove_all(b);
    }
}

TEST_CASE("errors as json") {
    const auto j = error_json(ConfigError("model.n", "must be a power of two"));
    CHECK(j["error"]["kind"] == "config");
    CHECK(j["error"]["field"] == "model.n");
    CHECK(error_json(SolverError("overflow", 12))["error"]["step"] == 12);
    CHECK_THROWS_AS(run_command("plot", RunConfig::parse_string(kBase)), Error);
}
