#pragma once

// Run configuration: an INI file with sections [system] [model] [run] and one block per
// subcommand. See README.md for the schema.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mixsde/fields.hpp"

namespace mixsde {

struct SystemBlock {
    std::string preset;                    ///< empty for inline systems
    PresetParams params;                   ///< preset parameters
    std::size_t d = 0, m = 0, l = 0;       ///< inline dimensions
    std::map<std::string, std::string> entries;  ///< "a1", "b2_1", "c1_1" -> expression
    bool time_dependent = false;

    bool operator==(const SystemBlock&) const = default;
};

struct ModelBlock {
    double H = 0.0;
    double T = 1.0;
    std::size_t n = 0;
    std::vector<double> x0;  ///< empty means the origin

    bool operator==(const ModelBlock&) const = default;
};

struct RunBlock {
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out = "out";

    bool operator==(const RunBlock&) const = default;
};

struct SimulateBlock {
    std::size_t paths = 1;
    std::optional<double> t;  ///< ensemble time, defaults to T

    bool operator==(const SimulateBlock&) const = default;
};

struct MalliavinBlock {
    std::size_t paths = 100;
    std::optional<double> t;
    std::vector<double> eps;  ///< empty selects the default grid

    bool operator==(const MalliavinBlock&) const = default;
};

struct HormanderBlock {
    std::size_t n0 = 3;
    double tol = 1e-8;
    bool include_drift = false;
    std::size_t max_nodes = 10000;

    bool operator==(const HormanderBlock&) const = default;
};

struct NorrisBlock {
    std::size_t M = 16;
    std::size_t r = 16;
    std::size_t oversample = 4;
    std::size_t trials = 1000;
    double theta = 0.3;
    std::vector<double> eps{0.5, 0.4, 0.3};
    std::vector<double> q{0.5};

    bool operator==(const NorrisBlock&) const = default;
};

struct DensityBlock {
    std::size_t paths = 1000;
    std::optional<double> t;
    std::size_t component = 1;
    std::optional<double> bandwidth;  ///< empty means Silverman
    std::vector<double> radii{0.2, 0.1, 0.05};
    std::vector<double> center;       ///< empty means x0
    std::vector<double> target_mean;  ///< Gaussian check runs when both targets are set
    std::vector<double> target_cov;   ///< row-major d x d
    std::size_t integrability_paths = 0;  ///< 0 skips the integrability study
    double theta = 0.4;
    std::vector<double> K{0.0, 1.0};
    std::vector<double> q;            ///< empty means 0.8 q*

    bool operator==(const DensityBlock&) const = default;
};

struct RunConfig {
    SystemBlock system;
    ModelBlock model;
    RunBlock run;
    SimulateBlock simulate;
    MalliavinBlock malliavin;
    HormanderBlock hormander;
    NorrisBlock norris;
    DensityBlock density;

    bool operator==(const RunConfig&) const = default;

    /// Parses and validates; errors are ConfigError with a "section.key" field path.
    static RunConfig parse(std::istream& in);
    static RunConfig parse_string(const std::string& text);
    static RunConfig load(const std::string& path);

    /// Canonical text: every key in a fixed order, numbers in shortest round-trip form.
    std::string serialize() const;
    /// Hash of the canonical text without [run] out/threads, which never change results.
    std::string fingerprint() const;

    /// Throws ConfigError on the first invalid field.
    void validate() const;

    CoefficientSystem build_system() const;
    Eigen::VectorXd initial_state() const;
};

}  // namespace mixsde
