#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mixsde/error.hpp"
#include "mixsde/noise.hpp"
#include "mixsde/paths.hpp"
#include "mixsde/rng.hpp"

using namespace mixsde;

namespace {

SamplePath scalar(std::vector<double> v, double T = 1.0) {
    SamplePath p(TimeGrid(T, v.size() - 1), 1);
    for (std::size_t k = 0; k < v.size(); ++k) p(k, 0) = v[k];
    return p;
}

SamplePath scaled(SamplePath p, double c) {
    p.values() *= c;
    return p;
}

}  // namespace

TEST_CASE("time grid") {
    const TimeGrid g(2.0, 8);
    CHECK(g.time(0) == 0.0);
    CHECK(g.time(8) == 2.0);
    for (std::size_t k = 0; k < 8; ++k) CHECK(g.time(k) < g.time(k + 1));
    CHECK(g.index_of(0.75) == 3);
    CHECK_THROWS_AS(g.index_of(0.3), Error);
    CHECK_THROWS_AS(TimeGrid(0.0, 4), Error);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), Error);
}

TEST_CASE("sup norm") {
    CHECK(sup_norm(SamplePath(TimeGrid(1.0, 4), 2)) == 0.0);
    const SamplePath p = scalar({0, -3, 2});
    CHECK(sup_norm(p) == 3.0);
    CHECK(sup_norm(scaled(p, 2.0)) == 6.0);
    SamplePath v(TimeGrid(1.0, 1), 2);
    v(1, 0) = 3;
    v(1, 1) = 4;
    CHECK(sup_norm(v) == 5.0);
}

TEST_CASE("hoelder seminorm examples") {
    CHECK(holder_seminorm(scalar({2, 2, 2, 2, 2}), 0.5) == 0.0);
    std::vector<double> id(65);
    for (std::size_t k = 0; k < id.size(); ++k) id[k] = static_cast<double>(k) / 64.0;
    const SamplePath f = scalar(id);
    CHECK(holder_seminorm(f, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(holder_seminorm(scaled(f, -3.0), 0.5) == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("hoelder seminorm is nondecreasing in theta on [0,1]") {
    // Every increment spans t - s <= 1, so (t-s)^theta shrinks as theta grows.
    Rng rng(5);
    const SamplePath w = sample_wiener(TimeGrid(1.0, 256), 2, rng);
    double prev = 0.0;
    for (double theta = 0.05; theta < 1.0; theta += 0.05) {
        const double v = holder_seminorm(w, theta);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("hoelder triangle inequality and windowed mode") {
    Rng rng(9);
    const TimeGrid g(1.0, 512);
    const SamplePath p = sample_wiener(g, 1, rng);
    const SamplePath q = sample_fbm(g, 1, Hurst(0.7), rng);
    SamplePath s(g, p.values() + q.values());
    for (double theta : {0.1, 0.3, 0.45}) {
        CHECK(holder_seminorm(s, theta) <= holder_seminorm(p, theta) + holder_seminorm(q, theta) + 1e-12);
        const double exact = holder_seminorm(p, theta, HolderMode::Exact);
        const double windowed = holder_seminorm(p, theta, HolderMode::Windowed);
        CHECK(windowed <= exact);
        CHECK(windowed >= 0.8 * exact);
    }
    CHECK(holder_seminorm(p, 0.3, HolderMode::Auto) == holder_seminorm(p, 0.3, HolderMode::Exact));
}

TEST_CASE("restriction keeps every stride-th point") {
    Rng rng(1);
    const SamplePath w = sample_wiener(TimeGrid(1.0, 64), 2, rng);
    const SamplePath r = restrict_path(w, 4);
    CHECK(r.grid() == TimeGrid(1.0, 16));
    for (std::size_t k = 0; k <= 16; ++k) CHECK(r(k, 1) == w(4 * k, 1));
    CHECK_THROWS_AS(restrict_path(w, 3), Error);
}

TEST_CASE("csv round trip") {
    Rng rng(2);
    const SamplePath w = sample_wiener(TimeGrid(0.5, 16), 2, rng);
    std::stringstream io;
    write_csv(io, w, {"seed=2"});
    CHECK(io.str().rfind("# seed=2\nt,W1,W2\n", 0) == 0);
    const SamplePath back = read_csv(io);
    CHECK(back.grid() == w.grid());
    CHECK(back.labels() == w.labels());
    CHECK(back.values() == w.values());
}

TEST_CASE("paths must be finite") {
    SamplePath p(TimeGrid(1.0, 2), 1);
    CHECK(p.all_finite());
    p(1, 0) = std::nan("");
    CHECK_FALSE(p.all_finite());
}
