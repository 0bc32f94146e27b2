#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace mixsde {

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

bool is_power_of_two(std::size_t n) noexcept;

/// Number of worker threads used by parallel_for; 0 selects the runtime default.
void set_worker_threads(int threads);
int worker_threads();

/// Runs body(i) for i in [0, count) on the worker pool. Bodies must only write to
/// index-owned storage; the first exception thrown (lowest index) is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace mixsde
