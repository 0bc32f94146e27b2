#include "mixsde/util.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <exception>
#include <optional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mixsde/error.hpp"

namespace mixsde {

std::string format_double(double v) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

double parse_double(std::string_view text) {
    const std::string t = trim(text);
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t[0] == '+') ++first;
    auto res = std::from_chars(first, t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) throw Error("not a number: '" + t + "'");
    return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = text.find(sep, start);
        out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(first, last - first + 1));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return out;
}

bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

namespace {
int g_threads = 0;
}

void set_worker_threads(int threads) { g_threads = threads < 0 ? 0 : threads; }

int worker_threads() {
#ifdef _OPENMP
    return g_threads > 0 ? g_threads : omp_get_max_threads();
#else
    return 1;
#endif
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
    std::vector<std::exception_ptr> errors(count);
    const auto n = static_cast<long long>(count);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(worker_threads())
#endif
    for (long long i = 0; i < n; ++i) {
        try {
            body(static_cast<std::size_t>(i));
        } catch (...) {
            errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mixsde
