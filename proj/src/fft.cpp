#include "mixsde/fft.hpp"

#include <algorithm>
#include <map>
#include <mutex>

#include <fftw3.h>

#include "mixsde/error.hpp"

namespace mixsde {

struct RealFft::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
};

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

// Plans live for the whole process; one pair per transform length.
std::shared_ptr<const RealFft::Plans> RealFft::plans_for(std::size_t n) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    static std::map<std::size_t, std::shared_ptr<RealFft::Plans>> cache;
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    auto plans = std::make_shared<RealFft::Plans>();
    double* real = fftw_alloc_real(n);
    fftw_complex* half = fftw_alloc_complex(n / 2 + 1);
    const int len = static_cast<int>(n);
    plans->forward = fftw_plan_dft_r2c_1d(len, real, half, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans->backward = fftw_plan_dft_c2r_1d(len, half, real, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(real);
    fftw_free(half);
    cache.emplace(n, plans);
    return plans;
}

RealFft::RealFft(std::size_t length) : length_(length) {
    if (length < 2 || length % 2 != 0) throw Error("FFT length must be even and at least 2");
    plans_ = plans_for(length);
}

std::vector<std::complex<double>> RealFft::forward(std::span<const double> input) const {
    if (input.size() != length_) throw Error("FFT input has wrong length");
    std::vector<double> in(input.begin(), input.end());
    std::vector<std::complex<double>> out(length_ / 2 + 1);
    fftw_execute_dft_r2c(plans_->forward, in.data(), reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

std::vector<double> RealFft::backward(std::span<const std::complex<double>> half) const {
    if (half.size() != length_ / 2 + 1) throw Error("FFT input has wrong length");
    // c2r destroys its input.
    std::vector<std::complex<double>> in(half.begin(), half.end());
    std::vector<double> out(length_);
    fftw_execute_dft_c2r(plans_->backward, reinterpret_cast<fftw_complex*>(in.data()), out.data());
    return out;
}

ToeplitzOperator::ToeplitzOperator(std::vector<double> first_column)
    : column_(std::move(first_column)), fft_(2 * std::max<std::size_t>(column_.size(), 1)) {
    const std::size_t n = column_.size();
    if (n == 0) throw Error("Toeplitz operator needs a non-empty column");
    std::vector<double> circ(2 * n, 0.0);
    for (std::size_t k = 0; k < n; ++k) circ[k] = column_[k];
    for (std::size_t k = 1; k < n; ++k) circ[2 * n - k] = column_[k];
    auto spec = fft_.forward(circ);
    spectrum_.resize(spec.size());
    for (std::size_t k = 0; k < spec.size(); ++k) spectrum_[k] = spec[k].real();
}

std::vector<double> ToeplitzOperator::apply(std::span<const double> x) const {
    const std::size_t n = column_.size();
    if (x.size() != n) throw Error("Toeplitz operand has wrong length");
    std::vector<double> padded(2 * n, 0.0);
    std::copy(x.begin(), x.end(), padded.begin());
    auto spec = fft_.forward(padded);
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= spectrum_[k];
    auto full = fft_.backward(spec);
    const double scale = 1.0 / static_cast<double>(2 * n);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = full[i] * scale;
    return out;
}

double ToeplitzOperator::bilinear(std::span<const double> x, std::span<const double> y) const {
    auto ty = apply(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * ty[i];
    return s;
}

}  // namespace mixsde
