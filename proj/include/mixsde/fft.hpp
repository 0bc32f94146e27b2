#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace mixsde {

/// Real-input FFT of fixed even length N backed by FFTW. Plans are created once
/// under a global lock; transforms may run concurrently from many threads.
class RealFft {
public:
    explicit RealFft(std::size_t length);

    std::size_t length() const noexcept { return length_; }

    /// Unnormalized forward transform; returns the N/2+1 non-redundant coefficients.
    std::vector<std::complex<double>> forward(std::span<const double> input) const;
    /// Unnormalized backward transform of N/2+1 Hermitian coefficients (result is N reals).
    std::vector<double> backward(std::span<const std::complex<double>> half) const;

private:
    struct Plans;
    static std::shared_ptr<const Plans> plans_for(std::size_t n);
    std::size_t length_;
    std::shared_ptr<const Plans> plans_;
};

/// Multiplies by the symmetric Toeplitz matrix T_ij = w[|i-j|] in O(n log n)
/// through a circulant embedding of size 2n.
class ToeplitzOperator {
public:
    explicit ToeplitzOperator(std::vector<double> first_column);

    std::size_t size() const noexcept { return column_.size(); }
    const std::vector<double>& column() const noexcept { return column_; }

    std::vector<double> apply(std::span<const double> x) const;
    /// x' T y.
    double bilinear(std::span<const double> x, std::span<const double> y) const;

private:
    std::vector<double> column_;
    RealFft fft_;
    std::vector<double> spectrum_;
};

}  // namespace mixsde
