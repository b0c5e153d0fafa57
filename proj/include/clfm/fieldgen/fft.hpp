#pragma once

// Power-of-two discrete Fourier transforms on Eigen vectors.
// Backed by Eigen's FFT module (kissfft); this header only pins the
// conventions used across the project:
//   forward  X_k = sum_n x_n exp(-2 pi i k n / N)
//   inverse  x_n = (1/N) sum_k X_k exp(+2 pi i k n / N)

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <complex>
#include <stdexcept>
#include <string>

namespace clfm::fieldgen {

template <typename Scalar>
using ComplexVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;

inline bool is_power_of_two(Eigen::Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline void require_power_of_two(Eigen::Index n, const char* where) {
  if (!is_power_of_two(n)) {
    throw std::invalid_argument(std::string(where) + ": length " + std::to_string(n) +
                                " is not a power of two");
  }
}

/// Full complex spectrum of a real series.
template <typename Derived>
ComplexVector<typename Derived::Scalar> fft(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  require_power_of_two(x.size(), "fft");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> in = x.reshaped();
  ComplexVector<Scalar> out;
  Eigen::FFT<Scalar> engine;
  engine.fwd(out, in);
  return out;
}

/// Forward transform of a complex series.
template <typename Scalar>
ComplexVector<Scalar> fft_complex(const ComplexVector<Scalar>& x) {
  require_power_of_two(x.size(), "fft");
  ComplexVector<Scalar> out;
  Eigen::FFT<Scalar> engine;
  engine.fwd(out, x);
  return out;
}

/// Inverse transform, scaled by 1/N.
template <typename Scalar>
ComplexVector<Scalar> ifft(const ComplexVector<Scalar>& spectrum) {
  require_power_of_two(spectrum.size(), "ifft");
  ComplexVector<Scalar> out;
  Eigen::FFT<Scalar> engine;
  engine.inv(out, spectrum);
  return out;
}

}  // namespace clfm::fieldgen
