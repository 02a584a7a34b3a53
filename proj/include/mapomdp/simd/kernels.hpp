#pragma once

// Double-precision vector kernels used by the classifier and the belief code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA implementation. The active table is picked once at startup from
// the CPU feature bits; setting MAPOMDP_SIMD=scalar in the environment forces
// the reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace mapomdp::simd {

struct KernelTable {
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y = W x + bias, W is rows x cols row-major; bias may be null.
  void (*gemv)(const double* w, const double* x, const double* bias, double* y,
               std::size_t rows, std::size_t cols);
  // y += W^T x, x has `rows` entries, y has `cols` entries.
  void (*gemv_t_acc)(const double* w, const double* x, double* y,
                     std::size_t rows, std::size_t cols);
  // W += alpha * x y^T, x has `rows` entries, y has `cols` entries.
  void (*rank1)(double* w, double alpha, const double* x, const double* y,
                std::size_t rows, std::size_t cols);
};

const KernelTable& scalar_kernels();

// Null when the build or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace mapomdp::simd
