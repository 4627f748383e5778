#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <complex>
#include <cstdint>

// Stride kernels over dense amplitude arrays. Qubit q addresses bit q of the
// basis index (qubit 0 = least significant bit). All kernels are branch-free
// over amplitude pairs/quadruples so the compiler can vectorize them; complex
// products are spelled out to avoid libcall multiplication.

namespace qlink::kernels {

using c64 = std::complex<double>;
using u64 = std::uint64_t;

inline c64 cmul(c64 a, c64 b) {
  return {a.real() * b.real() - a.imag() * b.imag(),
          a.real() * b.imag() + a.imag() * b.real()};
}

// conj(a) * b
inline c64 cdot(c64 a, c64 b) {
  return {a.real() * b.real() + a.imag() * b.imag(),
          a.real() * b.imag() - a.imag() * b.real()};
}

// Index of the k-th basis state with bit q forced to zero.
inline u64 insert_zero(u64 k, u64 lo_mask, u64 hi_mask) {
  return ((k & hi_mask) << 1) | (k & lo_mask);
}

// Generic single-qubit 2x2 apply, m row-major {m00, m01, m10, m11}.
inline void apply_1q(c64* a, u64 dim, int q, const std::array<c64, 4>& m) {
  const u64 mask = u64{1} << q;
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = insert_zero(k, lo, hi);
    const u64 i1 = i0 | mask;
    const c64 x = a[i0], y = a[i1];
    a[i0] = cmul(m[0], x) + cmul(m[1], y);
    a[i1] = cmul(m[2], x) + cmul(m[3], y);
  }
}

// Diagonal phase rotation RZ(theta) = diag(e^{-i theta/2}, e^{+i theta/2}).
inline void apply_rz(c64* a, u64 dim, int q, double theta) {
  const c64 p0{std::cos(0.5 * theta), -std::sin(0.5 * theta)};
  const c64 p1 = std::conj(p0);
  const u64 mask = u64{1} << q;
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = insert_zero(k, lo, hi);
    const u64 i1 = i0 | mask;
    a[i0] = cmul(p0, a[i0]);
    a[i1] = cmul(p1, a[i1]);
  }
}

inline std::array<c64, 4> rx_matrix(double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {c64{c, 0}, c64{0, -s}, c64{0, -s}, c64{c, 0}};
}

inline std::array<c64, 4> ry_matrix(double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {c64{c, 0}, c64{-s, 0}, c64{s, 0}, c64{c, 0}};
}

inline std::array<c64, 4> rz_matrix(double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  return {c64{c, -s}, c64{0, 0}, c64{0, 0}, c64{c, s}};
}

inline std::array<c64, 4> matmul2(const std::array<c64, 4>& a,
                                  const std::array<c64, 4>& b) {
  return {cmul(a[0], b[0]) + cmul(a[1], b[2]), cmul(a[0], b[1]) + cmul(a[1], b[3]),
          cmul(a[2], b[0]) + cmul(a[3], b[2]), cmul(a[2], b[1]) + cmul(a[3], b[3])};
}

// Sign flip on basis states with both control bits set.
inline void apply_cz(c64* a, u64 dim, int qa, int qb) {
  const int qmin = std::min(qa, qb), qmax = std::max(qa, qb);
  const u64 mmin = u64{1} << qmin, mmax = u64{1} << qmax;
  const u64 lo = mmin - 1;
  const u64 mid = ((u64{1} << (qmax - 1)) - 1) ^ lo;
  const u64 hi = ~(lo | mid);
  const u64 quads = dim >> 2;
  for (u64 k = 0; k < quads; ++k) {
    const u64 i = ((k & hi) << 2) | ((k & mid) << 1) | (k & lo) | mmin | mmax;
    a[i] = -a[i];
  }
}

inline void apply_cnot(c64* a, u64 dim, int control, int target) {
  const int qmin = std::min(control, target), qmax = std::max(control, target);
  const u64 mc = u64{1} << control, mt = u64{1} << target;
  const u64 lo = (u64{1} << qmin) - 1;
  const u64 mid = ((u64{1} << (qmax - 1)) - 1) ^ lo;
  const u64 hi = ~(lo | mid);
  const u64 quads = dim >> 2;
  for (u64 k = 0; k < quads; ++k) {
    const u64 i = ((k & hi) << 2) | ((k & mid) << 1) | (k & lo) | mc;
    std::swap(a[i], a[i | mt]);
  }
}

// RXX(theta) = exp(-i theta (X x X)/2): mixes the pair {i, i ^ (ma|mb)}.
inline void apply_rxx(c64* a, u64 dim, int qa, int qb, double theta) {
  const double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
  const u64 flip = (u64{1} << qa) | (u64{1} << qb);
  const u64 mask = u64{1} << qa;  // enumerate indices with bit qa clear
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = insert_zero(k, lo, hi);
    const u64 i1 = i0 ^ flip;
    const c64 x = a[i0], y = a[i1];
    a[i0] = {c * x.real() + s * y.imag(), c * x.imag() - s * y.real()};
    a[i1] = {c * y.real() + s * x.imag(), c * y.imag() - s * x.real()};
  }
}

inline double expectation_z(const c64* a, u64 dim, int q) {
  const u64 mask = u64{1} << q;
  const u64 lo = mask - 1, hi = ~lo;
  const u64 pairs = dim >> 1;
  double acc = 0.0;
  for (u64 k = 0; k < pairs; ++k) {
    const u64 i0 = insert_zero(k, lo, hi);
    const u64 i1 = i0 | mask;
    acc += std::norm(a[i0]) - std::norm(a[i1]);
  }
  return acc;
}

// In-place application of O = -(1/n_data) * sum_{q<n_data} Z_q (diagonal).
inline void apply_mean_z_observable(c64* a, u64 dim, int n_data) {
  const u64 dmask = (u64{1} << n_data) - 1;
  const double inv = 1.0 / n_data;
  for (u64 i = 0; i < dim; ++i) {
    const int w = n_data - 2 * std::popcount(i & dmask);
    a[i] *= -w * inv;
  }
}

}  // namespace qlink::kernels
