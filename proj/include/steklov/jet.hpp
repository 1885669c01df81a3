#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace steklov {

// Truncated Taylor series: c[j] = g^{(j)}(x0) / j!, for j = 0..N.
template <int N>
struct Jet {
  std::array<double, N + 1> c{};

  static Jet constant(double v) {
    Jet r;
    r.c[0] = v;
    return r;
  }

  // The identity map x -> x expanded at x0.
  static Jet variable(double x0) {
    Jet r;
    r.c[0] = x0;
    if constexpr (N >= 1) r.c[1] = 1.0;
    return r;
  }

  double value() const { return c[0]; }

  // g^{(j)}(x0)
  double derivative(int j) const {
    double fact = 1.0;
    for (int i = 2; i <= j; ++i) fact *= i;
    return c[static_cast<std::size_t>(j)] * fact;
  }

  // Jet of g'. The top coefficient is lost and set to zero.
  Jet differentiated() const {
    Jet r;
    for (int j = 0; j < N; ++j) r.c[j] = (j + 1) * c[j + 1];
    return r;
  }

  Jet& operator+=(const Jet& o) {
    for (int j = 0; j <= N; ++j) c[j] += o.c[j];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (int j = 0; j <= N; ++j) c[j] -= o.c[j];
    return *this;
  }
  Jet& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(Jet a, double s) { return a *= s; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator-(Jet a) { return a *= -1.0; }

  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; i + j <= N; ++j) r.c[i + j] += a.c[i] * b.c[j];
    return r;
  }

  friend Jet operator/(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= N; ++k) {
      double s = a.c[k];
      for (int j = 1; j <= k; ++j) s -= b.c[j] * r.c[k - j];
      r.c[k] = s / b.c[0];
    }
    return r;
  }
};

template <int N>
Jet<N> exp(const Jet<N>& g) {
  // h = e^g satisfies h' = g' h.
  Jet<N> h;
  h.c[0] = std::exp(g.c[0]);
  for (int k = 1; k <= N; ++k) {
    double s = 0.0;
    for (int j = 1; j <= k; ++j) s += j * g.c[j] * h.c[k - j];
    h.c[k] = s / k;
  }
  return h;
}

}  // namespace steklov
