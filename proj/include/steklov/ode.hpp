#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace steklov {

struct OdeTolerance {
  double rtol = 1e-10;
  double atol = 1e-12;
};

// Dormand-Prince 5(4) with FSAL, advancing a fixed-size state between nodes.
// Per-component absolute tolerances let callers make a component purely
// relative.
template <std::size_t D>
class DormandPrince {
 public:
  using State = std::array<double, D>;

  DormandPrince(double rtol, const State& atol) : rtol_(rtol), atol_(atol) {}

  void set_atol(std::size_t i, double v) { atol_[i] = v; }

  // Advance y from t0 to t1 (t1 > t0). h carries the step size between calls.
  template <class Rhs>
  void advance(Rhs&& rhs, double t0, double t1, State& y, double& h) {
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                     a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                     b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = t0;
    State k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
    rhs(t, y, k1);
    std::size_t steps = 0;
    while (t < t1) {
      if (++steps > kMaxSteps) throw NumericalError("ODE integrator: step limit exceeded");
      bool last = false;
      double hh = h;
      if (t + hh >= t1 || t1 - (t + hh) < 1e-3 * hh) {
        hh = t1 - t;
        last = true;
      }
      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + hh * a21 * k1[i];
      rhs(t + c2 * hh, tmp, k2);
      for (std::size_t i = 0; i < D; ++i) tmp[i] = y[i] + hh * (a31 * k1[i] + a32 * k2[i]);
      rhs(t + c3 * hh, tmp, k3);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + hh * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      rhs(t + c4 * hh, tmp, k4);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + hh * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      rhs(t + c5 * hh, tmp, k5);
      for (std::size_t i = 0; i < D; ++i)
        tmp[i] = y[i] + hh * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                              a65 * k5[i]);
      rhs(t + hh, tmp, k6);
      for (std::size_t i = 0; i < D; ++i)
        ynew[i] = y[i] + hh * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                               b6 * k6[i]);
      rhs(t + hh, ynew, k7);
      double err = 0.0;
      for (std::size_t i = 0; i < D; ++i) {
        double ei = hh * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                          e6 * k6[i] + e7 * k7[i]);
        double sc = atol_[i] + rtol_ * std::max(std::fabs(y[i]), std::fabs(ynew[i]));
        err = std::max(err, std::fabs(ei) / sc);
      }
      if (!std::isfinite(err)) throw NumericalError("ODE integrator: non-finite state");
      if (err <= 1.0) {
        t = last ? t1 : t + hh;
        y = ynew;
        k1 = k7;
        double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
        if (!last || fac < 1.0) h = hh * fac;
      } else {
        h = hh * std::max(0.2, 0.9 * std::pow(err, -0.2));
        if (h < 1e-14 * std::max(1.0, std::fabs(t)))
          throw NumericalError("ODE integrator: step size underflow");
      }
    }
  }

 private:
  static constexpr std::size_t kMaxSteps = 20000000;
  double rtol_;
  State atol_;
};

}  // namespace steklov
