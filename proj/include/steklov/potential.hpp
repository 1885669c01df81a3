#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "numerics.hpp"

namespace steklov {

// Derivatives q^{(j)}(x0), j = 0..order, of the unreflected potential.
using TaylorSource = std::function<std::vector<double>(double x0, int order)>;

// A real potential on [0,1] with cached uniform samples. Value-semantic and
// immutable; copies share the cache.
class Potential {
 public:
  static constexpr std::size_t kSamplePanels = 4096;

  Potential() : Potential([](double) { return 0.0; }, "zero") {}

  explicit Potential(std::function<double(double)> fn, std::string label = "custom",
                     TaylorSource taylor = {})
      : data_(std::make_shared<Data>()) {
    data_->fn = std::move(fn);
    data_->taylor = std::move(taylor);
    data_->label = std::move(label);
    build_cache();
  }

  static Potential constant(double c) {
    return Potential([c](double) { return c; }, "const(" + std::to_string(c) + ")",
                     [c](double, int order) {
                       std::vector<double> d(static_cast<std::size_t>(order) + 1, 0.0);
                       d[0] = c;
                       return d;
                     });
  }

  double operator()(double x) const { return eval(x); }

  double eval(double x) const {
    return symmetrized_ ? data_->fn(1.0 - x) : data_->fn(x);
  }

  bool symmetrized() const { return symmetrized_; }
  const std::string& label() const { return data_->label; }

  // q̌(x) = q(1 - x)
  Potential reflected() const {
    Potential r = *this;
    r.symmetrized_ = !symmetrized_;
    return r;
  }

  double l2_norm() const { return data_->l2; }
  double sup_norm() const { return data_->sup; }
  double mean() const { return data_->mean; }

  // Samples on the uniform grid of kSamplePanels panels, in this orientation.
  double sample(std::size_t i) const {
    return symmetrized_ ? data_->samples[kSamplePanels - i] : data_->samples[i];
  }

  // True when q(x) = q(1-x) on the sample grid to roundoff.
  bool is_symmetric() const { return data_->symmetric; }

  // Largest |q(x) - q(1-x)| on the sample grid.
  double asymmetry() const { return data_->asym; }

  bool has_taylor() const { return static_cast<bool>(data_->taylor); }

  // Derivatives of this orientation at x0.
  std::vector<double> derivatives(double x0, int order) const {
    if (!data_->taylor)
      throw InsufficientSmoothness("potential '" + data_->label +
                                   "' has no symbolic derivatives");
    if (!symmetrized_) return data_->taylor(x0, order);
    std::vector<double> d = data_->taylor(1.0 - x0, order);
    for (std::size_t j = 1; j < d.size(); j += 2) d[j] = -d[j];
    return d;
  }

 private:
  struct Data {
    std::function<double(double)> fn;
    TaylorSource taylor;
    std::string label;
    std::vector<double> samples;
    double l2 = 0, sup = 0, mean = 0, asym = 0;
    bool symmetric = false;
  };

  void build_cache() {
    auto& d = *data_;
    d.samples.resize(kSamplePanels + 1);
    double h = 1.0 / static_cast<double>(kSamplePanels);
    for (std::size_t i = 0; i <= kSamplePanels; ++i) {
      double x = i == kSamplePanels ? 1.0 : h * static_cast<double>(i);
      double v = d.fn(x);
      if (!std::isfinite(v))
        throw InvalidPotential("potential '" + d.label + "' is not finite at x=" +
                               std::to_string(x));
      d.samples[i] = v;
      d.sup = std::max(d.sup, std::fabs(v));
    }
    double s2 = 0, s1 = 0;
    for (std::size_t i = 0; i <= kSamplePanels; ++i) {
      double w = (i == 0 || i == kSamplePanels) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      s2 += w * d.samples[i] * d.samples[i];
      s1 += w * d.samples[i];
    }
    d.l2 = std::sqrt(s2 * h / 3.0);
    d.mean = s1 * h / 3.0;
    for (std::size_t i = 0; i <= kSamplePanels; ++i)
      d.asym = std::max(d.asym, std::fabs(d.samples[i] - d.samples[kSamplePanels - i]));
    d.symmetric = d.asym <= 1e-12 * std::max(1.0, d.sup);
  }

  std::shared_ptr<Data> data_;
  bool symmetrized_ = false;
};

}  // namespace steklov
