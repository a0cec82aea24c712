#pragma once

#include <string>
#include <vector>

namespace dfd {

/// Analytic signal built from sinusoidal terms a*sin(w t) / a*cos(w t),
/// with exact first and second derivatives and a triangle-inequality
/// certificate for sup |second derivative|. A zero-frequency cosine term is
/// a constant, so constant disturbances are representable too.
class LeaderSignal {
 public:
  enum class Waveform { Sin, Cos };

  struct Term {
    Waveform kind = Waveform::Sin;
    double amplitude = 0.0;
    double frequency = 0.0;
  };

  LeaderSignal() = default;  // identically zero
  explicit LeaderSignal(std::vector<Term> terms);

  static LeaderSignal constant(double value);

  double value(double t) const;
  double rate(double t) const;
  double acceleration(double t) const;

  /// sum |a|     >= sup_t |value|
  double value_bound() const;
  /// sum |a| w   >= sup_t |rate|
  double rate_bound() const;
  /// sum |a| w^2 >= sup_t |acceleration| (may be conservative)
  double acceleration_bound() const;

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

}  // namespace dfd
