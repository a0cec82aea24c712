#include "dfd/signal.hpp"

#include <cmath>
#include <stdexcept>

namespace dfd {

LeaderSignal::LeaderSignal(std::vector<Term> terms) : terms_(std::move(terms)) {
  for (const auto& t : terms_) {
    if (!std::isfinite(t.amplitude) || !std::isfinite(t.frequency)) {
      throw std::invalid_argument("signal term with non-finite amplitude or frequency");
    }
  }
}

LeaderSignal LeaderSignal::constant(double value) {
  return LeaderSignal({Term{Waveform::Cos, value, 0.0}});
}

double LeaderSignal::value(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) {
    const double p = term.frequency * t;
    s += term.amplitude * (term.kind == Waveform::Sin ? std::sin(p) : std::cos(p));
  }
  return s;
}

double LeaderSignal::rate(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) {
    const double p = term.frequency * t;
    s += term.amplitude * term.frequency *
         (term.kind == Waveform::Sin ? std::cos(p) : -std::sin(p));
  }
  return s;
}

double LeaderSignal::acceleration(double t) const {
  double s = 0.0;
  for (const auto& term : terms_) {
    const double p = term.frequency * t;
    s -= term.amplitude * term.frequency * term.frequency *
         (term.kind == Waveform::Sin ? std::sin(p) : std::cos(p));
  }
  return s;
}

double LeaderSignal::value_bound() const {
  double s = 0.0;
  for (const auto& term : terms_) s += std::abs(term.amplitude);
  return s;
}

double LeaderSignal::rate_bound() const {
  double s = 0.0;
  for (const auto& term : terms_) s += std::abs(term.amplitude) * std::abs(term.frequency);
  return s;
}

double LeaderSignal::acceleration_bound() const {
  double s = 0.0;
  for (const auto& term : terms_) {
    s += std::abs(term.amplitude) * term.frequency * term.frequency;
  }
  return s;
}

}  // namespace dfd
