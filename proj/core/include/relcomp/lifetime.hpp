#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace relcomp {

/// Exponential lifetime with constant hazard `rate` (per hour).
struct Exponential {
  double rate;
};

/// Weibull lifetime with dimensionless `shape` and `scale` in hours.
struct Weibull {
  double shape;
  double scale;
};

class LifetimeDistribution {
 public:
  /// Throws DomainError unless every parameter is finite and > 0.
  explicit LifetimeDistribution(Exponential law);
  explicit LifetimeDistribution(Weibull law);

  const std::variant<Exponential, Weibull>& law() const noexcept { return law_; }

  /// Density f(t); zero for t <= 0.
  double density(double t) const;

 private:
  std::variant<Exponential, Weibull> law_;
};

/// Probability that a component has failed by time t, F(t).
double failure_probability(const LifetimeDistribution& dist, double t);

/// Points t_i = t0 + i * dt for i = 0 .. count-1.
struct TimeGrid {
  double t0 = 0.0;
  double dt = 1.0;
  std::size_t count = 1;

  /// Throws DomainError unless dt > 0 and count >= 1.
  void validate() const;
  double at(std::size_t i) const { return t0 + static_cast<double>(i) * dt; }
};

/// Failure probabilities P[i][c] of component c at grid point i.
std::vector<std::vector<double>> discretize(
    std::span<const LifetimeDistribution> components, const TimeGrid& grid);

}  // namespace relcomp
