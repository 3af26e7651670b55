#include "relcomp/lifetime.hpp"

#include <cmath>
#include <string>

#include "relcomp/error.hpp"

namespace relcomp {
namespace {

void require_positive(double value, const char* what) {
  if (!(std::isfinite(value) && value > 0.0)) {
    throw DomainError(std::string(what) + " must be finite and > 0");
  }
}

}  // namespace

LifetimeDistribution::LifetimeDistribution(Exponential law) : law_(law) {
  require_positive(law.rate, "exponential rate");
}

LifetimeDistribution::LifetimeDistribution(Weibull law) : law_(law) {
  require_positive(law.shape, "weibull shape");
  require_positive(law.scale, "weibull scale");
}

double LifetimeDistribution::density(double t) const {
  if (t <= 0.0) return 0.0;
  if (const auto* e = std::get_if<Exponential>(&law_)) {
    return e->rate * std::exp(-e->rate * t);
  }
  const auto& w = std::get<Weibull>(law_);
  const double z = t / w.scale;
  return w.shape / w.scale * std::pow(z, w.shape - 1.0) * std::exp(-std::pow(z, w.shape));
}

double failure_probability(const LifetimeDistribution& dist, double t) {
  if (std::isnan(t) || t < 0.0) throw DomainError("time must be >= 0");
  if (t == 0.0) return 0.0;
  double exponent = 0.0;
  if (const auto* e = std::get_if<Exponential>(&dist.law())) {
    exponent = e->rate * t;
  } else {
    const auto& w = std::get<Weibull>(dist.law());
    exponent = std::pow(t / w.scale, w.shape);
  }
  return -std::expm1(-exponent);
}

void TimeGrid::validate() const {
  if (!(std::isfinite(dt) && dt > 0.0)) throw DomainError("time step must be > 0");
  if (count < 1) throw DomainError("time grid needs at least one point");
  if (!std::isfinite(t0) || t0 < 0.0) throw DomainError("t0 must be >= 0");
}

std::vector<std::vector<double>> discretize(
    std::span<const LifetimeDistribution> components, const TimeGrid& grid) {
  grid.validate();
  std::vector<std::vector<double>> out(grid.count, std::vector<double>(components.size()));
  for (std::size_t i = 0; i < grid.count; ++i) {
    const double t = grid.at(i);
    for (std::size_t c = 0; c < components.size(); ++c) {
      out[i][c] = failure_probability(components[c], t);
    }
  }
  return out;
}

}  // namespace relcomp
