#include "relcomp/mixed_radix.hpp"

#include <string>

#include "relcomp/error.hpp"

namespace relcomp {

RadixVector::RadixVector(std::vector<std::uint32_t> radices)
    : radices_(std::move(radices)), strides_(radices_.size()) {
  std::uint64_t total = 1;
  for (std::size_t i = radices_.size(); i-- > 0;) {
    if (radices_[i] < 2) {
      throw DomainError("radix " + std::to_string(i) + " is " +
                        std::to_string(radices_[i]) + "; every radix must be >= 2");
    }
    strides_[i] = total;
    if (__builtin_mul_overflow(total, std::uint64_t{radices_[i]}, &total)) {
      throw DomainError("state combination count overflows 64 bits");
    }
  }
  total_ = total;
}

RadixVector RadixVector::permuted(std::span<const std::size_t> perm) const {
  check_permutation(perm, radices_.size());
  std::vector<std::uint32_t> out(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = radices_[perm[i]];
  return RadixVector(std::move(out));
}

RadixVector RadixVector::slice(std::size_t first, std::size_t count) const {
  if (first + count > radices_.size()) throw DomainError("radix slice out of range");
  return RadixVector(std::vector<std::uint32_t>(radices_.begin() + first,
                                                radices_.begin() + first + count));
}

std::vector<State> row_to_states(std::uint64_t k, const RadixVector& rv) {
  if (k < 1 || k > rv.total()) {
    throw DomainError("row " + std::to_string(k) + " outside 1.." +
                      std::to_string(rv.total()));
  }
  std::vector<State> states(rv.size());
  std::uint64_t rest = k - 1;
  for (std::size_t i = rv.size(); i-- > 0;) {
    states[i] = static_cast<State>(rest % rv.radix(i)) + 1;
    rest /= rv.radix(i);
  }
  return states;
}

std::uint64_t states_to_row(std::span<const State> states, const RadixVector& rv) {
  if (states.size() != rv.size()) {
    throw DomainError("state vector has " + std::to_string(states.size()) +
                      " entries, radix vector has " + std::to_string(rv.size()));
  }
  std::uint64_t row = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] < 1 || states[i] > rv.radix(i)) {
      throw DomainError("state " + std::to_string(states[i]) + " of entry " +
                        std::to_string(i) + " outside 1.." + std::to_string(rv.radix(i)));
    }
    row += (states[i] - 1) * rv.stride(i);
  }
  return row + 1;
}

void check_permutation(std::span<const std::size_t> perm, std::size_t n) {
  if (perm.size() != n) throw DomainError("permutation has wrong length");
  std::vector<bool> seen(n, false);
  for (std::size_t p : perm) {
    if (p >= n || seen[p]) throw DomainError("not a permutation");
    seen[p] = true;
  }
}

Odometer::Odometer(const RadixVector& rv)
    : radices_(rv.radices()), digits_(rv.size(), 0) {}

void Odometer::seek(std::uint64_t row) {
  for (std::size_t i = digits_.size(); i-- > 0;) {
    digits_[i] = static_cast<std::uint32_t>(row % radices_[i]);
    row /= radices_[i];
  }
}

}  // namespace relcomp
