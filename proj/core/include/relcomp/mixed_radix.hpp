#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace relcomp {

/// A node state label. States are 1-based: 1 is total failure, the state
/// count is the fully working state.
using State = std::uint32_t;

/// Ordered list of state counts. Row indices over the list are 1-based and
/// the LAST entry varies fastest, so summing out the last node means summing
/// consecutive groups of width `radix(size() - 1)`.
class RadixVector {
 public:
  RadixVector() = default;
  /// Throws DomainError if a radix is < 2, or if the product overflows 64 bits.
  explicit RadixVector(std::vector<std::uint32_t> radices);

  std::size_t size() const noexcept { return radices_.size(); }
  bool empty() const noexcept { return radices_.empty(); }
  std::uint32_t radix(std::size_t i) const { return radices_.at(i); }
  const std::vector<std::uint32_t>& radices() const noexcept { return radices_; }

  /// Product of all radices (1 for an empty vector).
  std::uint64_t total() const noexcept { return total_; }
  /// Distance in rows between consecutive states of entry i.
  std::uint64_t stride(std::size_t i) const { return strides_.at(i); }

  /// New vector with the radices reordered: result[i] = radix(perm[i]).
  RadixVector permuted(std::span<const std::size_t> perm) const;
  /// Radices [first, first + count).
  RadixVector slice(std::size_t first, std::size_t count) const;

  bool operator==(const RadixVector& other) const noexcept {
    return radices_ == other.radices_;
  }

 private:
  std::vector<std::uint32_t> radices_;
  std::vector<std::uint64_t> strides_;
  std::uint64_t total_ = 1;
};

/// Decodes a 1-based row index into 1-based states.
std::vector<State> row_to_states(std::uint64_t k, const RadixVector& rv);

/// Encodes 1-based states into a 1-based row index.
std::uint64_t states_to_row(std::span<const State> states, const RadixVector& rv);

/// Throws DomainError unless `perm` is a permutation of 0..n-1.
void check_permutation(std::span<const std::size_t> perm, std::size_t n);

/// Mixed-radix counter over 0-based digits, rightmost fastest.
class Odometer {
 public:
  explicit Odometer(const RadixVector& rv);

  /// Jumps to the 0-based row `row`.
  void seek(std::uint64_t row);

  /// Moves to the next row. Returns the index of the leftmost digit that
  /// changed (all digits to its right changed as well), or size() when the
  /// counter wrapped back to all zeros.
  std::size_t advance() noexcept {
    std::size_t i = digits_.size();
    while (i > 0) {
      --i;
      if (++digits_[i] < radices_[i]) return i;
      digits_[i] = 0;
    }
    return digits_.size();
  }

  std::uint32_t digit(std::size_t i) const noexcept { return digits_[i]; }
  const std::vector<std::uint32_t>& digits() const noexcept { return digits_; }
  std::size_t size() const noexcept { return digits_.size(); }

 private:
  std::vector<std::uint32_t> radices_;
  std::vector<std::uint32_t> digits_;
};

}  // namespace relcomp
