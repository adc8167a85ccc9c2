#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "distnn/empdist.hpp"

namespace distnn {

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Rows x cols grid of optional sample arrays. An entry is observed exactly
/// when it holds a distribution, so the mask can never disagree with the data.
class DistributionalMatrix {
 public:
  DistributionalMatrix(std::size_t rows, std::size_t cols);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

  [[nodiscard]] bool observed(std::size_t i, std::size_t j) const;
  /// Throws IndexOutOfRange, or InvalidArgument when the entry is missing.
  [[nodiscard]] const EmpiricalDistribution& at(std::size_t i, std::size_t j) const;
  [[nodiscard]] const std::optional<EmpiricalDistribution>& entry(std::size_t i,
                                                                  std::size_t j) const;

  void set(std::size_t i, std::size_t j, EmpiricalDistribution d);
  void erase(std::size_t i, std::size_t j);

  [[nodiscard]] std::size_t observed_count() const noexcept;
  /// Row-major boolean mask.
  [[nodiscard]] std::vector<bool> mask() const;

  /// Throws IndexOutOfRange when (i, j) is outside the grid.
  void check_index(std::size_t i, std::size_t j) const;

  friend bool operator==(const DistributionalMatrix&, const DistributionalMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::optional<EmpiricalDistribution>> entries_;
};

struct MaskSpec {
  /// Observation probability, 0 < p <= 1.
  double p = 1.0;
  std::uint64_t seed = 0;
};

/// MCAR masking: every cell is kept independently with probability p from a
/// generator seeded by spec.seed (cells visited row-major). A protected cell
/// is always dropped; it still consumes its draw so the rest of the mask does
/// not depend on whether a cell is protected.
DistributionalMatrix apply_mcar(const DistributionalMatrix& full, const MaskSpec& spec,
                                std::optional<Cell> protect = std::nullopt);

/// Columns v != exclude observed in both rows i and u, ascending.
std::vector<std::size_t> shared_columns(const DistributionalMatrix& m, std::size_t i,
                                        std::size_t u, std::size_t exclude);

}  // namespace distnn
