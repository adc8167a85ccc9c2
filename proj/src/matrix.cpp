#include "distnn/matrix.hpp"

#include <algorithm>
#include <string>

#include "distnn/error.hpp"
#include "distnn/rng.hpp"

namespace distnn {

DistributionalMatrix::DistributionalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), entries_(rows * cols) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::InvalidArgument, "matrix dimensions must be positive");
  }
}

void DistributionalMatrix::check_index(std::size_t i, std::size_t j) const {
  if (i >= rows_ || j >= cols_) {
    throw Error(ErrorCode::IndexOutOfRange, "cell (" + std::to_string(i) + ", " +
                                                std::to_string(j) + ") outside " +
                                                std::to_string(rows_) + "x" +
                                                std::to_string(cols_) + " matrix");
  }
}

bool DistributionalMatrix::observed(std::size_t i, std::size_t j) const {
  check_index(i, j);
  return entries_[i * cols_ + j].has_value();
}

const EmpiricalDistribution& DistributionalMatrix::at(std::size_t i, std::size_t j) const {
  const auto& e = entry(i, j);
  if (!e) {
    throw Error(ErrorCode::InvalidArgument,
                "cell (" + std::to_string(i) + ", " + std::to_string(j) + ") is not observed");
  }
  return *e;
}

const std::optional<EmpiricalDistribution>& DistributionalMatrix::entry(std::size_t i,
                                                                        std::size_t j) const {
  check_index(i, j);
  return entries_[i * cols_ + j];
}

void DistributionalMatrix::set(std::size_t i, std::size_t j, EmpiricalDistribution d) {
  check_index(i, j);
  entries_[i * cols_ + j] = std::move(d);
}

void DistributionalMatrix::erase(std::size_t i, std::size_t j) {
  check_index(i, j);
  entries_[i * cols_ + j].reset();
}

std::size_t DistributionalMatrix::observed_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.has_value(); }));
}

std::vector<bool> DistributionalMatrix::mask() const {
  std::vector<bool> out(entries_.size());
  std::transform(entries_.begin(), entries_.end(), out.begin(),
                 [](const auto& e) { return e.has_value(); });
  return out;
}

DistributionalMatrix apply_mcar(const DistributionalMatrix& full, const MaskSpec& spec,
                                std::optional<Cell> protect) {
  if (!(spec.p > 0.0 && spec.p <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "MCAR probability must lie in (0, 1]");
  }
  if (protect) full.check_index(protect->row, protect->col);
  DistributionalMatrix out = full;
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < full.rows(); ++i) {
    for (std::size_t j = 0; j < full.cols(); ++j) {
      const bool keep = rng.bernoulli(spec.p);
      const bool forced = protect && protect->row == i && protect->col == j;
      if (!keep || forced) out.erase(i, j);
    }
  }
  return out;
}

std::vector<std::size_t> shared_columns(const DistributionalMatrix& m, std::size_t i,
                                        std::size_t u, std::size_t exclude) {
  m.check_index(i, exclude);
  m.check_index(u, exclude);
  if (i == u) throw Error(ErrorCode::InvalidArgument, "shared_columns needs two distinct rows");
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < m.cols(); ++v) {
    if (v != exclude && m.observed(i, v) && m.observed(u, v)) out.push_back(v);
  }
  return out;
}

}  // namespace distnn
