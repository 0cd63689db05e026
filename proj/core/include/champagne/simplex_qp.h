#pragma once

#include <cstddef>
#include <vector>

namespace champagne {

/// Dense symmetric matrix, row-major.
struct SymmetricMatrix {
  std::size_t n = 0;
  std::vector<double> data;

  explicit SymmetricMatrix(std::size_t size = 0) : n(size), data(size * size, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return data[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * n + j]; }
};

struct QpOptions {
  int max_iterations = 20000;
  double gap_tolerance = 1e-11;     // relative Frank-Wolfe gap
  std::size_t polish_limit = 1024;  // KKT solve on the support up to this size
};

struct QpResult {
  std::vector<double> weights;
  double value = 0.0;  // μᵀAμ
  double gap = 0.0;    // 2(μᵀAμ - min_i (Aμ)_i) >= value - optimum
  double min_potential = 0.0;
  int iterations = 0;
  bool converged = false;
  bool polished = false;
};

// min μᵀAμ over the probability simplex. A must be positive semidefinite on
// the tangent space {Σμ = 0}; logarithmic energy matrices of sets with
// diameter < 1, and their shifts, qualify.
QpResult solve_simplex_qp(const SymmetricMatrix& a, const QpOptions& options = {});

// Euclidean projection onto the probability simplex (in place).
void project_to_simplex(std::vector<double>& v);

}  // namespace champagne
