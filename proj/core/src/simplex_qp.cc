#include "champagne/simplex_qp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

namespace champagne {
namespace {

using ConstMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Largest eigenvalue of P A P with P = I - 11ᵀ/n, by power iteration.
double tangent_lipschitz(const ConstMap& a) {
  const auto n = a.rows();
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::cos(1.0 + 2.3 * static_cast<double>(i));
  v.array() -= v.mean();
  double lambda = 0.0;
  for (int it = 0; it < 60; ++it) {
    const double norm = v.norm();
    if (norm == 0.0) return 1.0;
    v /= norm;
    Eigen::VectorXd w = a * v;
    w.array() -= w.mean();
    lambda = v.dot(w);
    v = w;
  }
  return std::max(std::abs(lambda), 1e-12);
}

struct Evaluation {
  double value;
  double gap;
  double min_potential;
};

Evaluation evaluate(const ConstMap& a, const Eigen::VectorXd& mu) {
  const Eigen::VectorXd pot = a * mu;
  const double value = mu.dot(pot);
  const double min_pot = pot.minCoeff();
  return {value, 2.0 * (value - min_pot), min_pot};
}

// Equality-constrained minimum on the support: [A_SS 1; 1ᵀ 0].
bool kkt_polish(const ConstMap& a, Eigen::VectorXd& mu) {
  std::vector<Eigen::Index> support;
  const double cutoff = 1e-14 * mu.maxCoeff();
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    if (mu[i] > cutoff) support.push_back(i);
  }
  for (int round = 0; round < 8 && !support.empty(); ++round) {
    const auto s = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd k(s + 1, s + 1);
    for (Eigen::Index i = 0; i < s; ++i) {
      for (Eigen::Index j = 0; j < s; ++j) k(i, j) = a(support[i], support[j]);
      k(i, s) = 1.0;
      k(s, i) = 1.0;
    }
    k(s, s) = 0.0;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
    rhs[s] = 1.0;
    const Eigen::VectorXd sol = k.partialPivLu().solve(rhs);
    if (!sol.allFinite()) return false;
    std::vector<Eigen::Index> next;
    for (Eigen::Index i = 0; i < s; ++i) {
      if (sol[i] > 0.0) next.push_back(support[i]);
    }
    if (next.size() == support.size()) {
      mu.setZero();
      for (Eigen::Index i = 0; i < s; ++i) mu[support[i]] = sol[i];
      return true;
    }
    support = std::move(next);
  }
  return false;
}

}  // namespace

void project_to_simplex(std::vector<double>& v) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    cumulative += u[i];
    const double t = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(0.0, x - theta);
}

QpResult solve_simplex_qp(const SymmetricMatrix& matrix, const QpOptions& options) {
  QpResult result;
  const auto n = static_cast<Eigen::Index>(matrix.n);
  if (n == 0) return result;
  const ConstMap a(matrix.data.data(), n, n);
  Eigen::VectorXd mu = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  if (n == 1) {
    result.weights = {1.0};
    result.value = result.min_potential = a(0, 0);
    result.converged = true;
    return result;
  }

  const double step = 1.0 / (2.0 * 1.02 * tangent_lipschitz(a));
  Eigen::VectorXd y = mu;
  Eigen::VectorXd prev = mu;
  std::vector<double> buffer(static_cast<std::size_t>(n));
  double t = 1.0;
  Evaluation eval = evaluate(a, mu);
  int it = 0;
  for (; it < options.max_iterations; ++it) {
    if (eval.gap <= options.gap_tolerance * std::max(1.0, std::abs(eval.value))) break;
    const Eigen::VectorXd grad = 2.0 * (a * y);
    for (Eigen::Index i = 0; i < n; ++i) buffer[static_cast<std::size_t>(i)] = y[i] - step * grad[i];
    project_to_simplex(buffer);
    prev = mu;
    mu = Eigen::Map<const Eigen::VectorXd>(buffer.data(), n);
    // Gradient-based adaptive restart keeps the momentum monotone.
    if ((y - mu).dot(mu - prev) > 0.0) {
      t = 1.0;
      y = mu;
    } else {
      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      y = mu + ((t - 1.0) / t_next) * (mu - prev);
      t = t_next;
    }
    if (it % 10 == 9) eval = evaluate(a, mu);
  }
  eval = evaluate(a, mu);
  result.iterations = it;

  if (static_cast<std::size_t>(n) <= options.polish_limit) {
    Eigen::VectorXd polished = mu;
    if (kkt_polish(a, polished)) {
      const Evaluation pe = evaluate(a, polished);
      if (pe.gap < eval.gap) {
        mu = polished;
        eval = pe;
        result.polished = true;
      }
    }
  }
  result.weights.assign(mu.data(), mu.data() + n);
  result.value = eval.value;
  result.gap = eval.gap;
  result.min_potential = eval.min_potential;
  result.converged = eval.gap <= options.gap_tolerance * std::max(1.0, std::abs(eval.value)) || result.polished;
  return result;
}

}  // namespace champagne
