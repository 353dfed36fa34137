#include "m2m/feasibility.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace m2m {

namespace {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

void require_sizes(std::span<const NodeSpec> nodes, const GainMatrix& gains, std::size_t targets) {
  if (nodes.size() != gains.size() || targets != gains.size()) {
    throw Error("node, gain and target dimensions differ");
  }
  if (nodes.empty()) throw Error("empty link set");
}

bool within(double value, double bound) { return value <= bound * (1.0 + kConstraintSlack); }

}  // namespace

namespace {

using RowMajorMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// Strongly connected components of the support graph (i -> j when a[i][j] > 0).
// The Collatz-Wielandt bounds only pinch together on irreducible blocks.
std::vector<std::vector<Eigen::Index>> strong_components(const RowMajorMap& A) {
  const Eigen::Index n = A.rows();
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> out;
  int counter = 0;
  auto visit = [&](auto&& self, Eigen::Index v) -> void {
    const auto vi = static_cast<std::size_t>(v);
    index[vi] = low[vi] = counter++;
    stack.push_back(v);
    on_stack[vi] = true;
    for (Eigen::Index w = 0; w < n; ++w) {
      if (A(v, w) <= 0.0) continue;
      const auto wi = static_cast<std::size_t>(w);
      if (index[wi] < 0) {
        self(self, w);
        low[vi] = std::min(low[vi], low[wi]);
      } else if (on_stack[wi]) {
        low[vi] = std::min(low[vi], index[wi]);
      }
    }
    if (low[vi] == index[vi]) {
      std::vector<Eigen::Index> comp;
      Eigen::Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = false;
        comp.push_back(w);
      } while (w != v);
      out.push_back(std::move(comp));
    }
  };
  for (Eigen::Index v = 0; v < n; ++v) {
    if (index[static_cast<std::size_t>(v)] < 0) visit(visit, v);
  }
  return out;
}

SpectralEstimate irreducible_radius(const Matrix& A, double tolerance, int max_iterations) {
  SpectralEstimate est;
  const Matrix shifted = A + Matrix::Identity(A.rows(), A.cols());
  Vector x = Vector::Constant(A.rows(), 1.0);
  for (int it = 1; it <= max_iterations; ++it) {
    const Vector y = shifted * x;
    const Vector ratio = y.cwiseQuotient(x);
    est.lower = ratio.minCoeff() - 1.0;
    est.upper = ratio.maxCoeff() - 1.0;
    est.iterations = it;
    if (est.upper - est.lower <= tolerance * std::max(1.0, est.upper)) {
      est.converged = true;
      break;
    }
    x = y / y.maxCoeff();
  }
  est.lower = std::max(est.lower, 0.0);
  est.radius = 0.5 * (est.lower + est.upper);
  return est;
}

}  // namespace

SpectralEstimate spectral_radius(std::span<const double> a, std::size_t n, double tolerance,
                                 int max_iterations) {
  if (a.size() != n * n) throw Error("matrix data does not match its dimension");
  SpectralEstimate est;
  est.converged = true;
  if (n == 0) return est;
  const RowMajorMap A(a.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if ((A.array() < 0.0).any() || !A.allFinite()) throw Error("spectral_radius expects a nonnegative finite matrix");

  // rho(A) is the largest radius over the diagonal blocks of its Frobenius form.
  for (const auto& comp : strong_components(A)) {
    SpectralEstimate block;
    if (comp.size() == 1) {
      const double d = A(comp[0], comp[0]);
      block.radius = block.lower = block.upper = d;
      block.converged = true;
    } else {
      const auto m = static_cast<Eigen::Index>(comp.size());
      Matrix sub(m, m);
      for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = A(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
      block = irreducible_radius(sub, tolerance, max_iterations);
    }
    est.lower = std::max(est.lower, block.lower);
    est.upper = std::max(est.upper, block.upper);
    est.radius = std::max(est.radius, block.radius);
    est.converged = est.converged && block.converged;
    est.iterations += block.iterations;
  }
  return est;
}

std::vector<double> interference_matrix(const GainMatrix& gains, std::span<const double> sinr_targets) {
  const std::size_t n = gains.size();
  std::vector<double> f(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i != j) f[i * n + j] = sinr_targets[i] * gains.at(j, i) / gains.direct(i);
    }
  }
  return f;
}

MinPowerResult min_power_vector(const GainMatrix& gains, std::span<const double> sinr_targets,
                                double noise_w) {
  const std::size_t n = gains.size();
  if (sinr_targets.size() != n) throw Error("target vector does not match gain matrix");
  gains.check();
  for (double g : sinr_targets) {
    if (!(g > 0.0) || !std::isfinite(g)) throw Error("SINR targets must be positive and finite");
  }

  const auto f = interference_matrix(gains, sinr_targets);
  const auto rho = spectral_radius(f, n);

  MinPowerResult out;
  out.spectral_radius = rho.radius;

  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> F(
      f.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Vector u(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) u[static_cast<Eigen::Index>(i)] = sinr_targets[i] * noise_w / gains.direct(i);
  const Matrix system = Matrix::Identity(F.rows(), F.cols()) - F;

  auto solve = [&]() -> std::optional<Vector> {
    Eigen::FullPivLU<Matrix> lu(system);
    if (!lu.isInvertible()) return std::nullopt;
    Vector p = lu.solve(u);
    if (!p.allFinite()) return std::nullopt;
    return p;
  };

  bool spectral_ok = false;
  std::optional<Vector> p;
  if (rho.upper < 1.0) {
    spectral_ok = true;
  } else if (rho.lower >= 1.0) {
    spectral_ok = false;
  } else {
    // Undecided at the tolerance: (I - F) is a nonsingular M-matrix iff
    // rho(F) < 1, in which case the solution for u > 0 is strictly positive.
    p = solve();
    spectral_ok = p && (p->array() > 0.0).all();
  }
  if (!spectral_ok) return out;

  if (!p) p = solve();
  if (!p) throw Error("minimum power solve is singular although rho(F) < 1");
  const double residual = (system * *p - u).norm();
  if (residual > 1e-9 * (system.norm() * p->norm() + u.norm()) || (p->array() < 0.0).any()) {
    throw Error("minimum power solve lost accuracy although rho(F) < 1");
  }
  out.powers = PowerVector(p->data(), p->data() + p->size());
  return out;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::InfeasibleSpectral: return "infeasible_spectral";
    case Verdict::InfeasibleMaxPower: return "infeasible_max_power";
    case Verdict::InfeasibleDelay: return "infeasible_delay";
    case Verdict::InfeasibleEnergy: return "infeasible_energy";
  }
  return "unknown";
}

FeasibilityReport check_targets(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                std::span<const double> sinr_targets,
                                std::span<const double> link_times_s, const RadioConfig& radio) {
  require_sizes(nodes, gains, sinr_targets.size());
  if (link_times_s.size() != nodes.size()) throw Error("link time vector has wrong size");

  FeasibilityReport report;
  report.link_times_s.assign(link_times_s.begin(), link_times_s.end());

  auto mp = min_power_vector(gains, sinr_targets, radio.noise_w);
  report.spectral_radius = mp.spectral_radius;
  if (!mp.powers) {
    report.verdict = Verdict::InfeasibleSpectral;
    return report;
  }
  report.min_powers = std::move(*mp.powers);
  const auto& p = report.min_powers;

  const std::size_t n = nodes.size();
  auto any_link = [n](auto&& violated) {
    for (std::size_t l = 0; l < n; ++l) {
      if (violated(l)) return true;
    }
    return false;
  };
  if (any_link([&](std::size_t l) { return !within(p[l], radio.p_max_w); })) {
    report.verdict = Verdict::InfeasibleMaxPower;
  } else if (any_link([&](std::size_t l) { return !within(link_times_s[l], nodes[l].delay_bound_s); })) {
    report.verdict = Verdict::InfeasibleDelay;
  } else if (any_link([&](std::size_t l) {
               return !within(link_times_s[l] * p[l], nodes[l].energy_budget_j);
             })) {
    report.verdict = Verdict::InfeasibleEnergy;
  } else {
    report.verdict = Verdict::Feasible;
  }
  return report;
}

FeasibilityReport check_levels(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                               std::span<const std::size_t> levels, const RateTable& table,
                               const RadioConfig& radio) {
  require_sizes(nodes, gains, levels.size());
  std::vector<double> targets(levels.size());
  std::vector<double> times(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l] >= table.size()) throw Error("rate level index out of range");
    targets[l] = table.sinr_at(levels[l]);
    times[l] = nodes[l].packet_bits / table.rate_at(levels[l]);
  }
  return check_targets(nodes, gains, targets, times, radio);
}

FeasibilityReport check_rate_vector(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                    const RateVector& rates, const RateTable& table,
                                    const RadioConfig& radio) {
  std::vector<std::size_t> levels(rates.size());
  for (std::size_t l = 0; l < rates.size(); ++l) {
    auto q = table.index_of(rates[l]);
    if (!q) throw Error("rate " + std::to_string(rates[l]) + " bit/s is not a level of the rate table");
    levels[l] = *q;
  }
  return check_levels(nodes, gains, levels, table, radio);
}

}  // namespace m2m
