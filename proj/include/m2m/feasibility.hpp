// Feasibility of a target SINR (equivalently, rate) vector for a set of
// concurrently transmitting links, via the spectral radius of the normalized
// interference matrix and the component-wise minimum power vector.

#pragma once

#include "m2m/model.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace m2m {

/// Relative slack on the closed constraints (p <= p_max, t <= d, t*p <= e) so
/// that values landing exactly on a bound are not rejected by rounding.
inline constexpr double kConstraintSlack = 1e-12;

struct SpectralEstimate {
  double radius = 0.0;
  /// Collatz-Wielandt bounds bracketing the radius.
  double lower = 0.0;
  double upper = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Spectral radius of a nonnegative n x n matrix (row major) by power iteration
/// on the shifted matrix A + I, which shares the Perron vector of A and has a
/// strictly dominant eigenvalue even when A is periodic.
SpectralEstimate spectral_radius(std::span<const double> nonneg_row_major, std::size_t n,
                                 double tolerance = 1e-12, int max_iterations = 10000);

/// Normalized interference matrix F (row major): F[i][j] = gamma_i * g[j][i] / g[i][i]
/// off the diagonal, zero on it.
std::vector<double> interference_matrix(const GainMatrix& gains, std::span<const double> sinr_targets);

struct MinPowerResult {
  /// Empty when the spectral condition rho(F) < 1 fails.
  std::optional<PowerVector> powers;
  double spectral_radius = 0.0;
};

/// Component-wise minimum power vector p* = (I - F)^{-1} u with
/// u[i] = gamma_i * N0 / g[i][i]. Every link meets its target with equality
/// at p*. Throws Error if the linear solve breaks down although rho(F) < 1.
MinPowerResult min_power_vector(const GainMatrix& gains, std::span<const double> sinr_targets,
                                double noise_w);

enum class Verdict { Feasible, InfeasibleSpectral, InfeasibleMaxPower, InfeasibleDelay, InfeasibleEnergy };

std::string_view to_string(Verdict v);

struct FeasibilityReport {
  Verdict verdict = Verdict::InfeasibleSpectral;
  PowerVector min_powers;  // empty when the spectral test fails
  double spectral_radius = 0.0;
  std::vector<double> link_times_s;

  bool feasible() const { return verdict == Verdict::Feasible; }
};

/// Checks, in order: rho(F) < 1, p*_l <= p_max, t_l <= d_l, t_l * p*_l <= e_l.
/// The first failing constraint names the verdict.
FeasibilityReport check_targets(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                std::span<const double> sinr_targets,
                                std::span<const double> link_times_s, const RadioConfig& radio);

/// Feasibility of a vector of rate-level indices into `table`.
FeasibilityReport check_levels(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                               std::span<const std::size_t> levels, const RateTable& table,
                               const RadioConfig& radio);

/// Feasibility of a rate vector in bits/s; every rate must be a level of `table`.
FeasibilityReport check_rate_vector(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                    const RateVector& rates, const RateTable& table,
                                    const RadioConfig& radio);

}  // namespace m2m
