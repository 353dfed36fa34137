// Rate and power assignment minimizing the slot length of one concurrently
// transmitting link subset.

#pragma once

#include "m2m/model.hpp"

#include <span>

namespace m2m {

/// Longest Transmission Time First.
///
/// Starts every link at the lowest rate level that meets its delay bound and,
/// while the rate vector stays feasible, raises the link with the longest
/// per-packet time by one level. The returned rates, minimum powers and slot
/// length all belong to the last feasible vector; `slot_length_s` is +inf when
/// even the initial vector is infeasible. Argmax ties go to the lowest index.
/// At most Q * |S| rate vectors are tested (`feasibility_checks`).
AllocationResult lttf(std::span<const NodeSpec> nodes, const GainMatrix& gains, const RateTable& table,
                      const RadioConfig& radio);

inline constexpr std::size_t kBruteForceMaxLinks = 4;
inline constexpr std::size_t kBruteForceMaxLevels = 8;

/// Exhaustive search over all Q^|S| level vectors. Among vectors of equal slot
/// length the lexicographically smallest level vector wins. Throws Error when
/// |S| > 4 or Q > 8.
AllocationResult brute_force_optimal(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                     const RateTable& table, const RadioConfig& radio);

inline constexpr double kContinuousRelTolerance = 1e-6;

/// Continuous (Shannon) rate baseline: the smallest slot length t such that
/// every link sending its packet in t_l = min(t, d_l), i.e. at SINR
/// 2^{R/(t_l W)} - 1, satisfies the spectral, power and energy limits. With
/// equal delay bounds all links share t. Found by bisection over
/// [max single-link bound, max delay bound] to a relative tolerance of 1e-6;
/// the returned t is always a feasible point.
AllocationResult continuous_optimal(std::span<const NodeSpec> nodes, const GainMatrix& gains,
                                    const RadioConfig& radio);

}  // namespace m2m
