#ifndef STZIP_TESTS_GEWEKE_HPP
#define STZIP_TESTS_GEWEKE_HPP

#include <array>
#include <cstdint>
#include <string>

#include "stats.hpp"

namespace stzip::testing {

struct GewekeConfig {
  long draws = 20000;
  /// Gibbs sweeps between successive-conditional records.
  long thin = 400;
  std::uint64_t seed = 7;
};

struct GewekeResult {
  std::array<std::string, 3> names{"beta_1", "v_T", "var(g)"};
  std::array<KsResult, 3> ks{};
  /// ESS of each successive-conditional series.
  std::array<double, 3> ess{};
  std::array<double, 3> forward_mean{};
  std::array<double, 3> chain_mean{};
};

/// Joint-distribution test on the tiny STZIP model (T = 2, five sites per
/// period, three knots, delta = 1000). Marginal-conditional draws come from
/// forward simulation of prior and data; successive-conditional draws
/// alternate Gibbs sweeps with redrawing (g, z, y) given the parameters.
/// Counts are drawn from the negative-binomial surrogate the sampler targets.
GewekeResult run_geweke(const GewekeConfig& cfg);

}  // namespace stzip::testing

#endif  // STZIP_TESTS_GEWEKE_HPP
