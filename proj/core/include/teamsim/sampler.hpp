#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace teamsim {

using LogDensity = std::function<double(std::span<const double>)>;

struct SamplerConfig {
  int chains = 4;
  int warmup = 1000;
  int initial_draws = 2500;  // per chain; extended in the same increments as needed
  int max_draws = 40000;     // per chain
  double min_ess = 1000.0;
  double max_rhat = 1.01;
  double target_acceptance = 0.234;
  std::uint64_t seed = 0;
  bool parallel = true;
};

// Post-warmup draws; chains[c] is row-major draws x dim.
struct ChainSet {
  int dim = 0;
  int draws_per_chain = 0;
  std::vector<std::vector<double>> chains;
  std::vector<double> acceptance;  // per chain, post-warmup

  double at(int chain, int draw, int coord) const {
    return chains[static_cast<std::size_t>(chain)]
                 [static_cast<std::size_t>(draw) * dim + coord];
  }
  std::vector<double> pooled(int coord) const;
};

struct CoordinateDiagnostics {
  double ess = 0.0;
  double rhat = 0.0;
};

// Split-chain potential scale reduction.
double split_rhat(const ChainSet& set, int coord);
// Multi-chain effective sample size with Geyer's initial monotone sequence.
double effective_sample_size(const ChainSet& set, int coord);
std::vector<CoordinateDiagnostics> diagnose(const ChainSet& set);

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<CoordinateDiagnostics> diagnostics)
      : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
  const std::vector<CoordinateDiagnostics>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<CoordinateDiagnostics> diagnostics_;
};

// Random-walk Metropolis with proposal covariance `scale^2 * proposal_cov`
// (row-major dim x dim, positive definite); the scale adapts toward the target
// acceptance rate during warmup and is frozen afterwards. Chains start at
// `center` plus an overdispersed draw from the proposal covariance. Sampling
// extends until every coordinate meets the ESS and R-hat contract; throws
// ConvergenceError when max_draws is reached first.
ChainSet sample_random_walk(const LogDensity& log_density, std::span<const double> center,
                            std::span<const double> proposal_cov, const SamplerConfig& config);

}  // namespace teamsim
