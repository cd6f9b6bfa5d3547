#include "teamsim/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "teamsim/rng.hpp"

namespace teamsim {

std::vector<double> ChainSet::pooled(int coord) const {
  std::vector<double> out;
  out.reserve(chains.size() * static_cast<std::size_t>(draws_per_chain));
  for (int c = 0; c < static_cast<int>(chains.size()); ++c) {
    for (int i = 0; i < draws_per_chain; ++i) out.push_back(at(c, i, coord));
  }
  return out;
}

namespace {

struct ChainMoments {
  std::vector<double> means;
  std::vector<double> vars;  // unbiased
};

ChainMoments moments(const std::vector<std::vector<double>>& series) {
  ChainMoments m;
  for (const auto& s : series) {
    const double n = static_cast<double>(s.size());
    const double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    m.means.push_back(mean);
    m.vars.push_back(ss / (n - 1.0));
  }
  return m;
}

double variance_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

std::vector<std::vector<double>> chain_series(const ChainSet& set, int coord) {
  std::vector<std::vector<double>> out(set.chains.size());
  for (std::size_t c = 0; c < set.chains.size(); ++c) {
    out[c].reserve(static_cast<std::size_t>(set.draws_per_chain));
    for (int i = 0; i < set.draws_per_chain; ++i) out[c].push_back(set.at(static_cast<int>(c), i, coord));
  }
  return out;
}

}  // namespace

double split_rhat(const ChainSet& set, int coord) {
  std::vector<std::vector<double>> halves;
  const std::size_t half = static_cast<std::size_t>(set.draws_per_chain) / 2;
  for (const auto& s : chain_series(set, coord)) {
    halves.emplace_back(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(half));
    halves.emplace_back(s.end() - static_cast<std::ptrdiff_t>(half), s.end());
  }
  const auto m = moments(halves);
  const double n = static_cast<double>(half);
  const double w = std::accumulate(m.vars.begin(), m.vars.end(), 0.0) / static_cast<double>(m.vars.size());
  const double b_over_n = variance_of(m.means);
  if (w <= 0.0) return b_over_n > 0.0 ? INFINITY : 1.0;
  const double var_plus = (n - 1.0) / n * w + b_over_n;
  return std::sqrt(var_plus / w);
}

double effective_sample_size(const ChainSet& set, int coord) {
  const auto series = chain_series(set, coord);
  const auto m = moments(series);
  const int chains = static_cast<int>(series.size());
  const int n = set.draws_per_chain;
  const double dn = static_cast<double>(n);
  const double mean_var = std::accumulate(m.vars.begin(), m.vars.end(), 0.0) / chains;
  double var_plus = mean_var * (dn - 1.0) / dn;
  if (chains > 1) var_plus += variance_of(m.means);
  if (var_plus <= 0.0) return 0.0;

  auto rho = [&](int lag) {
    double acov = 0.0;
    for (int c = 0; c < chains; ++c) {
      const auto& s = series[static_cast<std::size_t>(c)];
      const double mu = m.means[static_cast<std::size_t>(c)];
      double sum = 0.0;
      for (int i = 0; i + lag < n; ++i) sum += (s[static_cast<std::size_t>(i)] - mu) * (s[static_cast<std::size_t>(i + lag)] - mu);
      acov += sum / dn;
    }
    acov /= chains;
    return 1.0 - (mean_var - acov) / var_plus;
  };

  // Sum pairs (rho_{2k} + rho_{2k+1}) while positive, forcing them monotone.
  double tau = -1.0;
  double prev_pair = INFINITY;
  for (int k = 0; 2 * k + 1 < n; ++k) {
    double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev_pair);
    tau += 2.0 * pair;
    prev_pair = pair;
  }
  tau = std::max(tau, 1.0 / std::log10(static_cast<double>(chains) * dn));
  return static_cast<double>(chains) * dn / tau;
}

std::vector<CoordinateDiagnostics> diagnose(const ChainSet& set) {
  std::vector<CoordinateDiagnostics> out;
  for (int d = 0; d < set.dim; ++d) out.push_back({effective_sample_size(set, d), split_rhat(set, d)});
  return out;
}

namespace {

class Chain {
 public:
  Chain(const LogDensity& log_density, const Eigen::MatrixXd& chol, Eigen::VectorXd start,
        std::uint64_t seed)
      : log_density_(log_density), chol_(chol), state_(std::move(start)), rng_(seed) {
    logp_ = eval(state_);
  }

  bool propose(double scale) {
    Eigen::VectorXd z(state_.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng_.normal();
    Eigen::VectorXd next = state_ + scale * (chol_ * z);
    const double lp = eval(next);
    if (std::log(rng_.uniform()) < lp - logp_) {
      state_ = std::move(next);
      logp_ = lp;
      return true;
    }
    return false;
  }

  const Eigen::VectorXd& state() const { return state_; }

 private:
  double eval(const Eigen::VectorXd& v) const {
    const double lp = log_density_(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
    return std::isnan(lp) ? -INFINITY : lp;
  }

  const LogDensity& log_density_;
  const Eigen::MatrixXd& chol_;
  Eigen::VectorXd state_;
  double logp_ = 0.0;
  Rng rng_;
};

struct ChainRun {
  std::unique_ptr<Chain> chain;
  double log_scale = 0.0;
  std::vector<double> draws;
  long accepted = 0;
  long proposed = 0;
};

void run_warmup(ChainRun& run, const SamplerConfig& cfg) {
  constexpr int kBatch = 50;
  int accepted = 0;
  for (int i = 1; i <= cfg.warmup; ++i) {
    accepted += run.chain->propose(std::exp(run.log_scale)) ? 1 : 0;
    if (i % kBatch == 0) {
      const double rate = static_cast<double>(accepted) / kBatch;
      run.log_scale += (rate - cfg.target_acceptance) / std::sqrt(static_cast<double>(i / kBatch));
      accepted = 0;
    }
  }
}

void run_draws(ChainRun& run, int count) {
  const double scale = std::exp(run.log_scale);
  const auto dim = run.chain->state().size();
  for (int i = 0; i < count; ++i) {
    run.accepted += run.chain->propose(scale) ? 1 : 0;
    ++run.proposed;
    const auto& s = run.chain->state();
    run.draws.insert(run.draws.end(), s.data(), s.data() + dim);
  }
}

template <typename F>
void for_each_chain(std::vector<ChainRun>& runs, bool parallel, F&& f) {
  if (!parallel || runs.size() < 2) {
    for (auto& r : runs) f(r);
    return;
  }
  std::vector<std::jthread> workers;
  workers.reserve(runs.size());
  for (auto& r : runs) workers.emplace_back([&f, &r] { f(r); });
}

}  // namespace

ChainSet sample_random_walk(const LogDensity& log_density, std::span<const double> center,
                            std::span<const double> proposal_cov, const SamplerConfig& cfg) {
  const auto dim = static_cast<Eigen::Index>(center.size());
  if (dim == 0) throw std::invalid_argument("empty parameter vector");
  if (proposal_cov.size() != center.size() * center.size()) {
    throw std::invalid_argument("proposal covariance has the wrong size");
  }
  if (cfg.chains < 2) throw std::invalid_argument("at least two chains are required");

  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> cov(
      proposal_cov.data(), dim, dim);
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::invalid_argument("proposal covariance is not positive definite");
  const Eigen::MatrixXd chol = llt.matrixL();
  const Eigen::Map<const Eigen::VectorXd> mode(center.data(), dim);

  std::vector<ChainRun> runs(static_cast<std::size_t>(cfg.chains));
  for (int c = 0; c < cfg.chains; ++c) {
    const std::uint64_t seed = Rng::derive_seed(cfg.seed, static_cast<std::uint64_t>(c));
    Rng init(Rng::derive_seed(seed, 0xC0FFEE));
    Eigen::VectorXd z(dim);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = init.normal();
    // Overdispersed starts: twice the proposal scale around the mode.
    Eigen::VectorXd start = mode + 2.0 * (chol * z);
    auto& run = runs[static_cast<std::size_t>(c)];
    run.chain = std::make_unique<Chain>(log_density, chol, std::move(start), seed);
    run.log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
  }

  for_each_chain(runs, cfg.parallel, [&](ChainRun& r) {
    run_warmup(r, cfg);
    run_draws(r, cfg.initial_draws);
  });

  ChainSet set;
  set.dim = static_cast<int>(dim);
  for (;;) {
    set.draws_per_chain = static_cast<int>(runs.front().draws.size() / static_cast<std::size_t>(dim));
    set.chains.clear();
    set.acceptance.clear();
    for (const auto& r : runs) {
      set.chains.push_back(r.draws);
      set.acceptance.push_back(static_cast<double>(r.accepted) / static_cast<double>(r.proposed));
    }
    const auto diag = diagnose(set);
    const bool ok = std::all_of(diag.begin(), diag.end(), [&](const CoordinateDiagnostics& d) {
      return d.ess >= cfg.min_ess && d.rhat < cfg.max_rhat;
    });
    if (ok) return set;
    if (set.draws_per_chain + cfg.initial_draws > cfg.max_draws) {
      throw ConvergenceError("sampler did not converge within " + std::to_string(cfg.max_draws) +
                                 " draws per chain",
                             diag);
    }
    for_each_chain(runs, cfg.parallel, [&](ChainRun& r) { run_draws(r, cfg.initial_draws); });
  }
}

}  // namespace teamsim
