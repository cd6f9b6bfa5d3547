#include "teamsim/preference.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>

#include "teamsim/rng.hpp"

namespace teamsim {

std::string_view to_string(FeatureSet set) {
  return set == FeatureSet::objective ? "objective" : "subjective";
}

FeatureSet feature_set_from_string(std::string_view name) {
  if (name == "objective") return FeatureSet::objective;
  if (name == "subjective") return FeatureSet::subjective;
  throw PreferenceError("unknown feature set '" + std::string(name) + "'");
}

const std::vector<std::string>& feature_names(FeatureSet set) {
  static const std::vector<std::string> objective{"human_score", "ai_score", "score_inequality",
                                                  "ai_steals", "intersections"};
  static const std::vector<std::string> subjective{"q1", "q2", "q3", "q4", "q5", "q6", "q7", "q8"};
  return set == FeatureSet::objective ? objective : subjective;
}

namespace {

double feature(const FeatureVector& fv, const std::string& name) {
  auto it = fv.find(name);
  if (it == fv.end()) throw PreferenceError("missing feature '" + name + "'");
  return it->second;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double log1p_exp(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace

std::vector<double> Design::row_for(const ChoiceRecord& record) const {
  std::vector<double> row{1.0};
  for (std::size_t j = 0; j < features.size(); ++j) {
    const double diff = feature(record.features_x, features[j]) - feature(record.features_y, features[j]);
    row.push_back((diff - center[j]) / scale[j]);
  }
  return row;
}

Design build_design(std::span<const ChoiceRecord> records, const std::vector<std::string>& features,
                    bool standardize) {
  if (records.size() < 2) throw PreferenceError("at least two records are required");
  for (const auto& r : records) {
    if (r.features_x.size() != r.features_y.size() ||
        !std::equal(r.features_x.begin(), r.features_x.end(), r.features_y.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw PreferenceError("feature names differ between x and y for participant '" +
                            r.participant_id + "'");
    }
  }

  Design d;
  d.features = features;
  d.rows = static_cast<int>(records.size());
  const std::size_t p = features.size();
  std::vector<std::vector<double>> diffs(p, std::vector<double>(records.size()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      diffs[j][i] = feature(records[i].features_x, features[j]) - feature(records[i].features_y, features[j]);
    }
    d.y.push_back(records[i].chose_x ? 1.0 : 0.0);
  }

  d.center.assign(p, 0.0);
  d.scale.assign(p, 1.0);
  if (standardize) {
    const double n = static_cast<double>(records.size());
    for (std::size_t j = 0; j < p; ++j) {
      const double mean = std::accumulate(diffs[j].begin(), diffs[j].end(), 0.0) / n;
      double ss = 0.0;
      for (double v : diffs[j]) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / (n - 1.0));
      if (sd > 1e-12) {
        d.center[j] = mean;
        d.scale[j] = sd;
      } else if (std::any_of(diffs[j].begin(), diffs[j].end(), [](double v) { return v != 0.0; })) {
        d.warnings.push_back("column '" + features[j] + "' has zero variance; left unscaled");
      }
    }
  }

  d.x.reserve(records.size() * (p + 1));
  for (std::size_t i = 0; i < records.size(); ++i) {
    d.x.push_back(1.0);
    for (std::size_t j = 0; j < p; ++j) d.x.push_back((diffs[j][i] - d.center[j]) / d.scale[j]);
  }
  return d;
}

Design build_design(std::span<const ChoiceRecord> records, FeatureSet set, bool standardize) {
  return build_design(records, feature_names(set), standardize);
}

std::vector<double> PosteriorSummary::means() const {
  std::vector<double> out;
  for (const auto& c : coefficients) out.push_back(c.mean);
  return out;
}

double sigmoid(double eta) {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

namespace {

struct Posterior {
  Eigen::Map<const RowMatrix> x;
  Eigen::Map<const Eigen::VectorXd> y;
  double prior_precision;

  double log_density(const Eigen::VectorXd& beta) const {
    const Eigen::VectorXd eta = x * beta;
    double lp = y.dot(eta);
    for (Eigen::Index i = 0; i < eta.size(); ++i) lp -= log1p_exp(eta[i]);
    return lp - 0.5 * prior_precision * beta.squaredNorm();
  }
};

// Newton iterations to the posterior mode; returns the mode and the negative
// Hessian there.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> find_mode(const Posterior& post) {
  const Eigen::Index p = post.x.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  Eigen::MatrixXd neg_hessian(p, p);
  double current = post.log_density(beta);
  for (int iter = 0; iter < 100; ++iter) {
    const Eigen::VectorXd eta = post.x * beta;
    Eigen::VectorXd prob(eta.size());
    Eigen::VectorXd weight(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = sigmoid(eta[i]);
      weight[i] = prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd grad = post.x.transpose() * (post.y - prob) - post.prior_precision * beta;
    neg_hessian = post.x.transpose() * weight.asDiagonal() * post.x;
    neg_hessian.diagonal().array() += post.prior_precision;
    const Eigen::VectorXd step = neg_hessian.ldlt().solve(grad);

    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    double lp = post.log_density(next);
    while (lp < current && t > 1e-8) {
      t *= 0.5;
      next = beta + t * step;
      lp = post.log_density(next);
    }
    beta = next;
    const bool done = (t * step).norm() < 1e-10 || std::abs(lp - current) < 1e-12;
    current = lp;
    if (done) break;
  }
  const Eigen::VectorXd eta = post.x * beta;
  Eigen::VectorXd weight(eta.size());
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double pr = sigmoid(eta[i]);
    weight[i] = pr * (1.0 - pr);
  }
  neg_hessian = post.x.transpose() * weight.asDiagonal() * post.x;
  neg_hessian.diagonal().array() += post.prior_precision;
  return {beta, neg_hessian};
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// log of the posterior density at zero from draws.
double log_density_at_zero(const std::vector<double>& draws, double mean, double sd) {
  const double log_sqrt_2pi = 0.5 * std::log(2.0 * std::numbers::pi);
  // Far from zero the kernel estimate has no draws to work with; use the
  // normal approximation instead.
  if (sd <= 0.0) return mean == 0.0 ? INFINITY : -INFINITY;
  if (std::abs(mean) / sd > 4.0) {
    const double z = mean / sd;
    return -0.5 * z * z - std::log(sd) - log_sqrt_2pi;
  }
  std::vector<double> sorted = draws;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double spread = iqr > 0.0 ? std::min(sd, iqr / 1.34) : sd;
  const double n = static_cast<double>(draws.size());
  const double h = 0.9 * spread * std::pow(n, -0.2);
  double max_term = -INFINITY;
  std::vector<double> terms;
  terms.reserve(draws.size());
  for (double v : draws) {
    const double z = v / h;
    terms.push_back(-0.5 * z * z);
    max_term = std::max(max_term, terms.back());
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc) - std::log(n * h) - log_sqrt_2pi;
}

}  // namespace

PosteriorSummary fit(const Design& design, const FitConfig& config) {
  if (design.rows < 2) throw PreferenceError("design has fewer than two rows");
  if (!(config.prior_sd > 0.0)) throw PreferenceError("prior sd must be positive");
  const Eigen::Index p = design.cols();
  Posterior post{Eigen::Map<const RowMatrix>(design.x.data(), design.rows, p),
                 Eigen::Map<const Eigen::VectorXd>(design.y.data(), design.rows),
                 1.0 / (config.prior_sd * config.prior_sd)};

  PosteriorSummary out;
  out.features = design.features;
  out.center = design.center;
  out.scale = design.scale;
  out.prior_sd = config.prior_sd;
  out.warnings = design.warnings;

  auto [mode, neg_hessian] = find_mode(post);
  {
    const Eigen::VectorXd eta = post.x * mode;
    bool separated = true;
    for (Eigen::Index i = 0; i < eta.size() && separated; ++i) {
      separated = (post.y[i] > 0.5) == (eta[i] > 0.0);
    }
    if (separated) out.warnings.push_back("data are linearly separable; posterior is prior-dominated in that direction");
  }

  const Eigen::MatrixXd cov = neg_hessian.inverse();
  const RowMatrix cov_rows = cov;
  auto log_density = [&post](std::span<const double> b) {
    const Eigen::Map<const Eigen::VectorXd> beta(b.data(), static_cast<Eigen::Index>(b.size()));
    return post.log_density(beta);
  };
  const ChainSet set = sample_random_walk(
      log_density, std::span<const double>(mode.data(), static_cast<std::size_t>(p)),
      std::span<const double>(cov_rows.data(), static_cast<std::size_t>(p * p)), config.sampler);
  const auto diag = diagnose(set);

  out.chains = static_cast<int>(set.chains.size());
  out.draws_per_chain = set.draws_per_chain;
  out.acceptance_rate =
      std::accumulate(set.acceptance.begin(), set.acceptance.end(), 0.0) / static_cast<double>(set.acceptance.size());

  const double log_prior_at_zero = -std::log(config.prior_sd) - 0.5 * std::log(2.0 * std::numbers::pi);
  for (Eigen::Index j = 0; j < p; ++j) {
    const auto draws = set.pooled(static_cast<int>(j));
    CoefficientSummary c;
    c.name = j == 0 ? std::string(kInterceptName) : design.features[static_cast<std::size_t>(j - 1)];
    const double n = static_cast<double>(draws.size());
    c.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : draws) ss += (v - c.mean) * (v - c.mean);
    c.sd = std::sqrt(ss / (n - 1.0));
    c.ci_lower = quantile(draws, 0.025);
    c.ci_upper = quantile(draws, 0.975);
    c.log_bf_inclusion = log_prior_at_zero - log_density_at_zero(draws, c.mean, c.sd);
    c.bf_inclusion = std::exp(c.log_bf_inclusion);
    c.ess = diag[static_cast<std::size_t>(j)].ess;
    c.rhat = diag[static_cast<std::size_t>(j)].rhat;
    out.coefficients.push_back(std::move(c));
  }

  if (config.keep_draws) {
    for (int c = 0; c < static_cast<int>(set.chains.size()); ++c) {
      for (int i = 0; i < set.draws_per_chain; ++i) {
        std::vector<double> row(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) row[static_cast<std::size_t>(j)] = set.at(c, i, static_cast<int>(j));
        out.draws.push_back(std::move(row));
      }
    }
  }
  return out;
}

double predict(std::span<const double> coefficients, std::span<const double> differences) {
  if (coefficients.size() != differences.size() + 1) {
    throw PreferenceError("coefficient count does not match covariates");
  }
  double eta = coefficients[0];
  for (std::size_t i = 0; i < differences.size(); ++i) eta += coefficients[i + 1] * differences[i];
  return sigmoid(eta);
}

namespace {

std::vector<double> standardized_diffs(const PosteriorSummary& s, const ChoiceRecord& record) {
  std::vector<double> out;
  for (std::size_t j = 0; j < s.features.size(); ++j) {
    const double diff = feature(record.features_x, s.features[j]) - feature(record.features_y, s.features[j]);
    out.push_back((diff - s.center[j]) / s.scale[j]);
  }
  return out;
}

}  // namespace

double predict(const PosteriorSummary& summary, const ChoiceRecord& record) {
  return predict(summary.means(), standardized_diffs(summary, record));
}

double predict_averaged(const PosteriorSummary& summary, const ChoiceRecord& record) {
  if (summary.draws.empty()) return predict(summary, record);
  const auto diffs = standardized_diffs(summary, record);
  double acc = 0.0;
  for (const auto& draw : summary.draws) acc += predict(draw, diffs);
  return acc / static_cast<double>(summary.draws.size());
}

std::vector<int> assign_folds(std::size_t records, int folds, std::uint64_t seed) {
  if (folds < 2) throw PreferenceError("need at least two folds");
  if (static_cast<std::size_t>(folds) > records) throw PreferenceError("more folds than records");
  std::vector<std::size_t> order(records);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::size_t i = records; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<int> fold(records);
  for (std::size_t pos = 0; pos < records; ++pos) {
    fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
  }
  return fold;
}

double area_under_curve(std::span<const double> scores, std::span<const int> labels) {
  // Mann-Whitney statistic with midranks for ties.
  const std::size_t n = scores.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[idx[j + 1]] == scores[idx[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[idx[k]] = mid;
    i = j + 1;
  }
  double pos = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] == 1) {
      pos += 1.0;
      rank_sum += rank[i];
    }
  }
  const double neg = static_cast<double>(n) - pos;
  if (pos == 0.0 || neg == 0.0) return std::nan("");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

CrossValidation cross_validate(std::span<const ChoiceRecord> records,
                               const std::vector<std::string>& features, int folds,
                               std::uint64_t seed, const FitConfig& config, bool averaged) {
  const auto fold_of = assign_folds(records.size(), folds, seed);
  CrossValidation cv;
  cv.fold_sizes.assign(static_cast<std::size_t>(folds), 0);
  cv.predictions.assign(records.size(), 0.0);
  cv.labels.assign(records.size(), 0);
  for (int f : fold_of) ++cv.fold_sizes[static_cast<std::size_t>(f)];

  for (int f = 0; f < folds; ++f) {
    std::vector<ChoiceRecord> train;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (fold_of[i] != f) train.push_back(records[i]);
    }
    FitConfig fc = config;
    fc.sampler.seed = Rng::derive_seed(seed, static_cast<std::uint64_t>(f) + 1);
    fc.keep_draws = averaged;
    const auto summary = fit(build_design(train, features, true), fc);
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (fold_of[i] != f) continue;
      cv.predictions[i] = averaged ? predict_averaged(summary, records[i]) : predict(summary, records[i]);
    }
  }

  int correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    cv.labels[i] = records[i].chose_x ? 1 : 0;
    correct += ((cv.predictions[i] >= 0.5) == records[i].chose_x) ? 1 : 0;
  }
  cv.accuracy = static_cast<double>(correct) / static_cast<double>(records.size());
  cv.auc = area_under_curve(cv.predictions, cv.labels);
  return cv;
}

double binomial_bf(int successes, int trials) {
  if (trials < 0 || successes < 0 || successes > trials) {
    throw PreferenceError("binomial_bf requires 0 <= k <= n");
  }
  if (trials == 0) return 1.0;
  const double k = successes;
  const double n = trials;
  const double log_beta = std::lgamma(k + 1.0) + std::lgamma(n - k + 1.0) - std::lgamma(n + 2.0);
  return std::exp(log_beta + n * std::numbers::ln2);
}

std::string_view interpret_bf(double bf10) {
  if (bf10 > 10.0) return "strong evidence for H1";
  if (bf10 > 3.0) return "moderate evidence for H1";
  if (bf10 < 0.1) return "strong evidence for H0";
  if (bf10 < 1.0 / 3.0) return "moderate evidence for H0";
  return "inconclusive";
}

std::vector<PairPreference> preference_matrix(std::span<const ChoiceRecord> records) {
  std::map<std::tuple<int, AgentKind, AgentKind>, std::pair<int, int>> counts;
  for (const auto& r : records) {
    const AgentKind chosen = r.chose_x ? r.agent_x : r.agent_y;
    const AgentKind rejected = r.chose_x ? r.agent_y : r.agent_x;
    auto& fwd = counts[{r.density, chosen, rejected}];
    ++fwd.first;
    ++fwd.second;
    ++counts[{r.density, rejected, chosen}].second;
  }
  std::vector<PairPreference> out;
  for (const auto& [key, c] : counts) {
    PairPreference p;
    p.density = std::get<0>(key);
    p.row = std::get<1>(key);
    p.col = std::get<2>(key);
    p.row_chosen = c.first;
    p.comparisons = c.second;
    p.percent = 100.0 * c.first / c.second;
    p.bf10 = binomial_bf(c.first, c.second);
    out.push_back(p);
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_flag(const std::string& s) {
  if (s == "1" || s == "true") return true;
  if (s == "0" || s == "false") return false;
  throw PreferenceError("bad chose_x value '" + s + "'");
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

std::vector<ChoiceRecord> read_choices_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw PreferenceError("empty choices file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_csv(line);
  const std::vector<std::string> fixed{"participant_id", "density", "agent_x", "agent_y", "chose_x"};
  if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw PreferenceError("choices header must start with participant_id,density,agent_x,agent_y,chose_x");
  }
  std::vector<ChoiceRecord> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw PreferenceError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " columns");
    }
    ChoiceRecord r;
    try {
      r.participant_id = cells[0];
      r.density = std::stoi(cells[1]);
      r.agent_x = agent_kind_from_string(cells[2]);
      r.agent_y = agent_kind_from_string(cells[3]);
      r.chose_x = parse_flag(cells[4]);
      for (std::size_t c = fixed.size(); c < header.size(); ++c) {
        const std::string& col = header[c];
        const double v = std::stod(cells[c]);
        if (col.starts_with("x_")) {
          r.features_x[col.substr(2)] = v;
        } else if (col.starts_with("y_")) {
          r.features_y[col.substr(2)] = v;
        } else {
          throw PreferenceError("unexpected column '" + col + "'");
        }
      }
    } catch (const std::invalid_argument& ex) {
      throw PreferenceError("line " + std::to_string(line_no) + ": " + ex.what());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void write_choices_csv(std::ostream& out, std::span<const ChoiceRecord> records,
                       const std::vector<std::string>& features) {
  out << "participant_id,density,agent_x,agent_y,chose_x";
  for (const auto& f : features) out << ",x_" << f << ",y_" << f;
  out << '\n';
  for (const auto& r : records) {
    out << r.participant_id << ',' << r.density << ',' << to_string(r.agent_x) << ','
        << to_string(r.agent_y) << ',' << (r.chose_x ? 1 : 0);
    for (const auto& f : features) {
      out << ',' << format_number(feature(r.features_x, f)) << ',' << format_number(feature(r.features_y, f));
    }
    out << '\n';
  }
}

void write_coefficients_csv(std::ostream& out, const PosteriorSummary& s) {
  out << "coefficient,bf_inclusion,mean,sd,ci_lower,ci_upper,ess,rhat,bf_method\n";
  for (const auto& c : s.coefficients) {
    out << c.name << ',' << format_number(c.bf_inclusion) << ',' << format_number(c.mean) << ','
        << format_number(c.sd) << ',' << format_number(c.ci_lower) << ','
        << format_number(c.ci_upper) << ',' << format_number(c.ess) << ','
        << format_number(c.rhat) << ",savage_dickey_normal_prior\n";
  }
}

}  // namespace teamsim
