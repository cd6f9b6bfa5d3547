#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "teamsim/agents.hpp"
#include "teamsim/sampler.hpp"

namespace teamsim {

class PreferenceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class FeatureSet { objective, subjective };

std::string_view to_string(FeatureSet set);
FeatureSet feature_set_from_string(std::string_view name);
const std::vector<std::string>& feature_names(FeatureSet set);

using FeatureVector = std::map<std::string, double>;

// One pairwise comparison; x is the agent presented first.
struct ChoiceRecord {
  std::string participant_id;
  int density = 5;
  AgentKind agent_x = AgentKind::ignorant;
  AgentKind agent_y = AgentKind::omit;
  FeatureVector features_x;
  FeatureVector features_y;
  bool chose_x = false;
};

inline constexpr std::string_view kInterceptName = "intercept";

// Rows of feature differences (x - y) with a leading intercept column.
struct Design {
  std::vector<std::string> features;  // difference columns, without the intercept
  int rows = 0;
  std::vector<double> x;  // row-major rows x (1 + features)
  std::vector<double> y;
  std::vector<double> center;  // per feature column
  std::vector<double> scale;
  std::vector<std::string> warnings;

  int cols() const { return static_cast<int>(features.size()) + 1; }
  // Transformed covariate row (intercept first) for an arbitrary record.
  std::vector<double> row_for(const ChoiceRecord& record) const;
};

Design build_design(std::span<const ChoiceRecord> records, const std::vector<std::string>& features,
                    bool standardize);
Design build_design(std::span<const ChoiceRecord> records, FeatureSet set, bool standardize);

struct CoefficientSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double bf_inclusion = 1.0;
  double log_bf_inclusion = 0.0;
  double ess = 0.0;
  double rhat = 0.0;
};

struct FitConfig {
  double prior_sd = 1.0;
  SamplerConfig sampler;
  bool keep_draws = true;
};

struct PosteriorSummary {
  std::vector<CoefficientSummary> coefficients;  // intercept first
  std::vector<std::string> features;
  std::vector<double> center;
  std::vector<double> scale;
  double prior_sd = 1.0;
  int chains = 0;
  int draws_per_chain = 0;
  double acceptance_rate = 0.0;
  std::vector<std::string> warnings;
  std::vector<std::vector<double>> draws;  // pooled, one coefficient vector each

  std::vector<double> means() const;
};

// Bayesian logistic regression on the design under independent N(0, prior_sd^2)
// priors. Inclusion Bayes factors use the Savage-Dickey ratio at zero.
PosteriorSummary fit(const Design& design, const FitConfig& config = {});

double sigmoid(double eta);
// P(choose x) from raw coefficients (intercept first) and difference covariates.
double predict(std::span<const double> coefficients, std::span<const double> differences);
// Plug-in posterior-mean prediction for a record.
double predict(const PosteriorSummary& summary, const ChoiceRecord& record);
// Posterior-predictive average over retained draws.
double predict_averaged(const PosteriorSummary& summary, const ChoiceRecord& record);

struct CrossValidation {
  double accuracy = 0.0;
  double auc = 0.0;
  std::vector<int> fold_sizes;
  std::vector<double> predictions;  // record order
  std::vector<int> labels;
};

std::vector<int> assign_folds(std::size_t records, int folds, std::uint64_t seed);
CrossValidation cross_validate(std::span<const ChoiceRecord> records,
                               const std::vector<std::string>& features, int folds,
                               std::uint64_t seed, const FitConfig& config = {},
                               bool averaged = false);
double area_under_curve(std::span<const double> scores, std::span<const int> labels);

// BF10 for a binomial proportion: uniform prior on theta against theta = 0.5.
double binomial_bf(int successes, int trials);
std::string_view interpret_bf(double bf10);

// Pairwise choice percentages per density with binomial Bayes factors.
struct PairPreference {
  int density = 0;
  AgentKind row = AgentKind::ignorant;
  AgentKind col = AgentKind::omit;
  int row_chosen = 0;
  int comparisons = 0;
  double percent = 0.0;
  double bf10 = 1.0;
};
std::vector<PairPreference> preference_matrix(std::span<const ChoiceRecord> records);

// CSV surfaces.
std::vector<ChoiceRecord> read_choices_csv(std::istream& in);
void write_choices_csv(std::ostream& out, std::span<const ChoiceRecord> records,
                       const std::vector<std::string>& features);
void write_coefficients_csv(std::ostream& out, const PosteriorSummary& summary);

}  // namespace teamsim
