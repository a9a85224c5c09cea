#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/dataset.hpp"
#include "ebm/preprocess.hpp"

namespace ebm {

enum class Link : std::uint8_t { logit, identity };

const char * to_string(Link link) noexcept;
Link parse_link(std::string_view text);
Link link_for(Task task) noexcept;

/// Mean from additive score. The logistic branch never evaluates exp of a positive
/// argument, so it is finite for every finite score.
inline double inverse_link(Link link, double score) noexcept;

/// Additive score from mean: log(p / (1 - p)) or identity.
double apply_link(Link link, double mean) noexcept;

/// One additive component: a lookup table over the bins of one or two features.
/// scores and weights are row-major with extents `shape`.
struct Term {
   std::vector<std::size_t> features;
   std::vector<std::size_t> shape;
   std::vector<double> scores;
   std::vector<double> weights;

   std::size_t dimensions() const noexcept { return features.size(); }
   std::size_t size() const noexcept { return scores.size(); }

   /// Table position for a binned row (indexed by feature).
   std::size_t flat_index(std::span<const BinIndex> row) const noexcept {
      std::size_t index = row[features[0]];
      if(features.size() == 2) {
         index = index * shape[1] + row[features[1]];
      }
      return index;
   }
};

struct ModelMetadata {
   std::uint64_t seed = 0;
   TrainConfig config;
   std::string train_timestamp;
   std::vector<std::size_t> best_epochs;
};

/// g(E[y]) = intercept + sum of term lookups.
struct AdditiveModel {
   static constexpr int kFormatVersion = 1;

   Task task = Task::classification;
   Link link = Link::logit;
   double intercept = 0.0;
   Preprocessor preprocessor;
   std::vector<Term> terms;
   ModelMetadata metadata;
   std::string target_name;
   std::array<std::string, 2> class_labels;

   const std::vector<std::string> & feature_names() const noexcept { return preprocessor.feature_names; }
   std::size_t n_features() const noexcept { return preprocessor.n_features(); }

   /// Zero-score main-effect term with the feature's training bin weights.
   Term make_main_term(std::size_t feature) const;

   /// Throws FormatError on any structural violation.
   void validate() const;
};

/// Arithmetic policy for prediction. Every scoring path is written against this
/// interface so tests can count the operations a prediction performs.
struct DirectOps {
   static double lookup(const Term & term, std::size_t index) noexcept { return term.scores[index]; }
   static double add(double a, double b) noexcept { return a + b; }
   static double link(Link link, double score) noexcept { return inverse_link(link, score); }
};

template<typename Ops>
double accumulate_score(const AdditiveModel & model, std::span<const BinIndex> row, Ops & ops) {
   double score = model.intercept;
   for(const Term & term : model.terms) {
      score = ops.add(score, ops.lookup(term, term.flat_index(row)));
   }
   return score;
}

template<typename Ops>
double accumulate_mean(const AdditiveModel & model, std::span<const BinIndex> row, Ops & ops) {
   return ops.link(model.link, accumulate_score(model, row, ops));
}

double predict_score(const AdditiveModel & model, std::span<const BinIndex> binnedRow);
double predict_score(const AdditiveModel & model, std::span<const Cell> row);
double predict_mean(const AdditiveModel & model, std::span<const BinIndex> binnedRow);
double predict_mean(const AdditiveModel & model, std::span<const Cell> row);

std::vector<double> predict_scores(const AdditiveModel & model, const BinnedMatrix & binned);
std::vector<double> predict_scores(const AdditiveModel & model, const Dataset & dataset);

std::string serialize_model(const AdditiveModel & model);
AdditiveModel deserialize_model(std::string_view text);
void save_model(const AdditiveModel & model, const std::string & path);
AdditiveModel load_model(const std::string & path);

inline double inverse_link(Link link, double score) noexcept {
   if(link == Link::identity) {
      return score;
   }
   if(score >= 0.0) {
      return 1.0 / (1.0 + std::exp(-score));
   }
   const double e = std::exp(score);
   return e / (1.0 + e);
}

} // namespace ebm
