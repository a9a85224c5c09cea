#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/dataset.hpp"

namespace ebm {

/// Area under the ROC curve by the rank-sum formula with average ranks for ties.
/// Throws DataError unless both classes are present.
double auroc(std::span<const double> scores, std::span<const double> labels);

/// Throws DataError on empty or mismatched input.
double rmse(std::span<const double> predictions, std::span<const double> targets);

enum class Metric : std::uint8_t { auroc, rmse };

const char * to_string(Metric metric) noexcept;

/// Fold id in [0, k) per row. Classification rows are shuffled within each class, the
/// class lists are concatenated and dealt to folds round-robin, so each fold's class
/// counts are within one of the ideal.
std::vector<std::size_t> stratified_folds(std::span<const double> target, Task task, std::size_t k, std::uint64_t seed);

class Learner {
public:
   virtual ~Learner() = default;
   virtual void fit(const Dataset & train) = 0;
   /// Predicted means: probabilities for classification, values for regression.
   virtual std::vector<double> predict(const Dataset & rows) const = 0;
};

using LearnerFactory = std::function<std::unique_ptr<Learner>()>;

/// Learner wrapping train() with a fixed config.
std::unique_ptr<Learner> make_ebm_learner(const TrainConfig & config, std::size_t threads = 1);

struct MetricReport {
   std::string metric;
   std::vector<double> values;
   double mean = 0.0;
   double std = 0.0; // sample standard deviation; 0 for fewer than two folds
   std::vector<double> fit_seconds;
   std::vector<double> predict_seconds;
   std::vector<std::size_t> predicted_rows;

   /// Recomputes mean and std from values.
   void summarize();
};

/// Stratified k-fold cross-validation. Each fold fits a fresh learner on the other folds
/// and scores the held-out fold; folds run on up to `threads` workers.
MetricReport kfold_cv(const Dataset & dataset, std::size_t k, const LearnerFactory & factory, Metric metric,
   std::uint64_t seed, std::size_t threads = 1);

/// kfold_cv with the additive model; fold assignment uses config.seed.
MetricReport kfold_cv(const Dataset & dataset, std::size_t k, const TrainConfig & config, Metric metric,
   std::size_t threads = 1);

struct BenchmarkEntry {
   std::string name;
   std::string path;
   std::string target;
   std::optional<std::string> positive_label;
};

/// Manifest CSV with header name,path,target[,positive_label]. Relative paths are
/// resolved against the manifest's directory.
std::vector<BenchmarkEntry> read_manifest(const std::string & path);

struct BenchmarkRow {
   std::string dataset;
   std::size_t rows = 0;
   std::size_t features = 0;
   double auroc_mean = 0.0;
   double auroc_std = 0.0;
   double fit_seconds = 0.0;
   double predict_us_per_row = 0.0;
   bool skipped = false;
};

/// Writes the header, then one row per entry as it completes. Entries whose file is
/// missing are written with skipped=true.
std::vector<BenchmarkRow> run_benchmark(std::span<const BenchmarkEntry> entries, const TrainConfig & config,
   std::size_t folds, std::ostream & out, std::size_t threads = 1);

void write_benchmark_header(std::ostream & out);
void write_benchmark_row(std::ostream & out, const BenchmarkRow & row);

} // namespace ebm
