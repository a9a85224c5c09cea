#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/dataset.hpp"
#include "ebm/model.hpp"
#include "ebm/preprocess.hpp"
#include "ebm/random.hpp"

namespace ebm {

/// Negative gradient of the loss at the current scores:
/// log-loss under logit, squared error under identity. Both give y - mean.
std::vector<double> compute_pseudo_residuals(std::span<const double> y, std::span<const double> scores, Link link);

/// Per-row loss contribution (log-loss or squared error).
double pointwise_loss(Link link, double y, double score) noexcept;

struct Histogram {
   std::vector<double> sum_residual;
   std::vector<double> sum_weight;

   explicit Histogram(std::size_t bins = 0) : sum_residual(bins, 0.0), sum_weight(bins, 0.0) {}
   std::size_t size() const noexcept { return sum_weight.size(); }
};

/// Accumulates w_i * r_i and w_i into bin column[i] for every row i in activeRows.
Histogram build_feature_histogram(std::span<const BinIndex> column, std::size_t nBins,
   std::span<const double> residuals, std::span<const double> weights, std::span<const std::size_t> activeRows);

/// Fits a small regression tree over the bins of one feature and returns the per-bin
/// update learning_rate * (leaf residual mean). Numeric features split the ordered bin
/// sequence [missing, 1, 2, ...] into contiguous ranges; categorical features split one
/// bin at a time out of a leaf. Splits are chosen greedily by squared-error gain
/// sum(S^2 / W), up to max_leaves leaves, with min_samples_leaf as a weight floor.
std::vector<double> boost_feature_round(const Histogram & histogram, ColumnKind kind, const TrainConfig & config);

/// Shifts every term to zero weighted mean (weights = term.weights) and adds the shift
/// to the intercept.
void center_terms(AdditiveModel & model);

/// Rows of one outer bag. counts[r] is the multiplicity of row r in the bootstrap draw
/// from the training partition; validation rows never appear in counts.
struct BagPlan {
   std::vector<std::uint32_t> counts;
   std::vector<std::size_t> active_rows;
   std::vector<std::size_t> validation_rows;
};

/// Deterministic in (target, config.seed, bag). A single bag uses its training partition
/// once per row instead of a bootstrap draw.
BagPlan plan_bag(std::span<const double> target, Task task, const TrainConfig & config, std::size_t bag);

struct BagReport {
   std::size_t best_epoch = 0;
   std::size_t epochs_run = 0;
   double base_score = 0.0;
   // index 0 is the state before the first epoch
   std::vector<double> train_loss;
   std::vector<double> validation_loss;
   // best-epoch table per term, in the stage's term order
   std::vector<std::vector<double>> tables;
};

struct PairScore {
   std::size_t first = 0;
   std::size_t second = 0;
   double score = 0.0;

   friend bool operator==(const PairScore &, const PairScore &) = default;
};

struct TrainResult {
   AdditiveModel model;
   std::vector<BagReport> main_bags;
   std::vector<BagReport> pair_bags;
   std::vector<PairScore> ranked_pairs;
   std::vector<std::string> warnings;
   double train_loss = 0.0;
   double validation_loss = 0.0;
};

/// Outer-bagged round-robin boosting of one term per feature, followed by centering.
/// threads = 0 uses the hardware concurrency. The result does not depend on threads.
TrainResult train_main_effects(const Dataset & dataset, const TrainConfig & config, std::size_t threads = 0);

/// Main effects, then (config.n_interactions > 0) pair ranking and pair-term boosting.
TrainResult train(const Dataset & dataset, const TrainConfig & config, std::size_t threads = 0);

} // namespace ebm
