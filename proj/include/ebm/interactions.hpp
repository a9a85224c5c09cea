#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/dataset.hpp"
#include "ebm/model.hpp"
#include "ebm/preprocess.hpp"
#include "ebm/trainer.hpp"

namespace ebm {

/// Pairwise grids are coarsened to at most this many units per axis (missing unit included).
inline constexpr std::size_t kMaxPairUnits = 32;

/// Best single 2x2 cut of a rows x cols residual histogram (row-major): the largest
/// sum over quadrants of S^2/W minus S^2/W of the whole grid. Empty quadrants add 0.
double best_quadrant_gain(const Histogram & grid, std::size_t rows, std::size_t cols);

/// Scores every feature pair (i < j) on the joint histogram of `residuals` over
/// coarsened bins. Sorted by score descending, ties in (i, j) order.
std::vector<PairScore> rank_pairs(const BinnedMatrix & binned, std::span<const double> residuals,
   std::span<const double> weights, std::size_t threads = 0);

struct PairStageResult {
   AdditiveModel model;
   std::vector<BagReport> bags;
   std::vector<std::string> warnings;
};

/// Boosts 2-D terms for the first config.n_interactions entries of `ranked` on top of the
/// frozen main-effect model. Only the new terms are centered.
PairStageResult train_pair_terms(const AdditiveModel & model, const Dataset & dataset,
   std::span<const PairScore> ranked, const TrainConfig & config, std::size_t threads = 0);

/// CSV with header pair_i,pair_j,name_i,name_j,score.
void write_pair_scores(std::ostream & out, std::span<const PairScore> pairs, std::span<const std::string> names);

} // namespace ebm
