#pragma once

// Bag-level boosting engine shared by the main-effect and pair stages.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ebm/config.hpp"
#include "ebm/model.hpp"
#include "ebm/random.hpp"
#include "ebm/trainer.hpp"

namespace ebm::detail {

enum class UnitLayout : std::uint8_t { ordered, categorical, grid };

/// A term under training, expressed over "units": bins for main effects, cells of the
/// coarsened grid for pairs.
struct StageTerm {
   UnitLayout layout = UnitLayout::ordered;
   std::size_t n_units = 0;
   std::size_t grid_rows = 0;
   std::size_t grid_cols = 0;
   std::span<const BinIndex> unit_of_row;
};

struct StageInput {
   std::span<const double> y;
   std::span<const double> weights;
   Link link = Link::logit;
   std::vector<StageTerm> terms;
   // Starting scores per row. Empty: start every row at the bag's base score.
   std::span<const double> initial_scores;
};

/// Stream tags keep the random draws of the two stages apart.
inline constexpr std::uint64_t kMainStage = 0;
inline constexpr std::uint64_t kPairStage = 1;

BagReport boost_bag(const StageInput & input, const TrainConfig & config, const BagPlan & plan, Rng rng);

std::vector<double> boost_units(const Histogram & histogram, const StageTerm & term, const TrainConfig & config);

/// 2-D analog of boost_feature_round on a rows x cols grid histogram (row-major).
std::vector<double> boost_grid_round(const Histogram & histogram, std::size_t rows, std::size_t cols,
   const TrainConfig & config);

/// Unweighted mean of the bags' best tables, summed in ascending bag order.
std::vector<std::vector<double>> average_tables(const std::vector<BagReport> & bags);

void center_term(Term & term, double & intercept);

double mean_loss(Link link, std::span<const double> y, std::span<const double> weights,
   std::span<const double> scores, std::span<const std::size_t> rows);

} // namespace ebm::detail
