#include "ebm/interactions.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "boosting.hpp"
#include "ebm/csv.hpp"
#include "ebm/error.hpp"
#include "ebm/parallel.hpp"

namespace ebm {

namespace {

struct PairGrid {
   std::vector<BinIndex> map_first;
   std::vector<BinIndex> map_second;
   std::size_t rows = 0;
   std::size_t cols = 0;
};

std::size_t unit_count(const std::vector<BinIndex> & map) {
   return map.empty() ? 0 : static_cast<std::size_t>(*std::max_element(map.begin(), map.end())) + 1;
}

PairGrid make_grid(const std::vector<std::vector<double>> & binWeights, std::size_t i, std::size_t j) {
   PairGrid grid;
   grid.map_first = coarsen_bins(binWeights[i], kMaxPairUnits);
   grid.map_second = coarsen_bins(binWeights[j], kMaxPairUnits);
   grid.rows = unit_count(grid.map_first);
   grid.cols = unit_count(grid.map_second);
   return grid;
}

double leaf_term(double s, double w) noexcept {
   return w > 0.0 ? s * s / w : 0.0;
}

} // namespace

double best_quadrant_gain(const Histogram & grid, std::size_t rows, std::size_t cols) {
   if(rows < 2 || cols < 2) {
      return 0.0;
   }
   const std::size_t stride = cols + 1;
   std::vector<double> ps((rows + 1) * stride, 0.0);
   std::vector<double> pw((rows + 1) * stride, 0.0);
   for(std::size_t a = 0; a < rows; ++a) {
      for(std::size_t b = 0; b < cols; ++b) {
         const std::size_t at = (a + 1) * stride + b + 1;
         ps[at] = grid.sum_residual[a * cols + b] + ps[a * stride + b + 1] + ps[at - 1] - ps[a * stride + b];
         pw[at] = grid.sum_weight[a * cols + b] + pw[a * stride + b + 1] + pw[at - 1] - pw[a * stride + b];
      }
   }
   const double totalS = ps[rows * stride + cols];
   const double totalW = pw[rows * stride + cols];
   const double parent = leaf_term(totalS, totalW);
   double best = 0.0;
   for(std::size_t ci = 1; ci < rows; ++ci) {
      const double rowS = ps[ci * stride + cols];
      const double rowW = pw[ci * stride + cols];
      for(std::size_t cj = 1; cj < cols; ++cj) {
         const double colS = ps[rows * stride + cj];
         const double colW = pw[rows * stride + cj];
         const double s00 = ps[ci * stride + cj];
         const double w00 = pw[ci * stride + cj];
         const double s01 = rowS - s00;
         const double w01 = rowW - w00;
         const double s10 = colS - s00;
         const double w10 = colW - w00;
         const double s11 = totalS - rowS - colS + s00;
         const double w11 = totalW - rowW - colW + w00;
         const double gain =
            leaf_term(s00, w00) + leaf_term(s01, w01) + leaf_term(s10, w10) + leaf_term(s11, w11) - parent;
         best = std::max(best, gain);
      }
   }
   return best;
}

std::vector<PairScore> rank_pairs(const BinnedMatrix & binned, std::span<const double> residuals,
   std::span<const double> weights, std::size_t threads) {
   const std::size_t p = binned.n_features;
   std::vector<PairScore> pairs;
   for(std::size_t i = 0; i < p; ++i) {
      for(std::size_t j = i + 1; j < p; ++j) {
         pairs.push_back({i, j, 0.0});
      }
   }
   if(residuals.size() != binned.n_rows || weights.size() != binned.n_rows) {
      throw TrainError("residuals and weights must have one entry per row");
   }

   parallel_for(pairs.size(), threads, [&](std::size_t k) {
      PairScore & pair = pairs[k];
      const PairGrid grid = make_grid(binned.counts, pair.first, pair.second);
      Histogram hist(grid.rows * grid.cols);
      const auto a = binned.column(pair.first);
      const auto b = binned.column(pair.second);
      for(std::size_t r = 0; r < binned.n_rows; ++r) {
         const std::size_t cell = grid.map_first[a[r]] * grid.cols + grid.map_second[b[r]];
         hist.sum_residual[cell] += weights[r] * residuals[r];
         hist.sum_weight[cell] += weights[r];
      }
      pair.score = best_quadrant_gain(hist, grid.rows, grid.cols);
   });

   std::stable_sort(pairs.begin(), pairs.end(), [](const PairScore & x, const PairScore & y) {
      return x.score > y.score;
   });
   return pairs;
}

PairStageResult train_pair_terms(const AdditiveModel & model, const Dataset & dataset,
   std::span<const PairScore> ranked, const TrainConfig & config, std::size_t threads) {
   PairStageResult result;
   result.model = model;
   std::size_t k = config.n_interactions;
   if(k == 0) {
      return result;
   }
   if(k > ranked.size()) {
      result.warnings.push_back(
         fmt::format("requested {} interactions but only {} pairs are available; training all of them", k,
            ranked.size()));
      k = ranked.size();
   }
   if(k == 0) {
      return result;
   }

   const BinnedMatrix binned = bin_dataset(dataset, model.preprocessor);
   const std::size_t n = binned.n_rows;
   const std::vector<double> initial = predict_scores(model, binned);

   std::vector<PairGrid> grids;
   std::vector<std::vector<BinIndex>> units(k);
   detail::StageInput input;
   input.y = dataset.target;
   input.weights = dataset.weights;
   input.link = model.link;
   input.initial_scores = initial;
   for(std::size_t t = 0; t < k; ++t) {
      const PairScore & pair = ranked[t];
      grids.push_back(make_grid(model.preprocessor.bin_weights, pair.first, pair.second));
      const PairGrid & grid = grids.back();
      const auto a = binned.column(pair.first);
      const auto b = binned.column(pair.second);
      units[t].resize(n);
      for(std::size_t r = 0; r < n; ++r) {
         units[t][r] = static_cast<BinIndex>(grid.map_first[a[r]] * grid.cols + grid.map_second[b[r]]);
      }
      detail::StageTerm term;
      term.layout = detail::UnitLayout::grid;
      term.n_units = grid.rows * grid.cols;
      term.grid_rows = grid.rows;
      term.grid_cols = grid.cols;
      term.unit_of_row = units[t];
      input.terms.push_back(term);
   }

   result.bags.resize(config.outer_bags);
   const Rng root = Rng(config.seed).split(detail::kPairStage);
   parallel_for(config.outer_bags, threads, [&](std::size_t bag) {
      const BagPlan plan = plan_bag(dataset.target, dataset.task, config, bag);
      result.bags[bag] = detail::boost_bag(input, config, plan, root.split(1000 + bag));
   });
   const auto tables = detail::average_tables(result.bags);

   for(std::size_t t = 0; t < k; ++t) {
      const PairScore & pair = ranked[t];
      const PairGrid & grid = grids[t];
      const std::size_t ni = model.preprocessor.bins[pair.first].n_bins;
      const std::size_t nj = model.preprocessor.bins[pair.second].n_bins;
      Term term;
      term.features = {pair.first, pair.second};
      term.shape = {ni, nj};
      term.scores.assign(ni * nj, 0.0);
      term.weights.assign(ni * nj, 0.0);
      for(std::size_t a = 0; a < ni; ++a) {
         for(std::size_t b = 0; b < nj; ++b) {
            term.scores[a * nj + b] = tables[t][grid.map_first[a] * grid.cols + grid.map_second[b]];
         }
      }
      const auto ca = binned.column(pair.first);
      const auto cb = binned.column(pair.second);
      for(std::size_t r = 0; r < n; ++r) {
         term.weights[ca[r] * nj + cb[r]] += dataset.weights[r];
      }
      detail::center_term(term, result.model.intercept);
      result.model.terms.push_back(std::move(term));
   }
   return result;
}

void write_pair_scores(std::ostream & out, std::span<const PairScore> pairs, std::span<const std::string> names) {
   out << "pair_i,pair_j,name_i,name_j,score\n";
   for(const PairScore & pair : pairs) {
      out << fmt::format("{},{},{},{},{}\n", pair.first, pair.second, csv_escape(names[pair.first]),
         csv_escape(names[pair.second]), pair.score);
   }
}

} // namespace ebm
