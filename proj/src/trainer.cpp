#include "ebm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "boosting.hpp"
#include "ebm/error.hpp"
#include "ebm/interactions.hpp"
#include "ebm/parallel.hpp"

namespace ebm {

namespace {

// Splits whose gain is below this fraction of the histogram's total explainable
// sum of squares are rounding noise.
constexpr double kRelativeGainFloor = 1e-10;

double leaf_term(double s, double w) noexcept {
   return w > 0.0 ? s * s / w : 0.0;
}

double explainable(const Histogram & h) noexcept {
   double total = 0.0;
   for(std::size_t b = 0; b < h.size(); ++b) {
      total += leaf_term(h.sum_residual[b], h.sum_weight[b]);
   }
   return total;
}

bool weight_ok(double w, double minLeaf) noexcept {
   return w > 0.0 && w >= minLeaf;
}

std::vector<double> boost_ordered(const Histogram & h, const TrainConfig & config) {
   const std::size_t n = h.size();
   std::vector<double> update(n, 0.0);
   if(n == 0) {
      return update;
   }
   std::vector<double> ps(n + 1, 0.0);
   std::vector<double> pw(n + 1, 0.0);
   for(std::size_t b = 0; b < n; ++b) {
      ps[b + 1] = ps[b] + h.sum_residual[b];
      pw[b + 1] = pw[b] + h.sum_weight[b];
   }
   const double minLeaf = static_cast<double>(config.min_samples_leaf);
   const double floor = kRelativeGainFloor * explainable(h);

   // Leaves are half-open ranges [first, last) kept in ascending order.
   std::vector<std::pair<std::size_t, std::size_t>> leaves{{0, n}};
   while(leaves.size() < config.max_leaves) {
      double bestGain = 0.0;
      std::size_t bestLeaf = 0;
      std::size_t bestCut = 0;
      for(std::size_t l = 0; l < leaves.size(); ++l) {
         const auto [a, b] = leaves[l];
         const double s = ps[b] - ps[a];
         const double w = pw[b] - pw[a];
         const double parent = leaf_term(s, w);
         for(std::size_t c = a + 1; c < b; ++c) {
            const double wl = pw[c] - pw[a];
            const double wr = pw[b] - pw[c];
            if(!weight_ok(wl, minLeaf) || !weight_ok(wr, minLeaf)) {
               continue;
            }
            const double sl = ps[c] - ps[a];
            const double sr = ps[b] - ps[c];
            const double gain = sl * sl / wl + sr * sr / wr - parent;
            if(gain > bestGain) {
               bestGain = gain;
               bestLeaf = l;
               bestCut = c;
            }
         }
      }
      if(!(bestGain > floor) || bestCut == 0) {
         break;
      }
      const auto [a, b] = leaves[bestLeaf];
      leaves[bestLeaf] = {a, bestCut};
      leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(bestLeaf) + 1, {bestCut, b});
   }

   for(const auto & [a, b] : leaves) {
      const double w = pw[b] - pw[a];
      const double value = w > 0.0 ? config.learning_rate * ((ps[b] - ps[a]) / w) : 0.0;
      for(std::size_t u = a; u < b; ++u) {
         update[u] = value;
      }
   }
   return update;
}

std::vector<double> boost_categorical(const Histogram & h, const TrainConfig & config) {
   const std::size_t n = h.size();
   std::vector<double> update(n, 0.0);
   if(n == 0) {
      return update;
   }
   const double minLeaf = static_cast<double>(config.min_samples_leaf);
   const double floor = kRelativeGainFloor * explainable(h);

   struct Leaf {
      double s = 0.0;
      double w = 0.0;
      std::size_t members = 0;
   };
   std::vector<std::size_t> leafOf(n, 0);
   std::vector<Leaf> leaves(1);
   for(std::size_t b = 0; b < n; ++b) {
      leaves[0].s += h.sum_residual[b];
      leaves[0].w += h.sum_weight[b];
   }
   leaves[0].members = n;

   while(leaves.size() < config.max_leaves) {
      double bestGain = 0.0;
      std::size_t bestBin = n;
      for(std::size_t b = 0; b < n; ++b) {
         const Leaf & leaf = leaves[leafOf[b]];
         if(leaf.members < 2) {
            continue;
         }
         const double wb = h.sum_weight[b];
         const double wRest = leaf.w - wb;
         if(!weight_ok(wb, minLeaf) || !weight_ok(wRest, minLeaf)) {
            continue;
         }
         const double sb = h.sum_residual[b];
         const double sRest = leaf.s - sb;
         const double gain = sb * sb / wb + sRest * sRest / wRest - leaf_term(leaf.s, leaf.w);
         if(gain > bestGain) {
            bestGain = gain;
            bestBin = b;
         }
      }
      if(!(bestGain > floor) || bestBin == n) {
         break;
      }
      Leaf & from = leaves[leafOf[bestBin]];
      from.s -= h.sum_residual[bestBin];
      from.w -= h.sum_weight[bestBin];
      --from.members;
      leafOf[bestBin] = leaves.size();
      leaves.push_back({h.sum_residual[bestBin], h.sum_weight[bestBin], 1});
   }

   for(std::size_t b = 0; b < n; ++b) {
      const Leaf & leaf = leaves[leafOf[b]];
      if(h.sum_weight[b] > 0.0 && leaf.w > 0.0) {
         update[b] = config.learning_rate * (leaf.s / leaf.w);
      }
   }
   return update;
}

} // namespace

double pointwise_loss(Link link, double y, double score) noexcept {
   if(link == Link::identity) {
      const double d = y - score;
      return d * d;
   }
   const double softplus = std::max(score, 0.0) + std::log1p(std::exp(-std::abs(score)));
   return softplus - y * score;
}

std::vector<double> compute_pseudo_residuals(std::span<const double> y, std::span<const double> scores, Link link) {
   if(y.size() != scores.size()) {
      throw TrainError("labels and scores differ in length");
   }
   std::vector<double> out(y.size());
   for(std::size_t i = 0; i < y.size(); ++i) {
      out[i] = y[i] - inverse_link(link, scores[i]);
   }
   return out;
}

Histogram build_feature_histogram(std::span<const BinIndex> column, std::size_t nBins,
   std::span<const double> residuals, std::span<const double> weights, std::span<const std::size_t> activeRows) {
   Histogram h(nBins);
   for(const std::size_t r : activeRows) {
      const BinIndex b = column[r];
      h.sum_residual[b] += weights[r] * residuals[r];
      h.sum_weight[b] += weights[r];
   }
   return h;
}

std::vector<double> boost_feature_round(const Histogram & histogram, ColumnKind kind, const TrainConfig & config) {
   return kind == ColumnKind::numeric ? boost_ordered(histogram, config) : boost_categorical(histogram, config);
}

void center_terms(AdditiveModel & model) {
   for(Term & term : model.terms) {
      detail::center_term(term, model.intercept);
   }
}

BagPlan plan_bag(std::span<const double> target, Task task, const TrainConfig & config, std::size_t bag) {
   const std::size_t n = target.size();
   Rng rng = Rng(config.seed).split(detail::kMainStage).split(bag);

   std::vector<std::uint8_t> isValidation(n, 0);
   if(!config.out_of_bag_validation() && config.validation_fraction > 0.0) {
      // Stratified for classification; one stratum for regression.
      std::vector<std::vector<std::size_t>> strata(task == Task::classification ? 2 : 1);
      for(std::size_t r = 0; r < n; ++r) {
         strata[task == Task::classification && target[r] != 0.0 ? 1 : 0].push_back(r);
      }
      for(auto & stratum : strata) {
         rng.shuffle(stratum);
         const auto take = static_cast<std::size_t>(
            std::llround(config.validation_fraction * static_cast<double>(stratum.size())));
         for(std::size_t i = 0; i < take && i < stratum.size(); ++i) {
            isValidation[stratum[i]] = 1;
         }
      }
   }

   std::vector<std::size_t> partition;
   for(std::size_t r = 0; r < n; ++r) {
      if(isValidation[r] == 0) {
         partition.push_back(r);
      }
   }
   if(partition.empty()) {
      throw TrainError("no training rows left after the validation split");
   }

   BagPlan plan;
   plan.counts.assign(n, 0);
   if(config.outer_bags == 1) {
      for(const std::size_t r : partition) {
         plan.counts[r] = 1;
      }
   } else {
      for(const std::size_t draw : bootstrap_indices(partition.size(), rng)) {
         ++plan.counts[partition[draw]];
      }
   }
   for(std::size_t r = 0; r < n; ++r) {
      if(plan.counts[r] != 0) {
         plan.active_rows.push_back(r);
      } else if(isValidation[r] != 0 || (config.out_of_bag_validation() && config.outer_bags > 1)) {
         plan.validation_rows.push_back(r);
      }
   }
   return plan;
}

namespace detail {

void center_term(Term & term, double & intercept) {
   double sw = 0.0;
   double sws = 0.0;
   for(std::size_t i = 0; i < term.scores.size(); ++i) {
      sw += term.weights[i];
      sws += term.weights[i] * term.scores[i];
   }
   if(!(sw > 0.0)) {
      return;
   }
   const double mean = sws / sw;
   for(double & s : term.scores) {
      s -= mean;
   }
   intercept += mean;
}

double mean_loss(Link link, std::span<const double> y, std::span<const double> weights,
   std::span<const double> scores, std::span<const std::size_t> rows) {
   double total = 0.0;
   double weight = 0.0;
   for(const std::size_t r : rows) {
      total += weights[r] * pointwise_loss(link, y[r], scores[r]);
      weight += weights[r];
   }
   return weight > 0.0 ? total / weight : 0.0;
}

std::vector<double> boost_units(const Histogram & histogram, const StageTerm & term, const TrainConfig & config) {
   switch(term.layout) {
   case UnitLayout::ordered:
      return boost_ordered(histogram, config);
   case UnitLayout::categorical:
      return boost_categorical(histogram, config);
   case UnitLayout::grid:
      return boost_grid_round(histogram, term.grid_rows, term.grid_cols, config);
   }
   return {};
}

std::vector<double> boost_grid_round(const Histogram & h, std::size_t rows, std::size_t cols, const TrainConfig & config) {
   std::vector<double> update(rows * cols, 0.0);
   if(rows == 0 || cols == 0) {
      return update;
   }
   const std::size_t stride = cols + 1;
   std::vector<double> ps((rows + 1) * stride, 0.0);
   std::vector<double> pw((rows + 1) * stride, 0.0);
   for(std::size_t i = 0; i < rows; ++i) {
      for(std::size_t k = 0; k < cols; ++k) {
         const std::size_t at = (i + 1) * stride + (k + 1);
         ps[at] = h.sum_residual[i * cols + k] + ps[i * stride + k + 1] + ps[(i + 1) * stride + k] - ps[i * stride + k];
         pw[at] = h.sum_weight[i * cols + k] + pw[i * stride + k + 1] + pw[(i + 1) * stride + k] - pw[i * stride + k];
      }
   }

   struct Rect {
      std::size_t r0, r1, c0, c1;
   };
   const auto sums = [&](const Rect & q) {
      const auto at = [&](const std::vector<double> & p) {
         return p[q.r1 * stride + q.c1] - p[q.r0 * stride + q.c1] - p[q.r1 * stride + q.c0] + p[q.r0 * stride + q.c0];
      };
      return std::pair<double, double>{at(ps), at(pw)};
   };
   const double minLeaf = static_cast<double>(config.min_samples_leaf);

   struct Split {
      double gain = -1.0;
      int axis = 0;
      std::size_t cut = 0;
   };
   // Candidate splits of q in fixed order: axis 0 then axis 1, ascending cut.
   const auto for_each_split = [&](const Rect & q, auto && visit) {
      const auto [s, w] = sums(q);
      const double parent = leaf_term(s, w);
      for(int axis = 0; axis < 2; ++axis) {
         const std::size_t lo = axis == 0 ? q.r0 : q.c0;
         const std::size_t hi = axis == 0 ? q.r1 : q.c1;
         for(std::size_t c = lo + 1; c < hi; ++c) {
            Rect a = q;
            Rect b = q;
            if(axis == 0) {
               a.r1 = c;
               b.r0 = c;
            } else {
               a.c1 = c;
               b.c0 = c;
            }
            const auto [sa, wa] = sums(a);
            const auto [sb, wb] = sums(b);
            if(!weight_ok(wa, minLeaf) || !weight_ok(wb, minLeaf)) {
               continue;
            }
            visit(axis, c, a, b, sa * sa / wa + sb * sb / wb - parent);
         }
      }
   };
   const auto best_single = [&](const Rect & q) {
      double best = 0.0;
      for_each_split(q, [&](int, std::size_t, const Rect &, const Rect &, double gain) { best = std::max(best, gain); });
      return best;
   };

   const double floor = kRelativeGainFloor * explainable(h);
   std::vector<Rect> leaves{{0, rows, 0, cols}};
   while(leaves.size() < config.max_leaves) {
      // One level of lookahead while another split is still allowed: a cut that only
      // pays off once a child is split again (XOR-like structure) is otherwise never taken.
      const bool lookahead = leaves.size() + 1 < config.max_leaves;
      double bestValue = 0.0;
      std::size_t bestLeaf = 0;
      Split best;
      for(std::size_t l = 0; l < leaves.size(); ++l) {
         for_each_split(leaves[l], [&](int axis, std::size_t c, const Rect & a, const Rect & b, double gain) {
            double value = std::max(gain, 0.0);
            if(lookahead) {
               value += std::max(best_single(a), best_single(b));
            }
            if(value > bestValue) {
               bestValue = value;
               bestLeaf = l;
               best = {gain, axis, c};
            }
         });
      }
      if(!(bestValue > floor) || best.gain < 0.0) {
         break;
      }
      const Rect q = leaves[bestLeaf];
      Rect a = q;
      Rect b = q;
      if(best.axis == 0) {
         a.r1 = best.cut;
         b.r0 = best.cut;
      } else {
         a.c1 = best.cut;
         b.c0 = best.cut;
      }
      leaves[bestLeaf] = a;
      leaves.insert(leaves.begin() + static_cast<std::ptrdiff_t>(bestLeaf) + 1, b);
   }

   for(const Rect & q : leaves) {
      const auto [s, w] = sums(q);
      const double value = w > 0.0 ? config.learning_rate * (s / w) : 0.0;
      for(std::size_t i = q.r0; i < q.r1; ++i) {
         for(std::size_t k = q.c0; k < q.c1; ++k) {
            update[i * cols + k] = value;
         }
      }
   }
   return update;
}

BagReport boost_bag(const StageInput & input, const TrainConfig & config, const BagPlan & plan, Rng rng) {
   const std::size_t n = input.y.size();
   const Link link = input.link;

   std::vector<double> rowWeight(n, 0.0);
   double bagWeight = 0.0;
   double bagTarget = 0.0;
   for(const std::size_t r : plan.active_rows) {
      rowWeight[r] = plan.counts[r] * input.weights[r];
      bagWeight += rowWeight[r];
      bagTarget += rowWeight[r] * input.y[r];
   }

   BagReport report;
   std::vector<double> scores(n, 0.0);
   if(input.initial_scores.empty()) {
      double mean = bagWeight > 0.0 ? bagTarget / bagWeight : 0.0;
      if(link == Link::logit) {
         mean = std::clamp(mean, 1e-12, 1.0 - 1e-12);
      }
      report.base_score = apply_link(link, mean);
      std::fill(scores.begin(), scores.end(), report.base_score);
   } else {
      std::copy(input.initial_scores.begin(), input.initial_scores.end(), scores.begin());
   }

   std::vector<std::size_t> touched = plan.active_rows;
   touched.insert(touched.end(), plan.validation_rows.begin(), plan.validation_rows.end());

   // Expanded bootstrap multiset, sampled again when inner bags are requested.
   std::vector<std::size_t> expanded;
   std::vector<double> innerWeight;
   if(config.inner_bags > 0) {
      for(const std::size_t r : plan.active_rows) {
         expanded.insert(expanded.end(), plan.counts[r], r);
      }
      innerWeight.assign(n, 0.0);
   }

   std::vector<std::vector<double>> tables;
   tables.reserve(input.terms.size());
   for(const StageTerm & term : input.terms) {
      tables.emplace_back(term.n_units, 0.0);
   }

   const bool validating = !plan.validation_rows.empty();
   const auto losses = [&] {
      report.train_loss.push_back(detail::mean_loss(link, input.y, rowWeight, scores, plan.active_rows));
      if(validating) {
         report.validation_loss.push_back(detail::mean_loss(link, input.y, input.weights, scores, plan.validation_rows));
      }
   };
   losses();
   double bestLoss = validating ? report.validation_loss.back() : report.train_loss.back();
   std::vector<std::vector<double>> bestTables = tables;

   std::vector<double> residual(n, 0.0);
   std::size_t epoch = 0;
   while(epoch < config.max_epochs) {
      ++epoch;
      for(std::size_t t = 0; t < input.terms.size(); ++t) {
         const StageTerm & term = input.terms[t];
         for(const std::size_t r : plan.active_rows) {
            residual[r] = input.y[r] - inverse_link(link, scores[r]);
         }

         std::vector<double> update;
         if(config.inner_bags == 0) {
            update = boost_units(
               build_feature_histogram(term.unit_of_row, term.n_units, residual, rowWeight, plan.active_rows), term,
               config);
         } else {
            update.assign(term.n_units, 0.0);
            for(std::size_t k = 0; k < config.inner_bags; ++k) {
               for(std::size_t d = 0; d < expanded.size(); ++d) {
                  const std::size_t r = expanded[static_cast<std::size_t>(rng.below(expanded.size()))];
                  innerWeight[r] += input.weights[r];
               }
               const std::vector<double> one = boost_units(
                  build_feature_histogram(term.unit_of_row, term.n_units, residual, innerWeight, plan.active_rows),
                  term, config);
               for(std::size_t u = 0; u < update.size(); ++u) {
                  update[u] += one[u];
               }
               for(const std::size_t r : plan.active_rows) {
                  innerWeight[r] = 0.0;
               }
            }
            for(double & u : update) {
               u /= static_cast<double>(config.inner_bags);
            }
         }

         std::vector<double> & table = tables[t];
         for(std::size_t u = 0; u < update.size(); ++u) {
            table[u] += update[u];
         }
         for(const std::size_t r : touched) {
            scores[r] += update[term.unit_of_row[r]];
         }
      }

      losses();
      if(validating) {
         const double current = report.validation_loss.back();
         if(current < bestLoss) {
            bestLoss = current;
            report.best_epoch = epoch;
            bestTables = tables;
         } else if(epoch - report.best_epoch >= config.early_stop_patience) {
            break;
         }
      }
   }
   report.epochs_run = epoch;
   if(validating) {
      report.tables = std::move(bestTables);
   } else {
      report.best_epoch = epoch;
      report.tables = std::move(tables);
   }
   return report;
}

std::vector<std::vector<double>> average_tables(const std::vector<BagReport> & bags) {
   std::vector<std::vector<double>> mean;
   if(bags.empty()) {
      return mean;
   }
   mean.resize(bags.front().tables.size());
   for(std::size_t t = 0; t < mean.size(); ++t) {
      mean[t].assign(bags.front().tables[t].size(), 0.0);
   }
   for(const BagReport & bag : bags) {
      for(std::size_t t = 0; t < mean.size(); ++t) {
         for(std::size_t u = 0; u < mean[t].size(); ++u) {
            mean[t][u] += bag.tables[t][u];
         }
      }
   }
   const double count = static_cast<double>(bags.size());
   for(auto & table : mean) {
      for(double & v : table) {
         v /= count;
      }
   }
   return mean;
}

} // namespace detail

namespace {

void check_trainable(const Dataset & dataset, const TrainConfig & config) {
   config.validate();
   dataset.validate();
   if(dataset.n_rows() == 0) {
      throw TrainError("dataset has no rows");
   }
   if(dataset.task == Task::classification) {
      const auto positives = std::count(dataset.target.begin(), dataset.target.end(), 1.0);
      if(positives == 0 || static_cast<std::size_t>(positives) == dataset.n_rows()) {
         throw TrainError("degenerate target: only one class present");
      }
   }
}

} // namespace

TrainResult train_main_effects(const Dataset & dataset, const TrainConfig & config, std::size_t threads) {
   check_trainable(dataset, config);

   TrainResult result;
   AdditiveModel & model = result.model;
   model.task = dataset.task;
   model.link = link_for(dataset.task);
   model.target_name = dataset.target_name;
   model.class_labels = dataset.class_labels;
   model.metadata.seed = config.seed;
   model.metadata.config = config;
   model.preprocessor = Preprocessor::fit(dataset, config.max_bins);
   const BinnedMatrix binned = bin_dataset(dataset, model.preprocessor);

   detail::StageInput input;
   input.y = dataset.target;
   input.weights = dataset.weights;
   input.link = model.link;
   for(std::size_t j = 0; j < dataset.n_features(); ++j) {
      detail::StageTerm term;
      term.layout = model.preprocessor.bins[j].kind == ColumnKind::numeric ? detail::UnitLayout::ordered
                                                                           : detail::UnitLayout::categorical;
      term.n_units = model.preprocessor.bins[j].n_bins;
      term.unit_of_row = binned.column(j);
      input.terms.push_back(term);
   }

   result.main_bags.resize(config.outer_bags);
   const Rng root = Rng(config.seed).split(detail::kMainStage);
   parallel_for(config.outer_bags, threads, [&](std::size_t bag) {
      const BagPlan plan = plan_bag(dataset.target, dataset.task, config, bag);
      result.main_bags[bag] = detail::boost_bag(input, config, plan, root.split(1000 + bag));
   });

   const auto tables = detail::average_tables(result.main_bags);
   double base = 0.0;
   for(const BagReport & bag : result.main_bags) {
      base += bag.base_score;
      model.metadata.best_epochs.push_back(bag.best_epoch);
   }
   model.intercept = base / static_cast<double>(result.main_bags.size());
   for(std::size_t j = 0; j < dataset.n_features(); ++j) {
      Term term = model.make_main_term(j);
      term.scores = tables[j];
      model.terms.push_back(std::move(term));
   }
   center_terms(model);

   const std::vector<double> scores = predict_scores(model, binned);
   std::vector<std::size_t> all(dataset.n_rows());
   for(std::size_t r = 0; r < all.size(); ++r) {
      all[r] = r;
   }
   result.train_loss = detail::mean_loss(model.link, dataset.target, dataset.weights, scores, all);
   double validation = 0.0;
   for(const BagReport & bag : result.main_bags) {
      validation += bag.validation_loss.empty() ? bag.train_loss[bag.best_epoch] : bag.validation_loss[bag.best_epoch];
   }
   result.validation_loss = validation / static_cast<double>(result.main_bags.size());
   return result;
}

TrainResult train(const Dataset & dataset, const TrainConfig & config, std::size_t threads) {
   TrainResult result = train_main_effects(dataset, config, threads);
   if(config.n_interactions == 0 || dataset.n_features() < 2) {
      if(config.n_interactions > 0) {
         result.warnings.push_back("fewer than two features; no interaction terms trained");
      }
      return result;
   }

   const BinnedMatrix binned = bin_dataset(dataset, result.model.preprocessor);
   const std::vector<double> scores = predict_scores(result.model, binned);
   const std::vector<double> residuals = compute_pseudo_residuals(dataset.target, scores, result.model.link);
   result.ranked_pairs = rank_pairs(binned, residuals, dataset.weights, threads);

   PairStageResult pairs = train_pair_terms(result.model, dataset, result.ranked_pairs, config, threads);
   result.model = std::move(pairs.model);
   result.pair_bags = std::move(pairs.bags);
   result.warnings.insert(result.warnings.end(), pairs.warnings.begin(), pairs.warnings.end());

   const std::vector<double> finalScores = predict_scores(result.model, binned);
   std::vector<std::size_t> all(dataset.n_rows());
   for(std::size_t r = 0; r < all.size(); ++r) {
      all[r] = r;
   }
   result.train_loss = detail::mean_loss(result.model.link, dataset.target, dataset.weights, finalScores, all);
   if(!result.pair_bags.empty()) {
      double validation = 0.0;
      for(const BagReport & bag : result.pair_bags) {
         validation += bag.validation_loss.empty() ? bag.train_loss[bag.best_epoch] : bag.validation_loss[bag.best_epoch];
      }
      result.validation_loss = validation / static_cast<double>(result.pair_bags.size());
   }
   return result;
}

} // namespace ebm
