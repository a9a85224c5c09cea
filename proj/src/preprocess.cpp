#include "ebm/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "ebm/error.hpp"

namespace ebm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A cut strictly below b and not below a, so that a goes left and b goes right.
double midpoint(double a, double b) noexcept {
   const double mid = a + (b - a) / 2.0;
   return mid < b ? mid : a;
}

} // namespace

std::vector<std::string> BinDefinition::category_labels() const {
   std::vector<std::string> labels(n_bins);
   for(const auto & [label, index] : categories) {
      labels[index] = label;
   }
   return labels;
}

void BinDefinition::validate() const {
   if(kind == ColumnKind::numeric) {
      for(std::size_t i = 0; i < cuts.size(); ++i) {
         if(!std::isfinite(cuts[i])) {
            throw FormatError("non-finite cut point");
         }
         if(i > 0 && !(cuts[i - 1] < cuts[i])) {
            throw FormatError("cut points are not strictly ascending");
         }
      }
      if(n_bins != cuts.size() + 2) {
         throw FormatError(fmt::format("numeric feature with {} cuts must have {} bins, has {}",
            cuts.size(), cuts.size() + 2, n_bins));
      }
   } else {
      if(n_bins != categories.size() + 1) {
         throw FormatError(fmt::format("categorical feature with {} categories must have {} bins, has {}",
            categories.size(), categories.size() + 1, n_bins));
      }
      std::vector<bool> used(n_bins, false);
      for(const auto & [label, index] : categories) {
         if(index == kMissingBin || index >= n_bins || used[index]) {
            throw FormatError(fmt::format("category '{}' has invalid bin index {}", label, index));
         }
         used[index] = true;
      }
   }
}

BinDefinition fit_quantile_bins(std::span<const double> values, std::span<const std::uint8_t> missing,
   std::size_t max_bins) {
   BinDefinition def;
   def.kind = ColumnKind::numeric;

   std::vector<double> sorted;
   sorted.reserve(values.size());
   for(std::size_t i = 0; i < values.size(); ++i) {
      const bool isMissing = i < missing.size() && missing[i] != 0;
      if(!isMissing && std::isfinite(values[i])) {
         sorted.push_back(values[i]);
      }
   }
   std::sort(sorted.begin(), sorted.end());

   if(sorted.empty()) {
      def.min_value = kNaN;
      def.max_value = kNaN;
      def.n_bins = 2;
      return def;
   }
   def.min_value = sorted.front();
   def.max_value = sorted.back();

   // distinct[i] with boundary[i] = number of values <= distinct[i].
   std::vector<double> distinct;
   std::vector<std::size_t> boundary;
   for(std::size_t i = 0; i < sorted.size(); ++i) {
      if(i + 1 == sorted.size() || sorted[i] != sorted[i + 1]) {
         distinct.push_back(sorted[i]);
         boundary.push_back(i + 1);
      }
   }
   // The boundary after the last distinct value is not a cut.
   boundary.pop_back();

   const std::size_t bins = std::max<std::size_t>(max_bins, 1);
   if(distinct.size() <= bins) {
      for(std::size_t i = 0; i + 1 < distinct.size(); ++i) {
         def.cuts.push_back(midpoint(distinct[i], distinct[i + 1]));
      }
   } else {
      const std::size_t n = sorted.size();
      std::size_t previous = std::numeric_limits<std::size_t>::max();
      for(std::size_t k = 1; k < bins; ++k) {
         const std::size_t target = k * n / bins;
         // nearest boundary, lower one on ties
         auto it = std::lower_bound(boundary.begin(), boundary.end(), target);
         std::size_t pick;
         if(it == boundary.end()) {
            pick = boundary.size() - 1;
         } else if(it == boundary.begin()) {
            pick = 0;
         } else {
            const std::size_t hi = static_cast<std::size_t>(it - boundary.begin());
            const std::size_t lo = hi - 1;
            pick = (target - boundary[lo] <= boundary[hi] - target) ? lo : hi;
         }
         if(pick != previous) {
            def.cuts.push_back(midpoint(distinct[pick], distinct[pick + 1]));
            previous = pick;
         }
      }
      std::sort(def.cuts.begin(), def.cuts.end());
      def.cuts.erase(std::unique(def.cuts.begin(), def.cuts.end()), def.cuts.end());
   }
   def.n_bins = def.cuts.size() + 2;
   return def;
}

BinDefinition fit_category_bins(std::span<const std::string> labels, std::span<const std::uint8_t> missing) {
   BinDefinition def;
   def.kind = ColumnKind::categorical;
   def.min_value = kNaN;
   def.max_value = kNaN;
   for(std::size_t i = 0; i < labels.size(); ++i) {
      if(i < missing.size() && missing[i] != 0) {
         continue;
      }
      def.categories.emplace(labels[i], 0);
   }
   BinIndex next = 1;
   for(auto & entry : def.categories) {
      entry.second = next++;
   }
   def.n_bins = def.categories.size() + 1;
   return def;
}

BinIndex bin_number(double x, const BinDefinition & bins) noexcept {
   if(!std::isfinite(x)) {
      return kMissingBin;
   }
   const auto below = std::lower_bound(bins.cuts.begin(), bins.cuts.end(), x);
   return static_cast<BinIndex>(1 + (below - bins.cuts.begin()));
}

BinIndex bin_value(const Cell & cell, const BinDefinition & bins) {
   if(cell.missing) {
      return kMissingBin;
   }
   if(bins.kind == ColumnKind::numeric) {
      return bin_number(cell.number, bins);
   }
   const auto it = bins.categories.find(cell.text);
   return it == bins.categories.end() ? kMissingBin : it->second;
}

void BinnedMatrix::gather_row(std::size_t row, std::vector<BinIndex> & out) const {
   out.resize(n_features);
   for(std::size_t j = 0; j < n_features; ++j) {
      out[j] = data[j * n_rows + row];
   }
}

Preprocessor Preprocessor::fit(const Dataset & dataset, std::size_t max_bins) {
   Preprocessor pre;
   pre.feature_names = dataset.feature_names;
   pre.bins.reserve(dataset.n_features());
   for(const Column & column : dataset.columns) {
      if(column.kind == ColumnKind::numeric) {
         pre.bins.push_back(fit_quantile_bins(column.number, column.missing, max_bins));
      } else {
         pre.bins.push_back(fit_category_bins(column.text, column.missing));
      }
   }
   pre.bin_weights = bin_dataset(dataset, pre).counts;
   return pre;
}

std::vector<BinIndex> Preprocessor::bin_row(std::span<const Cell> row) const {
   if(row.size() != bins.size()) {
      throw DataError(fmt::format("row has {} cells, model expects {}", row.size(), bins.size()));
   }
   std::vector<BinIndex> out(row.size());
   for(std::size_t j = 0; j < row.size(); ++j) {
      out[j] = bin_value(row[j], bins[j]);
   }
   return out;
}

BinnedMatrix bin_dataset(const Dataset & dataset, const Preprocessor & preprocessor) {
   if(dataset.n_features() != preprocessor.n_features()) {
      throw DataError(fmt::format("dataset has {} features, preprocessor expects {}",
         dataset.n_features(), preprocessor.n_features()));
   }
   BinnedMatrix out;
   out.n_rows = dataset.n_rows();
   out.n_features = dataset.n_features();
   out.data.resize(out.n_rows * out.n_features);
   out.counts.resize(out.n_features);
   for(std::size_t j = 0; j < out.n_features; ++j) {
      const Column & column = dataset.columns[j];
      const BinDefinition & def = preprocessor.bins[j];
      std::vector<double> & counts = out.counts[j];
      counts.assign(def.n_bins, 0.0);
      BinIndex * dst = out.data.data() + j * out.n_rows;
      for(std::size_t r = 0; r < out.n_rows; ++r) {
         BinIndex bin;
         if(column.missing[r] != 0) {
            bin = kMissingBin;
         } else if(def.kind == ColumnKind::numeric) {
            bin = bin_number(column.number[r], def);
         } else {
            const auto it = def.categories.find(column.text[r]);
            bin = it == def.categories.end() ? kMissingBin : it->second;
         }
         dst[r] = bin;
         counts[bin] += dataset.weights[r];
      }
   }
   return out;
}

std::vector<BinIndex> coarsen_bins(std::span<const double> weights, std::size_t max_units) {
   const std::size_t n = weights.size();
   std::vector<BinIndex> map(n);
   for(std::size_t b = 0; b < n; ++b) {
      map[b] = static_cast<BinIndex>(b);
   }
   const std::size_t maxData = max_units > 1 ? max_units - 1 : 1;
   if(n <= 1 || n - 1 <= maxData) {
      return map;
   }

   struct Group {
      std::size_t first;
      std::size_t last;
      double weight;
   };
   std::vector<Group> groups;
   for(std::size_t b = 1; b < n; ++b) {
      groups.push_back({b, b, weights[b]});
   }
   while(groups.size() > maxData) {
      std::size_t best = 0;
      double bestWeight = std::numeric_limits<double>::infinity();
      for(std::size_t g = 0; g + 1 < groups.size(); ++g) {
         const double w = groups[g].weight + groups[g + 1].weight;
         if(w < bestWeight) {
            bestWeight = w;
            best = g;
         }
      }
      groups[best].last = groups[best + 1].last;
      groups[best].weight = bestWeight;
      groups.erase(groups.begin() + static_cast<std::ptrdiff_t>(best) + 1);
   }
   for(std::size_t g = 0; g < groups.size(); ++g) {
      for(std::size_t b = groups[g].first; b <= groups[g].last; ++b) {
         map[b] = static_cast<BinIndex>(g + 1);
      }
   }
   return map;
}

} // namespace ebm
