#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ebm/dataset.hpp"

namespace ebm {

using BinIndex = std::uint32_t;

/// Bin 0 holds missing values and, for categorical features, categories not seen in training.
inline constexpr BinIndex kMissingBin = 0;

/// Discretization of one feature. Numeric data bins are left-closed: a value x lands in
/// bin 1 + |{c in cuts : x > c}|. Categorical bins are numbered 1.. in lexicographic
/// order of the category labels.
struct BinDefinition {
   ColumnKind kind = ColumnKind::numeric;
   std::vector<double> cuts;
   std::map<std::string, BinIndex, std::less<>> categories;
   std::size_t n_bins = 2;
   // Observed training range of a numeric feature; NaN when there were no values.
   double min_value = 0.0;
   double max_value = 0.0;

   /// Category label for every bin index; bin 0 is empty.
   std::vector<std::string> category_labels() const;

   /// Throws FormatError if cuts/categories/n_bins disagree.
   void validate() const;
};

/// Equal-frequency binning with at most `max_bins` data bins (missing bin not counted).
/// Cuts are midpoints between adjacent distinct values, placed at the distinct-value
/// boundary nearest each quantile position floor(k * n / max_bins).
BinDefinition fit_quantile_bins(std::span<const double> values, std::span<const std::uint8_t> missing,
   std::size_t max_bins);

BinDefinition fit_category_bins(std::span<const std::string> labels, std::span<const std::uint8_t> missing);

BinIndex bin_number(double x, const BinDefinition & bins) noexcept;
BinIndex bin_value(const Cell & cell, const BinDefinition & bins);

/// Column-major matrix of bin indices.
struct BinnedMatrix {
   std::size_t n_rows = 0;
   std::size_t n_features = 0;
   std::vector<BinIndex> data;
   // Per-feature, per-bin weight of the binned rows.
   std::vector<std::vector<double>> counts;

   std::span<const BinIndex> column(std::size_t feature) const {
      return {data.data() + feature * n_rows, n_rows};
   }
   BinIndex at(std::size_t row, std::size_t feature) const { return data[feature * n_rows + row]; }

   /// Bin indices of one row, indexed by feature.
   void gather_row(std::size_t row, std::vector<BinIndex> & out) const;
};

struct Preprocessor {
   std::vector<std::string> feature_names;
   std::vector<BinDefinition> bins;
   std::vector<std::vector<double>> bin_weights;

   std::size_t n_features() const noexcept { return bins.size(); }

   static Preprocessor fit(const Dataset & dataset, std::size_t max_bins);

   std::vector<BinIndex> bin_row(std::span<const Cell> row) const;
};

/// Maps each bin of every feature of `dataset` through `preprocessor`.
BinnedMatrix bin_dataset(const Dataset & dataset, const Preprocessor & preprocessor);

/// Fine-to-coarse bin map used by pairwise terms. Bin 0 stays alone; data bins are merged
/// by repeatedly joining the adjacent pair with the smallest combined weight until at
/// most max_units - 1 data units remain.
std::vector<BinIndex> coarsen_bins(std::span<const double> weights, std::size_t max_units);

} // namespace ebm
