#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ebm/dataset.hpp"
#include "ebm/model.hpp"

namespace ebm {

/// Binning of one term axis, copied from the preprocessor.
struct AxisInfo {
   std::string name;
   ColumnKind kind = ColumnKind::numeric;
   std::vector<double> cuts;
   // Label per bin index; bin 0 is "missing".
   std::vector<std::string> labels;
   double min_value = 0.0;
   double max_value = 0.0;
};

struct TermExplanation {
   std::size_t term_id = 0;
   std::vector<std::string> feature_names;
   double importance = 0.0;
   std::vector<AxisInfo> axes;
   std::vector<std::size_t> shape;
   std::vector<double> scores;
   std::vector<double> weights;
};

/// Terms sorted by importance descending; ties keep term order.
struct GlobalExplanation {
   Link link = Link::logit;
   std::vector<TermExplanation> terms;

   const TermExplanation & find(std::size_t termId) const;
};

/// Training-weighted mean absolute score: sum(w |s|) / sum(w). 0 when all weights are 0.
double term_importance(const Term & term);

GlobalExplanation global_explanation(const AdditiveModel & model);

struct Contribution {
   std::size_t term_id = 0;
   std::vector<std::string> feature_names;
   std::vector<std::string> values;
   double contribution = 0.0;
};

/// contributions are sorted by |contribution| descending, ties by term id. The sum of
/// intercept and contributions taken in term-id order equals score bit for bit.
struct LocalExplanation {
   Link link = Link::logit;
   double intercept = 0.0;
   std::vector<Contribution> contributions;
   double score = 0.0;
   double mean = 0.0;
};

/// Throws DataError when the row arity differs from the model's feature count.
LocalExplanation local_explanation(const AdditiveModel & model, std::span<const Cell> row);

/// intercept + contributions summed in term-id order, the order predict_score uses.
double sum_contributions(const LocalExplanation & local);

/// CSV: term,features,importance in importance order.
void write_importance_csv(std::ostream & out, const GlobalExplanation & global);

/// Standalone SVG for one term. Throws NotFoundError for an unknown id.
std::string render_term_plot(const GlobalExplanation & global, std::size_t termId);

/// Standalone SVG bar chart of the signed contributions in their sorted order.
std::string render_local_plot(const LocalExplanation & local);

} // namespace ebm
