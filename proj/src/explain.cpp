#include "ebm/explain.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "ebm/csv.hpp"
#include "ebm/error.hpp"

namespace ebm {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 24.0;
constexpr double kTop = 48.0;
constexpr double kBottom = 120.0;
// Numeric plots reserve this strip under the axis for the weight histogram.
constexpr double kStrip = 40.0;
// Width of the separate panel holding the missing bin, left of the main plot.
constexpr double kMissingPanel = 44.0;

std::string xml_escape(std::string_view text) {
   std::string out;
   out.reserve(text.size());
   for(const char c : text) {
      switch(c) {
      case '&':
         out += "&amp;";
         break;
      case '<':
         out += "&lt;";
         break;
      case '>':
         out += "&gt;";
         break;
      case '"':
         out += "&quot;";
         break;
      default:
         out += c;
      }
   }
   return out;
}

std::string join(const std::vector<std::string> & parts, std::string_view sep) {
   std::string out;
   for(std::size_t i = 0; i < parts.size(); ++i) {
      if(i != 0) {
         out += sep;
      }
      out += parts[i];
   }
   return out;
}

const char * score_label(Link link) {
   return link == Link::logit ? "score (log-odds)" : "score";
}

struct Range {
   double lo = 0.0;
   double hi = 1.0;
};

/// Value range including 0, padded by 5%; a flat range becomes [v - 1, v + 1].
Range score_range(std::span<const double> values) {
   double lo = 0.0;
   double hi = 0.0;
   for(const double v : values) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
   }
   if(hi - lo <= 0.0) {
      return {lo - 1.0, hi + 1.0};
   }
   const double pad = 0.05 * (hi - lo);
   return {lo - pad, hi + pad};
}

class Svg {
public:
   Svg(double width, double height) {
      m_body += fmt::format(
         "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" "
         "viewBox=\"0 0 {0:.0f} {1:.0f}\" font-family=\"sans-serif\" font-size=\"12\">\n",
         width, height);
      m_body += fmt::format("<rect class=\"background\" x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n",
         width, height);
   }

   void raw(std::string_view text) {
      m_body += text;
      m_body += '\n';
   }

   void line(double x1, double y1, double x2, double y2, std::string_view attrs) {
      m_body += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" {}/>\n", x1, y1, x2, y2, attrs);
   }

   void rect(double x, double y, double w, double h, std::string_view attrs) {
      m_body += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" {}/>\n", x, y,
         std::max(w, 0.0), std::max(h, 0.0), attrs);
   }

   void text(double x, double y, std::string_view content, std::string_view attrs = {}) {
      m_body += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\"{}{}>{}</text>\n", x, y, attrs.empty() ? "" : " ", attrs,
         xml_escape(content));
   }

   std::string finish() {
      m_body += "</svg>\n";
      return std::move(m_body);
   }

private:
   std::string m_body;
};

/// Maps score values to pixel rows of the plot area [top, bottom].
struct YScale {
   Range range;
   double top = kTop;
   double bottom = kHeight - kBottom;

   double operator()(double v) const { return bottom - (v - range.lo) / (range.hi - range.lo) * (bottom - top); }
};

void draw_y_axis(Svg & svg, const YScale & y, double left, double right, Link link) {
   svg.line(left, y.top, left, y.bottom, "class=\"axis\" stroke=\"black\"");
   for(int i = 0; i <= 4; ++i) {
      const double v = y.range.lo + (y.range.hi - y.range.lo) * i / 4.0;
      svg.line(left - 4, y(v), left, y(v), "stroke=\"black\"");
      svg.text(left - 6, y(v) + 4, fmt::format("{:.3g}", v), "text-anchor=\"end\"");
   }
   if(y.range.lo < 0.0 && y.range.hi > 0.0) {
      svg.line(left, y(0.0), right, y(0.0), "class=\"zero\" stroke=\"#999\" stroke-dasharray=\"4 3\"");
   }
   svg.text(16, (y.top + y.bottom) / 2, score_label(link),
      fmt::format("text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\"", (y.top + y.bottom) / 2));
}

std::string header_attrs(const TermExplanation & term, std::string_view kind, const Range & range) {
   return fmt::format("<g class=\"term\" data-term=\"{}\" data-kind=\"{}\" data-y-min=\"{}\" data-y-max=\"{}\">",
      term.term_id, kind, range.lo, range.hi);
}

void draw_title(Svg & svg, const TermExplanation & term) {
   svg.text(kWidth / 2, 24,
      fmt::format("term {}: {} (importance {:.4g})", term.term_id, join(term.feature_names, " x "), term.importance),
      "text-anchor=\"middle\" font-size=\"15\"");
}

std::string render_numeric(const TermExplanation & term, Link link) {
   const AxisInfo & axis = term.axes[0];
   const std::size_t nBins = term.scores.size();
   const YScale y{score_range(term.scores)};
   double lo = axis.min_value;
   double hi = axis.max_value;
   if(!std::isfinite(lo) || !std::isfinite(hi)) {
      lo = 0.0;
      hi = 1.0;
   } else if(hi <= lo) {
      lo -= 0.5;
      hi += 0.5;
   }
   std::vector<double> edges{lo};
   for(const double c : axis.cuts) {
      edges.push_back(std::clamp(c, lo, hi));
   }
   edges.push_back(hi);

   const double plotLeft = kLeft + kMissingPanel;
   const double plotRight = kWidth - kRight;
   const auto x = [&](double v) { return plotLeft + (v - lo) / (hi - lo) * (plotRight - plotLeft); };

   Svg svg(kWidth, kHeight);
   draw_title(svg, term);
   svg.raw(header_attrs(term, "numeric", y.range));
   draw_y_axis(svg, y, kLeft, plotRight, link);

   // Missing bin drawn in its own panel.
   const double missingLeft = kLeft + 6;
   const double missingRight = kLeft + kMissingPanel - 10;
   svg.line(missingLeft, y(term.scores[0]), missingRight, y(term.scores[0]),
      fmt::format("class=\"step\" data-bin=\"0\" data-score=\"{}\" stroke=\"#888\" stroke-width=\"2\"", term.scores[0]));
   svg.text((missingLeft + missingRight) / 2, y.bottom + 16, "NA", "text-anchor=\"middle\"");

   for(std::size_t b = 1; b < nBins; ++b) {
      const double x1 = x(edges[b - 1]);
      const double x2 = x(edges[b]);
      if(b > 1) {
         svg.line(x1, y(term.scores[b - 1]), x1, y(term.scores[b]), "class=\"riser\" stroke=\"#1f77b4\"");
      }
      svg.line(x1, y(term.scores[b]), x2, y(term.scores[b]),
         fmt::format("class=\"step\" data-bin=\"{}\" data-score=\"{}\" stroke=\"#1f77b4\" stroke-width=\"2\"", b,
            term.scores[b]));
   }

   // x axis and weight strip
   svg.line(plotLeft, y.bottom, plotRight, y.bottom, "class=\"axis\" stroke=\"black\"");
   for(int i = 0; i <= 4; ++i) {
      const double v = lo + (hi - lo) * i / 4.0;
      svg.line(x(v), y.bottom, x(v), y.bottom + 4, "stroke=\"black\"");
      svg.text(x(v), y.bottom + 16, fmt::format("{:.4g}", v), "text-anchor=\"middle\"");
   }
   svg.text((plotLeft + plotRight) / 2, y.bottom + 32, axis.name, "text-anchor=\"middle\"");
   double maxWeight = 0.0;
   for(const double w : term.weights) {
      maxWeight = std::max(maxWeight, w);
   }
   const double stripBottom = kHeight - 16;
   for(std::size_t b = 1; b < nBins; ++b) {
      const double h = maxWeight > 0.0 ? term.weights[b] / maxWeight * kStrip : 0.0;
      svg.rect(x(edges[b - 1]), stripBottom - h, x(edges[b]) - x(edges[b - 1]), h,
         fmt::format("class=\"hist\" data-bin=\"{}\" data-weight=\"{}\" fill=\"#bbb\"", b, term.weights[b]));
   }
   svg.raw("</g>");
   return svg.finish();
}

std::string render_categorical(const TermExplanation & term, Link link) {
   const AxisInfo & axis = term.axes[0];
   const std::size_t nBins = term.scores.size();
   const YScale y{score_range(term.scores)};
   const double plotLeft = kLeft;
   const double plotRight = kWidth - kRight;
   const double slot = (plotRight - plotLeft) / static_cast<double>(nBins);

   Svg svg(kWidth, kHeight);
   draw_title(svg, term);
   svg.raw(header_attrs(term, "categorical", y.range));
   draw_y_axis(svg, y, plotLeft, plotRight, link);
   for(std::size_t b = 0; b < nBins; ++b) {
      const double s = term.scores[b];
      const double top = std::min(y(s), y(0.0));
      const double x0 = plotLeft + slot * static_cast<double>(b) + slot * 0.15;
      const std::string & label = b < axis.labels.size() ? axis.labels[b] : std::string();
      svg.rect(x0, top, slot * 0.7, std::abs(y(s) - y(0.0)),
         fmt::format("class=\"bar\" data-bin=\"{}\" data-label=\"{}\" data-score=\"{}\" fill=\"{}\"", b,
            xml_escape(label), s, b == 0 ? "#888" : "#1f77b4"));
      const double cx = x0 + slot * 0.35;
      svg.text(cx, y.bottom + 14, label,
         fmt::format("text-anchor=\"end\" transform=\"rotate(-45 {:.2f} {:.2f})\"", cx, y.bottom + 14));
   }
   svg.line(plotLeft, y.bottom, plotRight, y.bottom, "class=\"axis\" stroke=\"black\"");
   svg.text((plotLeft + plotRight) / 2, kHeight - 12, axis.name, "text-anchor=\"middle\"");
   svg.raw("</g>");
   return svg.finish();
}

/// Diverging blue-white-red colour for v in [-1, 1].
std::string diverging(double v) {
   v = std::clamp(v, -1.0, 1.0);
   const auto mix = [](double from, double to, double t) { return static_cast<int>(std::lround(from + (to - from) * t)); };
   if(v >= 0.0) {
      return fmt::format("#{:02x}{:02x}{:02x}", mix(255, 214, v), mix(255, 39, v), mix(255, 40, v));
   }
   return fmt::format("#{:02x}{:02x}{:02x}", mix(255, 31, -v), mix(255, 119, -v), mix(255, 180, -v));
}

std::string render_heatmap(const TermExplanation & term) {
   const std::size_t rows = term.shape[0];
   const std::size_t cols = term.shape[1];
   double scale = 0.0;
   for(const double s : term.scores) {
      scale = std::max(scale, std::abs(s));
   }
   const Range range{-scale, scale};
   const double plotLeft = kLeft;
   const double plotRight = kWidth - kRight - 60;
   const double plotTop = kTop;
   const double plotBottom = kHeight - kBottom;
   const double cw = (plotRight - plotLeft) / static_cast<double>(cols);
   const double ch = (plotBottom - plotTop) / static_cast<double>(rows);

   Svg svg(kWidth, kHeight);
   draw_title(svg, term);
   svg.raw(header_attrs(term, "heatmap", range));
   for(std::size_t a = 0; a < rows; ++a) {
      for(std::size_t b = 0; b < cols; ++b) {
         const double s = term.scores[a * cols + b];
         // first feature runs bottom to top
         svg.rect(plotLeft + cw * static_cast<double>(b), plotBottom - ch * static_cast<double>(a + 1), cw, ch,
            fmt::format("class=\"cell\" data-row=\"{}\" data-col=\"{}\" data-score=\"{}\" fill=\"{}\"", a, b, s,
               diverging(scale > 0.0 ? s / scale : 0.0)));
      }
   }
   svg.rect(plotLeft, plotTop, plotRight - plotLeft, plotBottom - plotTop, "fill=\"none\" stroke=\"black\"");
   svg.text((plotLeft + plotRight) / 2, plotBottom + 30, fmt::format("{} (bin)", term.feature_names[1]),
      "text-anchor=\"middle\"");
   svg.text(16, (plotTop + plotBottom) / 2, fmt::format("{} (bin)", term.feature_names[0]),
      fmt::format("text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2f})\"", (plotTop + plotBottom) / 2));

   // colour legend
   const double legendX = plotRight + 20;
   for(int i = 0; i < 20; ++i) {
      const double t = 1.0 - 2.0 * i / 19.0;
      svg.rect(legendX, plotTop + (plotBottom - plotTop) * i / 20.0, 16, (plotBottom - plotTop) / 20.0,
         fmt::format("fill=\"{}\"", diverging(t)));
   }
   svg.text(legendX + 20, plotTop + 10, fmt::format("{:.3g}", scale));
   svg.text(legendX + 20, plotBottom, fmt::format("{:.3g}", -scale));
   svg.raw("</g>");
   return svg.finish();
}

} // namespace

const TermExplanation & GlobalExplanation::find(std::size_t termId) const {
   for(const TermExplanation & term : terms) {
      if(term.term_id == termId) {
         return term;
      }
   }
   throw NotFoundError(fmt::format("unknown term id {}", termId));
}

double term_importance(const Term & term) {
   double sw = 0.0;
   double swa = 0.0;
   for(std::size_t i = 0; i < term.scores.size(); ++i) {
      sw += term.weights[i];
      swa += term.weights[i] * std::abs(term.scores[i]);
   }
   return sw > 0.0 ? swa / sw : 0.0;
}

GlobalExplanation global_explanation(const AdditiveModel & model) {
   GlobalExplanation global;
   global.link = model.link;
   for(std::size_t t = 0; t < model.terms.size(); ++t) {
      const Term & term = model.terms[t];
      TermExplanation entry;
      entry.term_id = t;
      entry.importance = term_importance(term);
      entry.shape = term.shape;
      entry.scores = term.scores;
      entry.weights = term.weights;
      for(const std::size_t f : term.features) {
         const BinDefinition & bins = model.preprocessor.bins[f];
         AxisInfo axis;
         axis.name = model.preprocessor.feature_names[f];
         axis.kind = bins.kind;
         axis.cuts = bins.cuts;
         axis.min_value = bins.min_value;
         axis.max_value = bins.max_value;
         if(bins.kind == ColumnKind::categorical) {
            axis.labels = bins.category_labels();
         } else {
            axis.labels.resize(bins.n_bins);
         }
         if(!axis.labels.empty()) {
            axis.labels[0] = "missing";
         }
         entry.feature_names.push_back(axis.name);
         entry.axes.push_back(std::move(axis));
      }
      global.terms.push_back(std::move(entry));
   }
   std::stable_sort(global.terms.begin(), global.terms.end(),
      [](const TermExplanation & a, const TermExplanation & b) { return a.importance > b.importance; });
   return global;
}

LocalExplanation local_explanation(const AdditiveModel & model, std::span<const Cell> row) {
   const std::vector<BinIndex> binned = model.preprocessor.bin_row(row);
   LocalExplanation local;
   local.link = model.link;
   local.intercept = model.intercept;
   for(std::size_t t = 0; t < model.terms.size(); ++t) {
      const Term & term = model.terms[t];
      Contribution c;
      c.term_id = t;
      for(const std::size_t f : term.features) {
         c.feature_names.push_back(model.preprocessor.feature_names[f]);
         c.values.push_back(row[f].missing ? std::string("missing") : row[f].text);
      }
      c.contribution = DirectOps::lookup(term, term.flat_index(binned));
      local.contributions.push_back(std::move(c));
   }
   local.score = predict_score(model, std::span<const BinIndex>(binned));
   local.mean = inverse_link(model.link, local.score);
   std::stable_sort(local.contributions.begin(), local.contributions.end(),
      [](const Contribution & a, const Contribution & b) { return std::abs(a.contribution) > std::abs(b.contribution); });
   return local;
}

double sum_contributions(const LocalExplanation & local) {
   std::vector<const Contribution *> ordered;
   for(const Contribution & c : local.contributions) {
      ordered.push_back(&c);
   }
   std::sort(ordered.begin(), ordered.end(),
      [](const Contribution * a, const Contribution * b) { return a->term_id < b->term_id; });
   double score = local.intercept;
   for(const Contribution * c : ordered) {
      score = DirectOps::add(score, c->contribution);
   }
   return score;
}

void write_importance_csv(std::ostream & out, const GlobalExplanation & global) {
   out << "term,features,importance\n";
   for(const TermExplanation & term : global.terms) {
      out << fmt::format("{},{},{}\n", term.term_id, csv_escape(join(term.feature_names, " x ")), term.importance);
   }
}

std::string render_term_plot(const GlobalExplanation & global, std::size_t termId) {
   const TermExplanation & term = global.find(termId);
   if(term.axes.size() == 2) {
      return render_heatmap(term);
   }
   if(term.axes[0].kind == ColumnKind::categorical) {
      return render_categorical(term, global.link);
   }
   return render_numeric(term, global.link);
}

std::string render_local_plot(const LocalExplanation & local) {
   const std::size_t n = local.contributions.size();
   const double rowHeight = 22.0;
   const double height = kTop + rowHeight * static_cast<double>(std::max<std::size_t>(n, 1)) + 60.0;
   const double labelWidth = 240.0;
   const double plotLeft = labelWidth;
   const double plotRight = kWidth - kRight;

   double extent = 0.0;
   for(const Contribution & c : local.contributions) {
      extent = std::max(extent, std::abs(c.contribution));
   }
   if(extent == 0.0) {
      extent = 1.0;
   }
   const double mid = (plotLeft + plotRight) / 2;
   const auto x = [&](double v) { return mid + v / extent * (plotRight - plotLeft) / 2 * 0.95; };

   Svg svg(kWidth, height);
   svg.text(kWidth / 2, 24,
      fmt::format("score {:.4g} = intercept {:.4g} + {} contributions; mean {:.4g}", local.score, local.intercept, n,
         local.mean),
      "text-anchor=\"middle\" font-size=\"14\"");
   svg.raw(fmt::format("<g class=\"local\" data-intercept=\"{}\" data-score=\"{}\" data-mean=\"{}\">", local.intercept,
      local.score, local.mean));
   for(std::size_t i = 0; i < n; ++i) {
      const Contribution & c = local.contributions[i];
      const double top = kTop + rowHeight * static_cast<double>(i);
      const double x0 = std::min(x(0.0), x(c.contribution));
      svg.rect(x0, top + 3, std::abs(x(c.contribution) - x(0.0)), rowHeight - 6,
         fmt::format("class=\"contribution\" data-term=\"{}\" data-contribution=\"{}\" fill=\"{}\"", c.term_id,
            c.contribution, c.contribution >= 0.0 ? "#d62728" : "#1f77b4"));
      std::vector<std::string> parts;
      for(std::size_t k = 0; k < c.feature_names.size(); ++k) {
         parts.push_back(c.feature_names[k] + " = " + c.values[k]);
      }
      svg.text(plotLeft - 8, top + rowHeight - 7, join(parts, ", "), "text-anchor=\"end\"");
   }
   const double bottom = kTop + rowHeight * static_cast<double>(std::max<std::size_t>(n, 1));
   svg.line(x(0.0), kTop - 4, x(0.0), bottom + 4, "class=\"axis\" stroke=\"black\"");
   svg.text(mid, bottom + 28, fmt::format("contribution to {}", score_label(local.link)), "text-anchor=\"middle\"");
   svg.raw("</g>");
   return svg.finish();
}

} // namespace ebm
