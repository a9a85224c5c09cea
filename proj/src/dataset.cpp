#include "ebm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <fmt/format.h>

#include "ebm/csv.hpp"
#include "ebm/error.hpp"

namespace ebm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) noexcept {
   while(!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
      s.remove_prefix(1);
   }
   while(!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
      s.remove_suffix(1);
   }
   return s;
}

} // namespace

const char * to_string(ColumnKind kind) noexcept {
   return kind == ColumnKind::numeric ? "numeric" : "categorical";
}

const char * to_string(Task task) noexcept {
   return task == Task::classification ? "classification" : "regression";
}

ColumnKind parse_column_kind(std::string_view text) {
   if(text == "numeric") {
      return ColumnKind::numeric;
   }
   if(text == "categorical") {
      return ColumnKind::categorical;
   }
   throw DataError(fmt::format("unknown column kind '{}'", text));
}

Task parse_task(std::string_view text) {
   if(text == "classification") {
      return Task::classification;
   }
   if(text == "regression") {
      return Task::regression;
   }
   throw DataError(fmt::format("unknown task '{}'", text));
}

const MissingTokens & default_missing_tokens() {
   static const MissingTokens tokens{"", "NA", "N/A", "?", "nan"};
   return tokens;
}

std::optional<double> parse_number(std::string_view text) noexcept {
   text = trim(text);
   if(!text.empty() && text.front() == '+') {
      text.remove_prefix(1);
   }
   if(text.empty()) {
      return std::nullopt;
   }
   double value = 0.0;
   const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
   if(ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value)) {
      return std::nullopt;
   }
   return value;
}

Cell Cell::parse(std::string_view raw, const MissingTokens & missingTokens) {
   Cell cell;
   cell.text = std::string(raw);
   cell.missing = missingTokens.contains(raw);
   cell.number = kNaN;
   if(!cell.missing) {
      if(const auto value = parse_number(raw)) {
         cell.number = *value;
      }
   }
   return cell;
}

Cell Cell::of(double value) {
   Cell cell;
   cell.missing = std::isnan(value);
   cell.number = std::isfinite(value) ? value : kNaN;
   cell.text = cell.missing ? std::string() : fmt::format("{}", value);
   return cell;
}

Cell Cell::of(std::string_view label) {
   return Cell::parse(label, MissingTokens{});
}

Cell Cell::none() {
   Cell cell;
   cell.number = kNaN;
   return cell;
}

ColumnKind infer_column_kind(std::span<const std::string> cells, const MissingTokens & missingTokens) {
   bool sawValue = false;
   for(const std::string & cell : cells) {
      if(missingTokens.contains(cell)) {
         continue;
      }
      if(!parse_number(cell)) {
         return ColumnKind::categorical;
      }
      sawValue = true;
   }
   return sawValue ? ColumnKind::numeric : ColumnKind::categorical;
}

Cell Column::cell(std::size_t row) const {
   Cell c;
   c.text = text[row];
   c.number = number[row];
   c.missing = missing[row] != 0;
   return c;
}

Column Column::from_cells(std::vector<std::string> raw, ColumnKind kind, const MissingTokens & missingTokens) {
   Column column;
   column.kind = kind;
   column.number.resize(raw.size(), kNaN);
   column.missing.resize(raw.size(), 0);
   for(std::size_t r = 0; r < raw.size(); ++r) {
      if(missingTokens.contains(raw[r])) {
         column.missing[r] = 1;
         continue;
      }
      if(const auto value = parse_number(raw[r])) {
         column.number[r] = *value;
      } else if(kind == ColumnKind::numeric) {
         // Non-numeric text in a column forced numeric (prediction schema) is unusable.
         column.missing[r] = 1;
      }
   }
   column.text = std::move(raw);
   return column;
}

std::vector<Cell> Dataset::row(std::size_t r) const {
   std::vector<Cell> cells;
   cells.reserve(columns.size());
   for(const Column & column : columns) {
      cells.push_back(column.cell(r));
   }
   return cells;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
   Dataset out;
   out.feature_names = feature_names;
   out.task = task;
   out.target_name = target_name;
   out.class_labels = class_labels;
   out.columns.resize(columns.size());
   for(std::size_t j = 0; j < columns.size(); ++j) {
      const Column & src = columns[j];
      Column & dst = out.columns[j];
      dst.kind = src.kind;
      dst.text.reserve(rows.size());
      dst.number.reserve(rows.size());
      dst.missing.reserve(rows.size());
      for(const std::size_t r : rows) {
         dst.text.push_back(src.text[r]);
         dst.number.push_back(src.number[r]);
         dst.missing.push_back(src.missing[r]);
      }
   }
   out.target.reserve(rows.size());
   out.weights.reserve(rows.size());
   for(const std::size_t r : rows) {
      out.target.push_back(target[r]);
      out.weights.push_back(weights[r]);
   }
   return out;
}

void Dataset::validate() const {
   const std::size_t n = n_rows();
   if(weights.size() != n) {
      throw DataError("weights length does not match row count");
   }
   if(feature_names.size() != columns.size()) {
      throw DataError("feature name count does not match column count");
   }
   std::unordered_set<std::string> seen;
   for(const std::string & name : feature_names) {
      if(name.empty()) {
         throw DataError("empty feature name");
      }
      if(!seen.insert(name).second) {
         throw DataError(fmt::format("duplicate feature name '{}'", name));
      }
   }
   for(std::size_t j = 0; j < columns.size(); ++j) {
      const Column & c = columns[j];
      if(c.text.size() != n || c.number.size() != n || c.missing.size() != n) {
         throw DataError(fmt::format("column '{}' has wrong length", feature_names[j]));
      }
   }
   if(task == Task::classification) {
      for(const double y : target) {
         if(y != 0.0 && y != 1.0) {
            throw DataError("classification target must be encoded 0/1");
         }
      }
   } else {
      for(const double y : target) {
         if(!std::isfinite(y)) {
            throw DataError("regression target must be finite");
         }
      }
   }
}

Dataset parse_csv(std::istream & in, const LoadOptions & options) {
   CsvReader reader(in);
   std::vector<std::string> header;
   if(!reader.next(header)) {
      throw DataError("missing header row");
   }
   const auto targetIt = std::find(header.begin(), header.end(), options.target);
   if(targetIt == header.end()) {
      throw DataError(fmt::format("target '{}' not found in header", options.target));
   }
   const std::size_t targetCol = static_cast<std::size_t>(targetIt - header.begin());

   std::vector<std::vector<std::string>> raw(header.size());
   std::vector<std::string> fields;
   while(reader.next(fields)) {
      if(fields.size() != header.size()) {
         throw DataError(fmt::format("ragged row on line {}: {} fields, expected {}",
            reader.line(), fields.size(), header.size()));
      }
      for(std::size_t c = 0; c < fields.size(); ++c) {
         raw[c].push_back(std::move(fields[c]));
      }
   }

   Dataset ds;
   ds.task = options.task;
   ds.target_name = options.target;
   const std::vector<std::string> & targetCells = raw[targetCol];
   const std::size_t n = targetCells.size();

   if(options.task == Task::classification) {
      std::set<std::string> labels;
      for(std::size_t r = 0; r < n; ++r) {
         if(options.missing_tokens.contains(targetCells[r])) {
            throw DataError(fmt::format("missing target value in data row {}", r + 1));
         }
         labels.insert(targetCells[r]);
      }
      if(labels.size() < 2) {
         throw DataError("degenerate target: classification needs two distinct labels");
      }
      if(labels.size() > 2) {
         throw DataError(fmt::format("classification target has {} distinct labels, expected 2", labels.size()));
      }
      std::string negative = *labels.begin();
      std::string positive = *labels.rbegin();
      if(options.positive_label) {
         if(!labels.contains(*options.positive_label)) {
            throw DataError(fmt::format("positive label '{}' does not occur in target", *options.positive_label));
         }
         if(*options.positive_label != positive) {
            std::swap(negative, positive);
         }
      }
      ds.class_labels = {negative, positive};
      ds.target.reserve(n);
      for(const std::string & label : targetCells) {
         ds.target.push_back(label == positive ? 1.0 : 0.0);
      }
   } else {
      ds.target.reserve(n);
      for(std::size_t r = 0; r < n; ++r) {
         const auto value = parse_number(targetCells[r]);
         if(!value) {
            throw DataError(fmt::format("regression target '{}' in data row {} is not numeric", targetCells[r], r + 1));
         }
         ds.target.push_back(*value);
      }
   }
   ds.weights.assign(n, 1.0);

   for(std::size_t c = 0; c < header.size(); ++c) {
      if(c == targetCol) {
         continue;
      }
      const ColumnKind kind = infer_column_kind(raw[c], options.missing_tokens);
      ds.feature_names.push_back(header[c]);
      ds.columns.push_back(Column::from_cells(std::move(raw[c]), kind, options.missing_tokens));
   }
   ds.validate();
   return ds;
}

Dataset load_csv(const std::string & path, const LoadOptions & options) {
   std::ifstream in(path, std::ios::binary);
   if(!in) {
      throw DataError(fmt::format("cannot open data file '{}'", path));
   }
   return parse_csv(in, options);
}

void write_csv(const Dataset & dataset, std::ostream & out) {
   std::vector<std::string> fields = dataset.feature_names;
   fields.push_back(dataset.target_name);
   out << csv_join(fields) << '\n';
   for(std::size_t r = 0; r < dataset.n_rows(); ++r) {
      for(std::size_t j = 0; j < dataset.n_features(); ++j) {
         fields[j] = dataset.columns[j].text[r];
      }
      if(dataset.task == Task::classification) {
         fields.back() = dataset.class_labels[dataset.target[r] != 0.0 ? 1 : 0];
      } else {
         fields.back() = fmt::format("{}", dataset.target[r]);
      }
      out << csv_join(fields) << '\n';
   }
}

void write_csv(const Dataset & dataset, const std::string & path) {
   std::ofstream out(path, std::ios::binary);
   if(!out) {
      throw DataError(fmt::format("cannot write '{}'", path));
   }
   write_csv(dataset, out);
}

} // namespace ebm
