#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ebm {

enum class ColumnKind : std::uint8_t { numeric, categorical };
enum class Task : std::uint8_t { classification, regression };

const char * to_string(ColumnKind kind) noexcept;
const char * to_string(Task task) noexcept;
ColumnKind parse_column_kind(std::string_view text);
Task parse_task(std::string_view text);

using MissingTokens = std::set<std::string, std::less<>>;

/// {"", "NA", "N/A", "?", "nan"}
const MissingTokens & default_missing_tokens();

/// Parses a finite real occupying the whole cell (surrounding blanks allowed).
std::optional<double> parse_number(std::string_view text) noexcept;

/// One raw feature value as it appears in a data row.
struct Cell {
   std::string text;
   double number = 0.0; // NaN unless the text parses as a finite real
   bool missing = true;

   static Cell parse(std::string_view raw, const MissingTokens & missingTokens = default_missing_tokens());
   static Cell of(double value);
   static Cell of(std::string_view label);
   static Cell none();
};

ColumnKind infer_column_kind(std::span<const std::string> cells,
   const MissingTokens & missingTokens = default_missing_tokens());

struct Column {
   ColumnKind kind = ColumnKind::numeric;
   std::vector<std::string> text;
   std::vector<double> number;
   std::vector<std::uint8_t> missing;

   std::size_t size() const noexcept { return text.size(); }
   Cell cell(std::size_t row) const;

   static Column from_cells(std::vector<std::string> raw, ColumnKind kind, const MissingTokens & missingTokens);
};

/// Column-typed table with a designated target. Classification targets are encoded 0/1,
/// class_labels holds {negative, positive} raw labels.
struct Dataset {
   std::vector<std::string> feature_names;
   std::vector<Column> columns;
   std::vector<double> target;
   std::vector<double> weights;
   Task task = Task::classification;
   std::string target_name;
   std::array<std::string, 2> class_labels;

   std::size_t n_rows() const noexcept { return target.size(); }
   std::size_t n_features() const noexcept { return columns.size(); }

   std::vector<Cell> row(std::size_t r) const;
   Dataset subset(std::span<const std::size_t> rows) const;

   /// Throws DataError if the structural invariants do not hold.
   void validate() const;
};

struct LoadOptions {
   std::string target;
   Task task = Task::classification;
   MissingTokens missing_tokens = default_missing_tokens();
   std::optional<std::string> positive_label;
};

Dataset load_csv(const std::string & path, const LoadOptions & options);
Dataset parse_csv(std::istream & in, const LoadOptions & options);

/// Writes features followed by the target column, using the stored cell text.
void write_csv(const Dataset & dataset, const std::string & path);
void write_csv(const Dataset & dataset, std::ostream & out);

} // namespace ebm
