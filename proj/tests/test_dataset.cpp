#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ebm/csv.hpp"
#include "ebm/dataset.hpp"
#include "ebm/error.hpp"
#include "fixtures.hpp"

using namespace ebm;

namespace {

std::vector<std::vector<std::string>> read_all(const std::string & text) {
   std::istringstream in(text);
   CsvReader reader(in);
   std::vector<std::vector<std::string>> rows;
   std::vector<std::string> fields;
   while(reader.next(fields)) {
      rows.push_back(fields);
   }
   return rows;
}

Dataset parse(const std::string & text, const std::string & target, Task task = Task::classification) {
   std::istringstream in(text);
   LoadOptions options;
   options.target = target;
   options.task = task;
   return parse_csv(in, options);
}

} // namespace

TEST(Csv, QuotedFieldsWithCommasQuotesAndNewlines) {
   const auto rows = read_all("a,b\n\"x,y\",\"say \"\"hi\"\"\"\n\"two\nlines\",3\n");
   ASSERT_EQ(rows.size(), 3u);
   EXPECT_EQ(rows[1][0], "x,y");
   EXPECT_EQ(rows[1][1], "say \"hi\"");
   EXPECT_EQ(rows[2][0], "two\nlines");
}

TEST(Csv, CrlfBomAndBlankLines) {
   const auto rows = read_all("\xEF\xBB\xBFh1,h2\r\n1,2\r\n\r\n3,4\r\n");
   ASSERT_EQ(rows.size(), 3u);
   EXPECT_EQ(rows[0][0], "h1");
   EXPECT_EQ(rows[2][1], "4");
}

TEST(Csv, EmptyTrailingFieldIsKept) {
   const auto rows = read_all("a,b,c\n1,,\n");
   ASSERT_EQ(rows[1].size(), 3u);
   EXPECT_EQ(rows[1][2], "");
}

TEST(Csv, UnterminatedQuoteThrows) {
   EXPECT_THROW(read_all("a\n\"open\n"), DataError);
}

TEST(Csv, EscapeRoundTrips) {
   const std::vector<std::string> fields{"plain", "with,comma", "q\"uote", " pad", "line\nbreak", ""};
   const auto rows = read_all(csv_join(fields) + "\n");
   ASSERT_EQ(rows.size(), 1u);
   EXPECT_EQ(rows[0], fields);
}

TEST(InferColumnKind, Examples) {
   const std::vector<std::string> numeric{"1.5", "2", "3e1"};
   const std::vector<std::string> mixed{"1.5", "x", "3"};
   const std::vector<std::string> empty{"", "", ""};
   EXPECT_EQ(infer_column_kind(numeric), ColumnKind::numeric);
   EXPECT_EQ(infer_column_kind(mixed), ColumnKind::categorical);
   EXPECT_EQ(infer_column_kind(empty), ColumnKind::categorical);
}

TEST(InferColumnKind, NonFiniteTextIsNotNumeric) {
   const std::vector<std::string> cells{"1", "inf"};
   EXPECT_EQ(infer_column_kind(cells), ColumnKind::categorical);
}

TEST(ParseNumber, WholeCellOnly) {
   EXPECT_EQ(parse_number(" 2.5 "), 2.5);
   EXPECT_EQ(parse_number("+3"), 3.0);
   EXPECT_FALSE(parse_number("3abc"));
   EXPECT_FALSE(parse_number(""));
   EXPECT_FALSE(parse_number("nan"));
}

TEST(LoadCsv, ThreeRowFixture) {
   const Dataset ds = parse("age,cap,label\n30,0,no\n45,1000,yes\n51,,no\n", "label");
   EXPECT_EQ(ds.n_features(), 2u);
   EXPECT_EQ(ds.n_rows(), 3u);
   EXPECT_EQ(ds.feature_names, (std::vector<std::string>{"age", "cap"}));
   EXPECT_EQ(ds.target, (std::vector<double>{0, 1, 0}));
   EXPECT_EQ(ds.class_labels[1], "yes");
   EXPECT_EQ(ds.columns[0].kind, ColumnKind::numeric);
   EXPECT_EQ(ds.columns[1].missing[2], 1);
}

TEST(LoadCsv, ExplicitPositiveLabel) {
   std::istringstream in("x,label\n1,no\n2,yes\n");
   LoadOptions options;
   options.target = "label";
   options.positive_label = "no";
   const Dataset ds = parse_csv(in, options);
   EXPECT_EQ(ds.target, (std::vector<double>{1, 0}));
   EXPECT_EQ(ds.class_labels[1], "no");
}

TEST(LoadCsv, DegenerateTarget) {
   try {
      parse("x,label\n1,a\n2,a\n", "label");
      FAIL() << "expected DataError";
   } catch(const DataError & e) {
      EXPECT_NE(std::string(e.what()).find("degenerate target"), std::string::npos);
   }
}

TEST(LoadCsv, MoreThanTwoClassesRejected) {
   EXPECT_THROW(parse("x,label\n1,a\n2,b\n3,c\n", "label"), DataError);
}

TEST(LoadCsv, QuestionMarkIsMissingInNumericColumn) {
   const Dataset ds = parse("v,label\n1,a\n2,b\n?,a\n", "label");
   EXPECT_EQ(ds.columns[0].kind, ColumnKind::numeric);
   EXPECT_EQ(ds.columns[0].missing, (std::vector<std::uint8_t>{0, 0, 1}));
}

TEST(LoadCsv, Errors) {
   EXPECT_THROW(parse("x,label\n1,a\n2,b\n", "nope"), DataError);
   EXPECT_THROW(parse("x,label\n1,a\n2\n", "label"), DataError);
   EXPECT_THROW(parse("x,y\n1,2\n2,abc\n", "y", Task::regression), DataError);
   EXPECT_THROW(parse("", "y"), DataError);
   EXPECT_THROW(parse("x,label\n1,\n2,b\n3,a\n", "label"), DataError);
   LoadOptions options;
   options.target = "y";
   EXPECT_THROW(load_csv("/nonexistent/file.csv", options), DataError);
}

TEST(LoadCsv, RaggedRowMessageHasLineNumber) {
   try {
      parse("x,label\n1,a\n2,b\n3\n", "label");
      FAIL();
   } catch(const DataError & e) {
      EXPECT_NE(std::string(e.what()).find("4"), std::string::npos) << e.what();
   }
}

TEST(LoadCsv, RegressionTarget) {
   const Dataset ds = parse("x,y\na,1.5\nb,-2\n", "y", Task::regression);
   EXPECT_EQ(ds.target, (std::vector<double>{1.5, -2}));
   EXPECT_EQ(ds.columns[0].kind, ColumnKind::categorical);
}

TEST(LoadCsv, AllMissingColumnIsCategorical) {
   const Dataset ds = parse("x,z,label\n,1,a\nNA,2,b\n", "label");
   EXPECT_EQ(ds.columns[0].kind, ColumnKind::categorical);
   EXPECT_EQ(ds.columns[0].missing, (std::vector<std::uint8_t>{1, 1}));
}

TEST(Dataset, ValidateCatchesBrokenInvariants) {
   Dataset ds = test::make_dataset({{1, 2}}, {0, 1});
   EXPECT_NO_THROW(ds.validate());
   Dataset dup = ds;
   dup.feature_names.push_back("x0");
   dup.columns.push_back(dup.columns[0]);
   EXPECT_THROW(dup.validate(), DataError);
   Dataset shortColumn = ds;
   shortColumn.columns[0].text.pop_back();
   EXPECT_THROW(shortColumn.validate(), DataError);
   Dataset badTarget = ds;
   badTarget.target[0] = 2.0;
   EXPECT_THROW(badTarget.validate(), DataError);
}

TEST(Dataset, SubsetKeepsSchema) {
   const Dataset ds = parse("a,b,label\n1,x,n\n2,y,p\n3,z,n\n", "label");
   const std::vector<std::size_t> rows{2, 0};
   const Dataset sub = ds.subset(rows);
   EXPECT_EQ(sub.n_rows(), 2u);
   EXPECT_EQ(sub.columns[1].text, (std::vector<std::string>{"z", "x"}));
   EXPECT_EQ(sub.feature_names, ds.feature_names);
}

namespace {

void expect_same_data(const Dataset & a, const Dataset & b) {
   ASSERT_EQ(a.feature_names, b.feature_names);
   ASSERT_EQ(a.n_rows(), b.n_rows());
   EXPECT_EQ(a.target, b.target);
   EXPECT_EQ(a.class_labels, b.class_labels);
   for(std::size_t j = 0; j < a.n_features(); ++j) {
      EXPECT_EQ(a.columns[j].kind, b.columns[j].kind) << a.feature_names[j];
      EXPECT_EQ(a.columns[j].missing, b.columns[j].missing) << a.feature_names[j];
      for(std::size_t r = 0; r < a.n_rows(); ++r) {
         if(a.columns[j].missing[r] != 0) {
            continue;
         }
         if(a.columns[j].kind == ColumnKind::numeric) {
            EXPECT_EQ(a.columns[j].number[r], b.columns[j].number[r]);
         } else {
            EXPECT_EQ(a.columns[j].text[r], b.columns[j].text[r]);
         }
      }
   }
}

} // namespace

TEST(Dataset, WriteThenReloadIsIdentity) {
   for(const auto & [file, target] : std::vector<std::pair<std::string, std::string>>{
          {"heart_disease.csv", "disease"}, {"breast_cancer.csv", "diagnosis"}}) {
      LoadOptions options;
      options.target = target;
      const Dataset original = load_csv(test::data_path(file), options);
      std::stringstream buffer;
      write_csv(original, buffer);
      const Dataset again = parse_csv(buffer, options);
      expect_same_data(original, again);
   }
}

TEST(Dataset, WriteThenReloadWithQuotingAndMissing) {
   const Dataset ds = parse("name,v,label\n\"a, b\",1,x\n\" lead\",?,y\nplain,3,x\n", "label");
   std::stringstream buffer;
   write_csv(ds, buffer);
   LoadOptions options;
   options.target = "label";
   expect_same_data(ds, parse_csv(buffer, options));
}

TEST(Dataset, RowCountMatchesSourceFiles) {
   const std::vector<std::tuple<std::string, std::string, std::size_t, std::size_t>> files{
      {"heart_disease.csv", "disease", 303, 13},
      {"breast_cancer.csv", "diagnosis", 569, 30},
   };
   for(const auto & [file, target, rows, features] : files) {
      LoadOptions options;
      options.target = target;
      const Dataset ds = load_csv(test::data_path(file), options);
      EXPECT_EQ(ds.n_rows(), rows) << file;
      EXPECT_EQ(ds.n_features(), features) << file;
      std::ifstream in(test::data_path(file));
      CsvReader reader(in);
      std::vector<std::string> fields;
      std::size_t records = 0;
      while(reader.next(fields)) {
         ++records;
      }
      EXPECT_EQ(records, rows + 1) << file;
   }
}
