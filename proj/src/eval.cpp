#include "ebm/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "ebm/csv.hpp"
#include "ebm/error.hpp"
#include "ebm/model.hpp"
#include "ebm/parallel.hpp"
#include "ebm/random.hpp"
#include "ebm/trainer.hpp"

namespace ebm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
   return std::chrono::duration<double>(Clock::now() - start).count();
}

class EbmLearner final : public Learner {
public:
   EbmLearner(TrainConfig config, std::size_t threads) : m_config(config), m_threads(threads) {}

   void fit(const Dataset & train) override { m_model = ebm::train(train, m_config, m_threads).model; }

   std::vector<double> predict(const Dataset & rows) const override {
      std::vector<double> out = predict_scores(m_model, rows);
      for(double & v : out) {
         v = inverse_link(m_model.link, v);
      }
      return out;
   }

private:
   TrainConfig m_config;
   std::size_t m_threads;
   AdditiveModel m_model;
};

} // namespace

double auroc(std::span<const double> scores, std::span<const double> labels) {
   if(scores.size() != labels.size()) {
      throw DataError("auroc: scores and labels differ in length");
   }
   const std::size_t n = scores.size();
   std::vector<std::size_t> order(n);
   std::iota(order.begin(), order.end(), 0);
   std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

   double positives = 0.0;
   double rankSum = 0.0;
   for(std::size_t i = 0; i < n;) {
      std::size_t j = i;
      while(j < n && scores[order[j]] == scores[order[i]]) {
         ++j;
      }
      // ranks i+1 .. j share their average
      const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
      for(std::size_t t = i; t < j; ++t) {
         if(labels[order[t]] != 0.0) {
            rankSum += rank;
            positives += 1.0;
         }
      }
      i = j;
   }
   const double negatives = static_cast<double>(n) - positives;
   if(positives == 0.0 || negatives == 0.0) {
      throw DataError("auroc: both classes must be present");
   }
   return (rankSum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double rmse(std::span<const double> predictions, std::span<const double> targets) {
   if(predictions.empty() || predictions.size() != targets.size()) {
      throw DataError("rmse: inputs must be non-empty and of equal length");
   }
   double sum = 0.0;
   for(std::size_t i = 0; i < predictions.size(); ++i) {
      const double d = predictions[i] - targets[i];
      sum += d * d;
   }
   return std::sqrt(sum / static_cast<double>(predictions.size()));
}

const char * to_string(Metric metric) noexcept {
   return metric == Metric::auroc ? "auroc" : "rmse";
}

std::vector<std::size_t> stratified_folds(std::span<const double> target, Task task, std::size_t k, std::uint64_t seed) {
   if(k < 2) {
      throw DataError("k-fold cross-validation needs k >= 2");
   }
   if(k > target.size()) {
      throw DataError(fmt::format("cannot split {} rows into {} folds", target.size(), k));
   }
   Rng rng(seed);
   std::vector<std::vector<std::size_t>> strata(task == Task::classification ? 2 : 1);
   for(std::size_t r = 0; r < target.size(); ++r) {
      strata[task == Task::classification && target[r] != 0.0 ? 1 : 0].push_back(r);
   }
   std::vector<std::size_t> fold(target.size());
   std::size_t dealt = 0;
   for(auto & stratum : strata) {
      rng.shuffle(stratum);
      for(const std::size_t r : stratum) {
         fold[r] = dealt++ % k;
      }
   }
   return fold;
}

std::unique_ptr<Learner> make_ebm_learner(const TrainConfig & config, std::size_t threads) {
   return std::make_unique<EbmLearner>(config, threads);
}

void MetricReport::summarize() {
   mean = 0.0;
   std = 0.0;
   if(values.empty()) {
      return;
   }
   for(const double v : values) {
      mean += v;
   }
   mean /= static_cast<double>(values.size());
   if(values.size() > 1) {
      double ss = 0.0;
      for(const double v : values) {
         ss += (v - mean) * (v - mean);
      }
      std = std::sqrt(ss / static_cast<double>(values.size() - 1));
   }
}

MetricReport kfold_cv(const Dataset & dataset, std::size_t k, const LearnerFactory & factory, Metric metric,
   std::uint64_t seed, std::size_t threads) {
   const std::vector<std::size_t> fold = stratified_folds(dataset.target, dataset.task, k, seed);
   MetricReport report;
   report.metric = to_string(metric);
   report.values.assign(k, 0.0);
   report.fit_seconds.assign(k, 0.0);
   report.predict_seconds.assign(k, 0.0);
   report.predicted_rows.assign(k, 0);

   parallel_for(k, threads, [&](std::size_t f) {
      std::vector<std::size_t> trainRows;
      std::vector<std::size_t> testRows;
      for(std::size_t r = 0; r < fold.size(); ++r) {
         (fold[r] == f ? testRows : trainRows).push_back(r);
      }
      const Dataset train = dataset.subset(trainRows);
      const Dataset test = dataset.subset(testRows);

      std::unique_ptr<Learner> learner = factory();
      auto start = Clock::now();
      learner->fit(train);
      report.fit_seconds[f] = seconds_since(start);
      start = Clock::now();
      const std::vector<double> predicted = learner->predict(test);
      report.predict_seconds[f] = seconds_since(start);
      report.predicted_rows[f] = test.n_rows();

      report.values[f] = metric == Metric::auroc ? auroc(predicted, test.target) : rmse(predicted, test.target);
   });
   report.summarize();
   return report;
}

MetricReport kfold_cv(const Dataset & dataset, std::size_t k, const TrainConfig & config, Metric metric,
   std::size_t threads) {
   const LearnerFactory factory = [config] { return make_ebm_learner(config, 1); };
   return kfold_cv(dataset, k, factory, metric, config.seed, threads);
}

std::vector<BenchmarkEntry> read_manifest(const std::string & path) {
   std::ifstream in(path, std::ios::binary);
   if(!in) {
      throw DataError("cannot open manifest '" + path + "'");
   }
   CsvReader reader(in);
   std::vector<std::string> fields;
   if(!reader.next(fields)) {
      throw DataError("manifest '" + path + "' is empty");
   }
   const auto column = [&](std::string_view name) -> std::optional<std::size_t> {
      const auto it = std::find(fields.begin(), fields.end(), name);
      return it == fields.end() ? std::nullopt : std::optional<std::size_t>(it - fields.begin());
   };
   const auto nameCol = column("name");
   const auto pathCol = column("path");
   const auto targetCol = column("target");
   const auto positiveCol = column("positive_label");
   if(!nameCol || !pathCol || !targetCol) {
      throw DataError("manifest needs columns name,path,target");
   }
   const std::size_t width = fields.size();
   const std::filesystem::path base = std::filesystem::path(path).parent_path();

   std::vector<BenchmarkEntry> entries;
   while(reader.next(fields)) {
      if(fields.size() != width) {
         throw DataError(fmt::format("manifest line {}: expected {} fields, got {}", reader.line(), width, fields.size()));
      }
      BenchmarkEntry entry;
      entry.name = fields[*nameCol];
      std::filesystem::path file(fields[*pathCol]);
      entry.path = (file.is_relative() ? base / file : file).lexically_normal().string();
      entry.target = fields[*targetCol];
      if(positiveCol && !fields[*positiveCol].empty()) {
         entry.positive_label = fields[*positiveCol];
      }
      entries.push_back(std::move(entry));
   }
   return entries;
}

void write_benchmark_header(std::ostream & out) {
   out << "dataset,rows,features,auroc_mean,auroc_std,fit_seconds,predict_us_per_row,skipped\n";
}

void write_benchmark_row(std::ostream & out, const BenchmarkRow & row) {
   if(row.skipped) {
      out << fmt::format("{},,,,,,,true\n", csv_escape(row.dataset));
   } else {
      out << fmt::format("{},{},{},{:.6f},{:.6f},{:.3f},{:.3f},false\n", csv_escape(row.dataset), row.rows,
         row.features, row.auroc_mean, row.auroc_std, row.fit_seconds, row.predict_us_per_row);
   }
   out.flush();
}

std::vector<BenchmarkRow> run_benchmark(std::span<const BenchmarkEntry> entries, const TrainConfig & config,
   std::size_t folds, std::ostream & out, std::size_t threads) {
   write_benchmark_header(out);
   std::vector<BenchmarkRow> rows;
   for(const BenchmarkEntry & entry : entries) {
      BenchmarkRow row;
      row.dataset = entry.name;
      if(!std::filesystem::is_regular_file(entry.path)) {
         row.skipped = true;
         write_benchmark_row(out, row);
         rows.push_back(row);
         continue;
      }
      LoadOptions options;
      options.target = entry.target;
      options.positive_label = entry.positive_label;
      const Dataset dataset = load_csv(entry.path, options);
      const MetricReport report = kfold_cv(dataset, folds, config, Metric::auroc, threads);
      row.rows = dataset.n_rows();
      row.features = dataset.n_features();
      row.auroc_mean = report.mean;
      row.auroc_std = report.std;
      double fit = 0.0;
      double predict = 0.0;
      std::size_t predicted = 0;
      for(std::size_t f = 0; f < report.values.size(); ++f) {
         fit += report.fit_seconds[f];
         predict += report.predict_seconds[f];
         predicted += report.predicted_rows[f];
      }
      row.fit_seconds = fit / static_cast<double>(report.values.size());
      row.predict_us_per_row = predicted > 0 ? predict / static_cast<double>(predicted) * 1e6 : 0.0;
      write_benchmark_row(out, row);
      rows.push_back(row);
   }
   return rows;
}

} // namespace ebm
