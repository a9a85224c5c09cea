#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "ebm/csv.hpp"
#include "ebm/dataset.hpp"
#include "ebm/error.hpp"
#include "ebm/eval.hpp"
#include "ebm/explain.hpp"
#include "ebm/interactions.hpp"
#include "ebm/model.hpp"
#include "ebm/trainer.hpp"

namespace ebm::cli {

namespace {

/// Flag name for each TrainConfig field, used when reporting ConfigError.
std::string flag_for_field(const std::string & field) {
   if(field == "max_epochs") {
      return "--epochs";
   }
   if(field == "early_stop_patience") {
      return "--patience";
   }
   if(field == "n_interactions") {
      return "--interactions";
   }
   std::string flag = "--" + field;
   std::replace(flag.begin(), flag.end(), '_', '-');
   return flag;
}

/// Hyperparameter flags. Values start at the fast preset (so --help shows those
/// defaults); only flags given explicitly override the chosen preset.
struct ConfigFlags {
   std::string preset = "fast";
   TrainConfig values = TrainConfig::fast();
   std::string validation = "0.15";
   CLI::Option * validation_option = nullptr;
   std::vector<std::pair<CLI::Option *, std::function<void(TrainConfig &)>>> bound;

   template<typename T>
   void bind(CLI::App & cmd, const std::string & flag, T TrainConfig::*field, const std::string & help) {
      CLI::Option * option = cmd.add_option(flag, values.*field, help)->capture_default_str();
      bound.emplace_back(option, [this, field](TrainConfig & config) { config.*field = values.*field; });
   }

   void add_to(CLI::App & cmd, const std::string & defaultPreset) {
      preset = defaultPreset;
      cmd.add_option("--preset", preset, "hyperparameter preset; explicit flags override it")
         ->check(CLI::IsMember({"fast", "reference", "benchmark"}))
         ->capture_default_str();
      bind(cmd, "--learning-rate", &TrainConfig::learning_rate, "boosting learning rate");
      bind(cmd, "--epochs", &TrainConfig::max_epochs, "maximum round-robin passes over all terms");
      bind(cmd, "--outer-bags", &TrainConfig::outer_bags, "bootstrap models averaged into the result");
      bind(cmd, "--inner-bags", &TrainConfig::inner_bags, "subsamples averaged per term update (0 = off)");
      bind(cmd, "--max-bins", &TrainConfig::max_bins, "maximum data bins per feature");
      bind(cmd, "--max-leaves", &TrainConfig::max_leaves, "leaves per term update");
      bind(cmd, "--interactions", &TrainConfig::n_interactions, "number of pairwise terms");
      validation_option = cmd.add_option("--validation-fraction", validation,
                                "held-out fraction for early stopping, or 'auto' for out-of-bag rows")
                             ->capture_default_str();
      bind(cmd, "--patience", &TrainConfig::early_stop_patience, "epochs without improvement before stopping");
      bind(cmd, "--min-samples-leaf", &TrainConfig::min_samples_leaf, "minimum weight per leaf");
      bind(cmd, "--seed", &TrainConfig::seed, "random seed");
   }

   TrainConfig resolve() const {
      TrainConfig config = TrainConfig::preset(preset);
      for(const auto & [option, apply] : bound) {
         if(option->count() > 0) {
            apply(config);
         }
      }
      if(validation_option->count() > 0) {
         if(validation == "auto") {
            config.validation_fraction = TrainConfig::kOutOfBag;
         } else if(const auto value = parse_number(validation)) {
            config.validation_fraction = *value;
         } else {
            throw ConfigError("validation_fraction", "expected a number or 'auto', got '" + validation + "'");
         }
      }
      config.validate();
      return config;
   }
};

struct OutputFile {
   std::ofstream file;
   std::ostream * stream = nullptr;

   OutputFile(const std::string & path, std::ostream & fallback) {
      if(path.empty() || path == "-") {
         stream = &fallback;
         return;
      }
      file.open(path, std::ios::binary);
      if(!file) {
         throw DataError("cannot write '" + path + "'");
      }
      stream = &file;
   }
};

std::string current_timestamp() {
   std::time_t t = std::time(nullptr);
   if(const char * epoch = std::getenv("SOURCE_DATE_EPOCH")) {
      if(const auto value = parse_number(epoch)) {
         t = static_cast<std::time_t>(*value);
      }
   }
   return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(t));
}

std::string join_numbers(const std::vector<std::size_t> & values) {
   return fmt::format("{}", fmt::join(values, ","));
}

/// Reads the header of a prediction input and maps each model feature to its column.
/// Throws DataError naming the missing features; warns about extra columns.
std::vector<std::size_t> map_columns(const std::vector<std::string> & header, const AdditiveModel & model,
   std::ostream & err) {
   std::vector<std::size_t> index;
   std::vector<std::string> missing;
   for(const std::string & name : model.feature_names()) {
      const auto it = std::find(header.begin(), header.end(), name);
      if(it == header.end()) {
         missing.push_back(name);
      } else {
         index.push_back(static_cast<std::size_t>(it - header.begin()));
      }
   }
   if(!missing.empty()) {
      throw DataError(fmt::format("input lacks model features: {}", fmt::join(missing, ", ")));
   }
   std::vector<std::string> extra;
   for(const std::string & name : header) {
      if(std::find(model.feature_names().begin(), model.feature_names().end(), name) == model.feature_names().end()) {
         extra.push_back(name);
      }
   }
   if(!extra.empty()) {
      err << fmt::format("warning: ignoring columns not used by the model: {}\n", fmt::join(extra, ", "));
   }
   return index;
}

std::vector<Cell> gather_cells(const std::vector<std::string> & fields, const std::vector<std::size_t> & index,
   std::size_t width, std::size_t line) {
   if(fields.size() != width) {
      throw DataError(fmt::format("line {}: expected {} fields, got {}", line, width, fields.size()));
   }
   std::vector<Cell> cells;
   cells.reserve(index.size());
   for(const std::size_t c : index) {
      cells.push_back(Cell::parse(fields[c]));
   }
   return cells;
}

std::ifstream open_input(const std::string & path) {
   std::ifstream in(path, std::ios::binary);
   if(!in) {
      throw DataError("cannot open '" + path + "'");
   }
   return in;
}

std::string model_stem(const std::string & path) {
   return std::filesystem::path(path).stem().string();
}

struct TrainArgs {
   std::string data;
   std::string target;
   std::string task = "classification";
   std::string out;
   std::string positive_label;
   std::size_t threads = 0;
   ConfigFlags flags;
};

int cmd_train(const TrainArgs & args, std::ostream & out, std::ostream & err) {
   const TrainConfig config = args.flags.resolve();
   LoadOptions options;
   options.target = args.target;
   options.task = parse_task(args.task);
   if(!args.positive_label.empty()) {
      options.positive_label = args.positive_label;
   }
   const Dataset dataset = load_csv(args.data, options);
   TrainResult result = train(dataset, config, args.threads);
   for(const std::string & warning : result.warnings) {
      err << "warning: " << warning << '\n';
   }
   result.model.metadata.train_timestamp = current_timestamp();
   save_model(result.model, args.out);
   out << fmt::format("rows={} features={} terms={} best_epochs={} train_loss={:.6f} validation_loss={:.6f}\n",
      dataset.n_rows(), dataset.n_features(), result.model.terms.size(),
      join_numbers(result.model.metadata.best_epochs), result.train_loss, result.validation_loss);
   return kExitOk;
}

struct PredictArgs {
   std::string model;
   std::string data;
   std::string out = "-";
   std::string output = "both";
};

int cmd_predict(const PredictArgs & args, std::ostream & out, std::ostream & err) {
   const AdditiveModel model = load_model(args.model);
   std::ifstream in = open_input(args.data);
   CsvReader reader(in);
   std::vector<std::string> header;
   if(!reader.next(header)) {
      throw DataError("'" + args.data + "' has no header");
   }
   const std::vector<std::size_t> index = map_columns(header, model, err);
   OutputFile sink(args.out, out);
   std::ostream & os = *sink.stream;

   const bool score = args.output != "mean";
   const bool mean = args.output != "score";
   os << "row" << (score ? ",score" : "") << (mean ? ",mean" : "") << '\n';
   std::vector<std::string> fields;
   for(std::size_t row = 0; reader.next(fields); ++row) {
      const std::vector<Cell> cells = gather_cells(fields, index, header.size(), reader.line());
      const double s = predict_score(model, std::span<const Cell>(cells));
      os << row;
      if(score) {
         os << fmt::format(",{}", s);
      }
      if(mean) {
         os << fmt::format(",{}", inverse_link(model.link, s));
      }
      os << '\n';
   }
   os.flush();
   return kExitOk;
}

struct ExplainGlobalArgs {
   std::string model;
   std::string out_dir = ".";
};

int cmd_explain_global(const ExplainGlobalArgs & args, std::ostream & out) {
   const AdditiveModel model = load_model(args.model);
   const GlobalExplanation global = global_explanation(model);
   const std::filesystem::path dir(args.out_dir);
   std::filesystem::create_directories(dir);
   const std::string stem = model_stem(args.model);
   for(std::size_t t = 0; t < model.terms.size(); ++t) {
      const std::filesystem::path file = dir / fmt::format("{}-term-{}.svg", stem, t);
      std::ofstream os(file, std::ios::binary);
      os << render_term_plot(global, t);
      if(!os) {
         throw DataError("cannot write '" + file.string() + "'");
      }
   }
   const std::filesystem::path csv = dir / fmt::format("{}-importance.csv", stem);
   std::ofstream os(csv, std::ios::binary);
   write_importance_csv(os, global);
   if(!os) {
      throw DataError("cannot write '" + csv.string() + "'");
   }
   out << fmt::format("wrote {} term plots and {}\n", model.terms.size(), csv.string());
   return kExitOk;
}

struct ExplainLocalArgs {
   std::string model;
   std::string data;
   std::size_t row = 0;
   std::string out;
};

int cmd_explain_local(const ExplainLocalArgs & args, std::ostream & out, std::ostream & err) {
   const AdditiveModel model = load_model(args.model);
   std::ifstream in = open_input(args.data);
   CsvReader reader(in);
   std::vector<std::string> header;
   if(!reader.next(header)) {
      throw DataError("'" + args.data + "' has no header");
   }
   const std::vector<std::size_t> index = map_columns(header, model, err);
   std::vector<std::string> fields;
   std::size_t row = 0;
   bool found = false;
   while(reader.next(fields)) {
      if(row == args.row) {
         found = true;
         break;
      }
      ++row;
   }
   if(!found) {
      throw NotFoundError(fmt::format("row {} out of range ({} data rows)", args.row, row));
   }
   const std::vector<Cell> cells = gather_cells(fields, index, header.size(), reader.line());
   const LocalExplanation local = local_explanation(model, cells);

   const std::string path =
      args.out.empty() ? fmt::format("{}-local-{}.svg", model_stem(args.model), args.row) : args.out;
   std::ofstream os(path, std::ios::binary);
   os << render_local_plot(local);
   if(!os) {
      throw DataError("cannot write '" + path + "'");
   }

   out << "term,features,values,contribution\n";
   out << fmt::format("intercept,,,{}\n", local.intercept);
   for(const Contribution & c : local.contributions) {
      out << fmt::format("{},{},{},{}\n", c.term_id, csv_escape(fmt::format("{}", fmt::join(c.feature_names, " x "))),
         csv_escape(fmt::format("{}", fmt::join(c.values, " x "))), c.contribution);
   }
   out << fmt::format("score,,,{}\n", local.score);
   out << fmt::format("mean,,,{}\n", local.mean);
   return kExitOk;
}

struct RankPairsArgs {
   std::string model;
   std::string data;
   std::string target;
   std::string positive_label;
   std::string out = "-";
   std::size_t threads = 0;
};

int cmd_rank_pairs(const RankPairsArgs & args, std::ostream & out) {
   const AdditiveModel model = load_model(args.model);
   LoadOptions options;
   options.target = args.target.empty() ? model.target_name : args.target;
   options.task = model.task;
   if(!args.positive_label.empty()) {
      options.positive_label = args.positive_label;
   } else if(model.task == Task::classification) {
      options.positive_label = model.class_labels[1];
   }
   Dataset dataset = load_csv(args.data, options);
   // Reorder the columns to the model's feature order.
   std::vector<Column> columns;
   for(const std::string & name : model.feature_names()) {
      const auto it = std::find(dataset.feature_names.begin(), dataset.feature_names.end(), name);
      if(it == dataset.feature_names.end()) {
         throw DataError("data lacks model feature '" + name + "'");
      }
      columns.push_back(dataset.columns[static_cast<std::size_t>(it - dataset.feature_names.begin())]);
   }
   dataset.columns = std::move(columns);
   dataset.feature_names = model.feature_names();

   const BinnedMatrix binned = bin_dataset(dataset, model.preprocessor);
   const std::vector<double> scores = predict_scores(model, binned);
   const std::vector<double> residuals = compute_pseudo_residuals(dataset.target, scores, model.link);
   const std::vector<PairScore> pairs = rank_pairs(binned, residuals, dataset.weights, args.threads);
   OutputFile sink(args.out, out);
   write_pair_scores(*sink.stream, pairs, model.feature_names());
   return kExitOk;
}

struct BenchmarkArgs {
   std::string manifest;
   std::string out = "-";
   std::string preset = "benchmark";
   std::size_t folds = 5;
   std::uint64_t seed = 42;
   std::size_t threads = 0;
};

int cmd_benchmark(const BenchmarkArgs & args, std::ostream & out, std::ostream & err) {
   std::vector<BenchmarkEntry> entries;
   try {
      entries = read_manifest(args.manifest);
   } catch(const DataError & e) {
      err << "error: bad manifest: " << e.what() << '\n';
      return kExitUsage;
   }
   TrainConfig config = TrainConfig::preset(args.preset);
   config.seed = args.seed;
   OutputFile sink(args.out, out);
   for(const BenchmarkRow & row : run_benchmark(entries, config, args.folds, *sink.stream, args.threads)) {
      if(row.skipped) {
         err << "warning: skipped " << row.dataset << " (file not found)\n";
      }
   }
   return kExitOk;
}

CLI::Option * add_threads(CLI::App & cmd, std::size_t & threads) {
   return cmd.add_option("--threads", threads, "worker threads (0 = all cores)")
      ->envname("EBM_THREADS")
      ->capture_default_str();
}

} // namespace

int run(const std::vector<std::string> & args, std::ostream & out, std::ostream & err) {
   CLI::App app{"Explainable boosting machine: train, predict and explain additive models"};
   app.name(args.empty() ? "ebm" : std::filesystem::path(args[0]).filename().string());
   app.require_subcommand(1);

   TrainArgs train;
   CLI::App * trainCmd = app.add_subcommand("train", "fit a model on a CSV file");
   trainCmd->add_option("--data", train.data, "training CSV")->required();
   trainCmd->add_option("--target", train.target, "target column")->required();
   trainCmd->add_option("--task", train.task, "learning task")
      ->check(CLI::IsMember({"classification", "regression"}))
      ->capture_default_str();
   trainCmd->add_option("--out", train.out, "model file to write")->required();
   trainCmd->add_option("--positive-label", train.positive_label, "target label of the positive class")
      ->default_str("larger label");
   train.flags.add_to(*trainCmd, "fast");
   add_threads(*trainCmd, train.threads);

   PredictArgs predict;
   CLI::App * predictCmd = app.add_subcommand("predict", "score a CSV file with a model");
   predictCmd->add_option("--model", predict.model, "model file")->required();
   predictCmd->add_option("--data", predict.data, "input CSV")->required();
   predictCmd->add_option("--out", predict.out, "output CSV ('-' = stdout)")->capture_default_str();
   predictCmd->add_option("--output", predict.output, "columns to write")
      ->check(CLI::IsMember({"score", "mean", "both"}))
      ->capture_default_str();

   ExplainGlobalArgs global;
   CLI::App * globalCmd = app.add_subcommand("explain-global", "write term plots and the importance table");
   globalCmd->add_option("--model", global.model, "model file")->required();
   globalCmd->add_option("--out-dir", global.out_dir, "output directory")->capture_default_str();

   ExplainLocalArgs local;
   CLI::App * localCmd = app.add_subcommand("explain-local", "explain one prediction");
   localCmd->add_option("--model", local.model, "model file")->required();
   localCmd->add_option("--data", local.data, "input CSV")->required();
   localCmd->add_option("--row", local.row, "0-based data row")->capture_default_str();
   localCmd->add_option("--out", local.out, "plot file")->default_str("<model>-local-<row>.svg");

   RankPairsArgs pairs;
   CLI::App * pairsCmd = app.add_subcommand("rank-pairs", "score feature pairs on a model's residuals");
   pairsCmd->add_option("--model", pairs.model, "main-effects model file")->required();
   pairsCmd->add_option("--data", pairs.data, "CSV with the target column")->required();
   pairsCmd->add_option("--target", pairs.target, "target column")->default_str("model's target");
   pairsCmd->add_option("--positive-label", pairs.positive_label, "target label of the positive class")
      ->default_str("model's positive label");
   pairsCmd->add_option("--out", pairs.out, "output CSV ('-' = stdout)")->capture_default_str();
   add_threads(*pairsCmd, pairs.threads);

   BenchmarkArgs bench;
   CLI::App * benchCmd = app.add_subcommand("benchmark", "cross-validated AUROC over a dataset manifest");
   benchCmd->add_option("--manifest", bench.manifest, "CSV with name,path,target[,positive_label]")->required();
   benchCmd->add_option("--out", bench.out, "output CSV ('-' = stdout)")->capture_default_str();
   benchCmd->add_option("--preset", bench.preset, "hyperparameter preset")
      ->check(CLI::IsMember({"fast", "reference", "benchmark"}))
      ->capture_default_str();
   benchCmd->add_option("--folds", bench.folds, "cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
   benchCmd->add_option("--seed", bench.seed, "random seed")->capture_default_str();
   add_threads(*benchCmd, bench.threads);

   std::vector<const char *> argv;
   for(const std::string & arg : args) {
      argv.push_back(arg.c_str());
   }
   if(argv.empty()) {
      argv.push_back("ebm");
   }
   try {
      app.parse(static_cast<int>(argv.size()), argv.data());
   } catch(const CLI::CallForHelp &) {
      out << app.help();
      return kExitOk;
   } catch(const CLI::CallForAllHelp &) {
      out << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
   } catch(const CLI::ParseError & e) {
      err << "error: " << e.what() << '\n';
      return kExitUsage;
   }

   try {
      if(trainCmd->parsed()) {
         return cmd_train(train, out, err);
      }
      if(predictCmd->parsed()) {
         return cmd_predict(predict, out, err);
      }
      if(globalCmd->parsed()) {
         return cmd_explain_global(global, out);
      }
      if(localCmd->parsed()) {
         return cmd_explain_local(local, out, err);
      }
      if(pairsCmd->parsed()) {
         return cmd_rank_pairs(pairs, out);
      }
      if(benchCmd->parsed()) {
         return cmd_benchmark(bench, out, err);
      }
   } catch(const ConfigError & e) {
      err << "error: " << flag_for_field(e.field()) << ": " << e.what() << '\n';
      return kExitUsage;
   } catch(const DataError & e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
   } catch(const FormatError & e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
   } catch(const NotFoundError & e) {
      err << "error: " << e.what() << '\n';
      return kExitData;
   } catch(const TrainError & e) {
      err << "error: " << e.what() << '\n';
      return kExitInternal;
   } catch(const std::exception & e) {
      err << "error: " << e.what() << '\n';
      return kExitInternal;
   }
   return kExitUsage;
}

} // namespace ebm::cli
