#include "ebm/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "ebm/error.hpp"

namespace ebm {

using nlohmann::json;
using nlohmann::ordered_json;

const char * to_string(Link link) noexcept {
   return link == Link::logit ? "logit" : "identity";
}

Link parse_link(std::string_view text) {
   if(text == "logit") {
      return Link::logit;
   }
   if(text == "identity") {
      return Link::identity;
   }
   throw FormatError(fmt::format("unknown link '{}'", text));
}

Link link_for(Task task) noexcept {
   return task == Task::classification ? Link::logit : Link::identity;
}

double apply_link(Link link, double mean) noexcept {
   if(link == Link::identity) {
      return mean;
   }
   return std::log(mean / (1.0 - mean));
}

Term AdditiveModel::make_main_term(std::size_t feature) const {
   Term term;
   term.features = {feature};
   term.shape = {preprocessor.bins[feature].n_bins};
   term.scores.assign(term.shape[0], 0.0);
   term.weights = preprocessor.bin_weights[feature];
   return term;
}

void AdditiveModel::validate() const {
   if(!std::isfinite(intercept)) {
      throw FormatError("non-finite intercept");
   }
   if(link != link_for(task)) {
      throw FormatError("link does not match task");
   }
   const std::size_t nFeatures = preprocessor.n_features();
   if(preprocessor.feature_names.size() != nFeatures || preprocessor.bin_weights.size() != nFeatures) {
      throw FormatError("preprocessor arrays disagree in length");
   }
   for(std::size_t j = 0; j < nFeatures; ++j) {
      preprocessor.bins[j].validate();
      if(preprocessor.bin_weights[j].size() != preprocessor.bins[j].n_bins) {
         throw FormatError(fmt::format("feature '{}' has {} bin weights for {} bins",
            preprocessor.feature_names[j], preprocessor.bin_weights[j].size(), preprocessor.bins[j].n_bins));
      }
   }
   std::set<std::vector<std::size_t>> seen;
   bool sawPair = false;
   for(std::size_t t = 0; t < terms.size(); ++t) {
      const Term & term = terms[t];
      if(term.features.empty() || term.features.size() > 2) {
         throw FormatError(fmt::format("term {} has {} features", t, term.features.size()));
      }
      if(term.features.size() == 2) {
         sawPair = true;
         if(term.features[0] == term.features[1]) {
            throw FormatError(fmt::format("term {} repeats a feature", t));
         }
      } else if(sawPair) {
         throw FormatError("main-effect terms must precede pair terms");
      }
      std::size_t expected = 1;
      for(std::size_t d = 0; d < term.features.size(); ++d) {
         if(term.features[d] >= nFeatures) {
            throw FormatError(fmt::format("term {} references feature {}", t, term.features[d]));
         }
         if(term.shape.size() != term.features.size() ||
            term.shape[d] != preprocessor.bins[term.features[d]].n_bins) {
            throw FormatError(fmt::format("term {} shape does not match feature bins", t));
         }
         expected *= term.shape[d];
      }
      if(term.scores.size() != expected || term.weights.size() != expected) {
         throw FormatError(fmt::format("term {} has {} scores, expected {}", t, term.scores.size(), expected));
      }
      for(const double s : term.scores) {
         if(!std::isfinite(s)) {
            throw FormatError(fmt::format("term {} has a non-finite score", t));
         }
      }
      auto key = term.features;
      std::sort(key.begin(), key.end());
      if(!seen.insert(key).second) {
         throw FormatError(fmt::format("term {} duplicates an earlier feature set", t));
      }
   }
}

double predict_score(const AdditiveModel & model, std::span<const BinIndex> binnedRow) {
   DirectOps ops;
   return accumulate_score(model, binnedRow, ops);
}

double predict_score(const AdditiveModel & model, std::span<const Cell> row) {
   const std::vector<BinIndex> bins = model.preprocessor.bin_row(row);
   return predict_score(model, bins);
}

double predict_mean(const AdditiveModel & model, std::span<const BinIndex> binnedRow) {
   DirectOps ops;
   return accumulate_mean(model, binnedRow, ops);
}

double predict_mean(const AdditiveModel & model, std::span<const Cell> row) {
   const std::vector<BinIndex> bins = model.preprocessor.bin_row(row);
   return predict_mean(model, bins);
}

std::vector<double> predict_scores(const AdditiveModel & model, const BinnedMatrix & binned) {
   std::vector<double> out(binned.n_rows);
   std::vector<BinIndex> row;
   for(std::size_t r = 0; r < binned.n_rows; ++r) {
      binned.gather_row(r, row);
      out[r] = predict_score(model, row);
   }
   return out;
}

std::vector<double> predict_scores(const AdditiveModel & model, const Dataset & dataset) {
   return predict_scores(model, bin_dataset(dataset, model.preprocessor));
}

// ---------------------------------------------------------------------------------------
// serialization

namespace {

void require_finite(double value, std::string_view what) {
   if(!std::isfinite(value)) {
      throw FormatError(fmt::format("non-finite value in {}", what));
   }
}

ordered_json numbers(const std::vector<double> & values, std::string_view what) {
   ordered_json out = ordered_json::array();
   for(const double v : values) {
      require_finite(v, what);
      out.push_back(v);
   }
   return out;
}

ordered_json table(const Term & term, const std::vector<double> & values, std::string_view what) {
   if(term.dimensions() == 1) {
      return numbers(values, what);
   }
   ordered_json out = ordered_json::array();
   const std::size_t cols = term.shape[1];
   for(std::size_t i = 0; i < term.shape[0]; ++i) {
      ordered_json row = ordered_json::array();
      for(std::size_t k = 0; k < cols; ++k) {
         const double v = values[i * cols + k];
         require_finite(v, what);
         row.push_back(v);
      }
      out.push_back(std::move(row));
   }
   return out;
}

bool is_flat(const ordered_json & array) {
   return std::none_of(array.begin(), array.end(),
      [](const ordered_json & item) { return item.is_array() || item.is_object(); });
}

// Objects and nested arrays one entry per line; arrays of scalars stay on one line.
void write_pretty(std::ostream & out, const ordered_json & value, int depth) {
   const std::string pad(static_cast<std::size_t>(depth + 1) * 2, ' ');
   const std::string closePad(static_cast<std::size_t>(depth) * 2, ' ');
   if(value.is_object() && !value.empty()) {
      out << "{\n";
      std::size_t i = 0;
      for(const auto & [key, item] : value.items()) {
         out << pad << ordered_json(key).dump() << ": ";
         write_pretty(out, item, depth + 1);
         out << (++i == value.size() ? "\n" : ",\n");
      }
      out << closePad << '}';
   } else if(value.is_array() && !value.empty() && !is_flat(value)) {
      out << "[\n";
      std::size_t i = 0;
      for(const auto & item : value) {
         out << pad;
         write_pretty(out, item, depth + 1);
         out << (++i == value.size() ? "\n" : ",\n");
      }
      out << closePad << ']';
   } else {
      out << value.dump();
   }
}

const json & member(const json & object, const char * key) {
   const auto it = object.find(key);
   if(it == object.end()) {
      throw FormatError(fmt::format("missing field '{}'", key));
   }
   return *it;
}

double read_number(const json & value, std::string_view what) {
   if(!value.is_number()) {
      throw FormatError(fmt::format("{} must be a finite number", what));
   }
   const double v = value.get<double>();
   require_finite(v, what);
   return v;
}

std::vector<double> read_numbers(const json & value, std::string_view what) {
   if(!value.is_array()) {
      throw FormatError(fmt::format("{} must be an array", what));
   }
   std::vector<double> out;
   out.reserve(value.size());
   for(const json & item : value) {
      out.push_back(read_number(item, what));
   }
   return out;
}

std::vector<double> read_table(const json & value, const std::vector<std::size_t> & shape, std::string_view what) {
   if(shape.size() == 1) {
      std::vector<double> out = read_numbers(value, what);
      if(out.size() != shape[0]) {
         throw FormatError(fmt::format("{} has length {}, expected {}", what, out.size(), shape[0]));
      }
      return out;
   }
   if(!value.is_array() || value.size() != shape[0]) {
      throw FormatError(fmt::format("{} must have {} rows", what, shape[0]));
   }
   std::vector<double> out;
   out.reserve(shape[0] * shape[1]);
   for(const json & row : value) {
      const std::vector<double> values = read_numbers(row, what);
      if(values.size() != shape[1]) {
         throw FormatError(fmt::format("{} row has length {}, expected {}", what, values.size(), shape[1]));
      }
      out.insert(out.end(), values.begin(), values.end());
   }
   return out;
}

} // namespace

std::string serialize_model(const AdditiveModel & model) {
   model.validate();

   ordered_json doc;
   doc["format_version"] = AdditiveModel::kFormatVersion;
   doc["task"] = to_string(model.task);
   doc["link"] = to_string(model.link);
   doc["intercept"] = model.intercept;
   doc["target"] = ordered_json{{"name", model.target_name},
      {"labels", ordered_json::array({model.class_labels[0], model.class_labels[1]})}};

   ordered_json features = ordered_json::array();
   for(std::size_t j = 0; j < model.n_features(); ++j) {
      const BinDefinition & def = model.preprocessor.bins[j];
      ordered_json f;
      f["name"] = model.preprocessor.feature_names[j];
      f["kind"] = to_string(def.kind);
      if(def.kind == ColumnKind::numeric) {
         f["cuts"] = numbers(def.cuts, "cuts");
         if(std::isfinite(def.min_value) && std::isfinite(def.max_value)) {
            f["range"] = ordered_json::array({def.min_value, def.max_value});
         }
      } else {
         ordered_json categories = ordered_json::object();
         for(const auto & [label, index] : def.categories) {
            categories[label] = index;
         }
         f["categories"] = std::move(categories);
      }
      f["bin_weights"] = numbers(model.preprocessor.bin_weights[j], "bin_weights");
      features.push_back(std::move(f));
   }
   doc["features"] = std::move(features);

   ordered_json terms = ordered_json::array();
   for(const Term & term : model.terms) {
      ordered_json t;
      t["features"] = term.features;
      t["scores"] = table(term, term.scores, "scores");
      if(term.dimensions() == 2) {
         t["bin_weights"] = table(term, term.weights, "bin_weights");
      }
      terms.push_back(std::move(t));
   }
   doc["terms"] = std::move(terms);

   ordered_json config;
   to_json(config, model.metadata.config);
   doc["metadata"] = ordered_json{
      {"seed", model.metadata.seed},
      {"config", std::move(config)},
      {"train_timestamp", model.metadata.train_timestamp},
      {"best_epochs", model.metadata.best_epochs},
   };

   std::ostringstream out;
   write_pretty(out, doc, 0);
   out << '\n';
   return out.str();
}

AdditiveModel deserialize_model(std::string_view text) {
   json doc;
   try {
      doc = json::parse(text.begin(), text.end());
   } catch(const json::exception & e) {
      throw FormatError(fmt::format("model file is not valid JSON: {}", e.what()));
   }
   if(!doc.is_object()) {
      throw FormatError("model file must be a JSON object");
   }

   try {
      const json & version = member(doc, "format_version");
      if(!version.is_number_integer() || version.get<long long>() != AdditiveModel::kFormatVersion) {
         throw FormatError(fmt::format("unsupported format_version {} (expected {})", version.dump(),
            AdditiveModel::kFormatVersion));
      }

      AdditiveModel model;
      try {
         model.task = parse_task(member(doc, "task").get<std::string>());
      } catch(const DataError & e) {
         throw FormatError(e.what());
      }
      model.link = parse_link(member(doc, "link").get<std::string>());
      model.intercept = read_number(member(doc, "intercept"), "intercept");
      if(const auto it = doc.find("target"); it != doc.end()) {
         model.target_name = it->value("name", std::string());
         if(const auto labels = it->find("labels"); labels != it->end() && labels->is_array() && labels->size() == 2) {
            model.class_labels = {(*labels)[0].get<std::string>(), (*labels)[1].get<std::string>()};
         }
      }

      const json & features = member(doc, "features");
      if(!features.is_array()) {
         throw FormatError("features must be an array");
      }
      for(const json & f : features) {
         BinDefinition def;
         const std::string name = member(f, "name").get<std::string>();
         try {
            def.kind = parse_column_kind(member(f, "kind").get<std::string>());
         } catch(const DataError & e) {
            throw FormatError(e.what());
         }
         def.min_value = std::numeric_limits<double>::quiet_NaN();
         def.max_value = def.min_value;
         if(def.kind == ColumnKind::numeric) {
            def.cuts = read_numbers(member(f, "cuts"), "cuts");
            def.n_bins = def.cuts.size() + 2;
            if(const auto range = f.find("range"); range != f.end()) {
               const std::vector<double> r = read_numbers(*range, "range");
               if(r.size() != 2) {
                  throw FormatError("range must have two entries");
               }
               def.min_value = r[0];
               def.max_value = r[1];
            }
         } else {
            const json & categories = member(f, "categories");
            if(!categories.is_object()) {
               throw FormatError("categories must be an object");
            }
            for(const auto & [label, index] : categories.items()) {
               if(!index.is_number_integer() || index.get<long long>() <= 0) {
                  throw FormatError(fmt::format("category '{}' has an invalid index", label));
               }
               def.categories.emplace(label, static_cast<BinIndex>(index.get<long long>()));
            }
            def.n_bins = def.categories.size() + 1;
         }
         def.validate();
         std::vector<double> weights = read_numbers(member(f, "bin_weights"), "bin_weights");
         if(weights.size() != def.n_bins) {
            throw FormatError(fmt::format("feature '{}' has {} bin weights for {} bins", name, weights.size(), def.n_bins));
         }
         model.preprocessor.feature_names.push_back(name);
         model.preprocessor.bins.push_back(std::move(def));
         model.preprocessor.bin_weights.push_back(std::move(weights));
      }

      const json & terms = member(doc, "terms");
      if(!terms.is_array()) {
         throw FormatError("terms must be an array");
      }
      for(const json & t : terms) {
         Term term;
         const json & fs = member(t, "features");
         if(!fs.is_array() || fs.empty() || fs.size() > 2) {
            throw FormatError("term features must list one or two feature indices");
         }
         for(const json & index : fs) {
            if(!index.is_number_unsigned() || index.get<std::size_t>() >= model.n_features()) {
               throw FormatError(fmt::format("term references invalid feature {}", index.dump()));
            }
            term.features.push_back(index.get<std::size_t>());
            term.shape.push_back(model.preprocessor.bins[term.features.back()].n_bins);
         }
         term.scores = read_table(member(t, "scores"), term.shape, "scores");
         if(term.dimensions() == 1) {
            term.weights = model.preprocessor.bin_weights[term.features[0]];
         } else {
            term.weights = read_table(member(t, "bin_weights"), term.shape, "bin_weights");
         }
         model.terms.push_back(std::move(term));
      }

      if(const auto it = doc.find("metadata"); it != doc.end() && it->is_object()) {
         model.metadata.seed = it->value("seed", std::uint64_t{0});
         model.metadata.train_timestamp = it->value("train_timestamp", std::string());
         if(const auto cfg = it->find("config"); cfg != it->end()) {
            model.metadata.config = cfg->get<TrainConfig>();
         }
         model.metadata.best_epochs = it->value("best_epochs", std::vector<std::size_t>{});
      }

      model.validate();
      return model;
   } catch(const json::exception & e) {
      throw FormatError(fmt::format("model schema violation: {}", e.what()));
   }
}

void save_model(const AdditiveModel & model, const std::string & path) {
   const std::string text = serialize_model(model);
   std::ofstream out(path, std::ios::binary);
   if(!out) {
      throw FormatError(fmt::format("cannot write model file '{}'", path));
   }
   out << text;
   if(!out) {
      throw FormatError(fmt::format("failed writing model file '{}'", path));
   }
}

AdditiveModel load_model(const std::string & path) {
   std::ifstream in(path, std::ios::binary);
   if(!in) {
      throw FormatError(fmt::format("cannot open model file '{}'", path));
   }
   std::ostringstream buffer;
   buffer << in.rdbuf();
   return deserialize_model(buffer.str());
}

} // namespace ebm
