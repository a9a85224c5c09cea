#pragma once

// Synthetic datasets and independent reference implementations shared by the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ebm/dataset.hpp"
#include "ebm/model.hpp"
#include "ebm/random.hpp"
#include "ebm/trainer.hpp"

namespace ebm::test {

inline std::string data_path(const std::string & file) {
   return std::string(EBM_DATA_DIR) + "/" + file;
}

inline Column numeric_column(const std::vector<double> & values) {
   Column column;
   column.kind = ColumnKind::numeric;
   for(const double v : values) {
      const bool missing = std::isnan(v);
      column.text.push_back(missing ? std::string() : fmt::format("{}", v));
      column.number.push_back(v);
      column.missing.push_back(missing ? 1 : 0);
   }
   return column;
}

inline Column categorical_column(const std::vector<std::string> & values) {
   Column column;
   column.kind = ColumnKind::categorical;
   for(const std::string & v : values) {
      column.text.push_back(v);
      column.number.push_back(std::nan(""));
      column.missing.push_back(v.empty() ? 1 : 0);
   }
   return column;
}

/// Dataset from numeric feature columns named x0, x1, ...
inline Dataset make_dataset(const std::vector<std::vector<double>> & features, const std::vector<double> & target,
   Task task = Task::classification) {
   Dataset ds;
   ds.task = task;
   ds.target_name = "y";
   ds.class_labels = {"0", "1"};
   for(std::size_t j = 0; j < features.size(); ++j) {
      ds.feature_names.push_back(fmt::format("x{}", j));
      ds.columns.push_back(numeric_column(features[j]));
   }
   ds.target = target;
   ds.weights.assign(target.size(), 1.0);
   return ds;
}

inline double sigmoid(double s) {
   return 1.0 / (1.0 + std::exp(-s));
}

/// y = [a > 0.5] xor [b > 0.5] on features (a, b, noise, noise), all uniform on [0, 1).
inline Dataset xor_dataset(std::size_t n, std::uint64_t seed) {
   Rng rng(seed);
   std::vector<std::vector<double>> x(4, std::vector<double>(n));
   std::vector<double> y(n);
   for(std::size_t i = 0; i < n; ++i) {
      for(auto & column : x) {
         column[i] = rng.uniform();
      }
      y[i] = ((x[0][i] > 0.5) != (x[1][i] > 0.5)) ? 1.0 : 0.0;
   }
   return make_dataset(x, y);
}

/// Logistic target with additive signal in every feature: f(a) + g(b) + h(c) + k(d).
inline double additive_logit(const std::vector<double> & x) {
   return 2.0 * std::sin(3.0 * x[0]) + 1.5 * (x[1] - 0.5) * (x[1] - 0.5) * 4.0 - 1.0 * x[2] + 0.8 * std::cos(5.0 * x[3]);
}

inline Dataset additive_dataset(std::size_t n, std::uint64_t seed, std::size_t features = 4) {
   Rng rng(seed);
   std::vector<std::vector<double>> x(features, std::vector<double>(n));
   std::vector<double> y(n);
   std::vector<double> row(4, 0.0);
   for(std::size_t i = 0; i < n; ++i) {
      for(std::size_t j = 0; j < features; ++j) {
         x[j][i] = rng.uniform();
         if(j < 4) {
            row[j] = x[j][i];
         }
      }
      y[i] = rng.uniform() < sigmoid(additive_logit(row)) ? 1.0 : 0.0;
   }
   return make_dataset(x, y);
}

/// Brute-force AUROC: fraction of (positive, negative) pairs ranked correctly, ties 1/2.
inline double auroc_pairs(const std::vector<double> & scores, const std::vector<double> & labels) {
   double wins = 0.0;
   double pos = 0.0;
   double neg = 0.0;
   for(std::size_t i = 0; i < scores.size(); ++i) {
      (labels[i] != 0.0 ? pos : neg) += 1.0;
   }
   for(std::size_t i = 0; i < scores.size(); ++i) {
      if(labels[i] == 0.0) {
         continue;
      }
      for(std::size_t j = 0; j < scores.size(); ++j) {
         if(labels[j] != 0.0) {
            continue;
         }
         if(scores[i] > scores[j]) {
            wins += 1.0;
         } else if(scores[i] == scores[j]) {
            wins += 0.5;
         }
      }
   }
   return wins / (pos * neg);
}

/// Sum of S^2/W over the given groups of (residual, weight) rows, skipping empty groups.
inline double explained(const std::vector<std::pair<double, double>> & groups) {
   double total = 0.0;
   for(const auto & [s, w] : groups) {
      if(w > 0.0) {
         total += s * s / w;
      }
   }
   return total;
}

/// Operation counter plugged into the prediction templates.
struct CountingOps {
   std::size_t lookups = 0;
   std::size_t additions = 0;
   std::size_t links = 0;

   double lookup(const Term & term, std::size_t index) {
      ++lookups;
      return term.scores[index];
   }
   double add(double a, double b) {
      ++additions;
      return a + b;
   }
   double link(Link link, double score) {
      ++links;
      return inverse_link(link, score);
   }
};

inline TrainConfig quick_config() {
   TrainConfig config;
   config.outer_bags = 2;
   config.max_epochs = 300;
   config.learning_rate = 0.05;
   return config;
}

} // namespace ebm::test
