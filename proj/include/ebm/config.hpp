#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include <json.hpp>

namespace ebm {

/// Hyperparameters for bagged round-robin boosting. One epoch is one pass over every term.
struct TrainConfig {
   /// validation_fraction value meaning "validate on each bag's out-of-bag rows".
   static constexpr double kOutOfBag = -1.0;

   double learning_rate = 0.01;
   std::size_t max_epochs = 5000;
   std::size_t outer_bags = 8;
   std::size_t inner_bags = 0;
   std::size_t max_bins = 256;
   std::size_t max_leaves = 3;
   std::size_t n_interactions = 0;
   double validation_fraction = 0.15;
   std::size_t early_stop_patience = 50;
   std::size_t min_samples_leaf = 2;
   std::uint64_t seed = 42;

   /// Default preset: tuned for speed.
   static TrainConfig fast();
   /// 100 inner bags, 100 outer bags, 5000 epochs, learning rate 0.01.
   static TrainConfig reference();
   /// fast() with 10 pairwise interactions and 256 bins.
   static TrainConfig benchmark();
   /// Looks up "fast", "reference" or "benchmark"; throws ConfigError otherwise.
   static TrainConfig preset(std::string_view name);

   bool out_of_bag_validation() const noexcept { return validation_fraction < 0.0; }

   /// Throws ConfigError naming the first invalid field.
   void validate() const;

   friend bool operator==(const TrainConfig &, const TrainConfig &) = default;
};

template<typename Json>
void to_json(Json & j, const TrainConfig & config) {
   j = Json{
      {"learning_rate", config.learning_rate},
      {"max_epochs", config.max_epochs},
      {"outer_bags", config.outer_bags},
      {"inner_bags", config.inner_bags},
      {"max_bins", config.max_bins},
      {"max_leaves", config.max_leaves},
      {"n_interactions", config.n_interactions},
      {"early_stop_patience", config.early_stop_patience},
      {"min_samples_leaf", config.min_samples_leaf},
      {"seed", config.seed},
   };
   if(config.out_of_bag_validation()) {
      j["validation_fraction"] = "auto";
   } else {
      j["validation_fraction"] = config.validation_fraction;
   }
}

template<typename Json>
void from_json(const Json & j, TrainConfig & config) {
   config = TrainConfig{};
   config.learning_rate = j.value("learning_rate", config.learning_rate);
   config.max_epochs = j.value("max_epochs", config.max_epochs);
   config.outer_bags = j.value("outer_bags", config.outer_bags);
   config.inner_bags = j.value("inner_bags", config.inner_bags);
   config.max_bins = j.value("max_bins", config.max_bins);
   config.max_leaves = j.value("max_leaves", config.max_leaves);
   config.n_interactions = j.value("n_interactions", config.n_interactions);
   config.early_stop_patience = j.value("early_stop_patience", config.early_stop_patience);
   config.min_samples_leaf = j.value("min_samples_leaf", config.min_samples_leaf);
   config.seed = j.value("seed", config.seed);
   if(const auto it = j.find("validation_fraction"); it != j.end()) {
      config.validation_fraction = it->is_string() ? TrainConfig::kOutOfBag : it->template get<double>();
   }
}


} // namespace ebm
