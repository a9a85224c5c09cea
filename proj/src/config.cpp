#include "ebm/config.hpp"

#include <cmath>
#include <string>

#include "ebm/error.hpp"

namespace ebm {

TrainConfig TrainConfig::fast() {
   return TrainConfig{};
}

TrainConfig TrainConfig::reference() {
   TrainConfig config;
   config.inner_bags = 100;
   config.outer_bags = 100;
   config.max_epochs = 5000;
   config.learning_rate = 0.01;
   return config;
}

TrainConfig TrainConfig::benchmark() {
   TrainConfig config;
   config.n_interactions = 10;
   config.max_bins = 256;
   return config;
}

TrainConfig TrainConfig::preset(std::string_view name) {
   if(name == "fast") {
      return fast();
   }
   if(name == "reference") {
      return reference();
   }
   if(name == "benchmark") {
      return benchmark();
   }
   throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
   if(!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw ConfigError("learning_rate", "must be a finite value > 0");
   }
   if(outer_bags < 1) {
      throw ConfigError("outer_bags", "must be >= 1");
   }
   if(max_bins < 2) {
      throw ConfigError("max_bins", "must be >= 2");
   }
   if(max_leaves < 1) {
      throw ConfigError("max_leaves", "must be >= 1");
   }
   if(!out_of_bag_validation() && !(validation_fraction >= 0.0 && validation_fraction <= 0.5)) {
      throw ConfigError("validation_fraction", "must be in [0, 0.5] or auto");
   }
}

} // namespace ebm
