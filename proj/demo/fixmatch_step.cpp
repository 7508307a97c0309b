// Runs a short FixMatch training loop on the synthetic task and prints one
// JSON loss report per evaluation, then the test IoU of the best EMA model.

#include <cstdlib>
#include <iostream>

#include "terrasemi/terrasemi.hpp"

int main(int argc, char** argv) {
  using namespace terrasemi;
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 1;

  const SegmentationDataset data = synthetic_dataset(SyntheticConfig{}, seed);
  TrainConfig cfg = synthetic_train_config();
  cfg.total_steps = 300;
  cfg.threads = threads_from_env(1);

  const TrainResult r = run_training(data, cfg, seed);
  for (const auto& rep : r.curve) std::cout << to_json(rep).dump() << "\n";
  std::cout << "best step " << r.best_step << ", val IoU " << r.best_val << ", test IoU " << r.test_metric
            << "\n";
}
