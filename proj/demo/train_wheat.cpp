// Copyright 2026 The cropml Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trains ANN-GWO and plain backprop on synthetic wheat data and prints test
// accuracy for both.

#include <cstdio>

#include "cropml/data.hpp"
#include "cropml/hybrid.hpp"

int main() {
  using namespace cropml;
  const Dataset wheat = synthesize(/*seed=*/3, /*n_per_crop=*/30, /*noise_sd=*/0.02).filter_crop("wheat");
  const auto split = split_by_year(wheat, SplitSpec{});

  HybridConfig config;
  config.seed = 7;
  config.network = {8, 3, 1, 0.1};

  for (Method method : {Method::kAnnGwo, Method::kBackprop}) {
    const TrainedModel model = train_method(method, split.train, config);
    const MetricsRow row = evaluate(model, split.test);
    std::printf("%-8s R=%.4f MAE%%=%.3f RMSE=%.4f (n=%zu, %zu backprop epochs)\n",
                std::string(method_name(method)).c_str(), row.r, row.mae_pct, row.rmse, row.n,
                model.history.stopped_epoch);
  }
}
