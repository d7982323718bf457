#pragma once

#include <cstdint>
#include <vector>

#include "data/dataset.hpp"
#include "zoo/classifier.hpp"

namespace caa::zoo {

struct TrainingSchedule {
    int epochs = 64;
    double initial_lr = 0.1;
    double decay_factor = 0.1;
    std::vector<int> decay_epochs = {32, 48};
    double momentum = 0.9;
    double weight_decay = 5e-4;
    int batch_size = 250;
    std::uint64_t seed = 1;
    int max_train_samples = 0; // 0 = use all

    void validate() const;
};

struct TrainReport {
    std::vector<double> epoch_loss;
    double final_loss = 0.0;
    double seconds = 0.0;
};

// SGD with momentum on softmax cross-entropy. Divergence (non-finite loss)
// raises a training error naming the epoch.
TrainReport train_classifier(SplitClassifier& model, const data::StandardizedSet& data,
                             const TrainingSchedule& sched);

} // namespace caa::zoo
