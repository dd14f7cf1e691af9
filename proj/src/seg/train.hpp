#pragma once

#include <functional>

#include "core/rng.hpp"
#include "data/sample.hpp"
#include "seg/optim.hpp"
#include "seg/unet.hpp"

namespace slab {

enum class Optimizer { Adam, AdamW };

struct TrainSchedule {
    Optimizer optimizer = Optimizer::Adam;
    float learning_rate = 1e-3f;
    float weight_decay = 0.0f;  // used by AdamW
    bool cosine_lr = false;
    int epochs = 30;
    int batch_size = 16;
    std::uint64_t shuffle_seed = 0;
    std::uint64_t augment_seed = 0;
    // Applied on-the-fly per sample each epoch; empty means none.
    std::function<Sample(const Sample&, Rng&)> augment;
};

struct TrainHistory {
    std::vector<double> train_loss;  // per-epoch mean dice loss
    std::vector<double> val_dice;    // per-epoch mean validation dice
};

using EpochLogger = std::function<void(int epoch, double loss, double val_dice)>;

// Epochs of seeded-shuffled mini-batches with soft-Dice loss. The model is
// updated in place; (seed, data, schedule) fully determine the result.
TrainHistory train(SegModel& model, const Dataset& train_set, const Dataset& val_set,
                   const TrainSchedule& schedule, const EpochLogger& log = {});

// Mean dice of thresholded predictions against ground truth.
double evaluate_dice(const SegModel& model, const Dataset& set, float threshold = 0.5f);

}  // namespace slab
