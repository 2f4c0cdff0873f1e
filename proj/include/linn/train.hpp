#pragma once

#include <ostream>
#include <string>

#include "linn/data_io.hpp"
#include "linn/model.hpp"

namespace linn {

struct TrainResult {
    double initial_val_loss = 0.0;  // before any update (logged as epoch 0)
    double first_val_loss = 0.0;    // after epoch 1
    double best_val_loss = 0.0;
    double final_val_loss = 0.0;
    int best_epoch = 0;
    std::string best_path;
    std::string final_path;
};

// Full training loop: per-batch AdamW on the combined waveform/phase loss
// with cosine-annealed learning rate, per-epoch train/validation logging,
// best-validation and final checkpoints.
TrainResult train_model(LinnModel<float>& model, const Dataset& dataset,
                        const std::string& checkpoint_path, std::ostream& log);

}  // namespace linn
