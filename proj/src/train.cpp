#include "linn/train.hpp"

#include <cmath>
#include <numeric>

#include "linn/optim.hpp"

namespace linn {

namespace {

AudioF chunk_reference(const TrainingChunk& chunk, int fs) {
    AudioF ref(fs, 2, static_cast<int64_t>(chunk.binaural_l.size()));
    ref.channels[0] = chunk.binaural_l;
    ref.channels[1] = chunk.binaural_r;
    return ref;
}

double validation_loss(LinnModel<float>& model, const std::vector<TrainingChunk>& chunks) {
    if (chunks.empty()) return 0.0;
    const RunConfig& cfg = model.config();
    double sum = 0.0;
    for (const auto& chunk : chunks) {
        auto trace = model.forward_chunk(chunk.mono, chunk.knots);
        auto res = training_loss(trace.output, chunk_reference(chunk, cfg.fs), cfg.loss, cfg.stft);
        sum += res.value;
    }
    return sum / static_cast<double>(chunks.size());
}

}  // namespace

TrainResult train_model(LinnModel<float>& model, const Dataset& dataset,
                        const std::string& checkpoint_path, std::ostream& log) {
    const RunConfig& cfg = model.config();
    cfg.validate();

    std::vector<TrainingChunk> train_chunks, val_chunks;
    for (const auto& id : dataset.split.train) {
        auto cs = make_chunks(dataset.item_by_id(id), cfg.chunk_len, 0, cfg);
        train_chunks.insert(train_chunks.end(), cs.begin(), cs.end());
    }
    for (const auto& id : dataset.split.val) {
        auto cs = make_chunks(dataset.item_by_id(id), cfg.chunk_len, 0, cfg);
        val_chunks.insert(val_chunks.end(), cs.begin(), cs.end());
    }
    if (train_chunks.empty())
        throw ConfigError("train: no training chunks (empty dataset or chunk_len too long)");

    Adamw<float> opt(cfg.adamw_config());
    LrSchedule sched = cfg.lr_schedule();
    auto params = model.trainable_params();
    Rng order_rng(cfg.train.seed ^ 0xd1b54a32d192ed03ULL);

    TrainResult result;
    result.initial_val_loss = validation_loss(model, val_chunks);
    log << "epoch=0 lr=0 train_loss=nan val_loss=" << result.initial_val_loss << "\n" << std::flush;
    result.best_val_loss = result.initial_val_loss;
    result.best_path = checkpoint_path + ".best";
    result.final_path = checkpoint_path;

    std::vector<size_t> order(train_chunks.size());
    std::iota(order.begin(), order.end(), size_t{0});

    for (int epoch = 0; epoch < cfg.train.epochs; ++epoch) {
        double lr = cosine_lr(epoch, sched);
        Rng epoch_rng = order_rng.fork(static_cast<uint64_t>(epoch));
        epoch_rng.shuffle(order.begin(), order.end());

        double train_sum = 0.0;
        for (size_t pos = 0; pos < order.size();) {
            size_t batch_n = std::min<size_t>(static_cast<size_t>(cfg.train.batch_size),
                                              order.size() - pos);
            model.zero_grads();
            for (size_t j = 0; j < batch_n; ++j, ++pos) {
                const TrainingChunk& chunk = train_chunks[order[pos]];
                auto trace = model.forward_chunk(chunk.mono, chunk.knots);
                AudioF d_y;
                auto res = training_loss(trace.output, chunk_reference(chunk, cfg.fs), cfg.loss,
                                         cfg.stft, &d_y);
                if (!std::isfinite(res.value))
                    throw InternalError("train: non-finite loss at epoch " +
                                        std::to_string(epoch + 1) + ", item " + chunk.item_id +
                                        ", lr=" + std::to_string(lr));
                train_sum += res.value;
                float scale = 1.0f / static_cast<float>(batch_n);
                for (auto& ch : d_y.channels)
                    for (auto& v : ch) v *= scale;
                model.backward_chunk(trace, d_y);
            }
            opt.step(params, lr);
        }

        double train_loss = train_sum / static_cast<double>(order.size());
        double val_loss = validation_loss(model, val_chunks);
        log << "epoch=" << (epoch + 1) << " lr=" << lr << " train_loss=" << train_loss
            << " val_loss=" << val_loss << "\n"
            << std::flush;

        if (epoch == 0) result.first_val_loss = val_loss;
        if (val_chunks.empty() ? false : val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch + 1;
            save_checkpoint(result.best_path, model);
        }
        result.final_val_loss = val_loss;
    }

    save_checkpoint(result.final_path, model);
    if (result.best_epoch == 0) {  // validation never improved (or no val split)
        save_checkpoint(result.best_path, model);
        result.best_val_loss = result.final_val_loss;
    }
    return result;
}

}  // namespace linn
