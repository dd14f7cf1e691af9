#include "seg/train.hpp"

#include <cmath>
#include <numeric>

#include "seg/loss.hpp"
#include "tensor/tape.hpp"

namespace slab {

namespace {

void check_sample(const Sample& s, const UNetConfig& cfg) {
    if (s.image.rank() != 3 || s.image.dim(0) != cfg.in_channels) {
        throw UsageError("train: sample image shape " + shape_to_string(s.image.shape()) +
                         " incompatible with model config");
    }
    if (s.mask.rank() != 2 || s.mask.dim(0) != s.image.dim(1) || s.mask.dim(1) != s.image.dim(2)) {
        throw UsageError("train: sample mask shape " + shape_to_string(s.mask.shape()) +
                         " does not match image");
    }
}

// Plain binary dice with the empty-empty-is-1 convention, local to the
// validation loop.
double mask_dice(const Tensor& a, const Tensor& b) {
    auto pa = a.data();
    auto pb = b.data();
    std::int64_t na = 0, nb = 0, ni = 0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        bool fa = pa[i] != 0.0f, fb = pb[i] != 0.0f;
        na += fa;
        nb += fb;
        ni += (fa && fb);
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(ni) / static_cast<double>(na + nb);
}

}  // namespace

double evaluate_dice(const SegModel& model, const Dataset& set, float threshold) {
    if (set.empty()) throw UsageError("evaluate_dice: empty dataset");
    double acc = 0.0;
    for (const Sample& s : set) {
        PredictedMask pred = predict_mask(model, s.image, threshold);
        acc += mask_dice(pred.mask, s.mask);
    }
    return acc / static_cast<double>(set.size());
}

TrainHistory train(SegModel& model, const Dataset& train_set, const Dataset& val_set,
                   const TrainSchedule& schedule, const EpochLogger& log) {
    if (schedule.epochs < 0) throw UsageError("train: negative epoch count");
    if (schedule.batch_size < 1) throw UsageError("train: batch_size must be >= 1");
    TrainHistory history;
    if (schedule.epochs == 0) return history;
    if (train_set.empty() || val_set.empty()) throw UsageError("train: datasets must be nonempty");
    for (const Sample& s : train_set) check_sample(s, model.config);
    for (const Sample& s : val_set) check_sample(s, model.config);

    const int h = train_set[0].image.dim(1);
    const int w = train_set[0].image.dim(2);
    const int c = model.config.in_channels;

    Rng shuffle_rng(schedule.shuffle_seed);
    Rng augment_rng(schedule.augment_seed);
    AdamState state(model);
    AdamConfig adam_cfg;
    if (schedule.optimizer == Optimizer::AdamW) adam_cfg.weight_decay = schedule.weight_decay;

    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        float lr = schedule.learning_rate;
        if (schedule.cosine_lr) {
            lr *= 0.5f * (1.0f + std::cos(3.14159265358979323846 * epoch / schedule.epochs));
        }
        shuffle_rng.shuffle(order);

        double loss_acc = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += schedule.batch_size) {
            const int b = static_cast<int>(
                std::min<std::size_t>(schedule.batch_size, order.size() - start));
            Tensor images = Tensor::zeros({b, c, h, w});
            Tensor targets = Tensor::zeros({b, 1, h, w});
            auto ip = images.mut_data();
            auto tp = targets.mut_data();
            const std::int64_t img_len = static_cast<std::int64_t>(c) * h * w;
            const std::int64_t mask_len = static_cast<std::int64_t>(h) * w;
            for (int i = 0; i < b; ++i) {
                const Sample& base = train_set[order[start + i]];
                Sample s = schedule.augment ? schedule.augment(base, augment_rng) : base;
                if (s.image.numel() != img_len || s.mask.numel() != mask_len) {
                    throw UsageError("train: augmentation changed the sample shape");
                }
                std::copy(s.image.data().begin(), s.image.data().end(), ip.begin() + i * img_len);
                std::copy(s.mask.data().begin(), s.mask.data().end(), tp.begin() + i * mask_len);
            }

            Tape tape;
            for (auto& [name, p] : model.params) tape.watch(p);
            Tensor probs = forward(model, images);
            Tensor target_view = targets;
            if (model.config.padding_mode == PaddingMode::Valid) {
                Footprint fp = output_footprint(model.config, h, w);
                target_view = crop2d(targets, fp.y0, fp.x0, fp.h, fp.w);
            }
            Tensor loss = dice_loss(probs, target_view);
            tape.backward(loss);
            std::vector<Tensor> grads;
            grads.reserve(model.params.size());
            for (auto& [name, p] : model.params) grads.push_back(tape.grad(p));
            state.step(model, grads, lr, adam_cfg);
            loss_acc += loss.item64();
            ++batches;
        }
        double epoch_loss = loss_acc / batches;
        double vdice = evaluate_dice(model, val_set);
        history.train_loss.push_back(epoch_loss);
        history.val_dice.push_back(vdice);
        if (log) log(epoch, epoch_loss, vdice);
    }
    return history;
}

}  // namespace slab
