#include "probes/model_probes.hpp"

#include <cmath>
#include <map>

#include "core/error.hpp"
#include "image/image_ops.hpp"
#include "probes/metrics.hpp"
#include "tensor/ops.hpp"
#include "tensor/tape.hpp"

namespace slab::probes {

PairedEvalReport paired_shortcut_eval(const SegModel& model, const Dataset& marked,
                                      const Dataset& clean, float threshold) {
    std::map<std::string, const Sample*> clean_by_id;
    for (const Sample& s : clean) clean_by_id[s.id] = &s;
    if (clean_by_id.size() != clean.size()) {
        throw UsageError("paired_shortcut_eval: duplicate ids in the clean set");
    }
    if (marked.size() != clean.size()) {
        throw UsageError("paired_shortcut_eval: marked and clean sets differ in size");
    }
    PairedEvalReport report;
    for (const Sample& m : marked) {
        auto it = clean_by_id.find(m.id);
        if (it == clean_by_id.end()) {
            throw UsageError("paired_shortcut_eval: unpaired id '" + m.id + "'");
        }
        const Sample& c = *it->second;
        PairedEvalReport::Row row;
        row.id = m.id;
        row.dice_marked = dice(predict_mask(model, m.image, threshold).mask, m.mask);
        row.dice_clean = dice(predict_mask(model, c.image, threshold).mask, c.mask);
        report.rows.push_back(std::move(row));
    }
    finalize(report);
    return report;
}

StabilityReport frame_stability(const SegModel& model, const std::vector<FrameSequence>& sequences,
                                float threshold) {
    StabilityReport report;
    for (const FrameSequence& seq : sequences) {
        if (seq.frames.size() < 2) {
            throw UsageError("frame_stability: sequence '" + seq.id + "' has fewer than 2 frames");
        }
        std::vector<Tensor> masks;
        masks.reserve(seq.frames.size());
        for (const Tensor& frame : seq.frames) {
            masks.push_back(predict_mask(model, frame, threshold).mask);
        }
        StabilityReport::Video video;
        video.id = seq.id;
        for (const Tensor& m : masks) video.dice_to_final.push_back(dice(m, masks.back()));
        report.videos.push_back(std::move(video));
    }
    finalize(report);
    return report;
}

SweepReport translation_sweep(const SegModel& model, const phantom::SceneSpec& spec, int n_steps,
                              std::uint64_t seed, float threshold) {
    if (n_steps < 2) throw UsageError("translation_sweep: need at least 2 steps");
    Rng rng(seed);
    phantom::SceneParams params = phantom::draw_scene_params(spec, rng);

    // The rotated ellipse's half-extents fix the terminal position: tangent
    // to the right and bottom borders at once.
    const double c = std::cos(params.theta), s = std::sin(params.theta);
    const double ex =
        std::sqrt(params.axis_a * params.axis_a * c * c + params.axis_b * params.axis_b * s * s);
    const double ey =
        std::sqrt(params.axis_a * params.axis_a * s * s + params.axis_b * params.axis_b * c * c);
    const double mid = spec.size / 2.0;
    const double cx_end = spec.size - ex;
    const double cy_end = spec.size - ey;
    if (cx_end <= mid || cy_end <= mid) throw UsageError("translation_sweep: lesion too big to move");

    SweepReport report;
    for (int i = 0; i < n_steps; ++i) {
        const double frac = static_cast<double>(i) / (n_steps - 1);
        const double cx = mid + frac * (cx_end - mid);
        const double cy = mid + frac * (cy_end - mid);
        phantom::Scene scene = phantom::render_scene(params, cx, cy);
        Tensor image = quantize8(scene.image);
        Tensor pred = predict_mask(model, image, threshold).mask;

        auto pp = pred.data();
        auto pg = scene.mask.data();
        std::int64_t n_gt = 0, n_hit = 0;
        for (std::size_t k = 0; k < pp.size(); ++k) {
            const bool fg = pg[k] != 0.0f;
            n_gt += fg;
            n_hit += fg && pp[k] != 0.0f;
        }
        SweepReport::Step step;
        step.index = i;
        step.offset_frac = frac;
        step.offset_px = std::hypot(cx - mid, cy - mid);
        step.center_x = cx;
        step.center_y = cy;
        step.recall = n_gt ? static_cast<double>(n_hit) / static_cast<double>(n_gt) : 0.0;
        step.dice = dice(pred, scene.mask);
        report.steps.push_back(step);
    }
    return report;
}

namespace {

Tensor as_batch(const Tensor& image) {
    if (image.rank() != 3) throw UsageError("saliency: expected [C,H,W] image");
    Tensor batch = Tensor::zeros({1, image.dim(0), image.dim(1), image.dim(2)});
    std::copy(image.data().begin(), image.data().end(), batch.mut_data().begin());
    return batch;
}

}  // namespace

Tensor saliency_map(const SegModel& model, const Tensor& image) {
    Tensor batch = as_batch(image);
    Tape tape;
    tape.watch(batch);
    ForwardTrace trace = forward_trace(model, batch);
    tape.backward(sum(trace.logits));
    Tensor grad = tape.grad(batch);

    const int c = image.dim(0), h = image.dim(1), w = image.dim(2);
    Tensor out = Tensor::zeros({h, w});
    auto g = grad.data();
    auto po = out.mut_data();
    const std::int64_t plane = static_cast<std::int64_t>(h) * w;
    for (std::int64_t i = 0; i < plane; ++i) {
        double acc = 0;
        for (int ci = 0; ci < c; ++ci) {
            acc += static_cast<double>(g[ci * plane + i]) * g[ci * plane + i];
        }
        po[i] = static_cast<float>(std::sqrt(acc));
    }
    return out;
}

Tensor saliency_cam(const SegModel& model, const Tensor& image) {
    Tensor batch = as_batch(image);
    Tape tape;
    tape.watch(batch);
    ForwardTrace trace = forward_trace(model, batch);
    tape.backward(sum(trace.logits));
    Tensor grad = tape.grad(trace.bottleneck);  // [1,C',h',w']

    const int cc = trace.bottleneck.dim(1);
    const int bh = trace.bottleneck.dim(2), bw = trace.bottleneck.dim(3);
    const std::int64_t plane = static_cast<std::int64_t>(bh) * bw;
    auto act = trace.bottleneck.data();
    auto g = grad.data();
    Tensor cam = Tensor::zeros({bh, bw});
    auto pc = cam.mut_data();
    for (int ci = 0; ci < cc; ++ci) {
        double weight = 0;
        for (std::int64_t i = 0; i < plane; ++i) weight += g[ci * plane + i];
        weight /= static_cast<double>(plane);
        for (std::int64_t i = 0; i < plane; ++i) {
            pc[i] += static_cast<float>(weight * act[ci * plane + i]);
        }
    }
    for (float& v : cam.mut_data()) v = v > 0.0f ? v : 0.0f;
    return resize_bilinear(cam, image.dim(1), image.dim(2));
}

}  // namespace slab::probes
