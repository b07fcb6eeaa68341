#include "falcon/maskgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace falcon {
namespace {

void check_plane_tensor(const Tensor& features) {
    if (features.rank() != 3)
        throw Error(ErrorKind::ShapeMismatch, "expected a channels x height x width tensor, got rank " +
                                                  std::to_string(features.rank()));
    if (features.dim(0) == 0 || features.dim(1) == 0 || features.dim(2) == 0)
        throw Error(ErrorKind::ShapeMismatch, "tensor has an empty dimension");
}

} // namespace

LabelMask argmax_mask(const SoftAssignment& asg, std::size_t grid_h, std::size_t grid_w) {
    if (grid_h == 0 || grid_w == 0 || grid_h * grid_w != asg.n)
        throw Error(ErrorKind::ShapeMismatch,
                    "grid " + std::to_string(grid_h) + "x" + std::to_string(grid_w) +
                        " does not hold " + std::to_string(asg.n) + " nodes");
    LabelMask mask;
    mask.height = grid_h;
    mask.width = grid_w;
    mask.labels.resize(asg.n);
    for (std::size_t i = 0; i < asg.n; ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < asg.k; ++c)
            if (asg.at(i, c) > asg.at(i, best)) best = c;
        mask.labels[i] = static_cast<int>(best);
    }
    return mask;
}

LabelMask upsample_nearest(const LabelMask& mask, std::size_t out_h, std::size_t out_w) {
    if (out_h < mask.height || out_w < mask.width)
        throw Error(ErrorKind::ShapeMismatch, "nearest upsampling cannot shrink the mask");
    LabelMask out;
    out.height = out_h;
    out.width = out_w;
    out.labels.resize(out_h * out_w);
    for (std::size_t h = 0; h < out_h; ++h) {
        std::size_t sh = h * mask.height / out_h;
        for (std::size_t w = 0; w < out_w; ++w) {
            std::size_t sw = w * mask.width / out_w;
            out.labels[h * out_w + w] = mask.labels[sh * mask.width + sw];
        }
    }
    return out;
}

Tensor upsample_bilinear(const Tensor& features, std::size_t out_h, std::size_t out_w) {
    check_plane_tensor(features);
    std::size_t channels = features.dim(0);
    std::size_t in_h = features.dim(1);
    std::size_t in_w = features.dim(2);
    if (out_h == 0 || out_w == 0)
        throw Error(ErrorKind::ShapeMismatch, "output dimensions must be positive");

    Tensor out;
    out.shape = {channels, out_h, out_w};
    out.data.resize(channels * out_h * out_w);

    double scale_h = static_cast<double>(in_h) / static_cast<double>(out_h);
    double scale_w = static_cast<double>(in_w) / static_cast<double>(out_w);
    for (std::size_t h = 0; h < out_h; ++h) {
        double sy = (static_cast<double>(h) + 0.5) * scale_h - 0.5;
        sy = std::clamp(sy, 0.0, static_cast<double>(in_h - 1));
        std::size_t y0 = static_cast<std::size_t>(sy);
        std::size_t y1 = std::min(y0 + 1, in_h - 1);
        double fy = sy - static_cast<double>(y0);
        for (std::size_t w = 0; w < out_w; ++w) {
            double sx = (static_cast<double>(w) + 0.5) * scale_w - 0.5;
            sx = std::clamp(sx, 0.0, static_cast<double>(in_w - 1));
            std::size_t x0 = static_cast<std::size_t>(sx);
            std::size_t x1 = std::min(x0 + 1, in_w - 1);
            double fx = sx - static_cast<double>(x0);
            for (std::size_t c = 0; c < channels; ++c) {
                const float* plane = features.data.data() + c * in_h * in_w;
                double top = plane[y0 * in_w + x0] * (1.0 - fx) + plane[y0 * in_w + x1] * fx;
                double bottom = plane[y1 * in_w + x0] * (1.0 - fx) + plane[y1 * in_w + x1] * fx;
                out.data[(c * out_h + h) * out_w + w] =
                    static_cast<float>(top * (1.0 - fy) + bottom * fy);
            }
        }
    }
    return out;
}

PartitionCenters feature_centers(const Tensor& features, const LabelMask& mask, int k) {
    check_plane_tensor(features);
    if (k < 1)
        throw Error(ErrorKind::InvariantViolation, "partition count must be >= 1");
    std::size_t channels = features.dim(0);
    std::size_t height = features.dim(1);
    std::size_t width = features.dim(2);
    if (mask.height != height || mask.width != width)
        throw Error(ErrorKind::ShapeMismatch, "mask dimensions do not match the feature planes");

    PartitionCenters out;
    out.k = static_cast<std::size_t>(k);
    out.channels = channels;
    out.centers.assign(out.k * channels, 0.0);
    out.populated.assign(out.k, 0);
    std::vector<double> counts(out.k, 0.0);

    for (std::size_t h = 0; h < height; ++h) {
        for (std::size_t w = 0; w < width; ++w) {
            int label = mask.at(h, w);
            if (label < 0 || label >= k)
                throw Error(ErrorKind::InvariantViolation,
                            "label " + std::to_string(label) + " outside [0, k)");
            counts[label] += 1.0;
            double* center = out.centers.data() + static_cast<std::size_t>(label) * channels;
            for (std::size_t c = 0; c < channels; ++c)
                center[c] += features.data[(c * height + h) * width + w];
        }
    }
    for (std::size_t c = 0; c < out.k; ++c) {
        if (counts[c] > 0.0) {
            out.populated[c] = 1;
            double* center = out.centers.data() + c * channels;
            for (std::size_t ch = 0; ch < channels; ++ch) center[ch] /= counts[c];
        }
    }
    return out;
}

LabelMask refine_by_similarity(const Tensor& features, const PartitionCenters& centers) {
    check_plane_tensor(features);
    std::size_t channels = features.dim(0);
    std::size_t height = features.dim(1);
    std::size_t width = features.dim(2);
    if (centers.channels != channels)
        throw Error(ErrorKind::ShapeMismatch, "center width does not match the channel count");
    bool any = false;
    for (char p : centers.populated) any = any || p;
    if (!any)
        throw Error(ErrorKind::NoPopulatedPartition, "no partition owns any pixel");

    LabelMask out;
    out.height = height;
    out.width = width;
    out.labels.resize(height * width);
    for (std::size_t h = 0; h < height; ++h) {
        for (std::size_t w = 0; w < width; ++w) {
            int best = -1;
            double best_score = 0.0;
            for (std::size_t c = 0; c < centers.k; ++c) {
                if (!centers.populated[c]) continue;
                double score = 0.0;
                for (std::size_t ch = 0; ch < channels; ++ch)
                    score += features.data[(ch * height + h) * width + w] * centers.at(c, ch);
                if (best < 0 || score > best_score) {
                    best = static_cast<int>(c);
                    best_score = score;
                }
            }
            out.labels[h * width + w] = best;
        }
    }
    return out;
}

} // namespace falcon
