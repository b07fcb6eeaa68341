#include "falcon/dream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace falcon {
namespace {

void check_plane(const Tensor& plane) {
    if (plane.rank() != 3)
        throw Error(ErrorKind::ShapeMismatch, "expected a channels x height x width tensor, got rank " +
                                                  std::to_string(plane.rank()));
    if (plane.dim(0) == 0 || plane.dim(1) == 0 || plane.dim(2) == 0)
        throw Error(ErrorKind::ShapeMismatch, "tensor has an empty dimension");
    for (float v : plane.data)
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteInput, "plane contains a non-finite value");
}

double elu(double z) { return z >= 0.0 ? z : std::exp(z) - 1.0; }

std::size_t clamp_index(long long v, std::size_t limit) {
    if (v < 0) return 0;
    if (v >= static_cast<long long>(limit)) return limit - 1;
    return static_cast<std::size_t>(v);
}

} // namespace

Tensor minmax_scaled(const Tensor& input) {
    if (input.data.empty())
        throw Error(ErrorKind::ShapeMismatch, "cannot rescale an empty tensor");
    for (float v : input.data)
        if (!std::isfinite(v))
            throw Error(ErrorKind::NonFiniteInput, "tensor contains a non-finite value");
    float lo = *std::min_element(input.data.begin(), input.data.end());
    float hi = *std::max_element(input.data.begin(), input.data.end());
    Tensor out;
    out.shape = input.shape;
    out.data.resize(input.data.size());
    if (hi > lo) {
        float span = hi - lo;
        for (std::size_t i = 0; i < input.data.size(); ++i)
            out.data[i] = (input.data[i] - lo) / span;
    }
    return out;
}

NeighborField neighborhood_affinity(const Tensor& plane, double lambda_elu, double eta_std,
                                    double epsilon) {
    check_plane(plane);
    if (!(lambda_elu >= 0.0))
        throw Error(ErrorKind::InvariantViolation, "lambda_elu must be >= 0");
    if (!(eta_std > 0.0))
        throw Error(ErrorKind::InvariantViolation, "eta_std must be > 0");
    if (!(epsilon > 0.0))
        throw Error(ErrorKind::InvariantViolation, "epsilon must be > 0");

    std::size_t channels = plane.dim(0);
    std::size_t height = plane.dim(1);
    std::size_t width = plane.dim(2);
    std::size_t pixels = height * width;

    // Channel-mean plane, used only for the local spread estimate.
    std::vector<double> mean(pixels, 0.0);
    for (std::size_t c = 0; c < channels; ++c) {
        const float* p = plane.data.data() + c * pixels;
        for (std::size_t i = 0; i < pixels; ++i) mean[i] += p[i];
    }
    for (std::size_t i = 0; i < pixels; ++i) mean[i] /= static_cast<double>(channels);

    NeighborField out;
    out.height = height;
    out.width = width;
    out.weights.resize(pixels * 8);

    for (std::size_t h = 0; h < height; ++h) {
        for (std::size_t w = 0; w < width; ++w) {
            // Population spread of the 3x3 patch (replicate padded, center
            // included, averaged over all 9 samples).
            double patch_sum = 0.0, patch_sq = 0.0;
            for (int dh = -1; dh <= 1; ++dh) {
                std::size_t nh = clamp_index(static_cast<long long>(h) + dh, height);
                for (int dw = -1; dw <= 1; ++dw) {
                    std::size_t nw = clamp_index(static_cast<long long>(w) + dw, width);
                    double v = mean[nh * width + nw];
                    patch_sum += v;
                    patch_sq += v * v;
                }
            }
            double patch_mean = patch_sum / 9.0;
            double variance = std::max(patch_sq / 9.0 - patch_mean * patch_mean, 0.0);
            double sigma = std::sqrt(variance);
            double scale = epsilon + eta_std * sigma;

            double* dst = out.weights.data() + (h * width + w) * 8;
            for (std::size_t dir = 0; dir < 8; ++dir) {
                std::size_t nh = clamp_index(static_cast<long long>(h) + kNeighborDh[dir], height);
                std::size_t nw = clamp_index(static_cast<long long>(w) + kNeighborDw[dir], width);
                double delta = 0.0;
                for (std::size_t c = 0; c < channels; ++c) {
                    const float* p = plane.data.data() + c * pixels;
                    delta += static_cast<double>(p[nh * width + nw]) - static_cast<double>(p[h * width + w]);
                }
                double term = delta + lambda_elu * elu(delta);
                dst[dir] = -term / scale;
            }
        }
    }
    return out;
}

NeighborField fuse_affinities(const NeighborField& rgb, const NeighborField* depth,
                              double alpha_rgb, double alpha_depth) {
    if (depth == nullptr && alpha_depth != 0.0)
        throw Error(ErrorKind::MissingDepthWithNonzeroWeight,
                    "depth field absent but alpha_depth is nonzero");
    if (depth != nullptr && (depth->height != rgb.height || depth->width != rgb.width))
        throw Error(ErrorKind::ShapeMismatch, "depth field dimensions do not match the rgb field");

    NeighborField out;
    out.height = rgb.height;
    out.width = rgb.width;
    out.weights.resize(rgb.weights.size());

    std::size_t pixels = rgb.height * rgb.width;
    for (std::size_t p = 0; p < pixels; ++p) {
        double raw[8];
        double peak = -1e300;
        for (std::size_t dir = 0; dir < 8; ++dir) {
            double v = alpha_rgb * rgb.weights[p * 8 + dir];
            if (depth != nullptr) v += alpha_depth * depth->weights[p * 8 + dir];
            if (!std::isfinite(v))
                throw Error(ErrorKind::NonFiniteInput, "fused affinity is not finite");
            raw[dir] = v;
            peak = std::max(peak, v);
        }
        double total = 0.0;
        for (double& v : raw) {
            v = std::exp(v - peak);
            total += v;
        }
        double* dst = out.weights.data() + p * 8;
        for (std::size_t dir = 0; dir < 8; ++dir) dst[dir] = raw[dir] / total;
    }
    return out;
}

SoftMask one_hot_mask(const LabelMask& mask, int k) {
    if (k < 1)
        throw Error(ErrorKind::InvariantViolation, "class count must be >= 1");
    SoftMask soft;
    soft.height = mask.height;
    soft.width = mask.width;
    soft.k = static_cast<std::size_t>(k);
    soft.probs.assign(mask.labels.size() * soft.k, 0.0);
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        int label = mask.labels[i];
        if (label < 0 || label >= k)
            throw Error(ErrorKind::InvariantViolation,
                        "label " + std::to_string(label) + " outside [0, k)");
        soft.probs[i * soft.k + static_cast<std::size_t>(label)] = 1.0;
    }
    return soft;
}

SoftMask diffuse_step(const SoftMask& soft, const NeighborField& fused) {
    if (soft.height != fused.height || soft.width != fused.width)
        throw Error(ErrorKind::ShapeMismatch, "soft mask and neighbor field dimensions differ");
    SoftMask next;
    next.height = soft.height;
    next.width = soft.width;
    next.k = soft.k;
    next.probs.assign(soft.probs.size(), 0.0);
    for (std::size_t h = 0; h < soft.height; ++h) {
        for (std::size_t w = 0; w < soft.width; ++w) {
            double* dst = next.probs.data() + (h * soft.width + w) * soft.k;
            for (std::size_t dir = 0; dir < 8; ++dir) {
                std::size_t nh = clamp_index(static_cast<long long>(h) + kNeighborDh[dir], soft.height);
                std::size_t nw = clamp_index(static_cast<long long>(w) + kNeighborDw[dir], soft.width);
                double weight = fused.at(h, w, dir);
                const double* src = soft.probs.data() + (nh * soft.width + nw) * soft.k;
                for (std::size_t c = 0; c < soft.k; ++c) dst[c] += weight * src[c];
            }
        }
    }
    return next;
}

LabelMask dream_refine(const LabelMask& mask, const NeighborField& fused, int t_ref) {
    if (t_ref < 0)
        throw Error(ErrorKind::InvariantViolation, "refinement step count must be >= 0");
    if (mask.height != fused.height || mask.width != fused.width)
        throw Error(ErrorKind::ShapeMismatch, "mask and neighbor field dimensions differ");
    if (t_ref == 0) return mask;

    int k = 0;
    for (int label : mask.labels) k = std::max(k, label + 1);
    SoftMask soft = one_hot_mask(mask, k);
    for (int t = 0; t < t_ref; ++t) soft = diffuse_step(soft, fused);

    LabelMask out;
    out.height = mask.height;
    out.width = mask.width;
    out.labels.resize(mask.labels.size());
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        const double* row = soft.probs.data() + i * soft.k;
        std::size_t best = 0;
        for (std::size_t c = 1; c < soft.k; ++c)
            if (row[c] > row[best]) best = c;
        out.labels[i] = static_cast<int>(best);
    }
    return out;
}

} // namespace falcon
