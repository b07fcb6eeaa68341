#pragma once

#include <cstddef>
#include <vector>

#include "falcon/solver.hpp"
#include "falcon/tensor_io.hpp"

namespace falcon {

// Row-major grid of cluster labels.
struct LabelMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<int> labels;

    int at(std::size_t h, std::size_t w) const { return labels[h * width + w]; }
    int& at(std::size_t h, std::size_t w) { return labels[h * width + w]; }
};

// Per-partition mean feature vectors (k x channels row-major). populated[c]
// is false iff partition c owns no pixels; its center is then all-zero.
struct PartitionCenters {
    std::size_t k = 0;
    std::size_t channels = 0;
    std::vector<double> centers;
    std::vector<char> populated;

    double at(std::size_t c, std::size_t ch) const { return centers[c * channels + ch]; }
};

// Hardens a soft assignment into a grid mask: label = argmax over clusters,
// ties toward the smallest index; node i sits at (i / grid_w, i % grid_w).
LabelMask argmax_mask(const SoftAssignment& asg, std::size_t grid_h, std::size_t grid_w);

// Nearest-neighbor upsampling: output(h, w) = input(h*in_h/out_h, w*in_w/out_w)
// with floor division, so exact integer ratios replicate cells into blocks.
// Output dimensions must not shrink the input.
LabelMask upsample_nearest(const LabelMask& mask, std::size_t out_h, std::size_t out_w);

// Bilinear upsampling of a channels x H x W tensor with half-pixel-centered
// sampling: source coordinate = (dst + 0.5) * in/out - 0.5, clamped to the
// valid range so borders replicate.
Tensor upsample_bilinear(const Tensor& features, std::size_t out_h, std::size_t out_w);

// Mean feature vector per label over a channels x H x W tensor. Labels must
// lie in [0, k); partitions without pixels come back unpopulated.
PartitionCenters feature_centers(const Tensor& features, const LabelMask& mask, int k);

// Relabels every pixel to the populated partition whose center has the
// largest dot product with the pixel's feature vector, ties toward the
// smallest index. Unpopulated partitions never win.
LabelMask refine_by_similarity(const Tensor& features, const PartitionCenters& centers);

} // namespace falcon
