#pragma once

#include <cstddef>
#include <vector>

#include "falcon/maskgen.hpp"
#include "falcon/tensor_io.hpp"

namespace falcon {

// Per-pixel weights over the 8-connected neighborhood, stored pixel-major in
// the fixed direction order NW, N, NE, W, E, SW, S, SE.
struct NeighborField {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> weights; // height*width*8

    double at(std::size_t h, std::size_t w, std::size_t dir) const {
        return weights[(h * width + w) * 8 + dir];
    }
};

// Per-pixel cluster probability vectors; each pixel's entries stay on the
// probability simplex through diffusion.
struct SoftMask {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t k = 0;
    std::vector<double> probs; // height*width*k

    double at(std::size_t h, std::size_t w, std::size_t c) const {
        return probs[(h * width + w) * k + c];
    }
};

// Row/column offsets for the 8 directions, in field order.
inline constexpr int kNeighborDh[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
inline constexpr int kNeighborDw[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

// Rescales a tensor affinely onto [0, 1]; a constant tensor maps to all
// zeros. Used to bring metric depth onto a unit range before affinity
// computation.
Tensor minmax_scaled(const Tensor& input);

// Raw directional affinities of a channels x height x width plane: for each
// pixel and direction, delta = channel-summed difference to the (replicate
// padded) neighbor, term = delta + lambda_elu * ELU(delta), and the output is
// -term / (epsilon + eta_std * sigma) where sigma is the population standard
// deviation of the channel-mean plane over the pixel's 3x3 neighborhood.
NeighborField neighborhood_affinity(const Tensor& plane, double lambda_elu, double eta_std,
                                    double epsilon);

// Combines alpha_rgb * rgb + alpha_depth * depth (depth may be absent only
// when alpha_depth is 0) and normalizes each pixel's 8 weights with a
// softmax, making every pixel a convex combination over its neighbors.
NeighborField fuse_affinities(const NeighborField& rgb, const NeighborField* depth,
                              double alpha_rgb, double alpha_depth);

// One-hot encoding of a label mask with k classes.
SoftMask one_hot_mask(const LabelMask& mask, int k);

// One diffusion sweep: each pixel's probability vector becomes the
// fused-weighted combination of its 8 neighbors' vectors (replicate padded).
// Normalized weights make this simplex-preserving.
SoftMask diffuse_step(const SoftMask& soft, const NeighborField& fused);

// Runs t_ref diffusion sweeps over the one-hot encoding of the mask and
// hardens the result back to labels (argmax, ties toward the smallest index).
// t_ref = 0 returns the input mask unchanged.
LabelMask dream_refine(const LabelMask& mask, const NeighborField& fused, int t_ref);

} // namespace falcon
