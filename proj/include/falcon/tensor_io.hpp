#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "falcon/error.hpp"

namespace falcon {

// Dense row-major float tensor. An empty shape is a scalar holding one value.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<float> data;

    std::size_t size() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }
};

// Every knob of the partitioning pipeline in one place. Values are validated
// together because some constraints couple fields.
struct PipelineConfig {
    int k_clusters = 32;
    double alpha_power = 4.5;
    double lambda_affinity = 0.0;
    double beta_reweight = 1.0;
    int t_cuts = 50;
    double epsilon = 1e-8;
    std::uint64_t seed = 0;
    double softmax_temperature = 1.0;
    double eta_std = 0.1;
    double lambda_elu = 1.0;
    double alpha_rgb = 0.7;
    double alpha_depth = 0.3;
    int t_ref = 10;
    double objective_tol = 1e-7;
};

// Throws InvariantViolation naming the offending field.
void validate_config(const PipelineConfig& config);

// Reads a little-endian float32 C-order NPY (format version 1.0) file.
Tensor read_npy(const std::string& path);

// Writes the same subset of the NPY format read_npy accepts.
void write_npy(const std::string& path, const Tensor& tensor);

// Writes a binary PGM (P5, maxval 255). Labels are given row-major.
void write_pgm(const std::string& path, const std::vector<int>& labels,
               std::size_t height, std::size_t width);

// Parses a flat JSON object of config overrides on top of defaults.
PipelineConfig load_config(const std::string& path);
PipelineConfig parse_config(const std::string& json_text);

} // namespace falcon
