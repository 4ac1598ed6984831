#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ucrs/model/layout.hpp"

namespace ucrs::model {

enum class ModelKind { FM, NFM };

const char* kind_name(ModelKind kind);
ModelKind parse_kind(const std::string& name);

/// FM parameters, plus the NFM head when kind == NFM:
/// hidden = ReLU(W1 * bi + b1), out = w2 . hidden.
struct ModelParams {
  ModelKind kind = ModelKind::FM;
  FeatureLayout layout;
  std::size_t dim = 64;
  std::size_t hidden = 0;

  double bias = 0.0;
  std::vector<double> linear;      // F
  std::vector<double> embeddings;  // F x dim, row-major
  std::vector<double> w1;          // hidden x dim, row-major
  std::vector<double> b1;          // hidden
  std::vector<double> w2;          // hidden

  const double* embedding(FeatureIndex f) const { return embeddings.data() + f * dim; }
  double* embedding(FeatureIndex f) { return embeddings.data() + f * dim; }

  bool all_finite() const;
  bool operator==(const ModelParams&) const = default;
};

/// Zero linear part and bias; embeddings ~ N(0, init_scale^2); the NFM hidden
/// layer uses Glorot-uniform weights and zero bias, the output layer N(0, 1/hidden).
ModelParams init_params(const FeatureLayout& layout, ModelKind kind, std::size_t dim,
                        std::size_t hidden, double init_scale, std::uint64_t seed);

/// Arrays as float32 little-endian after a JSON header. Values are rounded to
/// float on save.
void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace ucrs::model
