#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mtk/ptf/shapes.hpp"

namespace mtk::ptf {

inline constexpr int kModelConfigVersion = 1;

enum class EncoderKind { kT5, kPtf };
enum class FfnForm { kGated, kLiteral };

/// T5-style (v1.1) transformer stack: bias-free projections, RMS norms.
struct TransformerStackConfig {
  int layers = 8;
  int d_model = 512;
  int heads = 6;
  int head_dim = 64;
  int d_ff = 1024;
  bool gated_ffn = true;
};

struct MoEConfig {
  bool enabled = false;
  int experts = 8;
  int top_k = 2;
  int expert_dim = 928;
};

struct PtfConfig {
  int latents = 26;
  int latent_dim = 128;
  int heads = 8;
  int iterations = 3;
  int spectral_channels = 128;
  int feature_dim = 128;
  int ffn_dim = 512;
  FfnForm ffn_form = FfnForm::kGated;
  int pre_encoder_in_channels = 1;
  PreEncoderSpec pre_encoder;
  MoEConfig moe;
};

struct ModelConfig {
  std::string name;
  EncoderKind encoder = EncoderKind::kT5;
  int input_dim = 512;
  TransformerStackConfig t5_encoder;
  PtfConfig ptf;
  TransformerStackConfig decoder;
  int vocab_size = 595;
  int output_channels = 1;

  static ModelConfig ymt3();
  static ModelConfig yptf();
  static ModelConfig yptf_moe();
  /// "ymt3", "yptf" or "yptf_moe". Throws ContractError otherwise.
  static ModelConfig preset(const std::string& name);

  void validate() const;
};

struct ParamCount {
  std::uint64_t total = 0;
  std::uint64_t encoder = 0;
  std::uint64_t decoder = 0;
  /// Parameters touched per token: only top_k experts per MoE layer.
  std::uint64_t active = 0;
  int encoder_layers = 0;
  int decoder_layers = 0;
  std::vector<std::pair<std::string, std::uint64_t>> components;
};

std::uint64_t linear_params(std::uint64_t in, std::uint64_t out, bool bias = false);

/// Closed-form parameter totals. The encoder excludes the pre-encoder and the
/// encoder-to-decoder projection; the decoder includes its token embedding
/// but not the LM head. Throws ContractError on an inconsistent config.
ParamCount count_parameters(const ModelConfig& cfg);

std::string to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const std::string& json);

/// Reads the versioned model config file ({"version", "models": {...}}).
std::vector<ModelConfig> load_model_configs(const std::string& path);

/// Hex FNV-1a hash of the canonical JSON of the built-in presets.
std::string config_schema_hash();

}  // namespace mtk::ptf
