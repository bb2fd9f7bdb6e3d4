#include "mtk/ptf/param_count.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "mtk/error.hpp"

namespace mtk::ptf {

ModelConfig ModelConfig::ymt3() {
  ModelConfig c;
  c.name = "ymt3";
  c.encoder = EncoderKind::kT5;
  return c;
}

ModelConfig ModelConfig::yptf() {
  ModelConfig c;
  c.name = "yptf";
  c.encoder = EncoderKind::kPtf;
  c.output_channels = 13;
  return c;
}

ModelConfig ModelConfig::yptf_moe() {
  ModelConfig c = yptf();
  c.name = "yptf_moe";
  c.ptf.moe.enabled = true;
  return c;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  if (name == "ymt3") return ymt3();
  if (name == "yptf") return yptf();
  if (name == "yptf_moe") return yptf_moe();
  throw ContractError("unknown model '" + name + "'");
}

namespace {

void check_stack(const TransformerStackConfig& s, const char* what) {
  if (s.layers < 1 || s.d_model < 1 || s.heads < 1 || s.head_dim < 1 || s.d_ff < 1)
    throw ContractError(std::string(what) + ": sizes must be positive");
}

}  // namespace

void ModelConfig::validate() const {
  check_stack(decoder, "decoder");
  if (vocab_size < 1) throw ContractError("vocabulary size must be positive");
  if (encoder == EncoderKind::kT5) {
    check_stack(t5_encoder, "encoder");
    if (input_dim < 1) throw ContractError("input dimension must be positive");
    if (output_channels != 1) throw ContractError("the T5 encoder feeds a single decoder channel");
    return;
  }
  const PtfConfig& p = ptf;
  if (p.latents < 2 || p.latent_dim < 1 || p.iterations < 1 || p.ffn_dim < 1 ||
      p.spectral_channels < 1 || p.feature_dim < 1 || p.pre_encoder_in_channels < 1)
    throw ContractError("PTF sizes must be positive");
  if (p.latents >= p.spectral_channels) throw ContractError("latent count must be below c");
  if (p.latents % 2 != 0) throw ContractError("latent count must be even");
  if (p.heads < 1 || p.latent_dim % p.heads != 0)
    throw ContractError("latent dimension must divide evenly into heads");
  if ((p.latent_dim / p.heads) % 2 != 0) throw ContractError("RoPE needs an even head dimension");
  if (p.pre_encoder.channels != p.spectral_channels)
    throw ContractError("pre-encoder channels must equal the spectral channel count");
  if (output_channels < 1 || p.latents % output_channels != 0)
    throw ContractError("latents must split evenly across output channels");
  if (p.moe.enabled && (p.moe.experts < 1 || p.moe.top_k < 1 || p.moe.top_k > p.moe.experts ||
                        p.moe.expert_dim < 1))
    throw ContractError("MoE needs 1 <= top_k <= experts and a positive expert size");
}

std::uint64_t linear_params(std::uint64_t in, std::uint64_t out, bool bias) {
  return in * out + (bias ? out : 0);
}

ParamCount count_parameters(const ModelConfig& cfg) {
  cfg.validate();
  using U = std::uint64_t;
  ParamCount r;
  auto add = [&](const std::string& name, U n) { r.components.emplace_back(name, n); };

  // Decoder: token embedding, layers of self-attention, cross-attention and FFN.
  const TransformerStackConfig& dec = cfg.decoder;
  const U dm = static_cast<U>(dec.d_model);
  const U dec_inner = static_cast<U>(dec.heads) * static_cast<U>(dec.head_dim);
  const U dec_ffn = (dec.gated_ffn ? 3u : 2u) * dm * static_cast<U>(dec.d_ff);
  const U dec_layer = 8 * dm * dec_inner + dec_ffn + 3 * dm;
  const U embedding = static_cast<U>(cfg.vocab_size) * dm;
  r.decoder = embedding + static_cast<U>(dec.layers) * dec_layer + dm;
  r.decoder_layers = dec.layers;
  const U lm_head = linear_params(dm, static_cast<U>(cfg.vocab_size));

  if (cfg.encoder == EncoderKind::kT5) {
    const TransformerStackConfig& enc = cfg.t5_encoder;
    const U d = static_cast<U>(enc.d_model);
    const U inner = static_cast<U>(enc.heads) * static_cast<U>(enc.head_dim);
    const U ffn = (enc.gated_ffn ? 3u : 2u) * d * static_cast<U>(enc.d_ff);
    const U layer = 4 * d * inner + ffn + 2 * d;
    const U input_proj = linear_params(static_cast<U>(cfg.input_dim), d);
    r.encoder = input_proj + static_cast<U>(enc.layers) * layer + d;
    r.encoder_layers = enc.layers;
    r.active = 0;
    add("encoder", r.encoder);
    add("decoder", r.decoder);
    add("lm_head", lm_head);
    r.total = r.encoder + r.decoder + lm_head;
    r.active = r.total;
    return r;
  }

  const PtfConfig& p = cfg.ptf;
  const U d = static_cast<U>(p.latent_dim);
  const U f = static_cast<U>(p.feature_dim);
  const U attn = 4 * d * d;
  const U sca = linear_params(d, d) + 2 * linear_params(f, d) + linear_params(d, d);
  U ffn = 0;
  U ffn_active = 0;
  if (p.moe.enabled) {
    const U expert = 3 * d * static_cast<U>(p.moe.expert_dim);
    const U gate = linear_params(d, static_cast<U>(p.moe.experts));
    ffn = gate + static_cast<U>(p.moe.experts) * expert;
    ffn_active = gate + static_cast<U>(p.moe.top_k) * expert;
  } else if (p.ffn_form == FfnForm::kGated) {
    ffn = ffn_active = 3 * d * static_cast<U>(p.ffn_dim);
  } else {
    ffn = ffn_active = d * d + d;
  }
  // Per iteration: SCA with its query norm, then latent and temporal
  // sub-blocks with two norms each.
  const U fixed_per_iter = sca + d + 2 * (attn + 2 * d);
  const U iters = static_cast<U>(p.iterations);
  const U latent_array = static_cast<U>(p.latents) * d;
  r.encoder = latent_array + iters * (fixed_per_iter + 2 * ffn) + d;
  const U encoder_active = latent_array + iters * (fixed_per_iter + 2 * ffn_active) + d;
  r.encoder_layers = p.iterations * 5;

  const PreEncoderSpec& pe = p.pre_encoder;
  const U kernel = static_cast<U>(pe.kernel_time) * static_cast<U>(pe.kernel_freq);
  const U ch = static_cast<U>(pe.channels);
  U pre = 0;
  for (int b = 0; b < pe.blocks; ++b) {
    const U in = b == 0 ? static_cast<U>(p.pre_encoder_in_channels) : ch;
    for (int c = 0; c < pe.convs_per_block; ++c) {
      pre += (c == 0 ? in : ch) * ch * kernel;
      pre += 2 * ch;  // batch-norm scale and shift
    }
    if (in != ch) pre += in * ch;  // 1x1 shortcut
  }
  // Latents grouped per output channel and projected to the decoder width.
  const U groups = static_cast<U>(cfg.output_channels);
  const U per_group = static_cast<U>(p.latents) / groups;
  const U projection = groups * linear_params(per_group * d, dm);

  add("pre_encoder", pre);
  add("encoder", r.encoder);
  add("projection", projection);
  add("decoder", r.decoder);
  add("lm_head", lm_head);
  r.total = pre + r.encoder + projection + r.decoder + lm_head;
  r.active = r.total - r.encoder + encoder_active;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

using nlohmann::ordered_json;

ordered_json stack_json(const TransformerStackConfig& s) {
  return {{"layers", s.layers},   {"d_model", s.d_model}, {"heads", s.heads},
          {"head_dim", s.head_dim}, {"d_ff", s.d_ff},       {"gated_ffn", s.gated_ffn}};
}

TransformerStackConfig stack_from(const nlohmann::json& j) {
  TransformerStackConfig s;
  s.layers = j.at("layers");
  s.d_model = j.at("d_model");
  s.heads = j.at("heads");
  s.head_dim = j.at("head_dim");
  s.d_ff = j.at("d_ff");
  s.gated_ffn = j.at("gated_ffn");
  return s;
}

ordered_json config_json(const ModelConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["encoder"] = c.encoder == EncoderKind::kT5 ? "t5" : "ptf";
  j["vocab_size"] = c.vocab_size;
  j["output_channels"] = c.output_channels;
  if (c.encoder == EncoderKind::kT5) {
    j["input_dim"] = c.input_dim;
    j["t5_encoder"] = stack_json(c.t5_encoder);
  } else {
    const PtfConfig& p = c.ptf;
    j["ptf"] = {{"latents", p.latents},
                {"latent_dim", p.latent_dim},
                {"heads", p.heads},
                {"iterations", p.iterations},
                {"spectral_channels", p.spectral_channels},
                {"feature_dim", p.feature_dim},
                {"ffn_dim", p.ffn_dim},
                {"ffn_form", p.ffn_form == FfnForm::kGated ? "gated" : "literal"},
                {"pre_encoder_in_channels", p.pre_encoder_in_channels},
                {"pre_encoder",
                 {{"kernel", {p.pre_encoder.kernel_time, p.pre_encoder.kernel_freq}},
                  {"pool", {p.pre_encoder.pool_time, p.pre_encoder.pool_freq}},
                  {"convs_per_block", p.pre_encoder.convs_per_block},
                  {"blocks", p.pre_encoder.blocks},
                  {"channels", p.pre_encoder.channels}}},
                {"moe",
                 {{"enabled", p.moe.enabled},
                  {"experts", p.moe.experts},
                  {"top_k", p.moe.top_k},
                  {"expert_dim", p.moe.expert_dim}}}};
  }
  j["decoder"] = stack_json(c.decoder);
  return j;
}

ModelConfig config_from(const nlohmann::json& j) {
  ModelConfig c;
  c.name = j.at("name");
  const std::string enc = j.at("encoder");
  if (enc != "t5" && enc != "ptf") throw ContractError("unknown encoder kind '" + enc + "'");
  c.encoder = enc == "t5" ? EncoderKind::kT5 : EncoderKind::kPtf;
  c.vocab_size = j.at("vocab_size");
  c.output_channels = j.at("output_channels");
  if (c.encoder == EncoderKind::kT5) {
    c.input_dim = j.at("input_dim");
    c.t5_encoder = stack_from(j.at("t5_encoder"));
  } else {
    const auto& p = j.at("ptf");
    c.ptf.latents = p.at("latents");
    c.ptf.latent_dim = p.at("latent_dim");
    c.ptf.heads = p.at("heads");
    c.ptf.iterations = p.at("iterations");
    c.ptf.spectral_channels = p.at("spectral_channels");
    c.ptf.feature_dim = p.at("feature_dim");
    c.ptf.ffn_dim = p.at("ffn_dim");
    c.ptf.ffn_form = p.at("ffn_form") == "literal" ? FfnForm::kLiteral : FfnForm::kGated;
    c.ptf.pre_encoder_in_channels = p.at("pre_encoder_in_channels");
    const auto& pe = p.at("pre_encoder");
    c.ptf.pre_encoder.kernel_time = pe.at("kernel").at(0);
    c.ptf.pre_encoder.kernel_freq = pe.at("kernel").at(1);
    c.ptf.pre_encoder.pool_time = pe.at("pool").at(0);
    c.ptf.pre_encoder.pool_freq = pe.at("pool").at(1);
    c.ptf.pre_encoder.convs_per_block = pe.at("convs_per_block");
    c.ptf.pre_encoder.blocks = pe.at("blocks");
    c.ptf.pre_encoder.channels = pe.at("channels");
    const auto& m = p.at("moe");
    c.ptf.moe.enabled = m.at("enabled");
    c.ptf.moe.experts = m.at("experts");
    c.ptf.moe.top_k = m.at("top_k");
    c.ptf.moe.expert_dim = m.at("expert_dim");
  }
  c.decoder = stack_from(j.at("decoder"));
  return c;
}

}  // namespace

std::string to_json(const ModelConfig& cfg) { return config_json(cfg).dump(2); }

ModelConfig model_config_from_json(const std::string& json) {
  try {
    return config_from(nlohmann::json::parse(json));
  } catch (const nlohmann::json::exception& e) {
    throw ContractError(std::string("bad model config: ") + e.what());
  }
}

std::vector<ModelConfig> load_model_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("version").get<int>() != kModelConfigVersion)
      throw ContractError("unsupported model config version");
    std::vector<ModelConfig> out;
    for (const auto& m : j.at("models")) out.push_back(config_from(m));
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ContractError("bad model config file " + path + ": " + e.what());
  }
}

std::string config_schema_hash() {
  ordered_json doc;
  doc["version"] = kModelConfigVersion;
  doc["models"] = {config_json(ModelConfig::ymt3()), config_json(ModelConfig::yptf()),
                   config_json(ModelConfig::yptf_moe())};
  const std::string s = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace mtk::ptf
