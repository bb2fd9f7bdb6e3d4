#include "mtk/ptf/shapes.hpp"

#include "mtk/error.hpp"

namespace mtk::ptf {

FrontendConfig FrontendConfig::ymt3() { return FrontendConfig{}; }

FrontendConfig FrontendConfig::yptf() {
  FrontendConfig c;
  c.codec = Codec::kSpectrogram;
  c.hop = 300;
  c.n_bins = 1024;
  c.pre_encoder = true;
  return c;
}

void FrontendConfig::validate() const {
  if (hop <= 0 || input_frames <= 0 || hop > input_frames)
    throw ContractError("hop must be in [1, input_frames]");
  if (sample_rate <= 0 || n_fft <= 0 || n_bins <= 0) throw ContractError("non-positive front-end size");
  if (codec == Codec::kSpectrogram && n_bins != n_fft / 2)
    throw ContractError("linear spectrogram bins must equal n_fft / 2");
  if (codec == Codec::kMelSpectrogram && n_bins > n_fft / 2 + 1)
    throw ContractError("more mel bins than FFT bins");
  if (pre_encoder) {
    if (pre.blocks < 1 || pre.convs_per_block < 1 || pre.channels < 1 || pre.pool_freq < 1 ||
        pre.pool_time < 1 || pre.kernel_freq < 1 || pre.kernel_time < 1)
      throw ContractError("invalid pre-encoder spec");
    std::int64_t f = n_bins;
    for (int b = 0; b < pre.blocks; ++b) {
      if (f % pre.pool_freq != 0) throw ContractError("pre-encoder pooling does not divide the bins");
      f /= pre.pool_freq;
    }
  }
}

std::int64_t frame_count(std::int64_t input_frames, std::int64_t hop) {
  if (hop <= 0 || input_frames <= 0) throw ContractError("frame count needs positive sizes");
  return (input_frames + hop - 1) / hop;
}

std::int64_t conv_same_length(std::int64_t in, int kernel) {
  if (kernel < 1 || in < 1) throw ContractError("convolution needs positive sizes");
  // Even kernels pad one more element on the right.
  return in;
}

std::int64_t pool_length(std::int64_t in, int kernel) {
  if (kernel < 1) throw ContractError("pooling kernel must be positive");
  return in / kernel;
}

std::vector<std::int64_t> pre_encoder_output_shape(std::int64_t t, std::int64_t bins,
                                                   const PreEncoderSpec& spec) {
  for (int b = 0; b < spec.blocks; ++b) {
    for (int c = 0; c < spec.convs_per_block; ++c) {
      t = conv_same_length(t, spec.kernel_time);
      bins = conv_same_length(bins, spec.kernel_freq);
    }
    t = pool_length(t, spec.pool_time);
    bins = pool_length(bins, spec.pool_freq);
  }
  return {t, spec.channels, bins};
}

std::vector<std::int64_t> frontend_shapes(const FrontendConfig& cfg) {
  cfg.validate();
  const std::int64_t t = frame_count(cfg.input_frames, cfg.hop);
  if (!cfg.pre_encoder) return {t, cfg.n_bins};
  return pre_encoder_output_shape(t, cfg.n_bins, cfg.pre);
}

}  // namespace mtk::ptf
