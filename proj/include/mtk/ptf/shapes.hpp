#pragma once

#include <cstdint>
#include <vector>

namespace mtk::ptf {

enum class Codec { kMelSpectrogram, kSpectrogram };

struct PreEncoderSpec {
  int kernel_time = 3;
  int kernel_freq = 3;
  int pool_time = 1;
  int pool_freq = 2;
  int convs_per_block = 2;
  int blocks = 3;
  int channels = 128;
};

struct FrontendConfig {
  Codec codec = Codec::kMelSpectrogram;
  int hop = 128;
  int sample_rate = 16000;
  int n_fft = 2048;
  int n_bins = 512;
  int input_frames = 32767;
  bool pre_encoder = false;
  PreEncoderSpec pre;

  /// 128-sample hop log-mel front end with 512 bins.
  static FrontendConfig ymt3();
  /// 300-sample hop linear spectrogram with 1024 bins and a ResNet pre-encoder.
  static FrontendConfig yptf();

  void validate() const;
};

/// Number of analysis frames: ceil(input_frames / hop).
std::int64_t frame_count(std::int64_t input_frames, std::int64_t hop);

/// "Same"-padded stride-1 convolution output length.
std::int64_t conv_same_length(std::int64_t in, int kernel);
std::int64_t pool_length(std::int64_t in, int kernel);

/// (t, c, f') after composing every conv and pooling layer of the spec.
std::vector<std::int64_t> pre_encoder_output_shape(std::int64_t t, std::int64_t bins,
                                                   const PreEncoderSpec& spec);

/// (t, f) without a pre-encoder, (t, c, f') with one.
std::vector<std::int64_t> frontend_shapes(const FrontendConfig& cfg);

}  // namespace mtk::ptf
