#pragma once

#include <string>
#include <vector>

#include "mtk/tokenizer.hpp"

namespace mtk {

/// A .tok file holds `channels` sequences of `length_limit` little-endian
/// uint16 ids back to back. The JSON sidecar at "<path>.json" names the
/// vocabulary variant and the limit.
struct TokenFile {
  VocabVariant vocab = VocabVariant::kFullPlus;
  std::size_t length_limit = kSingleChannelLength;
  double segment_start_s = 0.0;
  std::vector<TokenSequence> sequences;
  std::vector<std::size_t> truncated_events;
  ChannelSet annotated;
};

std::string sidecar_path(const std::string& tok_path);

void write_token_file(const std::string& path, const TokenFile& file);
TokenFile read_token_file(const std::string& path);

}  // namespace mtk
