#include "mtk/token_io.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

#include "mtk/error.hpp"

namespace mtk {

std::string sidecar_path(const std::string& tok_path) { return tok_path + ".json"; }

void write_token_file(const std::string& path, const TokenFile& file) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const TokenSequence& s : file.sequences) {
    if (s.ids.size() != file.length_limit)
      throw ContractError("every sequence in a token file must have the file's length");
    for (TokenId id : s.ids) {
      const char bytes[2] = {static_cast<char>(id & 0xFF), static_cast<char>(id >> 8)};
      out.write(bytes, 2);
    }
  }

  nlohmann::ordered_json meta;
  meta["format"] = "u16le";
  meta["vocab"] = std::string(to_string(file.vocab));
  meta["n"] = file.length_limit;
  meta["channels"] = file.sequences.size();
  meta["segment_start_s"] = file.segment_start_s;
  std::vector<int> annotated;
  if (file.sequences.size() > 1)
    for (int c = 0; c < kChannelCount; ++c)
      if (file.annotated.test(static_cast<std::size_t>(c))) annotated.push_back(c);
  meta["annotated"] = annotated;
  meta["truncated_events"] = file.truncated_events;
  std::ofstream side(sidecar_path(path), std::ios::binary);
  if (!side) throw Error("cannot write " + sidecar_path(path));
  side << meta.dump(2) << '\n';
}

TokenFile read_token_file(const std::string& path) {
  std::ifstream side(sidecar_path(path));
  if (!side) throw Error("missing sidecar " + sidecar_path(path));
  TokenFile file;
  std::size_t channels = 1;
  try {
    const auto meta = nlohmann::json::parse(side);
    if (meta.value("format", std::string("u16le")) != "u16le")
      throw ContractError("unsupported token format");
    file.vocab = parse_vocab_variant(meta.at("vocab").get<std::string>());
    file.length_limit = meta.at("n").get<std::size_t>();
    channels = meta.value("channels", std::size_t{1});
    file.segment_start_s = meta.value("segment_start_s", 0.0);
    for (int c : meta.value("annotated", std::vector<int>{}))
      if (c >= 0 && c < kChannelCount) file.annotated.set(static_cast<std::size_t>(c));
    file.truncated_events = meta.value("truncated_events", std::vector<std::size_t>{});
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad sidecar " + sidecar_path(path) + ": " + e.what());
  }
  if (file.length_limit == 0 || channels == 0) throw ContractError("empty token file layout");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.size() != channels * file.length_limit * 2)
    throw ContractError("token file size does not match its sidecar");
  std::size_t k = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    TokenSequence s;
    s.length_limit = file.length_limit;
    if (channels > 1) s.channel = static_cast<int>(c);
    s.ids.resize(file.length_limit);
    for (TokenId& id : s.ids) {
      id = static_cast<TokenId>(bytes[k] | (bytes[k + 1] << 8));
      k += 2;
    }
    file.sequences.push_back(std::move(s));
  }
  return file;
}

}  // namespace mtk
