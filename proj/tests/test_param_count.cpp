#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "mtk/error.hpp"
#include "mtk/ptf/param_count.hpp"

using namespace mtk;
using namespace mtk::ptf;

TEST(ParamCount, Ymt3) {
  const auto c = count_parameters(ModelConfig::ymt3());
  EXPECT_EQ(c.encoder, 19145216u);
  EXPECT_EQ(c.decoder, 25483264u);
  EXPECT_EQ(c.total, 44933120u);
  EXPECT_EQ(c.active, c.total);
}

TEST(ParamCount, Yptf) {
  const auto c = count_parameters(ModelConfig::yptf());
  EXPECT_EQ(c.encoder, 1774848u);
  EXPECT_EQ(c.decoder, 25483264u);
  EXPECT_EQ(c.total, 30006784u);
  std::uint64_t pre = 0, proj = 0;
  for (const auto& [name, n] : c.components) {
    if (name == "pre_encoder") pre = n;
    if (name == "projection") proj = n;
  }
  EXPECT_EQ(pre, 740096u);
  EXPECT_EQ(proj, 1703936u);
}

TEST(ParamCount, MoE) {
  const auto c = count_parameters(ModelConfig::yptf_moe());
  const auto base = count_parameters(ModelConfig::ymt3());
  EXPECT_EQ(c.total, 45938176u);
  EXPECT_EQ(c.encoder, 17706240u);
  EXPECT_LT(c.active, c.total);
  const double ratio = static_cast<double>(c.total) / static_cast<double>(base.total) - 1.0;
  EXPECT_GT(ratio, 0.015);
  EXPECT_LT(ratio, 0.035);
}

TEST(ParamCount, ProjectionIndependentOfChannelSplit) {
  ModelConfig single = ModelConfig::yptf();
  single.output_channels = 1;
  EXPECT_EQ(count_parameters(single).total, count_parameters(ModelConfig::yptf()).total);
}

TEST(ParamCount, LiteralFfnForm) {
  ModelConfig m = ModelConfig::yptf();
  m.ptf.ffn_form = FfnForm::kLiteral;
  const auto c = count_parameters(m);
  // Two FFNs per iteration shrink from 3*128*512 to 128*128 + 128.
  EXPECT_EQ(c.encoder, 1774848u - 3u * 2u * (3u * 128u * 512u - (128u * 128u + 128u)));
}

TEST(ParamCount, Validation) {
  ModelConfig m = ModelConfig::yptf();
  m.ptf.latents = 27;
  EXPECT_THROW(count_parameters(m), ContractError);
  m = ModelConfig::yptf();
  m.ptf.latents = 130;
  EXPECT_THROW(count_parameters(m), ContractError);
  m = ModelConfig::yptf_moe();
  m.ptf.moe.top_k = 9;
  EXPECT_THROW(count_parameters(m), ContractError);
  m = ModelConfig::ymt3();
  m.output_channels = 13;
  EXPECT_THROW(count_parameters(m), ContractError);
  EXPECT_THROW(ModelConfig::preset("mt3"), ContractError);
}

TEST(ParamCount, JsonRoundTrip) {
  for (const char* name : {"ymt3", "yptf", "yptf_moe"}) {
    const auto m = ModelConfig::preset(name);
    const auto back = model_config_from_json(to_json(m));
    EXPECT_EQ(to_json(back), to_json(m));
    EXPECT_EQ(count_parameters(back).total, count_parameters(m).total);
  }
  EXPECT_THROW(model_config_from_json("{}"), ContractError);
}

TEST(ParamCount, ConfigFileMatchesPresets) {
  const auto models = load_model_configs(std::string(MTK_CONFIG_DIR) + "/models.json");
  ASSERT_EQ(models.size(), 3u);
  for (const auto& m : models) EXPECT_EQ(to_json(m), to_json(ModelConfig::preset(m.name)));
  EXPECT_EQ(config_schema_hash().size(), 16u);
}
