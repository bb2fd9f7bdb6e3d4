#include <gtest/gtest.h>

#include "kernel_gen.hpp"
#include "mtk/error.hpp"
#include "mtk/ptf/ptf_block.hpp"
#include "oracles.hpp"

using namespace mtk;
using namespace mtk::ptf;
using namespace mtk::testing;

TEST(Kernels, RopeMatchesComplexRotation) {
  Rng rng(1);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(8));
    const Eigen::Index d = 2 * (1 + static_cast<Eigen::Index>(rng.below(8)));
    const MatrixXd x = random_matrix(rng, n, d);
    std::vector<double> pos(static_cast<std::size_t>(n));
    for (double& p : pos) p = static_cast<double>(rng.below(500));
    EXPECT_LT(rel_error(rope_apply(x, std::span<const double>(pos)), rope_ref(x, pos)), 1e-12);
  }
}

TEST(Kernels, RopeRelativeShift) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 2 * (1 + static_cast<Eigen::Index>(rng.below(16)));
    const MatrixXd q = random_matrix(rng, 1, d), k = random_matrix(rng, 1, d);
    const double m = static_cast<double>(rng.below(200)), n = static_cast<double>(rng.below(200));
    const double s = static_cast<double>(rng.below(1000));
    const std::vector<double> pm{m}, pn{n}, pms{m + s}, pns{n + s};
    const double a = rope_apply(q, std::span<const double>(pm)).row(0).dot(rope_apply(k, std::span<const double>(pn)).row(0));
    const double b = rope_apply(q, std::span<const double>(pms)).row(0).dot(rope_apply(k, std::span<const double>(pns)).row(0));
    EXPECT_NEAR(a, b, 1e-6 * std::max(1.0, std::abs(a)));
  }
}

TEST(Kernels, RopeRejectsOddDimension) {
  const MatrixXd x = MatrixXd::Ones(2, 3);
  const std::vector<double> pos{0, 1};
  EXPECT_THROW(rope_apply(x, std::span<const double>(pos)), ContractError);
}

TEST(Kernels, AttentionMatchesLoops) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int heads = 1 + static_cast<int>(rng.below(4));
    const Eigen::Index hd = 2 * (1 + static_cast<Eigen::Index>(rng.below(4)));
    const Eigen::Index dq = 1 + static_cast<Eigen::Index>(rng.below(12));
    const Eigen::Index dk = 1 + static_cast<Eigen::Index>(rng.below(12));
    const Eigen::Index nq = 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index nk = 1 + static_cast<Eigen::Index>(rng.below(9));
    const auto w = random_attention(rng, dq, dk, heads, hd);
    const MatrixXd q = random_matrix(rng, nq, dq), c = random_matrix(rng, nk, dk);
    const auto got = multi_head_attention(q, c, w);
    EXPECT_LT(rel_error(got.out, attention_ref(q, c, w)), 1e-5);
    for (const auto& p : got.probs)
      for (Eigen::Index i = 0; i < p.rows(); ++i) EXPECT_NEAR(p.row(i).sum(), 1.0, 1e-12);

    if (dq == dk) {
      const auto qp = sequential_positions(static_cast<std::size_t>(nq), 3.0);
      const auto kp = sequential_positions(static_cast<std::size_t>(nk));
      const auto rot = multi_head_attention(q, c, w, std::span<const double>(qp), std::span<const double>(kp));
      EXPECT_LT(rel_error(rot.out, attention_ref(q, c, w, &qp, &kp)), 1e-5);
    }
  }
}

TEST(Kernels, ScaMatchesPerStepLoops) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index c = k + 1 + static_cast<Eigen::Index>(rng.below(6));
    const Eigen::Index d = 4 * (1 + static_cast<Eigen::Index>(rng.below(3)));
    const Eigen::Index f = 1 + static_cast<Eigen::Index>(rng.below(10));
    const std::size_t t = 1 + rng.below(4);
    const int heads = rng.bernoulli(0.5) ? 1 : 2;
    const auto w = random_attention(rng, d, f, heads, d / heads);
    const MatrixXd latents = random_matrix(rng, k, d);
    Tensor3d feats;
    for (std::size_t s = 0; s < t; ++s) feats.push_back(random_matrix(rng, c, f));
    const auto got = sca_forward(latents, feats, w);
    ASSERT_EQ(got.out.size(), t);
    for (std::size_t s = 0; s < t; ++s) {
      EXPECT_EQ(got.out[s].rows(), k);
      EXPECT_EQ(got.out[s].cols(), d);
      EXPECT_LT(rel_error(got.out[s], attention_ref(latents, feats[s], w)), 1e-5);
      EXPECT_EQ(got.probs[s].front().cols(), c);
    }
  }
}

TEST(Kernels, ScaIdenticalKeysGiveValueProjection) {
  Rng rng(5);
  const auto w = random_attention(rng, 4, 3, 1, 4);
  const MatrixXd row = random_matrix(rng, 1, 3);
  const Tensor3d feats = {row.replicate(6, 1)};
  const auto got = sca_forward(random_matrix(rng, 2, 4), feats, w);
  const MatrixXd expect = (row * w.value.transpose()) * w.output.transpose();
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_LT((got.out[0].row(i) - expect.row(0)).norm(), 1e-12);
}

TEST(Kernels, FeedForwardFormsMatchLoops) {
  Rng rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(12));
    const Eigen::Index hidden = 1 + static_cast<Eigen::Index>(rng.below(20));
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.below(6));
    const MatrixXd h = random_matrix(rng, n, d);
    LiteralFfnWeights<double> lit{random_matrix(rng, d, d), random_matrix(rng, 1, d)};
    EXPECT_LT(rel_error(ffn_forward(h, lit), literal_ffn_ref(h, lit)), 1e-5);
    const auto g = random_glu(rng, d, hidden);
    EXPECT_LT(rel_error(ffn_forward_gated(h, g), glu_ref(h, g, false)), 1e-5);
    EXPECT_LT(rel_error(expert_forward(h, g), glu_ref(h, g, true)), 1e-5);
  }
}

TEST(Kernels, FeedForwardShapeErrors) {
  const MatrixXd h = MatrixXd::Ones(2, 4);
  GatedFfnWeights<double> g{MatrixXd::Ones(8, 4), MatrixXd::Ones(8, 3), MatrixXd::Ones(4, 8)};
  EXPECT_THROW(ffn_forward_gated(h, g), ContractError);
  LiteralFfnWeights<double> lit{MatrixXd::Ones(4, 4), RowVector<double>::Ones(3)};
  EXPECT_THROW(ffn_forward(h, lit), ContractError);
}

TEST(Kernels, MoEMatchesLoops) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(10));
    const int experts = 2 + static_cast<int>(rng.below(7));
    const int top_k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(experts, 3))));
    const auto w = random_moe(rng, d, 1 + static_cast<Eigen::Index>(rng.below(12)), experts, top_k);
    const MatrixXd h = random_matrix(rng, 1 + static_cast<Eigen::Index>(rng.below(6)), d);
    const auto got = moe_forward(h, w);
    const auto ref = moe_ref(h, w);
    EXPECT_LT(rel_error(got.out, ref.out), 1e-5);
    for (std::size_t t = 0; t < got.trace.size(); ++t) {
      double sum = 0.0;
      ASSERT_EQ(got.trace[t].size(), static_cast<std::size_t>(top_k));
      for (std::size_t i = 0; i < got.trace[t].size(); ++i) {
        EXPECT_EQ(got.trace[t][i].expert, ref.picks[t][i].first);
        sum += got.trace[t][i].weight;
      }
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
}

TEST(Kernels, MoETiesGoToLowerIndex) {
  Rng rng(8);
  auto w = random_moe(rng, 3, 4, 4, 2);
  w.gate = MatrixXd::Zero(3, 4);
  const auto got = moe_forward(MatrixXd::Ones(1, 3), w);
  EXPECT_EQ(got.trace[0][0].expert, 0);
  EXPECT_EQ(got.trace[0][1].expert, 1);
  EXPECT_DOUBLE_EQ(got.trace[0][0].weight, 0.5);
  w.top_k = 5;
  EXPECT_THROW(moe_forward(MatrixXd::Ones(1, 3), w), ContractError);
}

TEST(Kernels, SoftmaxAndRmsNorm) {
  MatrixXd x(2, 3);
  x << 1000, 1001, 1002, -5, 0, 5;
  const MatrixXd p = softmax_rows(x);
  EXPECT_NEAR(p.row(0).sum(), 1.0, 1e-12);
  EXPECT_NEAR(p(0, 2) / p(0, 1), std::exp(1.0), 1e-9);
  const MatrixXd r = rms_norm(x, VectorXd::Ones(3), 0.0);
  for (Eigen::Index i = 0; i < 2; ++i) EXPECT_NEAR(r.row(i).squaredNorm() / 3.0, 1.0, 1e-12);
}

TEST(Kernels, PtfEncoderShapes) {
  Rng rng(9);
  const Eigen::Index k = 4, d = 8, c = 6, f = 5;
  const std::size_t t = 3;
  auto sub = [&] {
    SublayerWeights<double> s;
    s.attention_norm = random_gain(rng, d);
    s.attention = random_attention(rng, d, d, 2, d / 2);
    s.ffn_norm = random_gain(rng, d);
    s.ffn = random_glu(rng, d, 16);
    return s;
  };
  std::vector<PtfIterationWeights<double>> iters;
  for (int i = 0; i < 2; ++i) {
    PtfIterationWeights<double> it;
    it.sca_norm = random_gain(rng, d);
    it.sca = random_attention(rng, d, f, 2, d / 2);
    it.latent = sub();
    it.temporal = sub();
    if (i == 1) it.temporal.ffn = random_moe(rng, d, 12, 4, 2);
    iters.push_back(std::move(it));
  }
  Tensor3d feats;
  for (std::size_t s = 0; s < t; ++s) feats.push_back(random_matrix(rng, c, f));
  const auto z = ptf_encoder_forward(random_matrix(rng, k, d), feats, iters);
  ASSERT_EQ(z.size(), t);
  for (const auto& m : z) {
    EXPECT_EQ(m.rows(), k);
    EXPECT_EQ(m.cols(), d);
    EXPECT_TRUE(m.allFinite());
  }
  // Temporal mixing: changing one step's features changes other steps.
  Tensor3d feats2 = feats;
  feats2[0] = random_matrix(rng, c, f);
  const auto z2 = ptf_encoder_forward(random_matrix(rng, k, d), feats2, iters);
  EXPECT_GT((z2[2] - z[2]).norm(), 0.0);
}

TEST(Kernels, FloatScalar) {
  Rng rng(10);
  const auto wd = random_attention(rng, 4, 4, 2, 2);
  AttentionWeights<float> wf{wd.query.cast<float>(), wd.key.cast<float>(), wd.value.cast<float>(),
                             wd.output.cast<float>(), 2};
  const MatrixXd q = random_matrix(rng, 3, 4);
  const auto outf = multi_head_attention(q.cast<float>(), q.cast<float>(), wf).out;
  EXPECT_LT(rel_error(outf.cast<double>(), attention_ref(q, q, wd)), 1e-5);
}
