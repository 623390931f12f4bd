#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "kbad/detectors/autoencoder.hpp"
#include "kbad/detectors/contractive.hpp"
#include "kbad/detectors/detector.hpp"
#include "kbad/detectors/manhattan.hpp"
#include "kbad/detectors/ocsvm.hpp"
#include "kbad/detectors/variational.hpp"
#include "oracles.hpp"

using namespace kbad;

namespace {

std::vector<FeatureVector> random_batch(std::mt19937_64& rng, int n, int dim) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<FeatureVector> out(n, FeatureVector(dim));
  for (auto& v : out) {
    for (int i = 0; i < dim; ++i) v(i) = u(rng);
  }
  return out;
}

void jitter(const nn::TensorViews& views, std::mt19937_64& rng, double sd) {
  std::normal_distribution<double> z(0, sd);
  for (const auto& v : views) {
    for (double& x : v) x += z(rng);
  }
}

/// Largest relative error between `grads` and five-point differences of
/// `objective` taken through `params`.
double max_gradient_error(const nn::TensorViews& params, const nn::TensorViews& grads,
                          const std::function<double()>& objective) {
  double worst = 0.0;
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double numeric = oracle::central_difference(objective, params[t][i], 1e-3);
      worst = std::max(worst, oracle::relative_error(grads[t][i], numeric));
    }
  }
  return worst;
}

}  // namespace

TEST(Manhattan, Examples) {
  const std::vector<FeatureVector> t{Eigen::Vector2d(0, 0)};
  const auto s = manhattan_fit(t);
  EXPECT_DOUBLE_EQ(manhattan_score(s, Eigen::Vector2d(1, 1)), -2.0);
  EXPECT_DOUBLE_EQ(manhattan_score(s, Eigen::Vector2d(0, 0)), 0.0);
  EXPECT_THROW(manhattan_score(s, Eigen::Vector3d(0, 0, 0)), Error);
  EXPECT_THROW(manhattan_fit(std::span<const FeatureVector>{}), Error);
}

TEST(ManhattanProperty, NaiveLoopAndTranslation) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> shift(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto t = random_batch(rng, 4, 9);
    const auto q = random_batch(rng, 1, 9)[0];
    double expected = 0.0;
    for (int i = 0; i < 9; ++i) {
      double m = 0.0;
      for (const auto& v : t) m += v(i);
      expected -= std::abs(q(i) - m / 4);
    }
    const auto state = manhattan_fit(t);
    const double score = manhattan_score(state, q);
    EXPECT_NEAR(score, expected, 1e-12);
    EXPECT_LE(score, 0.0);
    EXPECT_EQ(manhattan_score(state, state.mean), 0.0);

    FeatureVector c(9);
    for (int i = 0; i < 9; ++i) c(i) = shift(rng);
    std::vector<FeatureVector> moved;
    for (const auto& v : t) moved.push_back(v + c);
    EXPECT_NEAR(manhattan_score(manhattan_fit(moved), q + c), score, 1e-12);
  }
}

TEST(Manhattan, ScaledVariantDividesByMeanAbsoluteDeviation) {
  const std::vector<FeatureVector> t{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
  const auto s = manhattan_fit(t, true);
  ASSERT_EQ(s.scale.size(), 2);
  EXPECT_DOUBLE_EQ(s.scale(0), 0.5);
  EXPECT_DOUBLE_EQ(s.scale(1), kMinManhattanScale);
  EXPECT_DOUBLE_EQ(manhattan_score(s, Eigen::Vector2d(1.5, 0.01)), -(1.0 / 0.5 + 0.01 / kMinManhattanScale));
}

TEST(Ensemble, MeanOfMembers) {
  const std::vector<double> a{1, 3};
  EXPECT_DOUBLE_EQ(ensemble_score(a), 2.0);
  const std::vector<double> one{-4.5};
  EXPECT_DOUBLE_EQ(ensemble_score(one), -4.5);
  const std::vector<double> p{0.1, -2, 7, 0.3}, q{7, 0.3, 0.1, -2};
  EXPECT_DOUBLE_EQ(ensemble_score(p), ensemble_score(q));
}

TEST(Ensemble, IdenticalMembersMatchSingleMember) {
  std::mt19937_64 rng(4);
  const auto t = random_batch(rng, 4, 7);
  const auto queries = random_batch(rng, 10, 7);
  DetectorConfig single = parse_detector_spec("ocsvm");
  DetectorConfig ens;
  ens.name = "ensemble";
  ens.members = {single, single};
  const auto a = fit_detector(single, t, 1);
  const auto b = fit_detector(ens, t, 1);
  for (const auto& q : queries) {
    EXPECT_DOUBLE_EQ(a->score(q), b->score(q));
    EXPECT_EQ(b->member_scores(q).size(), 2u);
  }
}

TEST(DetectorConfig, SpecParsingAndFormatting) {
  const auto c = parse_detector_spec("cae{hidden=200,lambda=0.5}");
  EXPECT_EQ(c.name, "cae");
  EXPECT_EQ(c.contractive.hidden, 200);
  EXPECT_DOUBLE_EQ(c.contractive.lambda, 0.5);
  const auto again = parse_detector_spec(format_detector_spec(c));
  EXPECT_EQ(again.contractive.hidden, 200);
  EXPECT_DOUBLE_EQ(again.contractive.learning_rate, c.contractive.learning_rate);
  const auto ae = parse_detector_spec("autoencoder{hidden=5}");
  EXPECT_EQ(ae.autoencoder.hidden, (std::vector<int>{5}));
  EXPECT_EQ(parse_detector_spec(format_detector_spec(parse_detector_spec("vae{hidden=4;4}"))).variational.hidden,
            (std::vector<int>{4, 4}));
  EXPECT_EQ(format_detector_spec(parse_detector_spec("manhattan")), "manhattan");
  EXPECT_THROW(parse_detector_spec("knn"), Error);
  EXPECT_THROW(parse_detector_spec("cae{hiden=3}"), Error);
  EXPECT_THROW(parse_detector_spec("cae{hidden=3"), Error);

  auto kv = KeyValueConfig::parse("detector = ensemble\nensemble.members = manhattan, cae{hidden=10}\n");
  const auto e = detector_config_from(kv);
  ASSERT_EQ(e.members.size(), 2u);
  EXPECT_EQ(e.members[1].contractive.hidden, 10);
  KeyValueConfig out;
  write_detector_config(e, out);
  EXPECT_EQ(detector_config_from(out).members[1].contractive.hidden, 10);
  EXPECT_THROW(detector_config_from(KeyValueConfig::parse("detector = ensemble\nensemble.members = manhattan\n")), Error);
}

TEST(Autoencoder, HandEvaluatedTwoTwoTwoNetwork) {
  AutoencoderState s;
  Eigen::MatrixXd w(2, 2);
  w << 0.5, -0.3, 0.8, 0.2;
  s.weights = {w};
  s.hidden_bias = {Eigen::Vector2d(0.1, -0.2)};
  s.decoder_bias = {Eigen::Vector2d(0.05, 0.0)};
  const Eigen::Vector2d x(0.4, 0.9);
  const double h0 = std::tanh(0.5 * 0.4 - 0.3 * 0.9 + 0.1);
  const double h1 = std::tanh(0.8 * 0.4 + 0.2 * 0.9 - 0.2);
  const double r0 = std::tanh(0.5 * h0 + 0.8 * h1 + 0.05);
  const double r1 = std::tanh(-0.3 * h0 + 0.2 * h1);
  const auto r = ae_reconstruct(s, x);
  EXPECT_NEAR(r(0), r0, 1e-15);
  EXPECT_NEAR(r(1), r1, 1e-15);
  EXPECT_NEAR(ae_score(s, x), -((0.4 - r0) * (0.4 - r0) + (0.9 - r1) * (0.9 - r1)), 1e-15);
}

TEST(Autoencoder, InitAndZeroEpochFit) {
  const auto s = ae_init(9, {5, 4, 3}, 7);
  ASSERT_EQ(s.weights.size(), 3u);
  EXPECT_EQ(s.weights[0].rows(), 5);
  EXPECT_EQ(s.weights[0].cols(), 9);
  EXPECT_EQ(s.weights[2].rows(), 3);
  EXPECT_EQ(s.decoder_bias[0].size(), 9);
  const double limit = std::sqrt(6.0 / 14.0);
  EXPECT_LE(s.weights[0].cwiseAbs().maxCoeff(), limit);
  for (const auto& b : s.hidden_bias) EXPECT_EQ(b.norm(), 0.0);

  std::mt19937_64 rng(1);
  const auto t = random_batch(rng, 4, 9);
  AutoencoderParams p;
  p.epochs = 0;
  const auto fitted = ae_fit(t, p, 7);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(fitted.weights[l], s.weights[l]);
}

TEST(AutoencoderProperty, AnalyticGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(100);
  for (int draw = 0; draw < 20; ++draw) {
    auto s = ae_init(8, {5, 4, 3}, rng());
    jitter(s.tensors(), rng, 0.3);
    const auto batch = random_batch(rng, 4, 8);
    auto g = ae_gradient(s, batch);
    const double err = max_gradient_error(s.tensors(), g.tensors(), [&] { return ae_loss(s, batch); });
    EXPECT_LT(err, 1e-4) << "draw " << draw;
  }
}

TEST(Autoencoder, TrainingReconstructsRepeatedTemplate) {
  std::mt19937_64 rng(9);
  const auto x = random_batch(rng, 1, 9)[0];
  const std::vector<FeatureVector> t(4, x);
  AutoencoderParams p;
  p.epochs = 2000;
  const auto before = ae_init(9, p.hidden, 3);
  const auto s = ae_fit(t, p, 3);
  EXPECT_LT(-ae_score(s, x), 0.05);
  EXPECT_LT(-ae_score(s, x), -ae_score(before, x));
  EXPECT_GE(ae_score(s, x), ae_score(s, FeatureVector(-x)));
  EXPECT_LE(ae_score(s, random_batch(rng, 1, 9)[0]), 0.0);
}

TEST(Autoencoder, NonFiniteLossIsReported) {
  std::mt19937_64 rng(9);
  auto t = random_batch(rng, 4, 6);
  t[2](3) = std::numeric_limits<double>::quiet_NaN();
  try {
    ae_fit(t, AutoencoderParams{}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("epoch 0"), std::string::npos);
  }
}

TEST(Contractive, PenaltyClosedFormExamples) {
  auto s = cae_init(5, 7, 1.5, 2);
  std::mt19937_64 rng(2);
  const auto x = random_batch(rng, 1, 5)[0];
  auto zero = s;
  zero.weights.setZero();
  EXPECT_EQ(cae_penalty(zero, x), 0.0);
  auto saturated = s;
  saturated.hidden_bias.setConstant(1e4);
  saturated.weights.setConstant(1e-3);
  EXPECT_EQ(cae_penalty(saturated, x), 0.0);
}

TEST(ContractiveProperty, PenaltyMatchesFiniteDifferenceJacobian) {
  std::mt19937_64 rng(31);
  for (int draw = 0; draw < 50; ++draw) {
    auto s = cae_init(9, 12 + draw, 1.5, rng());
    jitter(s.tensors(), rng, 0.5);
    auto x = random_batch(rng, 1, 9)[0];
    double frob = 0.0;
    for (int j = 0; j < 9; ++j) {
      for (int i = 0; i < s.weights.rows(); ++i) {
        const double d = oracle::central_difference([&] { return cae_hidden(s, x)(i); }, x(j), 1e-3);
        frob += d * d;
      }
    }
    EXPECT_LT(oracle::relative_error(cae_penalty(s, x), frob), 1e-5) << "draw " << draw;
  }
}

TEST(ContractiveProperty, AnalyticGradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(200);
  for (int draw = 0; draw < 20; ++draw) {
    auto s = cae_init(8, 6 + draw % 5, 0.5 + draw * 0.1, rng());
    jitter(s.tensors(), rng, 0.3);
    const auto batch = random_batch(rng, 4, 8);
    auto g = cae_gradient(s, batch);
    const double err = max_gradient_error(s.tensors(), g.tensors(), [&] { return cae_objective(s, batch); });
    EXPECT_LT(err, 1e-4) << "draw " << draw;
  }
}

TEST(Contractive, ZeroLambdaIsPlainReconstruction) {
  std::mt19937_64 rng(6);
  auto s = cae_init(6, 10, 0.0, 1);
  const auto batch = random_batch(rng, 4, 6);
  double recon = 0.0;
  for (const auto& x : batch) recon -= cae_score(s, x);
  EXPECT_NEAR(cae_objective(s, batch), recon, 1e-12);
}

TEST(Contractive, LargerLambdaGivesSmallerPenalty) {
  std::mt19937_64 rng(12);
  const auto t = random_batch(rng, 4, 9);
  auto mean_penalty = [&](double lambda) {
    ContractiveParams p;
    p.hidden = 40;
    p.lambda = lambda;
    p.learning_rate = 0.05;
    p.epochs = 500;
    const auto s = cae_fit(t, p, 5);
    double sum = 0.0;
    for (const auto& x : t) sum += cae_penalty(s, x);
    return sum / 4;
  };
  EXPECT_LT(mean_penalty(1.5), mean_penalty(0.1));
}

TEST(Variational, KlOfUnitGaussianIsZero) {
  EXPECT_EQ(gaussian_kl(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3)), 0.0);
  EXPECT_NEAR(gaussian_kl(Eigen::Vector3d(1, 0, 0), Eigen::VectorXd::Zero(3)), 0.5, 1e-15);
  const double lv = std::log(2.0);
  EXPECT_NEAR(gaussian_kl(Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, lv)), 0.5 * (2 - 1 - lv), 1e-15);
}

TEST(VariationalProperty, AnalyticGradientMatchesFiniteDifferencesWithFrozenNoise) {
  std::mt19937_64 rng(300);
  std::normal_distribution<double> z(0, 1);
  VariationalParams params;
  for (int draw = 0; draw < 20; ++draw) {
    auto s = vae_init(8, params, rng());
    jitter(s.tensors(), rng, 0.3);
    const auto batch = random_batch(rng, 2, 8);
    Eigen::MatrixXd noise(s.latent_dim(), 2);
    for (Eigen::Index i = 0; i < noise.size(); ++i) noise.data()[i] = z(rng);
    auto g = vae_gradient(s, batch, noise);
    const double err =
        max_gradient_error(s.tensors(), g.tensors(), [&] { return vae_loss(s, batch, noise).total(); });
    EXPECT_LT(err, 1e-4) << "draw " << draw;
  }
}

TEST(Variational, TrainedModelPrefersTemplatesOverUniformNoise) {
  std::mt19937_64 rng(44);
  std::normal_distribution<double> z(0, 0.05);
  const auto centre = random_batch(rng, 1, 9)[0];
  std::vector<FeatureVector> t;
  for (int i = 0; i < 4; ++i) {
    FeatureVector v = centre;
    for (int j = 0; j < 9; ++j) v(j) = std::clamp(v(j) + z(rng), 0.0, 1.0);
    t.push_back(v);
  }
  const auto s = vae_fit(t, VariationalParams{}, 8);
  const auto s2 = vae_fit(t, VariationalParams{}, 8);
  double genuine = 0.0, noise = 0.0;
  for (const auto& x : t) genuine += vae_score(s, x) / 4;
  const auto u = random_batch(rng, 50, 9);
  for (const auto& x : u) noise += vae_score(s, x) / 50;
  EXPECT_GT(genuine, noise);
  EXPECT_EQ(vae_score(s, u[0]), vae_score(s2, u[0]));
}

TEST(Ocsvm, SingleTemplateIsForced) {
  const std::vector<FeatureVector> t{Eigen::Vector3d(0.2, 0.4, 0.6)};
  const auto s = ocsvm_fit(t, {});
  EXPECT_DOUBLE_EQ(s.alpha(0), 1.0);
  EXPECT_NEAR(s.rho, 1.0, 1e-15);
}

TEST(Ocsvm, IdenticalTemplatesGetEqualWeights) {
  const FeatureVector a = Eigen::Vector3d(0.2, 0.4, 0.6), b = Eigen::Vector3d(0.9, 0.1, 0.3);
  const std::vector<FeatureVector> t{a, a, b, Eigen::Vector3d(0.5, 0.5, 0.5)};
  const auto s = ocsvm_fit(t, {});
  EXPECT_NEAR(s.alpha(0), s.alpha(1), 1e-12);
}

TEST(Ocsvm, ProjectionOntoCappedSimplex) {
  const Eigen::VectorXd p = project_capped_simplex(Eigen::Vector4d(3, -1, 0.2, 0.1), 0.5);
  EXPECT_NEAR(p.sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(p(0), 0.5);
  EXPECT_GE(p.minCoeff(), 0.0);
  EXPECT_LE(p.maxCoeff(), 0.5);
  const Eigen::VectorXd inside = Eigen::Vector4d(0.25, 0.25, 0.3, 0.2);
  EXPECT_LT((project_capped_simplex(inside, 0.5) - inside).norm(), 1e-15);
  EXPECT_THROW(project_capped_simplex(Eigen::Vector4d(1, 1, 1, 1), 0.2), Error);
}

TEST(OcsvmProperty, MatchesActiveSetEnumeration) {
  std::mt19937_64 rng(55);
  int free_checked = 0;
  for (int draw = 0; draw < 200; ++draw) {
    const auto t = random_batch(rng, 4, 9);
    const auto s = ocsvm_fit(t, {0.5, 0.9, 10000, 1e-10});
    const auto K = rbf_gram(t, 0.9);
    const auto best = oracle::box_simplex_qp(K, 0.5);
    EXPECT_EQ(best.faces_tried, 81);
    EXPECT_NEAR(ocsvm_dual_objective(K, s.alpha), best.objective, 1e-6);
    EXPECT_NEAR(s.alpha.sum(), 1.0, 1e-12);
    EXPECT_GE(s.alpha.minCoeff(), 0.0);
    EXPECT_LE(s.alpha.maxCoeff(), s.box());
    EXPECT_LT(ocsvm_kkt_residual(s), 1e-6);
    for (std::size_t i = 0; i < 4; ++i) {
      if (!s.is_free(i)) continue;
      EXPECT_NEAR(ocsvm_score(s, t[i]), 0.0, 1e-8);
      ++free_checked;
    }
    const auto q = random_batch(rng, 1, 9)[0];
    double direct = -s.rho;
    for (int i = 0; i < 4; ++i) direct += s.alpha(i) * std::exp(-0.9 * (t[i] - q).squaredNorm());
    EXPECT_NEAR(ocsvm_score(s, q), direct, 1e-12);
    EXPECT_NEAR(ocsvm_score(s, FeatureVector(q.array() + 100.0)), -s.rho, 1e-12);
  }
  EXPECT_GT(free_checked, 0);
}

TEST(Ocsvm, RejectsBadInputs) {
  EXPECT_THROW(ocsvm_fit(std::span<const FeatureVector>{}, {}), Error);
  const std::vector<FeatureVector> t{Eigen::Vector2d(0, 0)};
  EXPECT_THROW(ocsvm_fit(t, {0.0, 0.9, 100, 1e-10}), Error);
  EXPECT_THROW(ocsvm_fit(t, {1.5, 0.9, 100, 1e-10}), Error);
}
