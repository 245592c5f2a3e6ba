#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rsf/nncore.hpp"
#include "test_util.hpp"

using namespace rsf;
using nn::Index;
using nn::Matrix;
using nn::RowVector;

// ------------------------------------------------------------------ Rng

TEST(Rng, SameSeedSameStream) {
    nn::Rng a(42), b(42), c(43);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        EXPECT_NE(x, c.next_u64());
    }
}

TEST(Rng, KnownSplitMix64Outputs) {
    // Reference values of SplitMix64 seeded with 0 (first three outputs).
    nn::Rng r(0);
    EXPECT_EQ(r.next_u64(), 0xE220A8397B1DCDAFULL);
    EXPECT_EQ(r.next_u64(), 0x6E789E6AA1B965F4ULL);
    EXPECT_EQ(r.next_u64(), 0x06C45D188009454FULL);
}

TEST(Rng, UniformInUnitInterval) {
    nn::Rng r(1);
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
    }
    EXPECT_NEAR(sum / n, 0.5, 0.005);
}

TEST(Rng, BelowIsUnbiased) {
    nn::Rng r(2);
    std::vector<int> counts(7, 0);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++counts[r.below(7)];
    // 5 sigma band of a binomial(n, 1/7) count.
    const double sd = std::sqrt(n * (1.0 / 7) * (6.0 / 7));
    for (int c : counts) EXPECT_NEAR(c, n / 7.0, 5 * sd);
    EXPECT_THROW(r.below(0), InvalidArgument);
}

TEST(Rng, NormalMoments) {
    nn::Rng r(3);
    const int n = 200000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 0.01);
    EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Rng, ShuffleIsAPermutation) {
    nn::Rng r(4);
    auto p = nn::permutation(50, r);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(p[i], i);
}

TEST(Rng, ForkedStreamsDiffer) {
    const nn::Rng base(5);
    auto a = base.fork(0);
    auto b = base.fork(1);
    EXPECT_NE(a.next_u64(), b.next_u64());
    EXPECT_EQ(base.counter(), 5u);
}

// ------------------------------------------------------------------ init

TEST(Glorot, BoundsForSmallFans) {
    nn::Rng r(6);
    const Matrix w11 = nn::glorot_init(1, 1, r);
    EXPECT_LE(w11.cwiseAbs().maxCoeff(), std::sqrt(3.0));
    EXPECT_NEAR(nn::glorot_bound(1, 1), 1.7321, 1e-4);
    EXPECT_NEAR(nn::glorot_bound(2, 3), 1.0954, 1e-4);
    for (int i = 0; i < 1000; ++i) {
        const Matrix w = nn::glorot_init(2, 3, r);
        ASSERT_EQ(w.rows(), 2);
        ASSERT_EQ(w.cols(), 3);
        EXPECT_LE(w.cwiseAbs().maxCoeff(), nn::glorot_bound(2, 3));
    }
}

TEST(Glorot, ZeroFanThrows) {
    nn::Rng r(7);
    EXPECT_THROW(nn::glorot_init(0, 3, r), InvalidArgument);
    EXPECT_THROW(nn::glorot_init(3, 0, r), InvalidArgument);
}

TEST(Glorot, MonteCarloVariance) {
    nn::Rng r(8);
    double sum = 0.0, sum2 = 0.0;
    long long n = 0;
    while (n < 1'000'000) {
        const Matrix w = nn::glorot_init(512, 512, r);
        sum += w.sum();
        sum2 += w.squaredNorm();
        n += w.size();
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sum2 / static_cast<double>(n) - mean * mean;
    EXPECT_NEAR(mean, 0.0, 1e-3);
    EXPECT_LT(std::abs(var - 1.0 / 512.0) / (1.0 / 512.0), 0.05);
}

TEST(Init, KindsParseAndRoundTrip) {
    for (auto k : {nn::InitKind::Glorot, nn::InitKind::He, nn::InitKind::Uniform, nn::InitKind::Normal}) {
        EXPECT_EQ(nn::parse_init_kind(nn::to_string(k)), k);
    }
    EXPECT_THROW(nn::parse_init_kind("orthogonal"), InvalidArgument);
}

// ------------------------------------------------------------------ layers

TEST(PointwiseLinear, IdentityAndHandExample) {
    Matrix x(2, 2);
    x << 1, 0, 0, 1;
    EXPECT_EQ(nn::pointwise_linear(x, Matrix::Identity(2, 2), RowVector::Zero(2)), x);
    Matrix x2(1, 2), w(2, 1);
    x2 << 1, 2;
    w << 1, 1;
    RowVector b(1);
    b << 3;
    EXPECT_EQ(nn::pointwise_linear(x2, w, b)(0, 0), 6.0);
}

TEST(PointwiseLinear, MatchesScalarLoop) {
    nn::Rng r(9);
    const Matrix x = test::random_matrix(4, 3, r);
    const Matrix w = test::random_matrix(3, 5, r);
    const RowVector b = test::random_matrix(1, 5, r).row(0);
    const Matrix y = nn::pointwise_linear(x, w, b);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = 0; j < 5; ++j) {
            double s = b[j];
            for (Index k = 0; k < 3; ++k) s += x(i, k) * w(k, j);
            EXPECT_NEAR(y(i, j), s, 1e-12);
        }
    }
}

TEST(PointwiseLinear, ShapeMismatchThrows) {
    EXPECT_THROW(nn::pointwise_linear(Matrix::Zero(2, 3), Matrix::Zero(2, 2), RowVector::Zero(2)), InvalidArgument);
    EXPECT_THROW(nn::pointwise_linear(Matrix::Zero(2, 2), Matrix::Zero(2, 2), RowVector::Zero(3)), InvalidArgument);
}

TEST(PointwiseLinear, PermutationEquivariant) {
    nn::Rng r(10);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix x = test::random_matrix(16, 3, r);
        const Matrix w = test::random_matrix(3, 8, r);
        const RowVector b = test::random_matrix(1, 8, r).row(0);
        const auto perm = nn::permutation(16, r);
        Matrix xp(16, 3);
        for (Index i = 0; i < 16; ++i) xp.row(i) = x.row(static_cast<Index>(perm[static_cast<std::size_t>(i)]));
        const Matrix y = nn::pointwise_linear(x, w, b);
        const Matrix yp = nn::pointwise_linear(xp, w, b);
        for (Index i = 0; i < 16; ++i) EXPECT_EQ(yp.row(i), y.row(static_cast<Index>(perm[static_cast<std::size_t>(i)])));
    }
}

TEST(Activations, LeakyReluExamples) {
    Matrix x(1, 3);
    x << 2, -1, 0;
    const Matrix y = nn::leaky_relu(x, 0.01);
    EXPECT_EQ(y(0, 0), 2.0);
    EXPECT_DOUBLE_EQ(y(0, 1), -0.01);
    EXPECT_EQ(y(0, 2), 0.0);
    EXPECT_THROW(nn::leaky_relu(x, 1.0), InvalidArgument);
    EXPECT_THROW(nn::leaky_relu(x, -0.1), InvalidArgument);
}

TEST(Activations, ReluExamplesAndCrossCheck) {
    Matrix x(1, 3);
    x << -1, 0, 2;
    Matrix expect(1, 3);
    expect << 0, 0, 2;
    EXPECT_EQ(nn::relu(x), expect);
    EXPECT_EQ(nn::relu(-Matrix::Ones(3, 3)), Matrix::Zero(3, 3));
    nn::Rng r(11);
    const Matrix z = test::random_matrix(10, 10, r);
    EXPECT_EQ(nn::relu(z), nn::leaky_relu(z, 0.0));
}

TEST(Maxpool, Examples) {
    Matrix x(2, 2);
    x << 1, 5, 3, 2;
    RowVector expect(2);
    expect << 3, 5;
    EXPECT_EQ(nn::maxpool_set(x), expect);
    EXPECT_EQ(nn::maxpool_set(x.topRows(1)), x.row(0));
    EXPECT_THROW(nn::maxpool_set(Matrix::Zero(0, 4)), EmptySetError);
}

TEST(Maxpool, PermutationInvariantBitForBit) {
    nn::Rng r(12);
    const Matrix x = test::random_matrix(16, 8, r);
    const RowVector ref = nn::maxpool_set(x);
    for (int trial = 0; trial < 50; ++trial) {
        const auto perm = nn::permutation(16, r);
        Matrix xp(16, 8);
        for (Index i = 0; i < 16; ++i) xp.row(i) = x.row(static_cast<Index>(perm[static_cast<std::size_t>(i)]));
        EXPECT_EQ(nn::maxpool_set(xp), ref);
    }
}

// ------------------------------------------------------------------ normalization

TEST(Normalize, InstanceNormHandExample) {
    Matrix x(3, 1);
    x << 1, 2, 3;
    const Matrix y = nn::normalize(x, {nn::NormKind::IN});
    // mean 2, biased variance 2/3.
    const double s = 1.0 / std::sqrt(2.0 / 3.0 + 1e-5);
    EXPECT_NEAR(y(0, 0), -s, 1e-12);
    EXPECT_NEAR(y(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(y(2, 0), s, 1e-12);
    EXPECT_NEAR(y(0, 0), -1.22474, 1e-4);
}

TEST(Normalize, ConstantChannelGoesToZero) {
    const Matrix y = nn::normalize(Matrix::Constant(5, 2, 3.5), {nn::NormKind::IN});
    EXPECT_EQ(y.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Normalize, NoNormIsIdentity) {
    nn::Rng r(13);
    const Matrix x = test::random_matrix(7, 4, r);
    EXPECT_EQ(nn::normalize(x, {nn::NormKind::NN}), x);
}

TEST(Normalize, InstanceNormPerCloudStatistics) {
    nn::Rng r(14);
    Matrix x = test::random_matrix(30, 6, r, 4.0);
    x.middleRows(10, 20).array() += 7.0;
    const std::vector<Index> offsets{0, 10, 30};
    nn::normalize_batch(x, offsets, {nn::NormKind::IN});
    for (std::size_t c = 0; c < 2; ++c) {
        const auto block = x.middleRows(offsets[c], offsets[c + 1] - offsets[c]);
        const RowVector mean = block.colwise().mean();
        EXPECT_LT(mean.cwiseAbs().maxCoeff(), 1e-9);
        const RowVector var = (block.rowwise() - mean).array().square().colwise().mean().matrix();
        for (Index j = 0; j < var.size(); ++j) EXPECT_NEAR(var[j], 1.0, 1e-3);
    }
}

TEST(Normalize, LayerNormPerPoint) {
    nn::Rng r(15);
    const Matrix y = nn::normalize(test::random_matrix(6, 20, r, 3.0), {nn::NormKind::LN});
    for (Index i = 0; i < y.rows(); ++i) {
        EXPECT_NEAR(y.row(i).mean(), 0.0, 1e-12);
        EXPECT_NEAR(y.row(i).squaredNorm() / 20.0, 1.0, 1e-3);
    }
}

TEST(Normalize, BatchNormSpansClouds) {
    nn::Rng r(16);
    Matrix x = test::random_matrix(12, 3, r);
    x.topRows(6).array() += 10.0;
    const std::vector<Index> offsets{0, 6, 12};
    Matrix bn = x;
    nn::normalize_batch(bn, offsets, {nn::NormKind::BN});
    EXPECT_LT(bn.colwise().mean().cwiseAbs().maxCoeff(), 1e-12);
    // Per-cloud means stay apart: the statistics were shared, not per cloud.
    EXPECT_GT(bn.topRows(6).colwise().mean().minCoeff(), 0.5);
    Matrix single = Matrix::Ones(1, 3);
    const std::vector<Index> one{0, 1};
    EXPECT_THROW(nn::normalize_batch(single, one, {nn::NormKind::BN}), DegenerateStatistics);
}

TEST(Normalize, KindsParse) {
    for (auto k : {nn::NormKind::BN, nn::NormKind::IN, nn::NormKind::LN, nn::NormKind::NN}) {
        EXPECT_EQ(nn::parse_norm_kind(nn::to_string(k)), k);
    }
    EXPECT_THROW(nn::parse_norm_kind("GN"), InvalidArgument);
}

// ------------------------------------------------------------------ loss

TEST(SoftmaxCrossEntropy, UniformLogits) {
    const std::vector<int> labels{3, 17};
    const auto r = nn::softmax_cross_entropy(Matrix::Zero(2, 40), labels);
    EXPECT_NEAR(r.loss, std::log(40.0), 1e-12);
    EXPECT_NEAR(r.loss, 3.68888, 1e-5);
}

TEST(SoftmaxCrossEntropy, ConfidentCorrectClass) {
    Matrix logits = Matrix::Zero(1, 5);
    logits(0, 2) = 50.0;
    const std::vector<int> labels{2};
    EXPECT_LT(nn::softmax_cross_entropy(logits, labels).loss, 1e-10);
}

TEST(SoftmaxCrossEntropy, BadLabelThrows) {
    const std::vector<int> labels{5};
    EXPECT_THROW(nn::softmax_cross_entropy(Matrix::Zero(1, 5), labels), InvalidArgument);
    const std::vector<int> negative{-1};
    EXPECT_THROW(nn::softmax_cross_entropy(Matrix::Zero(1, 5), negative), InvalidArgument);
}

TEST(SoftmaxCrossEntropy, GradientMatchesFiniteDifferences) {
    nn::Rng r(17);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        Matrix logits = test::random_matrix(3, 4, r, 2.0);
        std::vector<int> labels{static_cast<int>(r.below(4)), static_cast<int>(r.below(4)), static_cast<int>(r.below(4))};
        const auto g = nn::softmax_cross_entropy(logits, labels);
        double max_rel = 0.0;
        for (Index k = 0; k < logits.size(); ++k) {
            Matrix up = logits, down = logits;
            up.data()[k] += h;
            down.data()[k] -= h;
            const double fd =
                (nn::softmax_cross_entropy(up, labels).loss - nn::softmax_cross_entropy(down, labels).loss) / (2 * h);
            max_rel = std::max(max_rel, test::rel_error(g.grad.data()[k], fd, 1e-6));
        }
        EXPECT_LT(max_rel, 1e-5) << "trial " << trial;
    }
}

TEST(SoftmaxCrossEntropy, ArgmaxTiesGoLow) {
    RowVector row(4);
    row << 1, 3, 3, 2;
    EXPECT_EQ(nn::argmax_row(row), 1);
}

TEST(Matrix, RequireFiniteFlagsNaN) {
    Matrix m = Matrix::Zero(2, 2);
    EXPECT_NO_THROW(nn::require_finite(m, "m"));
    m(1, 1) = std::nan("");
    EXPECT_THROW(nn::require_finite(m, "m"), NumericError);
}
