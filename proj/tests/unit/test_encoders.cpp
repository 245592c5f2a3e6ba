#include <gtest/gtest.h>

#include <vector>

#include "rsf/data/builders.hpp"
#include "rsf/encoders/embedding.hpp"
#include "test_util.hpp"

using namespace rsf;
using encoders::Family;
using nn::Index;
using nn::Matrix;
using nn::RowVector;

namespace {

const Family kFamilies[] = {Family::LinSetNN, Family::LinSet, Family::PointNet, Family::DeepSets};

data::PointCloud random_cloud(Index n, int dim, nn::Rng& rng, const std::string& id = "c") {
    return {test::random_matrix(n, dim, rng), 0, id};
}

data::PointCloud permuted(const data::PointCloud& c, nn::Rng& rng) {
    const auto perm = nn::permutation(static_cast<std::size_t>(c.points.rows()), rng);
    data::PointCloud out = c;
    for (std::size_t i = 0; i < perm.size(); ++i) out.points.row(static_cast<Index>(i)) = c.points.row(static_cast<Index>(perm[i]));
    return out;
}

/// Straightforward per-cloud forward pass used as an oracle.
RowVector oracle_embed(const encoders::EncoderParams& params, const Matrix& points) {
    const auto& spec = params.spec();
    Matrix h = points;
    for (const auto& layer : params.layers()) {
        Matrix z(h.rows(), layer.weight.cols());
        for (Index i = 0; i < h.rows(); ++i) {
            for (Index o = 0; o < layer.weight.cols(); ++o) {
                double s = layer.bias(o);
                for (Index k = 0; k < h.cols(); ++k) s += h(i, k) * layer.weight(k, o);
                if (spec.family == Family::DeepSets) {
                    for (Index k = 0; k < h.cols(); ++k) s += h.col(k).maxCoeff() * layer.context(k, o);
                }
                z(i, o) = s;
            }
        }
        if (spec.norm.kind == nn::NormKind::IN) {
            for (Index o = 0; o < z.cols(); ++o) {
                const double mean = z.col(o).mean();
                const double var = (z.col(o).array() - mean).square().mean();
                z.col(o) = ((z.col(o).array() - mean) / std::sqrt(var + spec.norm.epsilon)).matrix();
            }
        }
        if (spec.family == Family::PointNet || spec.family == Family::DeepSets) z = z.cwiseMax(0.0);
        h = z;
    }
    return h.colwise().maxCoeff();
}

}  // namespace

// ------------------------------------------------------------------ spec

TEST(EncoderSpec, DepthTable) {
    EXPECT_EQ(encoders::pointnet_widths(1), (std::vector<Index>{1024}));
    EXPECT_EQ(encoders::pointnet_widths(2), (std::vector<Index>{64, 1024}));
    EXPECT_EQ(encoders::pointnet_widths(3), (std::vector<Index>{64, 128, 1024}));
    EXPECT_EQ(encoders::pointnet_widths(4), (std::vector<Index>{64, 64, 128, 1024}));
    EXPECT_EQ(encoders::pointnet_widths(5), (std::vector<Index>{64, 64, 64, 128, 1024}));
    EXPECT_THROW(encoders::pointnet_widths(0), InvalidArgument);
    EXPECT_THROW(encoders::pointnet_widths(6), InvalidArgument);
}

TEST(EncoderSpec, PointNetShapeChain) {
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 1));
    const std::vector<std::pair<Index, Index>> expected{{3, 64}, {64, 64}, {64, 128}, {128, 1024}};
    ASSERT_EQ(params.layers().size(), expected.size());
    for (std::size_t l = 0; l < expected.size(); ++l) {
        EXPECT_EQ(params.layers()[l].weight.rows(), expected[l].first);
        EXPECT_EQ(params.layers()[l].weight.cols(), expected[l].second);
        EXPECT_EQ(params.layers()[l].bias, RowVector::Zero(expected[l].second));
        EXPECT_EQ(params.layers()[l].context.size(), 0);
    }
}

TEST(EncoderSpec, DepthBlocksMatchRequestedCount) {
    for (int k = 1; k <= 5; ++k) {
        const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 2, 1, nn::NormKind::NN, k));
        EXPECT_EQ(static_cast<int>(params.layers().size()), k);
        EXPECT_EQ(params.output_dim(), 1024);
    }
}

TEST(EncoderSpec, InvalidSpecsThrow) {
    auto spec = encoders::default_spec(Family::PointNet, 3, 1);
    spec.widths.back() = 512;
    EXPECT_THROW(encoders::build_encoder(spec), InvalidArgument);
    spec = encoders::default_spec(Family::PointNet, 4, 1);
    EXPECT_THROW(encoders::build_encoder(spec), InvalidArgument);
    spec = encoders::default_spec(Family::LinSetNN, 3, 1);
    spec.norm.kind = nn::NormKind::IN;
    EXPECT_THROW(encoders::build_encoder(spec), InvalidArgument);
    EXPECT_THROW(encoders::parse_family("Transformer"), InvalidArgument);
}

TEST(EncoderSpec, TextRoundTrip) {
    for (Family f : kFamilies) {
        const auto spec = encoders::default_spec(f, 2, 12345);
        EXPECT_EQ(encoders::spec_from_text(encoders::spec_to_text(spec)), spec);
    }
    const auto deep = encoders::default_spec(Family::PointNet, 3, 5, nn::NormKind::BN, 2);
    EXPECT_EQ(encoders::spec_from_text(encoders::spec_to_text(deep)), deep);
    EXPECT_EQ(encoders::spec_label(deep), "PointNet-BN-2");
}

TEST(EncoderSpec, MinimalConfigUsesFamilyDefaults) {
    const auto spec = encoders::spec_from_text("[encoder]\nfamily = PointNet\nnorm = NN\nn_mlp_blocks = 2\n");
    EXPECT_EQ(spec.widths, (std::vector<Index>{64, 1024}));
    EXPECT_EQ(spec.norm.kind, nn::NormKind::NN);
}

// ------------------------------------------------------------------ build

TEST(BuildEncoder, SameSpecSameParameters) {
    for (Family f : kFamilies) {
        const auto spec = encoders::default_spec(f, 3, 99);
        EXPECT_EQ(encoders::build_encoder(spec), encoders::build_encoder(spec));
        auto other = spec;
        other.seed = 100;
        EXPECT_NE(encoders::build_encoder(spec), encoders::build_encoder(other));
    }
}

TEST(BuildEncoder, DeepSetsCarriesContext) {
    const auto params = encoders::build_encoder(encoders::default_spec(Family::DeepSets, 3, 1));
    ASSERT_EQ(params.layers().size(), 3u);
    EXPECT_EQ(params.layers()[0].context.rows(), 3);
    EXPECT_EQ(params.layers()[0].context.cols(), 256);
    EXPECT_NE(params.layers()[0].context, params.layers()[0].weight);
}

TEST(BuildEncoder, FromLayersChecksShapes) {
    auto spec = encoders::default_spec(Family::LinSetNN, 2, 0);
    spec.widths = {1024};
    spec.n_mlp_blocks = 1;
    std::vector<encoders::Layer> layers(1);
    layers[0].weight = Matrix::Zero(3, 1024);
    layers[0].bias = RowVector::Zero(1024);
    EXPECT_THROW(encoders::EncoderParams::from_layers(spec, layers), InvalidArgument);
    layers[0].weight = Matrix::Zero(2, 1024);
    layers[0].context = Matrix::Zero(2, 1024);
    EXPECT_THROW(encoders::EncoderParams::from_layers(spec, layers), InvalidArgument);
}

TEST(BuildEncoder, ParamsBinaryRoundTrip) {
    const auto params = encoders::build_encoder(encoders::default_spec(Family::DeepSets, 2, 4));
    const std::string bytes = encoders::serialize_params(params);
    EXPECT_EQ(encoders::deserialize_params(bytes), params);
    std::string broken = bytes;
    broken[broken.size() / 2] ^= 0x01;
    EXPECT_THROW(encoders::deserialize_params(broken), ChecksumError);
}

// ------------------------------------------------------------------ embed

TEST(Embed, InjectedIdentityLinSetNN) {
    auto spec = encoders::default_spec(Family::LinSetNN, 2, 0);
    spec.widths = {1024};
    spec.n_mlp_blocks = 1;
    std::vector<encoders::Layer> layers(1);
    layers[0].weight = Matrix::Zero(2, 1024);
    layers[0].weight(0, 0) = 1.0;
    layers[0].weight(1, 1) = 1.0;
    layers[0].bias = RowVector::Zero(1024);
    const auto params = encoders::EncoderParams::from_layers(spec, layers);
    data::PointCloud c{Matrix::Identity(2, 2), 0, "eye"};
    RowVector expected = RowVector::Zero(1024);
    expected(0) = 1.0;
    expected(1) = 1.0;
    EXPECT_EQ(encoders::embed_one(params, c), expected);
}

TEST(Embed, MatchesLoopOracle) {
    nn::Rng rng(1);
    for (Family f : kFamilies) {
        const auto params = encoders::build_encoder(encoders::default_spec(f, 3, 7));
        const auto cloud = random_cloud(40, 3, rng);
        const RowVector got = encoders::embed_one(params, cloud);
        const RowVector want = oracle_embed(params, cloud.points);
        EXPECT_LT((got - want).cwiseAbs().maxCoeff(), 1e-9 * std::max(1.0, want.cwiseAbs().maxCoeff()))
            << encoders::to_string(f);
    }
}

TEST(Embed, PermutationInvarianceIsExact) {
    nn::Rng rng(2);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        for (Family f : kFamilies) {
            const auto params = encoders::build_encoder(encoders::default_spec(f, 3, seed));
            for (int t = 0; t < 5; ++t) {
                const auto cloud = random_cloud(100, 3, rng);
                EXPECT_EQ(encoders::embed_one(params, cloud), encoders::embed_one(params, permuted(cloud, rng)))
                    << encoders::to_string(f) << " seed " << seed;
            }
        }
    }
}

TEST(Embed, BatchNormPermutationInvarianceIsExact) {
    nn::Rng rng(3);
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 1, nn::NormKind::BN));
    std::vector<data::PointCloud> batch{random_cloud(50, 3, rng), random_cloud(60, 3, rng), random_cloud(30, 3, rng)};
    const Matrix a = encoders::embed(params, batch);
    for (auto& c : batch) c = permuted(c, rng);
    EXPECT_EQ(a, encoders::embed(params, batch));
}

TEST(Embed, InstanceNormIgnoresBatchComposition) {
    nn::Rng rng(4);
    for (Family f : {Family::LinSet, Family::PointNet}) {
        const auto params = encoders::build_encoder(encoders::default_spec(f, 3, 5));
        std::vector<data::PointCloud> batch;
        for (int i = 0; i < 32; ++i) batch.push_back(random_cloud(20 + i, 3, rng));
        const Matrix together = encoders::embed(params, batch);
        for (int i = 0; i < 32; ++i) {
            EXPECT_LT((together.row(i) - encoders::embed_one(params, batch[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
}

TEST(Embed, LinSetNNScalesLinearly) {
    nn::Rng rng(5);
    const auto params = encoders::build_encoder(encoders::default_spec(Family::LinSetNN, 3, 6));
    const auto cloud = random_cloud(30, 3, rng);
    data::PointCloud scaled = cloud;
    scaled.points *= 2.5;
    const RowVector a = encoders::embed_one(params, cloud);
    const RowVector b = encoders::embed_one(params, scaled);
    EXPECT_LT((b - 2.5 * a).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, b.cwiseAbs().maxCoeff()));
}

TEST(Embed, SinglePointCloud) {
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 1));
    data::PointCloud c{Matrix::Constant(1, 3, 0.5), 0, "one"};
    const RowVector e = encoders::embed_one(params, c);
    // IN maps a single point to zero in every channel, ReLU keeps it.
    EXPECT_EQ(e, RowVector::Zero(1024));
}

TEST(Embed, Errors) {
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 1));
    data::PointCloud wrong_dim{Matrix::Zero(5, 2), 0, "2d"};
    EXPECT_THROW(encoders::embed_one(params, wrong_dim), InvalidArgument);
    data::PointCloud empty{Matrix::Zero(0, 3), 0, "empty"};
    EXPECT_THROW(encoders::embed_one(params, empty), EmptySetError);
    data::PointCloud nan{Matrix::Zero(2, 3), 0, "nan"};
    nan.points(1, 2) = std::nan("");
    EXPECT_THROW(encoders::embed_one(params, nan), InvalidArgument);
    const auto bn = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 1, nn::NormKind::BN));
    EXPECT_THROW(encoders::embed_one(bn, data::PointCloud{Matrix::Ones(3, 3), 0, "x"}), DegenerateStatistics);
}

// ------------------------------------------------------------------ embed_dataset

TEST(EmbedDataset, ShapeAndProvenance) {
    const auto ds = data::build_synthetic_shapes(2, "train", 64, 1);
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 3));
    const auto emb = encoders::embed_dataset(params, ds.clouds, 4, 0);
    EXPECT_EQ(emb.data.rows(), 10);
    EXPECT_EQ(emb.data.cols(), 1024);
    EXPECT_EQ(emb.provenance.encoder_seed, 3u);
    EXPECT_EQ(emb.ids[7], ds.clouds[7].id);
    EXPECT_EQ(emb.labels[7], ds.clouds[7].label);
    EXPECT_TRUE(emb.data.allFinite());
}

TEST(EmbedDataset, NonBatchNormIgnoresBatchSize) {
    const auto ds = data::build_synthetic_shapes(2, "train", 64, 1);
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 3));
    EXPECT_EQ(encoders::embed_dataset(params, ds.clouds, 1, 0).data, encoders::embed_dataset(params, ds.clouds, 7, 9).data);
}

TEST(EmbedDataset, BatchNormIsDeterministicPerOrderSeed) {
    const auto ds = data::build_synthetic_shapes(3, "train", 64, 1);
    const auto params = encoders::build_encoder(encoders::default_spec(Family::PointNet, 3, 3, nn::NormKind::BN));
    const auto a = encoders::embed_dataset(params, ds.clouds, 4, 11);
    EXPECT_EQ(a, encoders::embed_dataset(params, ds.clouds, 4, 11));
    EXPECT_NE(a.data, encoders::embed_dataset(params, ds.clouds, 4, 12).data);
    EXPECT_THROW(encoders::embed_dataset(params, ds.clouds, 1, 0), InvalidArgument);
}

TEST(EmbedDataset, BinaryRoundTrip) {
    test::TempDir dir("emb");
    const auto ds = data::build_synthetic_shapes(1, "test", 32, 2);
    const auto params = encoders::build_encoder(encoders::default_spec(Family::LinSet, 3, 3));
    auto emb = encoders::embed_dataset(params, ds.clouds, 2, 0);
    emb.provenance.dataset = "synth";
    emb.provenance.split = "test";
    encoders::write_embeddings(emb, dir / "e.bin");
    EXPECT_EQ(encoders::read_embeddings(dir / "e.bin"), emb);
}
