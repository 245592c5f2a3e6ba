#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "rsf/cli/app.hpp"
#include "test_util.hpp"

using namespace rsf;
namespace fs = std::filesystem;

namespace {

const char* kSmallSynthetic = R"([dataset]
name = synthetic
n_points = 128
per_class_train = 6
per_class_test = 3
seed = 3

[encoder]
family = PointNet
norm = IN
n_mlp_blocks = 1

[probe]
epochs = 4

[run]
n_runs = 2
out = out
)";

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

/// Run the tool inside `dir` and return its exit status.
int tool(const fs::path& dir, const std::string& args) {
    const std::string cmd = "cd '" + dir.string() + "' && '" RSF_TOOL_PATH "' " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

util::KeyValueConfig parse(const std::string& text) { return util::KeyValueConfig::parse(text); }

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

// ------------------------------------------------------------------ config

TEST(Config, DefaultsDescribeMnistWithPointNet) {
    const cli::ExperimentConfig c = cli::read_config(parse(""));
    EXPECT_EQ(c.dataset.kind, cli::DatasetKind::MnistPc);
    EXPECT_EQ(c.dataset.effective_points(), 512);
    EXPECT_EQ(c.encoder.input_dim, 2);
    EXPECT_EQ(c.run.n_runs, 5);
}

TEST(Config, SyntheticDatasetIsThreeDimensional) {
    const cli::ExperimentConfig c = cli::read_config(parse(kSmallSynthetic));
    EXPECT_EQ(c.dataset.kind, cli::DatasetKind::Synthetic);
    EXPECT_EQ(c.encoder.input_dim, 3);
    EXPECT_EQ(c.dataset.effective_points(), 128);
}

TEST(Config, EffectiveEchoReparsesToItself) {
    const cli::Context ctx = cli::make_context(parse(kSmallSynthetic));
    const cli::Context again = cli::make_context(ctx.effective);
    EXPECT_EQ(ctx.effective.to_text(), again.effective.to_text());
}

TEST(Config, RejectsUnknownSectionsAndKeys) {
    EXPECT_THROW(cli::read_config(parse("[datset]\nname = synthetic\n")), InvalidArgument);
    EXPECT_THROW(cli::make_context(parse("[dataset]\nname = synthetic\nn_pionts = 3\n")), InvalidArgument);
    EXPECT_THROW(cli::read_config(parse("[dataset]\nname = cifar\n")), InvalidArgument);
}

TEST(Config, RejectsInvalidValues) {
    EXPECT_THROW(cli::read_config(parse("[run]\nn_runs = 0\n")), InvalidArgument);
    EXPECT_THROW(cli::read_config(parse("[encoder]\nnorm = BN\n[run]\nembed_batch = 1\n")), InvalidArgument);
    EXPECT_THROW(cli::read_config(parse("[dataset]\nname = mesh\n")), InvalidArgument);
    EXPECT_THROW(cli::read_config(parse("[encoder]\ninput_dim = 3\n")), InvalidArgument);
    EXPECT_THROW(cli::read_config(parse("[table]\ndepths = 1, 6\n")), InvalidArgument);
}

TEST(Config, FlagsOverrideFileAndSetAssignments) {
    test::TempDir dir("cli-overrides");
    spit(dir / "a.cfg", kSmallSynthetic);
    cli::Overrides o;
    o.config_path = (dir / "a.cfg").string();
    o.assignments = {"run.seed = 11", "probe.epochs=9"};
    o.seed = 42;
    o.runs = 7;
    const cli::ExperimentConfig c = cli::read_config(cli::assemble_config(o));
    EXPECT_EQ(c.run.seed, 42u);
    EXPECT_EQ(c.run.n_runs, 7);
    EXPECT_EQ(c.probe.epochs, 9);
    EXPECT_EQ(c.dataset.per_class_train, 6u);

    cli::Overrides bad;
    bad.assignments = {"epochs=3"};
    EXPECT_THROW(cli::assemble_config(bad), InvalidArgument);
}

TEST(RunSeeds, ComponentsAreDistinctAndStable) {
    const cli::RunSeeds a = cli::run_seeds(7, 0);
    const cli::RunSeeds b = cli::run_seeds(7, 1);
    const std::vector<std::uint64_t> all{a.encoder, a.probe, a.kmeans, a.order, a.decoder, a.tsne, a.mismatched_encoder};
    for (std::size_t i = 0; i < all.size(); ++i) {
        for (std::size_t j = i + 1; j < all.size(); ++j) EXPECT_NE(all[i], all[j]);
    }
    EXPECT_NE(a.encoder, b.encoder);
    EXPECT_EQ(a.encoder, cli::run_seeds(7, 0).encoder);
}

TEST(Report, CsvQuotesOnlyWhenNeeded) {
    cli::CsvTable t({"a", "b"});
    t.add({"plain", "with,comma"});
    t.add({"say \"hi\"", "x"});
    EXPECT_EQ(t.text(), "a,b\nplain,\"with,comma\"\n\"say \"\"hi\"\"\",x\n");
    EXPECT_THROW(t.add({"one"}), InvalidArgument);
}

// ------------------------------------------------------------------ binary

TEST(Tool, HelpAndArgumentErrors) {
    test::TempDir dir("cli-args");
    EXPECT_EQ(tool(dir.path(), "--help"), 0);
    EXPECT_EQ(tool(dir.path(), ""), 2);
    EXPECT_EQ(tool(dir.path(), "probe --bogus"), 2);
    EXPECT_EQ(tool(dir.path(), "probe --config missing.cfg"), 2);
    spit(dir / "a.cfg", kSmallSynthetic);
    EXPECT_EQ(tool(dir.path(), "table table9 --config a.cfg"), 2);
    EXPECT_EQ(tool(dir.path(), "probe --config a.cfg --set dataset.typo=1"), 2);
    EXPECT_EQ(tool(dir.path(), "embed --config a.cfg --set encoder.norm=BN --set run.embed_batch=1"), 2);
}

TEST(Tool, MissingSourcesFailWithoutPartialCache) {
    test::TempDir dir("cli-missing");
    spit(dir / "m.cfg", "[dataset]\nname = mnist\nmnist_dir = nowhere\n[run]\nout = out\n");
    EXPECT_EQ(tool(dir.path(), "prepare --config m.cfg"), 2);
    const fs::path cache = dir / "out/cache";
    EXPECT_TRUE(!fs::exists(cache) || fs::is_empty(cache));
}

TEST(Tool, CommandsNeedAPreparedCache) {
    test::TempDir dir("cli-nocache");
    spit(dir / "a.cfg", kSmallSynthetic);
    EXPECT_EQ(tool(dir.path(), "probe --config a.cfg"), 2);
}

TEST(Tool, PrepareIsByteIdenticalForTheSameSeed) {
    test::TempDir dir("cli-prepare");
    spit(dir / "a.cfg", kSmallSynthetic);
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg --out one"), 0);
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg --out two"), 0);
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg --out three --set dataset.seed=4"), 0);
    const cli::Context ctx = cli::make_context(parse(kSmallSynthetic));
    const std::string name = cli::cache_path(ctx.config, "train").filename().string();
    const std::string one = slurp(dir / "one/cache" / name);
    ASSERT_FALSE(one.empty());
    EXPECT_EQ(one, slurp(dir / "two/cache" / name));
    EXPECT_FALSE(fs::exists(dir / "three/cache" / name));
}

TEST(Tool, ProbeWritesOneRowPerRunAndAMeanRow) {
    test::TempDir dir("cli-probe");
    spit(dir / "a.cfg", kSmallSynthetic);
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg"), 0);
    ASSERT_EQ(tool(dir.path(), "probe --config a.cfg --runs 5"), 0);
    const std::string csv = slurp(dir / "out/probe.csv");
    EXPECT_EQ(count_lines(csv), 1u + 5u + 1u);
    EXPECT_NE(csv.find("mean±std"), std::string::npos);
    const auto report = cli::Json::parse(slurp(dir / "out/probe.json"));
    EXPECT_EQ(report["command"], "probe");
    EXPECT_EQ(report["config"]["run"]["n_runs"], "5");
}

TEST(Tool, TableCsvDoesNotDependOnJobs) {
    test::TempDir dir("cli-table");
    spit(dir / "a.cfg", std::string(kSmallSynthetic) + "\n[table]\nfamilies = LinSet, PointNet\nprobes = LinClf\n");
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg"), 0);
    ASSERT_EQ(tool(dir.path(), "table table1 --config a.cfg --out serial --set dataset.cache_dir=out/cache"), 0);
    ASSERT_EQ(tool(dir.path(), "table table1 --config a.cfg --jobs 3 --out parallel --set dataset.cache_dir=out/cache"), 0);
    const std::string serial = slurp(dir / "serial/table1.csv");
    EXPECT_EQ(count_lines(serial), 1u + 2u * (2u + 1u));
    EXPECT_EQ(serial, slurp(dir / "parallel/table1.csv"));
    EXPECT_EQ(slurp(dir / "serial/table1_summary.csv"), slurp(dir / "parallel/table1_summary.csv"));
}

TEST(Tool, TsneEchoesItsParameters) {
    test::TempDir dir("cli-tsne");
    spit(dir / "a.cfg", std::string(kSmallSynthetic) + "\n[tsne]\nperplexity = 4\niterations = 400\n");
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg"), 0);
    ASSERT_EQ(tool(dir.path(), "tsne --config a.cfg"), 0);
    const auto report = cli::Json::parse(slurp(dir / "out/tsne.json"));
    EXPECT_DOUBLE_EQ(report["params"]["perplexity"].get<double>(), 4.0);
    EXPECT_EQ(report["params"]["iterations"].get<int>(), 400);
    EXPECT_LT(report["final_kl"].get<double>(), report["initial_kl"].get<double>());
    EXPECT_EQ(count_lines(slurp(dir / "out/tsne.csv")), 1u + 5u * 3u);
}

TEST(Tool, DivergentTrainingExitsWithNumericFailure) {
    test::TempDir dir("cli-numeric");
    spit(dir / "a.cfg", kSmallSynthetic);
    ASSERT_EQ(tool(dir.path(), "prepare --config a.cfg"), 0);
    EXPECT_EQ(tool(dir.path(), "probe --config a.cfg --runs 1 --set probe.learning_rate=1e306"), 3);
}
