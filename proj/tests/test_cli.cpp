// Drives the nmq executable end to end through the shell.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "nmq/io.hpp"

namespace fs = std::filesystem;
using namespace nmq;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("nmq_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(NMQ_CLI_PATH) + " " + args + " >" + path("stdout.txt") + " 2>" + path("stderr.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const { return io::read_file(path(name)); }

  std::vector<std::string> lines(const std::string& name) const {
    std::vector<std::string> out;
    std::istringstream in(read(name));
    for (std::string line; std::getline(in, line);) out.push_back(line);
    return out;
  }

  fs::path dir_;
};

// Small but complete pipeline settings.
const std::string kQuickTrain = " --max-epochs 60 --restarts 2 --seed 4";

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("labels --kind zz --out " + path("l.csv")), 2);
}

TEST_F(CliTest, SingleLabelRow) {
  ASSERT_EQ(run("labels --kind ad --count 1 --lo 0.5 --out " + path("l.csv")), 0);
  const auto rows = lines("l.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "x,N");
  EXPECT_EQ(rows[1].rfind("0.5,", 0), 0u);
}

TEST_F(CliTest, MarkovianLabelsAreZero) {
  ASSERT_EQ(run("labels --kind pd --lo 0.1 --hi 0.25 --count 4 --out " + path("l.csv")), 0);
  const auto rows = lines("l.csv");
  ASSERT_EQ(rows.size(), 5u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].find(',') + 1), "0");
}

TEST_F(CliTest, LabelsRejectBadRange) {
  EXPECT_EQ(run("labels --kind ad --lo 2 --hi 1 --out " + path("l.csv")), 2);
  EXPECT_EQ(run("labels --kind ad --count 0 --out " + path("l.csv")), 2);
}

TEST_F(CliTest, UnwritableOutputIsIoError) {
  EXPECT_EQ(run("labels --kind ad --count 1 --out /nonexistent/dir/l.csv"), 4);
}

TEST_F(CliTest, DatasetNeedsSeed) {
  EXPECT_EQ(run("dataset --kind ad --count 3 --out " + path("d.txt")), 2);
}

TEST_F(CliTest, DatasetIsReproducible) {
  ASSERT_EQ(run("dataset --kind pd --count 4 --seed 9 --out " + path("a.txt")), 0);
  ASSERT_EQ(run("dataset --kind pd --count 4 --seed 9 --out " + path("b.txt")), 0);
  EXPECT_EQ(read("a.txt"), read("b.txt"));
  const auto ds = io::load_dataset(path("a.txt"));
  EXPECT_EQ(ds.size(), 4u);
  EXPECT_EQ(ds.seed, 9u);
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  io::write_file(path("run.toml"), "[dataset]\nkind = \"ad\"\ncount = 3\nseed = 5\n");
  ASSERT_EQ(run("--config " + path("run.toml") + " dataset --count 2 --out " + path("d.txt")), 0);
  const auto ds = io::load_dataset(path("d.txt"));
  EXPECT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.seed, 5u);
  EXPECT_EQ(ds.kind, ChannelKind::AmplitudeDamping);
}

TEST_F(CliTest, TrainAndEvaluate) {
  ASSERT_EQ(run("dataset --kind ad --count 10 --seed 1 --out " + path("ad.txt")), 0);
  ASSERT_EQ(run("train --dataset " + path("ad.txt") + " --model " + path("m1.txt") + " --history " + path("h.csv") +
                kQuickTrain),
            0);
  ASSERT_EQ(run("train --dataset " + path("ad.txt") + " --model " + path("m2.txt") + kQuickTrain), 0);
  EXPECT_EQ(read("m1.txt"), read("m2.txt"));

  const auto model = io::load_model(path("m1.txt"));
  EXPECT_EQ(model.dataset_digest, io::dataset_digest(io::load_dataset(path("ad.txt"))));
  EXPECT_EQ(model.seed, 4u);
  EXPECT_TRUE(std::isfinite(model.train_mse));
  EXPECT_TRUE(std::isfinite(model.test_mse));
  const auto history = lines("h.csv");
  EXPECT_EQ(history.front(), "epoch,cost");
  EXPECT_EQ(history.size(), static_cast<std::size_t>(model.epochs) + 1);

  ASSERT_EQ(run("eval --model " + path("m1.txt") + " --dataset " + path("ad.txt") + " --out " + path("e.csv") +
                " --svg " + path("e.svg")),
            0);
  EXPECT_EQ(lines("e.csv").size(), 11u);
  EXPECT_EQ(lines("e.csv").front(), "x,target,predicted");
  EXPECT_EQ(read("e.svg").rfind("<svg", 0), 0u);
  EXPECT_NE(read("stdout.txt").find("mse="), std::string::npos);
}

TEST_F(CliTest, TrainRejectsBadOptions) {
  ASSERT_EQ(run("dataset --kind ad --count 3 --seed 1 --out " + path("ad.txt")), 0);
  EXPECT_EQ(run("train --dataset " + path("ad.txt") + " --model " + path("m.txt") + " --n-interactions 9"), 2);
  EXPECT_EQ(run("train --dataset " + path("ad.txt") + " --model " + path("m.txt") + " --readout-init magic"), 2);
  EXPECT_EQ(run("train --dataset " + path("missing.txt") + " --model " + path("m.txt")), 4);
}

TEST_F(CliTest, EvalErrors) {
  io::ModelFile m;
  m.config = {ChannelKind::AmplitudeDamping, 1, VqcBackend::KrausReset};
  m.params = {{0.3, 0.2}, {1.0}, 0.0, 1.0};
  io::save_model(path("m.txt"), m);
  ASSERT_EQ(run("dataset --kind pd --count 2 --seed 1 --out " + path("pd.txt")), 0);
  EXPECT_EQ(run("eval --model " + path("m.txt") + " --dataset " + path("pd.txt") + " --out " + path("e.csv")), 2);
  EXPECT_EQ(run("eval --model " + path("m.txt") + " --out " + path("e.csv")), 2);
  EXPECT_EQ(run("eval --model " + path("m.txt") + " --sweep-count 0 --out " + path("e.csv")), 2);
  EXPECT_EQ(run("eval --model " + path("m.txt") + " --sweep-count 2 --dataset " + path("pd.txt") + " --out " +
                path("e.csv")),
            2);

  std::string text = io::read_file(path("m.txt"));
  text.replace(text.find("schema_version=1"), 16, "schema_version=7");
  io::write_file(path("m7.txt"), text);
  EXPECT_EQ(run("eval --model " + path("m7.txt") + " --sweep-count 2 --out " + path("e.csv")), 2);
}

TEST_F(CliTest, FlatReadoutGivesFlatLine) {
  io::ModelFile m;
  m.config = {ChannelKind::PhaseDamping, 2, VqcBackend::KrausReset};
  m.params = {{0.3, 0.2, 1.1}, {1.0, 2.0}, 0.125, 0.0};
  io::save_model(path("m.txt"), m);
  ASSERT_EQ(run("eval --model " + path("m.txt") + " --sweep-count 5 --out " + path("e.csv") + " --svg " + path("e.svg")),
            0);
  const auto rows = lines("e.csv");
  ASSERT_EQ(rows.size(), 6u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].substr(rows[i].rfind(',') + 1), "0.125");
  EXPECT_TRUE(fs::exists(path("e.svg")));
}
