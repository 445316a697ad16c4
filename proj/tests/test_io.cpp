#include <cmath>
#include <filesystem>
#include <string>

#include <gtest/gtest.h>

#include "nmq/io.hpp"

using namespace nmq;
namespace fs = std::filesystem;

namespace {

LabeledDataset tiny_dataset() {
  LabeledDataset ds;
  ds.kind = ChannelKind::PhaseDamping;
  ds.range = working_range(ds.kind);
  ds.seed = 17;
  ds.xs = {0.1234567890123, 0.3, 0.7499999999999999};
  ds.ys = {0.0, 1.0 / 3.0, 0.49102741923};
  return ds;
}

io::ModelFile tiny_model() {
  io::ModelFile m;
  m.config = {ChannelKind::AmplitudeDamping, 2, VqcBackend::KrausReset};
  m.params = {{0.1, 1.0 / 7.0, -2.5}, {1e-3, 4.25}, 0.0123, -0.987};
  m.dataset_digest = "fnv1a64:0123456789abcdef";
  m.train_mse = 7.5e-6;
  m.seed = 3;
  m.restart = 4;
  m.epochs = 1234;
  return m;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("nmq_io_test_" + name); }

}  // namespace

TEST(Numbers, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, 123456.789})
    EXPECT_EQ(io::parse_double(io::format_double(v)), v);
  EXPECT_TRUE(std::isnan(io::parse_double(io::format_double(std::nan("")))));
  EXPECT_EQ(io::format_double(0.5), "0.5");
}

TEST(Numbers, TwelveSignificantDigits) {
  EXPECT_EQ(io::format_significant(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(io::format_significant(2.0), "2");
}

TEST(Numbers, RejectsMalformed) {
  EXPECT_THROW(io::parse_double("1.5x"), ValidationError);
  EXPECT_THROW(io::parse_double(""), ValidationError);
  EXPECT_THROW(io::parse_integer<int>("3.0"), ValidationError);
}

TEST(Lists, RoundTrip) {
  const std::vector<double> v{0.1, -2.0, 3.25};
  EXPECT_EQ(io::parse_list(io::format_list(v)), v);
  EXPECT_TRUE(io::parse_list("").empty());
}

TEST(Digest, KnownValues) {
  // Reference FNV-1a 64 test vectors.
  EXPECT_EQ(io::fnv1a64(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(io::fnv1a64("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(io::digest_string("a"), "fnv1a64:af63dc4c8601ec8c");
}

TEST(DatasetFile, ByteIdenticalRoundTrip) {
  const std::string first = io::serialize_dataset(tiny_dataset());
  const LabeledDataset back = io::parse_dataset(first);
  EXPECT_EQ(io::serialize_dataset(back), first);
  EXPECT_EQ(back.xs, tiny_dataset().xs);
  EXPECT_EQ(back.ys, tiny_dataset().ys);
  EXPECT_EQ(back.kind, ChannelKind::PhaseDamping);
  EXPECT_EQ(back.seed, 17u);
}

TEST(DatasetFile, HeaderDescribesContent) {
  const std::string text = io::serialize_dataset(tiny_dataset());
  EXPECT_EQ(text.rfind("# nmq dataset\nschema_version=1\nkind=pd\n", 0), 0u);
  EXPECT_NE(text.find("\ncount=3\n"), std::string::npos);
  EXPECT_NE(text.find("\nx,y\n"), std::string::npos);
}

TEST(DatasetFile, SaveAndLoad) {
  const auto path = temp_path("dataset.txt");
  io::save_dataset(path.string(), tiny_dataset());
  EXPECT_EQ(io::serialize_dataset(io::load_dataset(path.string())), io::serialize_dataset(tiny_dataset()));
  fs::remove(path);
}

TEST(DatasetFile, DetectsTampering) {
  std::string text = io::serialize_dataset(tiny_dataset());
  const auto pos = text.find("0.3,");
  text[pos + 2] = '4';
  EXPECT_THROW(io::parse_dataset(text), ValidationError);
}

TEST(DatasetFile, RejectsOtherSchemaVersion) {
  std::string text = io::serialize_dataset(tiny_dataset());
  text.replace(text.find("schema_version=1"), 16, "schema_version=2");
  EXPECT_THROW(io::parse_dataset(text), ValidationError);
}

TEST(DatasetFile, RejectsWrongMagicAndMissingKeys) {
  EXPECT_THROW(io::parse_dataset("hello\n"), ValidationError);
  std::string text = io::serialize_dataset(tiny_dataset());
  text.erase(text.find("seed=17\n"), 8);
  EXPECT_THROW(io::parse_dataset(text), ValidationError);
}

TEST(DatasetFile, RejectsCountMismatch) {
  std::string text = io::serialize_dataset(tiny_dataset());
  text.replace(text.find("count=3"), 7, "count=4");
  EXPECT_THROW(io::parse_dataset(text), ValidationError);
}

TEST(ModelFile, ByteIdenticalRoundTrip) {
  const std::string first = io::serialize_model(tiny_model());
  const io::ModelFile back = io::parse_model(first);
  EXPECT_EQ(io::serialize_model(back), first);
  EXPECT_EQ(back.params.phis, tiny_model().params.phis);
  EXPECT_EQ(back.params.times, tiny_model().params.times);
  EXPECT_TRUE(std::isnan(back.test_mse));
  EXPECT_EQ(back.epochs, 1234);
}

TEST(ModelFile, RejectsOtherSchemaVersion) {
  std::string text = io::serialize_model(tiny_model());
  text.replace(text.find("schema_version=1"), 16, "schema_version=9");
  EXPECT_THROW(io::parse_model(text), ValidationError);
}

TEST(ModelFile, RejectsInconsistentParams) {
  std::string text = io::serialize_model(tiny_model());
  text.replace(text.find("n_interactions=2"), 16, "n_interactions=3");
  EXPECT_THROW(io::parse_model(text), ValidationError);
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW(io::read_file("/nonexistent/nmq/file"), IoError);
  EXPECT_THROW(io::write_file("/nonexistent/nmq/file", "x"), IoError);
}

TEST(Csv, LabelsLayout) {
  EXPECT_EQ(io::labels_csv({0.1, 2.0}, {1.0 / 3.0, 0.0}), "x,N\n0.1,0.333333333333\n2,0\n");
  EXPECT_EQ(io::history_csv({0.5, 0.25}), "epoch,cost\n0,0.5\n1,0.25\n");
  EXPECT_EQ(io::eval_csv({1.0}, {0.5}, {0.25}), "x,target,predicted\n1,0.5,0.25\n");
}

TEST(Svg, TwoStyledPolylines) {
  const std::string svg = io::eval_svg({0.3, 0.1, 0.2}, {1.0, 2.0, 3.0}, {1.1, 2.1, 2.9}, "x");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("viewBox=\"0 0 640 420\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray"), std::string::npos);
  std::size_t count = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}
