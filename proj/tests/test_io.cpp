#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "covcp/io.hpp"

using namespace covcp;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("covcp_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& content) {
    const auto p = (dir_ / name).string();
    std::ofstream(p) << content;
    return p;
  }

  std::filesystem::path dir_;
};

template <class F>
std::string ingest_message(F&& f) {
  try {
    f();
  } catch (const IngestError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

using Io = TempDir;

TEST_F(Io, ReadsPlainCsv) {
  const auto m = read_matrix_csv(write("a.csv", "1,2,3\n4,5,6\n"));
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 3);
  EXPECT_EQ(m(1, 2), 6.0);
}

TEST_F(Io, SkipsHeaderRow) {
  const auto m = read_matrix_csv(write("a.csv", "x,y\n1.5,-2e-3\n+3, 4 \n"));
  ASSERT_EQ(m.rows(), 2);
  EXPECT_EQ(m(0, 1), -2e-3);
  EXPECT_EQ(m(1, 0), 3.0);
}

TEST_F(Io, RaggedRowCitesLine) {
  const auto p = write("bad.csv", "1,2\n3,4\n5\n");
  const auto msg = ingest_message([&] { read_matrix_csv(p); });
  EXPECT_NE(msg.find("bad.csv:3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("ragged"), std::string::npos);
}

TEST_F(Io, NonNumericCellCitesLine) {
  const auto p = write("bad.csv", "1,2\n3,abc\n");
  const auto msg = ingest_message([&] { read_matrix_csv(p); });
  EXPECT_NE(msg.find("bad.csv:2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("column 2"), std::string::npos);
}

TEST_F(Io, MissingFile) { EXPECT_THROW(read_matrix_csv((dir_ / "none.csv").string()), IngestError); }

TEST_F(Io, RoundTripIsLossless) {
  Matrix m(3, 2);
  m << 0.1, 1.0 / 3.0, -2.718281828459045, 1e-300, 6.02214076e23, -0.0;
  const auto p = (dir_ / "rt.csv").string();
  write_matrix_csv(p, m);
  const auto back = read_matrix_csv(p);
  EXPECT_TRUE(back == m);
  Vector v(3);
  v << 0.1, 0.7, 0.2;
  const auto vp = (dir_ / "v.txt").string();
  write_vector_file(vp, v);
  EXPECT_TRUE(read_vector_file(vp) == v);
}

TEST_F(Io, BundleChecksDimensions) {
  const auto a = write("a.csv", "1,2\n3,4\n5,6\n");
  const auto b = write("b.csv", "1,2\n3,5\n");
  const auto c = write("c.csv", "1,2,3\n");
  const auto v2 = write("v2.txt", "0.5\n0.5\n");
  const auto v3 = write("v3.txt", "0.5\n0.25\n0.25\n");
  BundleOptions o;
  o.sample_paths = {a, b};
  o.projection_paths = {v2};
  const auto bundle = load_bundle(o);
  EXPECT_EQ(bundle.K(), 2u);
  EXPECT_EQ(bundle.dim(), 2u);
  o.projection_paths = {v3};
  const auto msg = ingest_message([&] { load_bundle(o); });
  EXPECT_NE(msg.find("expected d = 2"), std::string::npos) << msg;
  o.projection_paths.clear();
  o.sample_paths = {a, c};
  EXPECT_THROW(load_bundle(o), IngestError);
}

TEST(Report, JsonSchema) {
  TestReport r;
  r.statistic = 1.25;
  r.critical_value = 7.08;
  r.per_sample.resize(2);
  r.per_sample[1].argmax_k = 9;
  const auto j = to_json(r);
  for (const char* key : {"statistic", "critical_value", "level", "reject", "per_sample", "seed"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  ASSERT_EQ(j["per_sample"].size(), 2u);
  for (const char* key : {"alpha_sq", "bandwidth", "argmax_k"}) EXPECT_TRUE(j["per_sample"][0].contains(key)) << key;
  EXPECT_EQ(j["per_sample"][1]["argmax_k"], 9);
  EXPECT_EQ(j["statistic"].get<double>(), 1.25);
}

TEST(Report, CritvalCsvColumns) {
  std::ostringstream os;
  write_critval_csv(os, {{StatisticKind::q_breve, 6, 0.95, 7.0859, 2000, 100000, 5}});
  EXPECT_EQ(os.str(), "kind,K,level,value,n_grid,n_rep,seed\nq-breve,6,0.94999999999999996,7.0858999999999996,2000,100000,5\n");
}

TEST(Format, Digits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_short(7.08591), "7.086");
}
