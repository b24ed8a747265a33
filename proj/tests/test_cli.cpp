#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "invmean/separation.hpp"
#include "invmean_cli.hpp"
#include "oracles.hpp"

using namespace invmean;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kConfigs = INVMEAN_CONFIG_DIR;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("invmean_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_spec(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  int iterate(const std::string& spec, std::optional<std::size_t> max_iter = {}) {
    cli::IterateOptions o;
    o.spec_path = spec;
    o.out_dir = dir_.string();
    o.max_iter = max_iter;
    return cli::cmd_iterate(o, out_, err_);
  }

  int separation(const std::string& spec) {
    cli::SeparationOptions o;
    o.spec_path = spec;
    o.out_dir = dir_.string();
    return cli::cmd_separation(o, out_, err_);
  }

  std::vector<std::pair<double, double>> read_curve(const std::string& name) {
    std::ifstream in(dir_ / name);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,d");
    std::vector<std::pair<double, double>> rows;
    while (std::getline(in, line)) {
      const auto comma = line.find(',');
      rows.emplace_back(std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1)));
    }
    return rows;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

const char* kPairTemplate = R"({"domain":[1,2],"generators":[%s],"grid":16,"outputs":{"curve":"c.csv"}})";

std::string pair_spec(const std::string& gens) {
  char buf[512];
  std::snprintf(buf, sizeof buf, kPairTemplate, gens.c_str());
  return buf;
}

double k_from(const std::string& out) {
  const auto at = out.find("K=");
  return at == std::string::npos ? NAN : std::stod(out.substr(at + 2));
}

}  // namespace

TEST_F(CliTest, IterateAgmSpec) {
  EXPECT_EQ(iterate(kConfigs + "/agm.json"), cli::kExitOk);
  EXPECT_NE(out_.str().find("K=1.456791031"), std::string::npos) << out_.str();
  EXPECT_NE(out_.str().find("status=Converged"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "agm_trace.csv"));
  const json r = cli::read_json_file((dir_ / "agm_result.json").string());
  EXPECT_NEAR(r["k_value"].get<double>(), oracle::kAgm12, 1e-9);
  EXPECT_EQ(r["probes"].size(), 4u);
}

TEST_F(CliTest, IterateRejectsBadWeights) {
  const std::string spec = write_spec("bad.json", R"({
    "family": {"domain": [1, 2], "pieces": [{"span": [0, 1], "gen": {"kind": "power", "p": 1}}]},
    "measure": {"domain": [1, 2], "atoms": [[1, 0.5], [2, 0.4]]}})");
  EXPECT_EQ(iterate(spec), cli::kExitInvalid);
  EXPECT_NE(err_.str().find("atoms"), std::string::npos) << err_.str();
  EXPECT_TRUE(out_.str().empty());
}

TEST_F(CliTest, IterateRejectsUnknownFieldsAndMissingFiles) {
  const std::string spec = write_spec("extra.json", R"({
    "family": {"domain": [1, 2], "pieces": [{"span": [0, 1], "gen": {"kind": "power", "p": 1}}]},
    "measure": {"domain": [1, 2], "atoms": [[1, 1]]}, "seed": 7})");
  EXPECT_EQ(iterate(spec), cli::kExitInvalid);
  EXPECT_NE(err_.str().find("seed"), std::string::npos);
  EXPECT_EQ(iterate((dir_ / "missing.json").string()), cli::kExitInvalid);
  EXPECT_EQ(iterate(write_spec("garbage.json", "{not json")), cli::kExitInvalid);
}

TEST_F(CliTest, IterateCapReturnsTwo) {
  EXPECT_EQ(iterate(kConfigs + "/agm.json", 1), cli::kExitNotConverged);
  EXPECT_NE(out_.str().find("status=MaxIterations"), std::string::npos);
  const std::string spec = write_spec("cap.json", R"({
    "family": {"domain": [1, 2], "pieces": [{"span": [0, 0.5], "gen": {"kind": "power", "p": 1}},
                                            {"span": [0.5, 1], "gen": {"kind": "power", "p": 0}}]},
    "measure": {"domain": [1, 2], "atoms": [[1, 0.5], [2, 0.5]]}, "max_iter": 1})");
  EXPECT_EQ(iterate(spec), cli::kExitNotConverged);
}

TEST_F(CliTest, IterateOtherConfigs) {
  EXPECT_EQ(iterate(kConfigs + "/harmonic.json"), cli::kExitOk);
  EXPECT_NEAR(k_from(out_.str()), 2.0, 1e-12) << out_.str();
}

TEST_F(CliTest, SeparationIdenticalPairIsZero) {
  EXPECT_EQ(separation(write_spec("s.json", pair_spec(R"({"kind":"power","p":1},{"kind":"power","p":1})"))),
            cli::kExitOk);
  const auto rows = read_curve("c.csv");
  ASSERT_EQ(rows.size(), 100u);
  for (const auto& [t, d] : rows) EXPECT_EQ(d, 0.0);
  EXPECT_DOUBLE_EQ(rows.front().first, 0.01);
  EXPECT_EQ(rows.back().first, 1.0);
}

TEST_F(CliTest, SeparationBelowDiagonal) {
  EXPECT_EQ(separation(write_spec("s.json", pair_spec(R"({"kind":"power","p":1},{"kind":"log"})"))), cli::kExitOk);
  for (const auto& [t, d] : read_curve("c.csv")) {
    EXPECT_LT(d, t);
    EXPECT_GT(d, 0.0);
  }
}

TEST_F(CliTest, SeparationMatchesLibrary) {
  EXPECT_EQ(separation(write_spec("s.json", pair_spec(R"({"kind":"power","p":-1},{"kind":"power","p":1})"))),
            cli::kExitOk);
  const std::vector<Generator> T = {Generator::power(-1, Interval{1, 2}), Generator::power(1, Interval{1, 2})};
  for (const auto& [t, d] : read_curve("c.csv")) EXPECT_EQ(d, contraction_bound(T, t, 16));
}

TEST_F(CliTest, SeparationFromFamilyConfig) {
  cli::SeparationOptions o;
  o.spec_path = kConfigs + "/separation_family.json";
  o.out_dir = dir_.string();
  o.grid = 8;
  EXPECT_EQ(cli::cmd_separation(o, out_, err_), cli::kExitOk) << err_.str();
  const auto rows = read_curve("separation.csv");
  ASSERT_EQ(rows.size(), 100u);
  for (const auto& [t, d] : rows) EXPECT_LT(d, t);
}

TEST_F(CliTest, SeparationValidation) {
  EXPECT_EQ(separation(write_spec("s.json", R"({"domain":[1,2],"generators":[{"kind":"power","p":1}],"t_range":[0,1]})")),
            cli::kExitInvalid);
  EXPECT_NE(err_.str().find("t_range"), std::string::npos);
  EXPECT_EQ(separation(write_spec("s2.json", R"({"domain":[1,2],"generators":[{"kind":"log"}],"bins":3})")),
            cli::kExitInvalid);
  EXPECT_EQ(separation(write_spec("s3.json", R"({"family":{"domain":[1,2],"pieces":[{"span":[0,1],
      "gen":{"kind":"power-sweep","p_of_x":{"type":"affine","a":1,"b":0}}}]}})")),
            cli::kExitInvalid);
}

TEST_F(CliTest, DemoAgm) {
  cli::DemoAgmOptions o;
  EXPECT_EQ(cli::cmd_demo_agm(o, out_, err_), cli::kExitOk);
  EXPECT_NE(out_.str().find("K=1.456791031"), std::string::npos);
  EXPECT_NE(out_.str().find("AGM=1.456791031"), std::string::npos);
  EXPECT_NEAR(cli::gauss_agm(1, 2), oracle::kAgm12, 1e-15);

  out_.str("");
  o.a = o.b = 3;
  EXPECT_EQ(cli::cmd_demo_agm(o, out_, err_), cli::kExitOk);
  EXPECT_NE(out_.str().find("K=3\n"), std::string::npos) << out_.str();

  out_.str("");
  o.a = 1;
  o.b = 4;
  o.harmonic = true;
  EXPECT_EQ(cli::cmd_demo_agm(o, out_, err_), cli::kExitOk);
  EXPECT_NEAR(k_from(out_.str()), 2.0, 1e-12) << out_.str();
  EXPECT_NE(out_.str().find("sqrt(ab)=2\n"), std::string::npos);

  o.a = 0;
  EXPECT_EQ(cli::cmd_demo_agm(o, out_, err_), cli::kExitInvalid);
  o.a = 5;
  EXPECT_EQ(cli::cmd_demo_agm(o, out_, err_), cli::kExitInvalid);
}
