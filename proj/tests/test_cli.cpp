#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gamow/cli.hpp"

using namespace gamow;
namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("gamow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const json& j) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << j.dump();
    return p.string();
  }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "gamow_cli");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    err_.str("");
    return cli::run(static_cast<int>(argv.size()), argv.data(), err_);
  }

  std::string out(const std::string& sub = "out") const { return (dir_ / sub).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
  }
  json read_json(const std::string& sub, const std::string& file) const {
    return json::parse(slurp(dir_ / sub / file));
  }

  fs::path dir_;
  std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, EnergyConstantKernelDisk) {
  const auto cfg = write_config("c.json", {{"kernel", "constant()"}, {"epsilon", 1.0}, {"shape", {{"r0", 1.0}}}});
  ASSERT_EQ(run({"energy", "--config", cfg, "--out", out()}), 0) << err_.str();
  const json j = read_json("out", "energy.json");
  EXPECT_NEAR(j.at("result").at("energy").at("total").get<double>(), 2 * kPi + kPi * kPi, 1e-10);
  EXPECT_EQ(j.at("version"), kVersion);
  EXPECT_EQ(j.at("config_hash").get<std::string>().size(), 16u);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "energy.svg"));
  EXPECT_NE(slurp(dir_ / "out" / "energy.svg").find(j.at("config_hash").get<std::string>()), std::string::npos);
}

TEST_F(Cli, EnergyComponentsFromFile) {
  std::ofstream(dir_ / "shape.json") << to_json_value(disk(0.5, {3, 0})).dump();
  const auto cfg = write_config("c.json", {{"kernel", "power(alpha=-0.5)"},
                                           {"epsilon", 0.5},
                                           {"components", {{{"r0", 1.0}}, (dir_ / "shape.json").string()}}});
  ASSERT_EQ(run({"energy", "--config", cfg, "--out", out()}), 0) << err_.str();
  const json e = read_json("out", "energy.json").at("result").at("energy");
  ASSERT_EQ(e.at("per_component").size(), 2u);
  EXPECT_NEAR(e.at("per_component")[1].at("perimeter").get<double>(), kPi, 1e-12);
}

TEST_F(Cli, EnergyConfigErrors) {
  const auto bad_shape = write_config("a.json", {{"kernel", "constant()"}, {"epsilon", 1.0}, {"shape", {{"r0", "x"}}}});
  EXPECT_EQ(run({"energy", "--config", bad_shape, "--out", out()}), 2);
  std::ofstream(dir_ / "broken.json") << "{\"r0\": 1,";
  const auto bad_file = write_config("b.json", {{"kernel", "constant()"}, {"epsilon", 1.0}, {"shape", (dir_ / "broken.json").string()}});
  EXPECT_EQ(run({"energy", "--config", bad_file, "--out", out()}), 2);
  const auto unknown = write_config("c.json", {{"kernel", "constant()"}, {"epsilon", 1.0}, {"shape", {{"r0", 1.0}}}, {"extra", 1}});
  EXPECT_EQ(run({"energy", "--config", unknown, "--out", out()}), 2);
  EXPECT_NE(err_.str().find("extra"), std::string::npos);
  const auto no_eps = write_config("d.json", {{"kernel", "constant()"}, {"shape", {{"r0", 1.0}}}});
  EXPECT_EQ(run({"energy", "--config", no_eps, "--out", out()}), 2);
  const auto bad_kernel = write_config("e.json", {{"kernel", "cubic()"}, {"epsilon", 1.0}, {"shape", {{"r0", 1.0}}}});
  EXPECT_EQ(run({"energy", "--config", bad_kernel, "--out", out()}), 2);
  EXPECT_EQ(run({"energy", "--config", (dir_ / "missing.json").string(), "--out", out()}), 2);
  EXPECT_EQ(run({"nonsense"}), 2);
  EXPECT_EQ(run({}), 2);
}

TEST_F(Cli, KernelCheckPower) {
  const auto cfg = write_config("k.json", {{"kernel", "power(alpha=-0.5)"}});
  ASSERT_EQ(run({"kernel-check", "--config", cfg, "--out", out()}), 0) << err_.str();
  const json r = read_json("out", "kernel_check.json").at("result");
  for (const char* c : {"admissibility", "lipschitz", "decreasing", "pd"}) EXPECT_TRUE(r.at(c).at("passed")) << c;
}

TEST_F(Cli, KernelCheckDivergent) {
  const auto cfg = write_config("k.json", {{"kernel", "power(alpha=-3)"}, {"checks", {"admissibility"}}});
  EXPECT_EQ(run({"kernel-check", "--config", cfg, "--out", out()}), 1);
  EXPECT_EQ(read_json("out", "kernel_check.json").at("result").at("admissibility").at("status"), "DIVERGENT");
}

TEST_F(Cli, KernelCheckIndicatorWitnessFiles) {
  const auto cfg = write_config("k.json", {{"kernel", "indicator(radius=1)"}, {"checks", {"pd"}}});
  EXPECT_EQ(run({"kernel-check", "--config", cfg, "--out", out()}), 1);
  const json pd = read_json("out", "kernel_check.json").at("result").at("pd");
  EXPECT_LT(pd.at("witness").at("slack").get<double>(), 0.0);
  const RasterSet F = read_pbm((dir_ / "out" / "kernel_check_witness_F.pbm").string());
  const RasterSet G = read_pbm((dir_ / "out" / "kernel_check_witness_G.pbm").string());
  EXPECT_FALSE(F.empty());
  EXPECT_FALSE(G.empty());
}

TEST_F(Cli, KernelCheckUnknownCheck) {
  const auto cfg = write_config("k.json", {{"kernel", "power(alpha=-0.5)"}, {"checks", {"speed"}}});
  EXPECT_EQ(run({"kernel-check", "--config", cfg, "--out", out()}), 2);
}

TEST_F(Cli, LensVerifyDefaultGrid) {
  ASSERT_EQ(run({"lens-verify", "--out", out()}), 0) << err_.str();
  const std::string csv = slurp(dir_ / "out" / "lens_grid.csv");
  // stamp, header and one line per grid point
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2 + 100 * 101);
  EXPECT_EQ(csv.rfind("# gamow ", 0), 0u);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "lens.svg"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "min_curve.svg"));
}

TEST_F(Cli, LensVerifyOutOfDomainRowsExcluded) {
  const auto cfg = write_config("l.json", {{"lens", {{"n_theta", 12}, {"n_delta", 31}, {"delta_scale", 2.0}}}, {"svg", false}});
  ASSERT_EQ(run({"lens-verify", "--config", cfg, "--out", out()}), 0) << err_.str();
  const json r = read_json("out", "lens_verify.json").at("result");
  EXPECT_EQ(r.at("rows"), 12 * 31);
  EXPECT_GT(r.at("out_of_domain_rows").get<int>(), 0);
  const std::string csv = slurp(dir_ / "out" / "lens_grid.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2 + 12 * 31);
  const auto bad = write_config("m.json", {{"lens", {{"n_theta", 12}, {"wide", true}}}});
  EXPECT_EQ(run({"lens-verify", "--config", bad, "--out", out()}), 2);
}

TEST_F(Cli, ToleranceOverride) {
  // an impossible derivative tolerance makes the grid check fail
  EXPECT_EQ(run({"lens-verify", "--out", out(), "--tol-override", "fd_tol=1e-15"}), 1);
  EXPECT_EQ(read_json("out", "lens_verify.json").at("config").at("lens").at("fd_tol"), 1e-15);
  EXPECT_EQ(run({"lens-verify", "--out", out(), "--tol-override", "bogus=1"}), 2);
  EXPECT_EQ(run({"lens-verify", "--out", out(), "--tol-override", "fd_tol=abc"}), 2);
}

TEST_F(Cli, CutPasteFixtures) {
  const auto db = write_config("d.json", {{"kernel", "power(alpha=-0.5)"}, {"epsilon", 0.1}});
  ASSERT_EQ(run({"cut-paste", "--config", db, "--out", out("a")}), 0) << err_.str();
  const json r = read_json("a", "cut_paste.json").at("result");
  EXPECT_EQ(r.at("outcome"), "cut");
  EXPECT_LE(r.at("delta_energy").get<double>(), -r.at("guaranteed_decrease").get<double>());
  const auto solid = write_config("s.json", {{"kernel", "power(alpha=-0.5)"},
                                             {"epsilon", 0.1},
                                             {"set", {{"fixture", "solid_disk"}}},
                                             {"band", {-0.5, 0.5}},
                                             {"m_bar", 10.0}});
  ASSERT_EQ(run({"cut-paste", "--config", solid, "--out", out("b")}), 0) << err_.str();
  EXPECT_EQ(read_json("b", "cut_paste.json").at("result").at("outcome"), "no_cut");
  const auto over = write_config("o.json", {{"kernel", "power(alpha=-0.5)"},
                                            {"epsilon", 0.1},
                                            {"set", {{"fixture", "solid_disk"}}},
                                            {"band", {-0.5, 0.5}},
                                            {"m_bar", 0.1}});
  EXPECT_EQ(run({"cut-paste", "--config", over, "--out", out("c")}), 2);
}

TEST_F(Cli, MinimizeDeterministicAndSeeded) {
  const auto cfg = write_config("m.json", {{"kernel", "power(alpha=-0.5)"},
                                           {"epsilon", 1e-3},
                                           {"optimizer", {{"n_modes", 4}, {"tol_step", 1e-4}}}});
  ASSERT_EQ(run({"minimize", "--config", cfg, "--out", out("a"), "--seed", "3"}), 0) << err_.str();
  ASSERT_EQ(run({"minimize", "--config", cfg, "--out", out("b"), "--seed", "3", "--threads", "2"}), 0);
  ASSERT_EQ(run({"minimize", "--config", cfg, "--out", out("c"), "--seed", "4"}), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "minimize.json"), slurp(dir_ / "b" / "minimize.json"));
  EXPECT_NE(slurp(dir_ / "a" / "minimize.json"), slurp(dir_ / "c" / "minimize.json"));
  const json j = read_json("a", "minimize.json");
  EXPECT_EQ(j.at("config").at("seed"), 3);
  EXPECT_LT(j.at("result").at("trace").at("asymmetry").at("asymmetry").get<double>(), 1e-2);
  const auto bad = write_config("n.json", {{"kernel", "power(alpha=-0.5)"}, {"epsilon", 1e-3}, {"optimizer", {{"steps", 4}}}});
  EXPECT_EQ(run({"minimize", "--config", bad, "--out", out("d")}), 2);
}

TEST_F(Cli, SweepSingleEpsilonAndResume) {
  const json base{{"kernel", "power(alpha=-0.5)"}, {"epsilons", {0.0, 0.6}}, {"optimizer", {{"n_modes", 3}, {"tol_step", 1e-4}}}};
  const auto cfg = write_config("s.json", base);
  ASSERT_EQ(run({"sweep", "--config", cfg, "--out", out("a")}), 0) << err_.str();
  const json j = read_json("a", "sweep.json");
  EXPECT_EQ(j.at("result").at("rows").size(), 2u);
  EXPECT_FALSE(j.at("result").at("threshold").is_null());
  EXPECT_TRUE(fs::exists(dir_ / "a" / "fission.svg"));

  // keep the stamp, the header and the first row, then resume
  const std::string full = slurp(dir_ / "a" / "sweep.csv");
  std::size_t cut = 0;
  for (int i = 0; i < 3; ++i) cut = full.find('\n', cut) + 1;
  fs::create_directories(dir_ / "b");
  std::ofstream(dir_ / "b" / "sweep.csv", std::ios::binary) << full.substr(0, cut);
  json resumed = base;
  resumed["resume"] = true;
  ASSERT_EQ(run({"sweep", "--config", write_config("r.json", resumed), "--out", out("b")}), 0) << err_.str();
  for (const char* f : {"sweep.csv", "sweep.json", "fission.svg"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;

  // a checkpoint from another config is refused
  json other = resumed;
  other["epsilons"] = {0.0, 0.7};
  EXPECT_EQ(run({"sweep", "--config", write_config("o.json", other), "--out", out("b")}), 2);

  json one = base;
  one["epsilons"] = {0.3};
  ASSERT_EQ(run({"sweep", "--config", write_config("one.json", one), "--out", out("c")}), 0);
  EXPECT_EQ(read_json("c", "sweep.json").at("result").at("rows").size(), 1u);
}

TEST_F(Cli, SweepPartialFailure) {
  const auto cfg = write_config("s.json", {{"kernel", "power(alpha=-2.5)"},
                                           {"epsilons", {0.0, 0.1}},
                                           {"h_max", 1},
                                           {"optimizer", {{"n_modes", 3}, {"tol_step", 1e-3}}}});
  EXPECT_EQ(run({"sweep", "--config", cfg, "--out", out()}), 3);
  const json rows = read_json("out", "sweep.json").at("result").at("rows");
  EXPECT_EQ(rows[0].at("status"), "ok");
  EXPECT_EQ(rows[1].at("status"), "failed");
}

TEST_F(Cli, ReportCollectsOutputs) {
  EXPECT_EQ(run({"report", "--out", out()}), 2);
  const auto e = write_config("c.json", {{"kernel", "constant()"}, {"epsilon", 1.0}, {"shape", {{"r0", 1.0}}}});
  ASSERT_EQ(run({"energy", "--config", e, "--out", out()}), 0);
  const auto k = write_config("k.json", {{"kernel", "power(alpha=-3)"}, {"checks", {"admissibility"}}});
  ASSERT_EQ(run({"kernel-check", "--config", k, "--out", out()}), 1);
  EXPECT_EQ(run({"report", "--out", out()}), 1);
  const json r = read_json("out", "report.json");
  EXPECT_EQ(r.at("result").at("entries").size(), 2u);
  EXPECT_NE(slurp(dir_ / "out" / "report.md").find("energy.svg"), std::string::npos);
}

TEST(CliHelpers, ConfigHashIsCanonical) {
  const json a = json::parse(R"({"b": 1, "a": [1, 2]})");
  const json b = json::parse(R"({"a": [1, 2], "b": 1})");
  EXPECT_EQ(cli::config_hash(a), cli::config_hash(b));
  EXPECT_NE(cli::config_hash(a), cli::config_hash(json::parse(R"({"a": [2, 1], "b": 1})")));
}
