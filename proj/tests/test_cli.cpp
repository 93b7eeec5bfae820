#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace {

using json = nlohmann::json;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult cli(const std::string& args) {
  const std::string cmd = std::string(QCTOL_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  RunResult r;
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

json cli_json(const std::string& args, int expected_code = 0) {
  const RunResult r = cli(args);
  EXPECT_EQ(r.code, expected_code) << args << "\n" << r.out;
  return json::parse(r.out);
}

std::string data(const std::string& name) { return std::string(QCTOL_TEST_DATA) + "/" + name; }

}  // namespace

TEST(Cli, CnotDepolarizing) {
  const std::filesystem::path cert = std::filesystem::temp_directory_path() / "qctol_cli_cert.json";
  const json j = cli_json("thresholds cnot-depolarizing --certificate-out " + cert.string());
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_EQ(j["command"], "thresholds cnot-depolarizing");
  EXPECT_NEAR(j["p_star"].get<double>(), 2.0 / 3.0, 1e-6);
  EXPECT_TRUE(j["tight_upper"].get<bool>());
  EXPECT_EQ(j["paper_comparison"], 0.74);
  const json v = cli_json("thresholds cnot-depolarizing --verify " + cert.string());
  EXPECT_TRUE(v["valid"].get<bool>());

  json tampered = json::parse(std::ifstream(cert));
  tampered["witnesses"]["upper"][0]["terms"][0]["weight"] = 0.9;
  std::ofstream(cert) << tampered.dump();
  cli_json("thresholds cnot-depolarizing --verify " + cert.string(), 3);
  std::filesystem::remove(cert);

  EXPECT_NEAR(cli_json("thresholds cnot-depolarizing --tol 1e-3")["p_star"].get<double>(), 0.667, 1e-3);
}

TEST(Cli, Clifford) {
  EXPECT_NEAR(cli_json("thresholds clifford --theta 0.785398 --noise generic")["p_star"].get<double>(), 0.146447, 1e-6);
  EXPECT_NEAR(cli_json("thresholds clifford --theta 0.785398 --noise dephasing")["p_star"].get<double>(), 0.292893,
              1e-6);
  EXPECT_EQ(cli_json("thresholds clifford --theta 0")["p_star"].get<double>(), 0.0);
  EXPECT_EQ(cli("thresholds clifford --theta 0.3 --noise thermal").code, 2);
}

TEST(Cli, AnalyzeGate) {
  const json s = cli_json("analyze gate --name cnot --split S");
  EXPECT_NEAR(s["ebits"].get<double>(), 1.0, 1e-9);
  EXPECT_NEAR(cli_json("analyze gate --name cnot --split EB")["ebits"].get<double>(), 2.0, 1e-9);
  // Identity: one |+> pair per side of the S split, both across EB.
  EXPECT_NEAR(cli_json("analyze gate --name identity --split EB")["ebits"].get<double>(), 2.0, 1e-9);
  EXPECT_NEAR(cli_json("analyze gate --name identity --split S")["ebits"].get<double>(), 0.0, 1e-9);
  const json ad = cli_json("analyze gate --channel " + data("amplitude_damping.json") + " --split EB");
  EXPECT_TRUE(ad["ebits"].is_null());
  EXPECT_LT(ad["min_pt_eigenvalue"].get<double>(), 0.0);
  EXPECT_EQ(cli("analyze gate --name cnot --split XY").code, 2);
}

TEST(Cli, Simulate) {
  const std::string bell = data("bell.json");
  const json a = cli_json("simulate --circuit " + bell + " --shots 100000 --seed 3");
  const double n00 = a["counts"]["00"].get<double>();
  EXPECT_NEAR(n00, 50000, 4 * std::sqrt(25000.0));
  EXPECT_EQ(a["counts"].size(), 2u);
  EXPECT_EQ(a["metadata"]["seed"], 3);
  EXPECT_EQ(a["counts"], cli_json("simulate --circuit " + bell + " --shots 100000 --seed 3")["counts"]);

  const json o = cli_json("simulate --circuit " + data("noisy_cnot_67.json") + " --shots 100000 --seed 1 --oracle");
  EXPECT_TRUE(o["comparison"]["pass"].get<bool>());

  EXPECT_EQ(cli("simulate --circuit " + data("bad_target.json")).code, 2);
  EXPECT_EQ(cli("simulate --circuit " + data("missing.json")).code, 2);
  EXPECT_EQ(cli("simulate --circuit " + bell + " --bogus").code, 2);
}

TEST(Cli, Verify) {
  const json om = cli_json("verify omega");
  EXPECT_TRUE(om["pass"].get<bool>());
  const json ob = cli_json("verify observation0 --circuits 300 --seed 7");
  EXPECT_EQ(ob["escapes"], 0);
  const json tw = cli_json("verify twirl --group cnot --seed 4");
  EXPECT_EQ(tw["lambda"].size(), 16u);
  EXPECT_NEAR(tw["lambda_sum"].get<double>(), 1.0, 1e-9);
  EXPECT_TRUE(cli_json("verify twirl --group cnot --channel " + data("amplitude_damping.json"))["pass"].get<bool>());
}

TEST(Cli, PrettyAndErrors) {
  const RunResult r = cli("thresholds clifford --theta 0.785398 --pretty");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("p_star"), std::string::npos);
  EXPECT_EQ(r.out.find('{'), std::string::npos);
  EXPECT_EQ(cli("").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
}
