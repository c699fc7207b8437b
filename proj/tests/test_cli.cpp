#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "p5iso/cli/dispatch.hpp"

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  json report;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run run(const std::vector<std::string>& args) {
  std::string cmd = P5ISO_CLI_PATH;
  for (auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  std::string out;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) out.append(buf, n);
  int st = pclose(p);
  Run r{WIFEXITED(st) ? WEXITSTATUS(st) : -1, out, json()};
  if (!out.empty() && out[0] == '{') r.report = json::parse(out);
  return r;
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("p5iso_test_" + name); }

void expect_schema(const json& r) {
  ASSERT_TRUE(r.contains("command"));
  ASSERT_TRUE(r.contains("status"));
  ASSERT_TRUE(r.at("artifacts").is_array());
  std::vector<std::string> names;
  bool all_pass = true;
  for (auto& c : r.at("checks")) {
    for (const char* k : {"name", "expected_ref", "result", "residual"}) EXPECT_TRUE(c.contains(k)) << k;
    EXPECT_FALSE(c.at("expected_ref").get<std::string>().empty());
    all_pass = all_pass && c.at("result") == "pass";
    names.push_back(c.at("name"));
  }
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  if (r.at("status") != "error") EXPECT_EQ(r.at("status") == "pass", all_pass);
}

int expected_code(const json& r) { return r.at("status") == "pass" ? 0 : 1; }

}  // namespace

TEST(Cli, UnknownSubcommand) {
  auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(run({"verify", "nothing"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
}

TEST(Cli, UsageTextOnStderr) {
  std::ostringstream out, err;
  const char* argv[] = {"p5iso", "frobnicate"};
  auto o = p5iso::cli::dispatch(2, argv, out, err);
  EXPECT_EQ(o.code, 2);
  EXPECT_NE(err.str().find("usage: p5iso"), std::string::npos);
  EXPECT_NE(err.str().find("verify lax2|lax4|hamiltonian|canonical|charts|lemma21"), std::string::npos);
  EXPECT_TRUE(out.str().empty());
}

TEST(Cli, BadFlagValuesAreUsageErrors) {
  EXPECT_EQ(run({"verify", "lax4", "--tol", "-1"}).code, 2);
  EXPECT_EQ(run({"monodromy", "rank2", "--theta0", "abc"}).code, 2);
  EXPECT_EQ(run({"classify", "lattice", "--json", "{not json"}).code, 2);
  EXPECT_EQ(run({"classify", "fiber", "--json", "{\"a1\":1}"}).code, 2);
  EXPECT_EQ(run({"derive", "p5", "--exact", "--numeric"}).code, 2);
}

// The printed q equation disagrees with the derived one in six coefficients,
// so the report must list every coefficient comparison and fail.
TEST(Cli, VerifyLax2ListsCoefficientMatches) {
  auto r = run({"verify", "lax2"});
  expect_schema(r.report);
  EXPECT_EQ(r.code, expected_code(r.report));
  std::vector<std::string> mismatched;
  int coeffs = 0;
  for (auto& c : r.report["checks"]) {
    std::string n = c["name"];
    if (n.rfind("q_equation.coeff[", 0) == 0) {
      ++coeffs;
      if (c["result"] == "fail") mismatched.push_back(n);
    }
    if (n.rfind("p5_params.", 0) == 0) EXPECT_EQ(c["result"], "pass") << n;
    if (n == "q_equation.standard_p5_after_moebius") EXPECT_EQ(c["result"], "pass");
  }
  EXPECT_EQ(coeffs, 10);
  EXPECT_EQ(mismatched, (std::vector<std::string>{"q_equation.coeff[1]", "q_equation.coeff[q]", "q_equation.coeff[q^2]",
                                                   "q_equation.coeff[q^3]", "q_equation.coeff[q^4]",
                                                   "q_equation.coeff[q^5]"}));
  EXPECT_EQ(r.report["status"], "fail");
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, VerifySuitesExitCodeContract) {
  for (std::string t : {"lax4", "canonical", "charts", "lemma21"}) {
    auto r = run({"verify", t});
    expect_schema(r.report);
    EXPECT_EQ(r.report["command"], "verify " + t);
    EXPECT_EQ(r.report["status"], "pass") << t;
    EXPECT_EQ(r.code, 0) << t;
  }
  auto h = run({"verify", "hamiltonian"});
  expect_schema(h.report);
  EXPECT_EQ(h.code, expected_code(h.report));
  for (auto& c : h.report["checks"])
    if (c["name"].get<std::string>().rfind("b_system.", 0) == 0 ||
        c["name"].get<std::string>().rfind("hamilton_without_t.", 0) == 0)
      EXPECT_EQ(c["result"], "pass") << c["name"];
}

TEST(Cli, IntegrateP5WritesCsv) {
  auto csv = tmp("p5.csv");
  fs::remove(csv);
  auto r = run({"integrate", "p5", "--theta0", "1/3", "--theta1", "1/5", "--thetainf", "1/7", "--t0", "1", "--t1", "2",
                "--csv", csv.string()});
  EXPECT_EQ(r.code, 0);
  expect_schema(r.report);
  ASSERT_TRUE(fs::exists(csv));
  std::ifstream f(csv);
  std::string header;
  std::getline(f, header);
  EXPECT_EQ(header, "t_re,t_im,q_re,q_im,dq_re,dq_im");
  size_t rows = 0;
  for (std::string line; std::getline(f, line);) ++rows;
  EXPECT_EQ(rows, r.report["data"]["samples"].get<size_t>());
  EXPECT_EQ(r.report["artifacts"], json::array({csv.string()}));
  fs::remove(csv);
}

TEST(Cli, OutFlagWritesReport) {
  auto out = tmp("report.json");
  fs::remove(out);
  auto r = run({"verify", "canonical", "--out", out.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(out);
  json j = json::parse(f);
  expect_schema(j);
  EXPECT_EQ(j["status"], "pass");
  fs::remove(out);
}

TEST(Cli, DeriveCommands) {
  for (std::string t : {"p5", "riccati", "fsystem", "bsystem", "cubic4"}) {
    auto r = run({"derive", t});
    expect_schema(r.report);
    EXPECT_EQ(r.code, 0) << t;
    EXPECT_FALSE(r.report["data"].empty()) << t;
  }
  auto p = run({"derive", "p5"}).report;
  EXPECT_EQ(p["data"]["p5_params"]["delta"], "-1/2");
  auto ric = run({"derive", "riccati", "--exact", "--theta0", "1/3", "--theta1", "1/5", "--thetainf", "-2/15",
                  "--json", "{\"eps\":[1,1,1]}"});
  EXPECT_EQ(ric.code, 0);
  EXPECT_EQ(run({"derive", "riccati", "--json", "{\"eps\":[1,2,1]}"}).code, 1);
}

TEST(Cli, IntegrateAndMonodromy) {
  for (auto args : std::vector<std::vector<std::string>>{{"integrate", "riccati"},
                                                          {"integrate", "fsystem"},
                                                          {"integrate", "bsystem"},
                                                          {"monodromy", "rank2"},
                                                          {"monodromy", "rank4"}}) {
    auto r = run(args);
    expect_schema(r.report);
    EXPECT_EQ(r.code, 0) << args[0] << " " << args[1];
  }
  auto m = run({"monodromy", "rank2", "--theta0", "0", "--thetainf", "1/2"}).report;
  EXPECT_NEAR(m["data"]["s"][0][0].get<double>(), 2.0, 1e-15);
  EXPECT_NEAR(m["data"]["s"][2][1].get<double>(), 1.0, 1e-15);
}

TEST(Cli, DomainErrorsGiveErrorStatus) {
  auto r = run({"integrate", "riccati", "--theta0", "1/3", "--theta1", "1/5", "--thetainf", "1/7"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(r.report["status"], "error");
  EXPECT_EQ(r.report["data"]["error"], "NoSuchReduciblePoint");
  auto e = run({"integrate", "fsystem", "--json", "{\"eps\":[0.1,0,0,0]}"});
  EXPECT_EQ(e.code, 1);
  EXPECT_EQ(e.report["data"]["error"], "InvalidParams");
}

TEST(Cli, Classify) {
  auto l = run({"classify", "lattice", "--json", "{\"theta\":\"2\",\"coeffs\":[[[\"-1\",\"0\"],[\"0\",\"1\"]]]}"});
  EXPECT_EQ(l.code, 0);
  EXPECT_EQ(l.report["data"]["lattices"]["kind"], "ProjectiveLineFamily");
  EXPECT_EQ(l.report["data"]["lattices"]["parametrization"], "P(C b1 + C z^-2 b2)");
  auto o = run({"classify", "lattice", "--json",
                "{\"theta\":\"2\",\"coeffs\":[[[\"-1\",\"0\"],[\"0\",\"1\"]],[[0,0],[0,0]],[[0,1],[0,0]]]}"});
  EXPECT_EQ(o.report["data"]["lattices"]["kind"], "Unique");
  auto bad = run({"classify", "lattice", "--json", "{\"theta\":\"1/3\",\"coeffs\":[[[\"1\",\"0\"],[\"0\",\"-1\"]]]}"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(bad.report["data"]["error"], "BadLeadingTerm");
  auto e = run({"classify", "eigenline", "--json",
                "{\"theta\":\"1/3\",\"coeffs\":[[[\"1/6\",\"0\"],[\"0\",\"-1/6\"]]],\"eta\":\"1/6\"}"});
  EXPECT_EQ(e.code, 0);
  EXPECT_EQ(e.report["data"]["eigenlines"]["kind"], "UniqueLine");
  auto f = run({"classify", "fiber", "--json", "{\"a1\":\"5\",\"a2\":\"7\",\"s1\":\"1/2\",\"s2\":\"1/3\",\"s3\":\"2\"}"});
  EXPECT_EQ(f.code, 0);
  EXPECT_EQ(f.report["data"]["class"], "OnePoint");
  auto fe = run({"classify", "fiber", "--json", "{\"a1\":\"5\",\"a2\":\"7\",\"s1\":\"1/2\",\"s2\":\"1/3\",\"s3\":\"35\"}"});
  EXPECT_EQ(fe.report["data"]["class"], "Empty");
  auto fn = run({"classify", "fiber", "--numeric", "--json", "{\"a1\":5,\"a2\":7,\"s1\":0.5,\"s2\":\"1/3\",\"s3\":35}"});
  EXPECT_EQ(fn.report["data"]["class"], "Empty");
}

TEST(Cli, HelpExitsZero) {
  auto r = run({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("usage: p5iso"), std::string::npos);
}
