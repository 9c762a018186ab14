#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "morava/cli.hpp"

using namespace morava;
using nlohmann::json;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("group order parsing") {
  CHECK(parseGroupOrders("4,2", 2) == std::vector<int>{2, 1});
  CHECK(parseGroupOrders("9", 3) == std::vector<int>{2});
  CHECK(parseGroupOrders("2x2x2", 2) == std::vector<int>{1, 1, 1});
  CHECK(parseGroupOrders(" 8 , 2 ", 2) == std::vector<int>{3, 1});
  CHECK(parseGroupOrders("", 2).empty());
  CHECK_THROWS_AS(parseGroupOrders("6", 2), InvalidInputError);   // not a 2-power
  CHECK_THROWS_AS(parseGroupOrders("4", 3), InvalidInputError);   // wrong prime
  CHECK_THROWS_AS(parseGroupOrders("1", 2), InvalidInputError);   // order too small
  CHECK_THROWS_AS(parseGroupOrders("4,2", 6), InvalidInputError); // p not prime
  CHECK_THROWS_AS(parseGroupOrders("4;2", 2), InvalidInputError); // bad separator
}

TEST_CASE("subgroup generator parsing") {
  using Gens = std::vector<std::vector<std::int64_t>>;
  CHECK(parseGenerators("(1,0),(0,2)") == Gens{{1, 0}, {0, 2}});
  CHECK(parseGenerators("1,0;0,2") == Gens{{1, 0}, {0, 2}});
  CHECK(parseGenerators("(1,-1)") == Gens{{1, -1}});
  CHECK(parseGenerators("3") == Gens{{3}});
  CHECK(parseGenerators("").empty());
  CHECK_THROWS_AS(parseGenerators("(1,0"), InvalidInputError);
  CHECK_THROWS_AS(parseGenerators("()"), InvalidInputError);
  CHECK_THROWS_AS(parseGenerators("(a,b)"), InvalidInputError);
}

TEST_CASE("ring command, text and json") {
  ComputationRequest req;
  req.command = "ring";
  req.p = 2;
  req.n = 1;
  req.group = {2, 1};
  const RunResult text = run(req);
  CHECK(text.exitCode == 0);
  CHECK(contains(text.output, "group: Z/4 x Z/2   p=2 n=1"));
  CHECK(contains(text.output, "coefficients: F_2[v,v^-1], deg v = -2"));
  CHECK(contains(text.output, "  x1: deg 2, x1^4 = 0"));
  CHECK(contains(text.output, "  x2: deg 2, x2^2 = 0"));
  CHECK(contains(text.output, "monomial basis rank: 8"));

  req.format = "json";
  const RunResult js = run(req);
  CHECK(js.exitCode == 0);
  const json j = json::parse(js.output);
  CHECK(j["command"] == "ring");
  CHECK(j["rank"] == 8);
  CHECK(j["nilpotencies"] == json::array({4, 2}));
  CHECK(j["vDegree"] == -2);
  CHECK(j["group"] == json::array({2, 1}));
}

TEST_CASE("fgl command, text and json") {
  ComputationRequest req;
  req.command = "fgl";
  req.p = 2;
  req.n = 1;
  req.trunc = 4;
  const RunResult text = run(req);
  CHECK(text.exitCode == 0);
  CHECK(contains(text.output, "formal group law block  p=2 n=1 T=4"));
  CHECK(contains(text.output, "a[1,0] = 1   vexp 0"));
  CHECK(contains(text.output, "a[1,1] = 1   vexp 1"));
  CHECK(contains(text.output, "a[2,1] = 1   vexp 2"));
  CHECK_FALSE(contains(text.output, "a[2,2]"));

  req.format = "json";
  const RunResult js = run(req);
  const json j = json::parse(js.output);
  CHECK(j["trunc"] == 4);
  // interior entries: (1,1), (1,2), (2,1) plus the two unital ones
  CHECK(j["entries"].size() == 5);
  bool saw11 = false;
  for (const auto& e : j["entries"]) {
    CHECK(e.contains("vExp"));  // the one camel-case key in the schema
    CHECK_FALSE(e.contains("vexp"));
    if (e["i"] == 1 && e["j"] == 1) {
      saw11 = true;
      CHECK(e["c"] == 1);
      CHECK(e["vExp"] == 1);
    }
  }
  CHECK(saw11);

  // default truncation is p^(2n)
  ComputationRequest dflt;
  dflt.command = "fgl";
  dflt.p = 3;
  dflt.n = 1;
  dflt.format = "json";
  CHECK(json::parse(run(dflt).output)["trunc"] == 9);
}

TEST_CASE("transfer-unit command and extension flags") {
  ComputationRequest req;
  req.command = "transfer-unit";
  req.p = 2;
  req.n = 1;
  req.group = {1};
  const RunResult text = run(req);
  CHECK(text.exitCode == 0);
  CHECK(contains(text.output, "tr[(0),(1)] = 1   vexp 1"));
  CHECK(contains(text.output, "tr[(1),(0)] = 1   vexp 1"));
  CHECK(contains(text.output, "tr[(1),(1)] = 1   vexp 2"));  // -v^2 has c = 1 mod 2
  CHECK(contains(text.output, "construction extensions: none"));

  req.group = {2};
  CHECK(contains(run(req).output, "construction extensions: transfer-pk-extension"));
  req.group = {1, 1};
  CHECK(contains(run(req).output, "construction extensions: transfer-product-extension"));
  req.group = {2, 1};
  CHECK(contains(run(req).output,
                 "construction extensions: transfer-product-extension, transfer-pk-extension"));
}

TEST_CASE("pairing and fundamental-class commands") {
  ComputationRequest req;
  req.command = "pairing";
  req.p = 2;
  req.n = 1;
  req.group = {1};
  req.format = "json";
  const json j = json::parse(run(req).output);
  CHECK(j["rank"] == 2);
  CHECK(j["entries"].size() == 3);
  CHECK(j["inverse"].size() == 3);

  ComputationRequest fc;
  fc.command = "fundamental-class";
  fc.p = 2;
  fc.n = 1;
  fc.group = {1};
  const RunResult text = run(fc);
  CHECK(contains(text.output, "[BA] = b[0] + v^-1*b[1]"));
  fc.format = "json";
  const json jf = json::parse(run(fc).output);
  CHECK(jf["class"].size() == 2);
  CHECK(jf["class"][0]["basis"] == json::array({0}));
  CHECK(jf["class"][1]["coeff"][0]["vExp"] == -1);
}

TEST_CASE("cap-table command") {
  ComputationRequest req;
  req.command = "cap-table";
  req.p = 3;
  req.n = 1;
  req.group = {1};
  const RunResult text = run(req);
  CHECK(text.exitCode == 0);
  CHECK(contains(text.output, "b(1) cap b(1) = v*b[0]"));
  CHECK(contains(text.output, "b(2) cap b(2) = 2*v^2*b[0] + v*b[2]"));
  CHECK_FALSE(contains(text.output, "b(0) cap b(0)"));  // zero rows are omitted
}

TEST_CASE("verify-transverse command") {
  ComputationRequest req;
  req.command = "verify-transverse";
  req.p = 2;
  req.n = 1;
  req.group = {1, 1};
  req.subgroupH = {{1, 0}};
  req.subgroupK = {{0, 1}};
  const RunResult text = run(req);
  CHECK(text.exitCode == 0);
  CHECK(contains(text.output, "transverse: yes   (product-cover yes, order-equation yes, coset-pairs yes)"));
  CHECK(contains(text.output, "cap equals meet class: yes"));
  CHECK(contains(text.output, "intersection formula verified: yes"));

  req.format = "json";
  const json j = json::parse(run(req).output);
  CHECK(j["transverse"] == true);
  CHECK(j["match"] == true);
  CHECK(j["capEqualsMeet"] == true);
  CHECK(j["criteria"]["productCover"] == true);
  CHECK(j["h"]["order"] == 2);
  CHECK(j["meet"]["order"] == 1);

  // non-transverse pair: match is reported as null, not false
  req.subgroupK = {{1, 0}};
  const RunResult same = run(req);
  CHECK(same.exitCode == 0);
  const json js = json::parse(same.output);
  CHECK(js["transverse"] == false);
  CHECK(js["match"].is_null());

  // generators are reduced into canonical coordinates
  req.subgroupK = {{-1, 2}};  // = (1, 0)
  CHECK(json::parse(run(req).output)["k"]["basis"] == json::array({json::array({1, 0})}));

  ComputationRequest missing;
  missing.command = "verify-transverse";
  missing.p = 2;
  missing.n = 1;
  missing.group = {1, 1};
  CHECK(run(missing).exitCode == 2);
}

TEST_CASE("sweep command is deterministic across thread counts") {
  ComputationRequest req;
  req.command = "sweep";
  req.p = 2;
  req.n = 1;
  req.group = {2};
  req.threads = 1;
  const RunResult one = run(req);
  req.threads = 3;
  const RunResult three = run(req);
  CHECK(one.exitCode == 0);
  CHECK(one.output == three.output);
  CHECK(contains(one.output, "subgroups: 3"));
  CHECK(contains(one.output, "ordered pairs: 9"));
  CHECK(contains(one.output, "transverse pairs: 5"));
  CHECK(contains(one.output, "formula matches: 5"));
  CHECK(contains(one.output, "formula mismatches: 0"));

  req.format = "json";
  const json j = json::parse(run(req).output);
  CHECK(j["subgroups"] == 3);
  CHECK(j["transversePairs"] == 5);
  CHECK(j["matches"] == 5);
  CHECK(j["mismatches"] == 0);
}

TEST_CASE("error mapping to exit codes") {
  ComputationRequest req;
  req.command = "ring";
  req.p = 4;  // not prime
  req.n = 1;
  req.group = {1};
  const RunResult bad = run(req);
  CHECK(bad.exitCode == 2);
  CHECK(contains(bad.output, "error:"));

  ComputationRequest nogroup;
  nogroup.command = "ring";
  CHECK(run(nogroup).exitCode == 2);

  ComputationRequest unknown;
  unknown.command = "frobnicate";
  CHECK(run(unknown).exitCode == 2);

  ComputationRequest badfmt;
  badfmt.command = "fgl";
  badfmt.p = 2;
  badfmt.n = 1;
  badfmt.trunc = 4;
  badfmt.format = "yaml";
  CHECK(run(badfmt).exitCode == 2);

  ComputationRequest capped;
  capped.command = "fgl";
  capped.p = 2;
  capped.n = 1;
  capped.trunc = 128;
  capped.cap = 64;
  const RunResult r3 = run(capped);
  CHECK(r3.exitCode == 3);
  CHECK(contains(r3.output, "resource cap:"));

  ComputationRequest bigring;
  bigring.command = "ring";
  bigring.p = 2;
  bigring.n = 1;
  bigring.group = {13};  // rank 8192 > default cap 4096
  CHECK(run(bigring).exitCode == 3);
}

TEST_CASE("reproduce command writes byte-identical bundles") {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / "morava_cli_test_repro";
  const fs::path dirA = base / "a", dirB = base / "b";
  fs::remove_all(base);

  ComputationRequest req;
  req.command = "reproduce-paper";
  req.p = 2;
  req.n = 1;
  req.threads = 1;
  req.outDir = dirA.string();
  const RunResult ra = run(req);
  CHECK(ra.exitCode == 0);
  CHECK(contains(ra.output, "manifest.json"));

  req.outDir = dirB.string();
  req.threads = 2;  // outputs must not depend on the thread count
  CHECK(run(req).exitCode == 0);

  std::set<std::string> names;
  for (const auto& e : fs::directory_iterator(dirA)) names.insert(e.path().filename().string());
  CHECK(names.size() == 15);
  CHECK(names.count("manifest.json") == 1);
  CHECK(names.count("fgl_p2_n1_T8.txt") == 1);
  CHECK(names.count("sweep_counts.txt") == 1);
  for (const std::string& name : names) CHECK(slurp(dirA / name) == slurp(dirB / name));

  // the manifest indexes every other file with its hash
  const json manifest = json::parse(slurp(dirA / "manifest.json"));
  CHECK(manifest["files"].size() == names.size() - 1);
  for (const auto& f : manifest["files"]) {
    CHECK(names.count(f["name"].get<std::string>()) == 1);
    CHECK(f["fnv64"].get<std::string>().size() == 16);
  }

  ComputationRequest nodir;
  nodir.command = "reproduce-paper";
  CHECK(run(nodir).exitCode == 2);
  fs::remove_all(base);
}

TEST_CASE("thread resolution") {
  CHECK(effectiveThreads(5) == 5);
  CHECK(effectiveThreads(1) == 1);
  CHECK(effectiveThreads(100) == 64);
  CHECK(effectiveThreads(0) >= 1);
  CHECK(effectiveThreads(-2) >= 1);
}
