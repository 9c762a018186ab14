#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "morava/duality.hpp"

namespace morava {

// One library invocation, as assembled by the command-line front end (or by
// tests driving the front end in-process).
struct ComputationRequest {
  // ring | fgl | transfer-unit | pairing | fundamental-class | cap-table |
  // verify-transverse | sweep | reproduce-paper
  std::string command;
  std::int64_t p = 2;
  int n = 1;
  std::vector<int> group;  // cyclic factor exponents k_i (group = prod Z/p^{k_i})
  std::vector<std::vector<std::int64_t>> subgroupH, subgroupK;  // generator tuples
  std::int64_t trunc = 0;       // fgl block size; 0 picks p^{2n}
  std::string format = "text";  // text | json
  std::int64_t cap = 1 << 12;   // resource cap (ring rank, table size, group order)
  std::string outDir;           // reproduce-paper: where golden files go
  int threads = 0;              // 0 = MORAVA_THREADS env, else hardware
};

struct RunResult {
  int exitCode = 0;  // 0 ok, 1 verification failure, 2 invalid input, 3 resource cap
  std::string output;
};

// Execute a request; never throws (errors are mapped to exit codes + message).
RunResult run(const ComputationRequest& req);

// Parse subgroup generators: "(1,0),(0,2)" or "1,0;0,2".
std::vector<std::vector<std::int64_t>> parseGenerators(const std::string& s);

// Parse a group given by cyclic factor orders, e.g. "4,2" = Z/4 x Z/2;
// validates each order is a power of p (> 1) and returns the exponents.
std::vector<int> parseGroupOrders(const std::string& s, std::int64_t p);

// Verify the intersection formula on every ordered pair of subgroups of g
// that is transverse.  Work is split across threads; the outcome is
// deterministic (independent of the thread count).
struct SweepOutcome {
  std::int64_t subgroups = 0;
  std::int64_t orderedPairs = 0;
  std::int64_t transversePairs = 0;
  std::int64_t matches = 0;
  std::int64_t mismatches = 0;
};

SweepOutcome sweepGroup(const PrimeContext& ctx, const AbelianPGroup& g, int threads,
                        std::int64_t cap = 1 << 12);

int effectiveThreads(int requested);

}  // namespace morava
