// Command-line front end for the exact Morava K-theory calculator.
//
//   morava <command> [options]
//
// Commands:
//   ring               describe K(n)^*(BA) for A = prod Z/p^{k_i}
//   fgl                print the formal group law coefficient block
//   transfer-unit      print the diagonal transfer unit tr(1) in ring(A x A)
//   pairing            print the duality pairing and its inverse
//   fundamental-class  print [BA] = lambda^-1(1)
//   cap-table          print all nonzero cap products of basis classes
//   verify-transverse  check [BH] cap [BK] = [B(H meet K)] for one pair
//   sweep              check the formula on every transverse subgroup pair
//   reproduce-paper    write the deterministic golden files to --out
//
// Exit codes: 0 success, 1 verification failure, 2 invalid input,
// 3 resource cap exceeded.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "morava/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"exact Morava K-theory invariants of classifying spaces of finite "
               "abelian p-groups"};
  app.require_subcommand(1);

  morava::ComputationRequest req;
  std::string groupArg, hArg, kArg;

  auto addCommon = [&](CLI::App* cmd, bool needsGroup) {
    cmd->add_option("-p,--p", req.p, "prime p")->capture_default_str();
    cmd->add_option("-n,--n", req.n, "height n >= 1")->capture_default_str();
    if (needsGroup)
      cmd->add_option("-g,--group", groupArg,
                      "cyclic factor orders, e.g. \"4,2\" for Z/4 x Z/2");
    cmd->add_option("-f,--format", req.format, "output format: text | json")
        ->capture_default_str();
    cmd->add_option("--cap", req.cap, "resource cap (basis rank / block size / group order)")
        ->capture_default_str();
    cmd->add_option("-t,--threads", req.threads,
                    "worker threads (0 = MORAVA_THREADS env or hardware)")
        ->capture_default_str();
  };

  CLI::App* ring = app.add_subcommand("ring", "describe the cohomology ring of BA");
  addCommon(ring, true);

  CLI::App* fgl = app.add_subcommand("fgl", "print the formal group law block");
  addCommon(fgl, false);
  fgl->add_option("-T,--trunc", req.trunc, "block size T (0 = p^(2n))")
      ->capture_default_str();

  CLI::App* tru = app.add_subcommand("transfer-unit", "print the diagonal transfer unit");
  addCommon(tru, true);

  CLI::App* pairing = app.add_subcommand("pairing", "print the duality pairing");
  addCommon(pairing, true);

  CLI::App* fc = app.add_subcommand("fundamental-class", "print the fundamental class");
  addCommon(fc, true);

  CLI::App* capTable = app.add_subcommand("cap-table", "print basis cap products");
  addCommon(capTable, true);

  CLI::App* verify =
      app.add_subcommand("verify-transverse", "verify the intersection formula on a pair");
  addCommon(verify, true);
  verify->add_option("--subgroup-h", hArg, "generators of H, e.g. \"(1,1)\"");
  verify->add_option("--subgroup-k", kArg, "generators of K, e.g. \"(1,0),(0,2)\"");

  CLI::App* sweep =
      app.add_subcommand("sweep", "verify the formula on all transverse subgroup pairs");
  addCommon(sweep, true);

  CLI::App* repro =
      app.add_subcommand("reproduce-paper", "write the deterministic golden files");
  addCommon(repro, false);
  repro->add_option("-o,--out", req.outDir, "output directory for the golden files");

  CLI11_PARSE(app, argc, argv);

  req.command = app.get_subcommands().front()->get_name();
  try {
    if (!groupArg.empty()) req.group = morava::parseGroupOrders(groupArg, req.p);
    if (!hArg.empty()) req.subgroupH = morava::parseGenerators(hArg);
    if (!kArg.empty()) req.subgroupK = morava::parseGenerators(kArg);
  } catch (const morava::InvalidInputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  const morava::RunResult result = morava::run(req);
  if (result.exitCode == 0)
    std::cout << result.output;
  else
    std::cerr << result.output;
  return result.exitCode;
}
