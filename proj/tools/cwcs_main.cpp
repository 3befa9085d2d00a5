// cwcs: command-line front end. Records go out as sorted-key JSON lines, a
// summary table follows. Exit 0 when every check passes, 1 on a tolerance
// failure, 2 on bad arguments or config errors.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "run.hpp"

namespace {

using cwcs::cli::Options;
using cwcs::cli::Record;

void write_summary(std::ostream& os, const std::vector<Record>& records) {
  std::size_t width = 5;
  for (const auto& r : records) width = std::max(width, r.key.size());
  char buf[64];
  os << std::left << std::setw(static_cast<int>(width) + 2) << "check" << "result  residual     tolerance\n";
  std::size_t failed = 0;
  for (const auto& r : records) {
    std::snprintf(buf, sizeof buf, "%-6s  %-11.3e  %.3e", r.pass ? "PASS" : "FAIL", r.residual, r.tolerance);
    os << std::setw(static_cast<int>(width) + 2) << r.key << buf << '\n';
    if (!r.pass) ++failed;
  }
  os << records.size() << " checks, " << failed << " failed\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential characters: pairings, Z/n values, CS and adiabatic certificates, eta"};
  app.require_subcommand(1);

  Options o;
  std::string out_path;
  if (const char* env = std::getenv("CWCS_RESOLUTION")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 0 || v > 4096) {
      std::cerr << "error: CWCS_RESOLUTION must be a non-negative integer\n";
      return 2;
    }
    o.resolution = static_cast<int>(v);
  }

  auto resolution = [&](CLI::App* s) {
    s->add_option("--resolution", o.resolution, "Nodes per axis (0: catalog default, env CWCS_RESOLUTION)")
        ->check(CLI::Range(0, 4096));
  };
  auto common = [&](CLI::App* s) {
    s->add_option("--tol", o.tol, "Override the check tolerance")->check(CLI::PositiveNumber);
    s->add_option("--out", out_path, "Write JSON lines here instead of stdout");
  };

  auto* pairing = app.add_subcommand("pairing", "Angle of a filling or integrality on a closed geometry");
  pairing->add_option("--catalog", o.catalog, "Catalog geometry (default disk2_flat)");
  pairing->add_option("--config", o.config, "Geometry config file")->check(CLI::ExistingFile);
  pairing->add_option("--a", o.a, "Disk holonomy");
  pairing->add_option("--k", o.k, "Monopole charge");
  resolution(pairing);
  common(pairing);

  auto* zn = app.add_subcommand("zn", "Z/n pairing: order, deformation and boundary vanishing");
  zn->add_option("--n", o.n, "Order")->check(CLI::Range(2, 64));
  zn->add_option("--k", o.k, "Flux numerator");
  zn->add_option("--a", o.a, "Holonomy of the bounding example");
  resolution(zn);
  common(zn);

  auto* cs = app.add_subcommand("cs-check", "Transgression residuals on random rank-2 pairs");
  cs->add_option("--catalog", o.catalog, "torus2 or torus4");
  cs->add_option("--seed", o.seed, "Seed for the random connections");
  resolution(cs);
  common(cs);

  auto* adiabatic = app.add_subcommand("adiabatic", "CS-triviality certificate of a submersion frame");
  adiabatic->add_option("--catalog", o.catalog, "hopf, hopf_left_invariant or flat_product");
  adiabatic->add_option("--config", o.config, "Geometry config with a frame table")->check(CLI::ExistingFile);
  adiabatic->add_option("--lmax", o.lmax, "Highest transgression degree")->check(CLI::Range(1, 8));
  adiabatic->add_flag("--control", o.control, "Also run the full-B control, which must fail");
  resolution(adiabatic);
  common(adiabatic);

  auto* eta = app.add_subcommand("eta", "Circle eta invariant and the mod-1 boundary relation");
  eta->add_option("--a", o.a, "Holonomy");
  eta->add_flag("--all", o.all, "Reference values and 20 sampled holonomies");
  resolution(eta);
  common(eta);

  auto* push = app.add_subcommand("pushforward", "Wrong-way map along disk x S^2 -> disk");
  push->add_option("--a", o.a, "Disk holonomy");
  push->add_option("--k,--m", o.k, "Fiber degree m of O(m)");
  resolution(push);
  common(push);

  auto* suite = app.add_subcommand("suite", "Fixed set of checks");
  suite->add_flag("--all", o.all, "Include the slower checks");
  suite->add_option("--seed", o.seed, "Seed for the random connections");
  suite->add_option("--out", out_path, "Write JSON lines here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (!o.config.empty() && !o.catalog.empty()) {
    std::cerr << "error: --catalog and --config are exclusive\n";
    return 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  std::vector<Record> records;
  try {
    records = cwcs::cli::run(command, o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }

  std::ostringstream lines;
  for (const auto& r : records) lines << r.to_json().dump() << '\n';
  if (out_path.empty()) {
    std::cout << lines.str();
    write_summary(std::cerr, records);
  } else {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
      std::cerr << "error: cannot write " << out_path << '\n';
      return 2;
    }
    f << lines.str();
    write_summary(std::cout, records);
  }

  std::string failed;
  for (const auto& r : records) {
    if (!r.pass) failed += (failed.empty() ? "" : ", ") + r.key;
  }
  if (!failed.empty()) {
    std::cerr << "FAILED: " << failed << '\n';
    return 1;
  }
  return 0;
}
