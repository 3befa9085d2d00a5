#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cwcs::cli {

struct Options {
  std::string catalog;
  std::string config;
  double a = 0.25;
  int k = 1;
  int n = 3;
  int lmax = 2;
  int resolution = 0;
  std::optional<double> tol;
  std::uint64_t seed = 1;
  bool all = false;
  bool control = false;
};

/// One evaluation. `key` orders the report; `data` holds extra fields.
struct Record {
  std::string key;
  std::string check;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
  nlohmann::json data = nlohmann::json::object();

  nlohmann::json to_json() const;
};

/// Thrown for bad arguments; the front end maps it to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<Record> run_pairing(const Options& o);
std::vector<Record> run_zn(const Options& o);
std::vector<Record> run_cs_check(const Options& o);
std::vector<Record> run_adiabatic(const Options& o);
std::vector<Record> run_eta(const Options& o);
std::vector<Record> run_pushforward(const Options& o);
std::vector<Record> run_suite(const Options& o);

std::vector<Record> run(const std::string& command, const Options& o);

}  // namespace cwcs::cli
