#pragma once

// Batch front end. One JSON config document per run:
//
//   {"command": "simulate" | "verify" | "compose" | "smallgain" | "equiv" | "falsify" | "selftest",
//    "seed": n,
//    "functions":    {name: function, ...},
//    "transforms":   {name: transform, ...},
//    "certificates": {name: certificate, ...},
//    "models":       {name: model, ...},
//    "signals":      {name: signal, ...},
//    "<command>":    {command settings}}
//
// Functions, transforms and certificates use the serialize.hpp grammar.
// Anywhere a definition is expected, a string names an entry of the matching
// table. See README.md for every command's settings and artifacts.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "issl2/serialize.hpp"

namespace issl2::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2 };

struct Options {
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;  // overrides the config's seed
  bool quiet = false;
};

/// Reads options.config_path and runs it. Artifacts go to options.out_dir.
int run(const Options& options, std::ostream& out, std::ostream& err);

/// Runs an already parsed config; relative "file" references resolve
/// against base_dir.
int run_config(const Json& config, const std::filesystem::path& base_dir, const Options& options,
               std::ostream& out, std::ostream& err);

}  // namespace issl2::cli
