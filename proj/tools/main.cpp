#include <CLI11.hpp>

#include <iostream>

#include "issl2/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"issl2: certificate verification, composition and simulation"};
  issl2::cli::Options opts;
  std::uint64_t seed = 0;
  app.add_option("-c,--config", opts.config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  app.add_option("-o,--out", opts.out_dir, "artifact directory (created if missing)");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
  app.add_flag("-q,--quiet", opts.quiet, "suppress progress output");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : issl2::cli::kConfigError;
  }
  if (seed_opt->count() > 0) opts.seed = seed;
  return issl2::cli::run(opts, std::cout, std::cerr);
}
