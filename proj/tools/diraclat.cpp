// Command-line front end: diraclat <energy|free-energy|sum|heat-kernel|validate> [flags]

#include "diraclat/app.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

int main(int argc, char** argv) {
  CLI::App cli{"Casimir interaction of two square lattices of delta potentials"};
  cli.set_version_flag("--version", diraclat::app::version());
  cli.require_subcommand(1);

  diraclat::app::Invocation inv;
  std::string output;
  std::string format;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", inv.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--output", output, "write the table here instead of standard output");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", inv.threads, "worker thread cap")->check(CLI::NonNegativeNumber);
  };
  for (const char* name : {"energy", "free-energy", "sum", "heat-kernel"}) add_common(cli.add_subcommand(name));
  CLI::App* validate = cli.add_subcommand("validate", "run the oracle checks");
  add_common(validate);
  validate->add_option("--only", inv.only, "run a single group of checks");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : diraclat::app::kExitConfig;
  }
  inv.command = cli.get_subcommands().front()->get_name();
  if (!output.empty()) inv.output_path = output;
  if (!format.empty()) inv.format = format;
  return diraclat::app::run(inv, std::cout, std::cerr);
}
