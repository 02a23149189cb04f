// Writes a synthetic KDD-99 format file for smoke runs and tests.
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "wbigan/fixture.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic KDD-99 format connection records", "make_fixture"};
  wbigan::FixtureOptions options;
  std::string out;
  app.add_option("--out", out, "output path")->required();
  app.add_option("--majority", options.majority, "records labelled as attacks");
  app.add_option("--minority", options.minority, "records labelled normal.");
  app.add_option("--seed", options.seed, "generator seed");
  CLI11_PARSE(app, argc, argv);
  try {
    wbigan::write_kdd_fixture(out, options);
  } catch (const std::exception& e) {
    std::cerr << "make_fixture: " << e.what() << '\n';
    return 3;
  }
  std::cout << "wrote " << options.majority + options.minority << " records to " << out << '\n';
  return 0;
}
