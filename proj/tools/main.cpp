#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "invmean_cli.hpp"

int main(int argc, char** argv) {
  using namespace invmean;

  CLI::App app{"invmean: invariant means of families of quasiarithmetic means"};
  app.require_subcommand(1);

  const unsigned threads = threads_from_env();

  cli::IterateOptions iterate;
  std::optional<std::size_t> nodes, max_iter;
  std::optional<double> tol;
  auto* it = app.add_subcommand("iterate", "iterate a family on a measure from a JSON spec");
  it->add_option("--spec", iterate.spec_path, "experiment spec (JSON)")->required();
  it->add_option("--out", iterate.out_dir, "output directory");
  it->add_option("--nodes", nodes, "index-interval quadrature nodes");
  it->add_option("--tol", tol, "hull-width tolerance");
  it->add_option("--max-iter", max_iter, "iteration cap");

  cli::SeparationOptions sep;
  std::optional<std::size_t> grid;
  auto* sp = app.add_subcommand("separation", "tabulate the separation function t,d over 100 t values");
  sp->add_option("--spec", sep.spec_path, "generator pair, set or finite family (JSON)")->required();
  sp->add_option("--out", sep.out_dir, "output directory");
  sp->add_option("--grid", grid, "lattice size per axis");

  cli::DemoAgmOptions demo;
  auto* dm = app.add_subcommand("demo-agm", "compare the two-piece family with the scalar Gauss AGM");
  dm->add_option("a", demo.a, "lower point")->required();
  dm->add_option("b", demo.b, "upper point")->required();
  dm->add_flag("--harmonic", demo.harmonic, "use the arithmetic-harmonic pair");
  dm->add_option("--nodes", demo.nodes, "index-interval quadrature nodes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitInvalid;
  }

  if (it->parsed()) {
    iterate.nodes = nodes;
    iterate.tol = tol;
    iterate.max_iter = max_iter;
    iterate.threads = threads;
    return cli::cmd_iterate(iterate, std::cout, std::cerr);
  }
  if (sp->parsed()) {
    sep.grid = grid;
    sep.threads = threads;
    return cli::cmd_separation(sep, std::cout, std::cerr);
  }
  demo.threads = threads;
  return cli::cmd_demo_agm(demo, std::cout, std::cerr);
}
