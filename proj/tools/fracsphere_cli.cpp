#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "commands.hpp"

using fracsphere::cli::RunOptions;

namespace {

const std::map<std::string, std::string> descriptions = {
    {"eig-check", "eigenvalue closed form and multiplicities"},
    {"op-xcheck", "spectral vs kernel-sum operator, Riesz inversion"},
    {"conformal-check", "invariance of energy and critical norm under T_phi"},
    {"bubble-check", "bubble equation residual and critical mass"},
    {"interaction-scan", "two-bubble interaction integral as beta -> 1"},
    {"solve", "subcritical minimization for a preset K"},
    {"continue", "continuation in p toward the critical exponent"},
    {"kw-check", "Kazdan-Warner integrals of a field"},
    {"quotient-check", "two-bubble test quotient against its bound"},
    {"aubin", "sampled Aubin inequality constant"},
    {"aubin-sobolev", "sampled Aubin-Sobolev inequality"},
    {"g-scan", "G and A maps over poles and dilations"},
    {"degree", "Brouwer degree of G on a sphere in the ball"},
    {"index-count", "index sum of critical point models"},
    {"omega-scan", "decay ratio of K o phi along dilations"}};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fracsphere: fractional conformal operator and prescribed curvature numerics"};
  app.require_subcommand(1);
  RunOptions opt;
  std::string config;

  for (const std::string& name : fracsphere::cli::command_names()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("--n", opt.n, "sphere dimension (2 or 3)");
    sub->add_option("--sigma", opt.sigma, "operator order in (0, 1)");
    sub->add_option("--lmax", opt.lmax, "band limit");
    sub->add_option("--grid", opt.grid, "grid counts, e.g. 128x256");
    sub->add_option("--config", config, "JSON config; its keys override flags");
    sub->add_option("--out", opt.out, "output directory");
    sub->add_option("--seed", opt.seed, "random seed")->each([&](const std::string&) { opt.seed_set = true; });
    sub->add_option("--kmax", opt.kmax, "largest eigenvalue index");
    sub->add_option("--beta", opt.beta, "bubble or flatness parameter");
    sub->add_option("--k-preset", opt.k_preset, "const, tilt, even-band, harmonic, model, tilt-model, quadratic-model");
    sub->add_option("--eps", opt.eps, "preset amplitude (Aubin: epsilon)");
    sub->add_option("--s", opt.s, "evaluation radius in the ball");
    sub->add_option("--p", opt.p, "exponent");
    sub->add_option("--a", opt.a, "Aubin-Sobolev weight");
    sub->add_option("--samples", opt.samples, "number of samples or starts");
    sub->add_option("--subdivision", opt.subdivision, "triangulation refinement");
    sub->add_option("--schedule", opt.schedule, "comma separated exponents");
    sub->add_option("--t-list", opt.t_list, "comma separated dilations");
    sub->add_option("--beta-list", opt.beta_list, "comma separated beta - 1 values");
    sub->add_option("--symmetry", opt.symmetry, "none, antipodal or auto");
    sub->add_option("--field", opt.field, "spectral field snapshot");
    sub->add_flag("--verify", opt.verify, "compare with the numeric degree");
    sub->callback([&opt, name] { opt.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (!config.empty()) {
    try {
      const auto j = fracsphere::Json::parse(fracsphere::read_text(config));
      fracsphere::cli::apply_config(opt, j);
    } catch (const std::exception& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return 2;
    }
  }
  return fracsphere::cli::run_command(opt, std::cout, std::cerr);
}
