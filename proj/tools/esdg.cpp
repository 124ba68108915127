#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "esdg/esdg.hpp"

namespace {

void add_run_options(CLI::App* app, std::optional<std::string>& config_file,
                     std::map<std::string, std::optional<std::string>>& values) {
  app->add_option("--config", config_file, "flat key = value config file");
  const std::pair<const char*, const char*> opts[] = {
      {"case", "vortex | riemann12 | riemann13 | dmr | freestream | custom-mesh"},
      {"mesh", "cartesian:M | cartesian:NXxNY | sinusoidal:M[:alpha] | file:PATH"},
      {"order", "polynomial degree N in [1, 8]"},
      {"t-end", "final time"},
      {"cfl", "CFL constant K (default 0.5/(2N+1))"},
      {"oe-scale", "OE damping scale s in (0, 1]"},
      {"indicator-threshold", "shock indicator threshold C"},
      {"flux", "interface flux: llf | ec"},
      {"oe-mode", "auto | cartesian | curvilinear | off"},
      {"out", "output directory"},
      {"snapshot-every", "snapshot cadence in steps (0: initial and final only)"},
      {"max-steps", "stop after this many steps (0: run to t-end)"},
      {"seed", "recorded in output headers"},
  };
  for (const auto& [name, help] : opts) {
    app->add_option("--" + std::string(name), values[name], help);
  }
  app->add_option_function<std::vector<std::string>>(
      "--bc",
      [&values](const std::vector<std::string>& specs) {
        for (const auto& s : specs) {
          const auto eq = s.find('=');
          if (eq == std::string::npos) throw CLI::ValidationError("--bc", "expected TAG=KIND");
          values["bc." + s.substr(0, eq)] = s.substr(eq + 1);
        }
      },
      "boundary override TAG=slip-wall|outflow|inflow:rho,u,v,p (repeatable)");
}

esdg::RunConfig assemble(const std::optional<std::string>& config_file,
                         const std::map<std::string, std::optional<std::string>>& values) {
  esdg::RunConfig cfg;
  if (config_file) esdg::apply_config_file(cfg, *config_file);
  for (const auto& [key, value] : values) {
    if (value) esdg::apply_config_entry(cfg, key, *value);
  }
  return cfg;
}

std::vector<int> parse_resolutions(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : esdg::detail::split(text, ',')) {
    const long m = esdg::detail::to_long("resolutions", esdg::detail::trim(part));
    if (m < 1) throw esdg::ConfigError("resolutions: element counts must be positive");
    out.push_back(static_cast<int>(m));
  }
  if (out.empty()) throw esdg::ConfigError("resolutions: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-stable DGSEM solver for the 2D Euler equations"};
  app.require_subcommand(1);

  std::optional<std::string> run_config, conv_config;
  std::map<std::string, std::optional<std::string>> run_values, conv_values;
  std::string resolutions = "10,20,40";
  std::string mesh_out;

  auto* run_cmd = app.add_subcommand("run", "run one case to t-end");
  add_run_options(run_cmd, run_config, run_values);

  auto* conv_cmd = app.add_subcommand("convergence", "L2 errors and observed orders over meshes");
  add_run_options(conv_cmd, conv_config, conv_values);
  conv_cmd->add_option("--resolutions", resolutions, "comma-separated element counts M");

  auto* mesh_cmd = app.add_subcommand("mesh", "write the mesh of a configuration to a file");
  std::optional<std::string> mesh_config;
  std::map<std::string, std::optional<std::string>> mesh_values;
  add_run_options(mesh_cmd, mesh_config, mesh_values);
  mesh_cmd->add_option("--file", mesh_out, "mesh file to write")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) {
      const esdg::RunConfig cfg = assemble(run_config, run_values);
      const esdg::RunResult r = esdg::run(cfg, std::cerr);
      if (r.exit_code == 0) {
        std::printf("steps=%d t=%.17g min_rho=%.6g min_p=%.6g oe_seconds=%.3f\n", r.steps, r.t,
                    r.min_rho, r.min_p, r.oe_seconds);
        if (r.errors) {
          std::printf("l2 errors: rho=%.6e mx=%.6e my=%.6e E=%.6e\n", (*r.errors)[0],
                      (*r.errors)[1], (*r.errors)[2], (*r.errors)[3]);
        }
      }
      return r.exit_code;
    }
    if (*conv_cmd) {
      const esdg::RunConfig cfg = assemble(conv_config, conv_values);
      const auto rows = esdg::convergence_study(cfg, parse_resolutions(resolutions));
      std::filesystem::create_directories(cfg.out);
      std::ofstream os(std::filesystem::path(cfg.out) / "convergence.csv");
      esdg::write_convergence_csv(os, cfg, rows);
      esdg::write_convergence_csv(std::cout, cfg, rows);
      return 0;
    }
    if (*mesh_cmd) {
      esdg::RunConfig cfg = assemble(mesh_config, mesh_values);
      const esdg::CaseSpec cs = esdg::make_case(esdg::parse_case_id(cfg.case_id));
      const std::string spec = cfg.mesh.empty() ? esdg::default_mesh_spec(cs.id) : cfg.mesh;
      esdg::save_mesh(esdg::build_mesh_from_spec(spec, cs, cfg.order), mesh_out);
      return 0;
    }
  } catch (const esdg::AdmissibilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
