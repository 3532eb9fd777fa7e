// Command-line front end: loads a JSON run configuration, dispatches to the
// library, and writes deterministic JSON/CSV artifacts into the output
// directory.  Exit codes: 0 ok, 2 bad configuration, 3 numerical failure,
// 4 under-resolved probe ring, 5 bound-state test rejected.

#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "bicscat/config.hpp"

namespace {

using namespace bicscat;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::config_invalid:
    case ErrorCode::invalid_parameter: return 2;
    case ErrorCode::under_resolved: return 4;
    case ErrorCode::not_a_bic: return 5;
    default: return 3;
  }
}

void emit_error(ErrorCode c, const std::string& message) {
  json err;
  err["error"] = {{"code", error_code_name(c)}, {"message", message}};
  std::cerr << dump_deterministic(err);
}

struct Options {
  std::string config_path;
  std::string out_dir;
  std::string grid_text;
  int threads = 0;
};

Grid parse_grid_flag(const std::string& text) {
  int n1 = 0, n2 = 0;
  char tail = 0;
  if (std::sscanf(text.c_str(), "%dx%d%c", &n1, &n2, &tail) != 2 || n1 < 4 || n2 < 4)
    fail(ErrorCode::config_invalid, "--grid expects N1xN2 with N1, N2 >= 4 (got '" + text + "')");
  return Grid{n1, n2};
}

// Loads the configuration, applies command-line overrides, and echoes the
// effective configuration into the output directory.
RunConfig prepare(const Options& opt) {
  RunConfig cfg = load_config(opt.config_path);
  if (!opt.grid_text.empty()) cfg.grid = parse_grid_flag(opt.grid_text);
  if (opt.threads > 0) Eigen::setNbThreads(opt.threads);
  if (!opt.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(opt.out_dir, ec);
    if (ec) fail(ErrorCode::io_error, "cannot create output directory " + opt.out_dir);
    write_text_file(opt.out_dir + "/config.json", dump_deterministic(config_to_json(cfg)));
  }
  return cfg;
}

void deliver(const Options& opt, const json& result, const std::string* csv = nullptr) {
  if (opt.out_dir.empty()) {
    std::cout << dump_deterministic(result);
    return;
  }
  write_text_file(opt.out_dir + "/result.json", dump_deterministic(result));
  if (csv) write_text_file(opt.out_dir + "/samples.csv", *csv);
}

int cmd_smatrix(const Options& opt) {
  RunConfig cfg = prepare(opt);
  if (!cfg.smatrix)
    fail(ErrorCode::config_invalid, "the smatrix subcommand needs an \"smatrix\" section");
  const PointRequest& p = *cfg.smatrix;
  ScatteringMatrix sm = scattering_matrix(cfg.structure, cfg.grid, p.beta, p.delta, p.k);
  std::printf("S %ldx%ld  unitarity %.3e  transpose %.3e  persym %.3e\n", sm.s.rows(), sm.s.cols(),
              sm.unitarity_defect, sm.sym_t_defect, sm.sym_p_defect);
  deliver(opt, smatrix_to_json(sm));
  return 0;
}

int cmd_probe(const Options& opt) {
  RunConfig cfg = prepare(opt);
  if (!cfg.probe) fail(ErrorCode::config_invalid, "the probe subcommand needs a \"probe\" section");
  ProbeResult pr = run_probe(cfg.structure, cfg.probe->which, cfg.probe->cfg, cfg.grid);
  std::printf("D = %d  residual = %.6f rad (limit %.6f)\n", pr.index, pr.residual, tol_residual);
  std::string csv = probe_to_csv(pr);
  deliver(opt, probe_to_json(pr, cfg.probe->cfg), &csv);
  return 0;
}

int cmd_derivs(const Options& opt) {
  RunConfig cfg = prepare(opt);
  if (!cfg.derivs)
    fail(ErrorCode::config_invalid, "the derivs subcommand needs a \"derivs\" section");
  const DerivsRequest& d = *cfg.derivs;
  DerivativeReport rep;
  try {
    rep = derivative_report(cfg.structure, d.point.beta, d.point.delta, d.point.k, cfg.grid,
                            d.mu_case, d.m_phase);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::not_a_bic)
      fail(ErrorCode::not_a_bic,
           std::string(e.what()) +
               " — the requested point does not carry a bound state at this grid; run the "
               "localize subcommand first and feed its (beta, delta, k) back in");
    throw;
  }
  std::printf("det(mu_%d) = %.6e%+.6ei  scale %.3e  prediction %+d\n", rep.mu_case,
              rep.mu_det.real(), rep.mu_det.imag(), rep.mu_scale, rep.index_prediction);
  deliver(opt, report_to_json(rep, d.point.beta, d.point.delta, d.point.k));
  return 0;
}

int cmd_localize(const Options& opt) {
  RunConfig cfg = prepare(opt);
  if (!cfg.probe)
    fail(ErrorCode::config_invalid, "the localize subcommand needs a \"probe\" section");
  LocalizeResult lr =
      localize_bic(cfg.structure, cfg.probe->which, cfg.probe->cfg, cfg.grid, cfg.localize_depth);
  std::printf("bound state near beta %.9f delta %.9f k %.9f  (index %+d, r %.2e)\n", lr.beta,
              lr.delta, lr.k, lr.index, lr.r_final);
  deliver(opt, localize_to_json(lr));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scattering matrices and bound-state indices for periodic dielectric strips"};
  app.require_subcommand(1);

  Options opt;
  int (*handler)(const Options&) = nullptr;
  for (auto [name, help, fn] : {
           std::tuple{"smatrix", "compute one scattering matrix", &cmd_smatrix},
           std::tuple{"probe", "winding-number probe on a parameter ring", &cmd_probe},
           std::tuple{"derivs", "derivative report at a bound state", &cmd_derivs},
           std::tuple{"localize", "shrink a ring onto its bound state", &cmd_localize},
       }) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "run configuration (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory (config.json, result.json, ...)");
    sub->add_option("--grid", opt.grid_text, "override the grid, e.g. 256x256");
    sub->add_option("--threads", opt.threads, "thread count for dense linear algebra");
    sub->callback([&handler, fn = fn] { handler = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    return handler(opt);
  } catch (const bicscat::Error& e) {
    emit_error(e.code(), e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    emit_error(bicscat::ErrorCode::io_error, e.what());
    return 3;
  }
}
