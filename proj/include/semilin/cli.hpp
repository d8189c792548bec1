#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "semilin/battery.hpp"
#include "semilin/constants.hpp"
#include "semilin/error.hpp"
#include "semilin/modelspace.hpp"
#include "semilin/nonlinearity.hpp"
#include "semilin/pdelab.hpp"
#include "semilin/relations.hpp"

namespace semilin::cli {

enum ExitCode : int { kSuccess = 0, kCheckFailed = 1, kUsage = 2 };

struct RunConfig {
  std::string command;
  std::string f = "power:2";
  std::string space = "flat:4";
  std::optional<double> N;
  std::optional<double> K;
  double R = 1.0;
  std::string theorem;
  int grid = 2048;
  double tol = 1e-10;
  std::optional<double> alpha;
  std::optional<double> delta;
  double boundary = 0.5;
  double b_min = 0.01;
  double b_max = 0.8;
  int count = 20;
  std::string kind;
  std::optional<double> eps;
  std::uint64_t seed = 20240917;
  std::string out;
  std::string plot;

  nlohmann::json to_json() const {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
    return {{"command", command}, {"f", f},       {"space", space},     {"N", opt(N)},         {"K", opt(K)},
            {"R", R},             {"theorem", theorem}, {"grid", grid}, {"tol", tol},          {"alpha", opt(alpha)},
            {"delta", opt(delta)}, {"boundary", boundary}, {"b-min", b_min}, {"b-max", b_max}, {"count", count},
            {"kind", kind},       {"eps", opt(eps)}, {"seed", seed}};
  }
};

/// Git blob hash of the canonical config dump.
inline std::string content_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

/// Appends `--key value` for every config-file key the command line does not set.
inline std::vector<std::string> merge_config(std::vector<std::string> args, const nlohmann::json& cfg) {
  static const std::vector<std::string> commands{"indices", "certify", "solve", "verify", "appendix", "implications", "suite"};
  const bool has_command = std::any_of(args.begin(), args.end(), [](const std::string& a) {
    return std::find(commands.begin(), commands.end(), a) != commands.end();
  });
  if (!cfg.is_object()) throw Error(ErrorKind::ParseError, "config must be a JSON object");
  if (!has_command && cfg.contains("command")) args.insert(args.begin(), cfg.at("command").get<std::string>());
  for (const auto& [key, value] : cfg.items()) {
    if (key == "command" || value.is_null()) continue;
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');  // b_min and b-min name the same flag
    const bool present = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (present) continue;
    args.push_back(flag);
    args.push_back(value.is_string() ? value.get<std::string>() : value.dump());
  }
  return args;
}

struct Output {
  std::ostream& out;
  std::ostream& err;
};

inline void emit(const RunConfig& cfg, const nlohmann::json& result, Output io) {
  const auto config = cfg.to_json();
  nlohmann::json report{{"command", cfg.command},
                        {"config", config},
                        {"config_hash", content_hash(config.dump())},
                        {"result", result}};
  const std::string text = report.dump(2) + "\n";
  if (cfg.out.empty()) {
    io.out << text;
    return;
  }
  std::ofstream file(cfg.out);
  if (!file) throw Error(ErrorKind::InvalidParameter, "cannot write '" + cfg.out + "'");
  file << text;
}

inline double dimension_of(const RunConfig& cfg, const WeightedSpace& space) { return cfg.N.value_or(space.N); }

inline int cmd_indices(const RunConfig& cfg, Output io) {
  const auto nonlin = parse_nonlinearity(cfg.f);
  const double N = cfg.N.value_or(parse_space(cfg.space).N);
  const auto ix = compute_indices(nonlin);
  nlohmann::json hypotheses = nlohmann::json::object();
  for (auto t : {Theorem::positive_subcritical, Theorem::signed_monotone, Theorem::shifted, Theorem::supercritical,
                 Theorem::lane_emden, Theorem::lichnerowicz}) {
    try {
      HypothesisAux aux;
      aux.alpha = cfg.alpha;
      const auto rep = check_hypotheses(nonlin, N, t, aux);
      hypotheses[to_string(t)] = {{"hold", rep.all_hold()}, {"report", to_json(rep)}};
    } catch (const Error& e) {
      hypotheses[to_string(t)] = {{"hold", false}, {"reason", e.what()}};
    }
  }
  emit(cfg, {{"f", to_json(nonlin)}, {"N", N}, {"indices", to_json(ix)}, {"exponents", to_json(critical_exponents(N, ix.upper))},
             {"hypotheses", hypotheses}},
       io);
  io.err << fmt::format("lower={} upper={} second={} gradient-threshold={} sobolev={}\n", ix.lower, ix.upper, ix.second,
                        gradient_threshold(N), sobolev_exponent(N));
  return kSuccess;
}

inline Certificate build_certificate(const RunConfig& cfg, const Nonlinearity& nonlin, double N) {
  if (cfg.theorem.empty()) throw Error(ErrorKind::InvalidParameter, "--theorem is required");
  SynthesisOptions opt;
  opt.alpha = cfg.alpha;
  opt.delta = cfg.delta;
  return certify(synthesize(N, nonlin, parse_theorem(cfg.theorem), opt), nonlin);
}

inline int cmd_certify(const RunConfig& cfg, Output io) {
  const auto nonlin = parse_nonlinearity(cfg.f);
  const double N = cfg.N.value_or(parse_space(cfg.space).N);
  const auto cert = build_certificate(cfg, nonlin, N);
  emit(cfg, to_json(cert), io);
  io.err << fmt::format("{} N={} certified={} C={} worst margin={} ({})\n", to_string(cert.theorem), N, cert.certified,
                        cert.constant, cert.worst_margin, cert.worst_check);
  return cert.certified ? kSuccess : kCheckFailed;
}

inline SolverConfig solver_config(const RunConfig& cfg) {
  SolverConfig s;
  s.intervals = cfg.grid;
  s.tolerance = cfg.tol;
  return s;
}

inline int cmd_solve(const RunConfig& cfg, Output io) {
  const auto space = parse_space(cfg.space);
  const auto nonlin = parse_nonlinearity(cfg.f);
  const auto p = solve_radial_bvp(space, nonlin, cfg.R, cfg.boundary, solver_config(cfg));
  // Auxiliary columns use the certificate's parameters when a theorem is named.
  AuxiliaryParams aux;
  if (!cfg.theorem.empty()) aux = auxiliary_params(build_certificate(cfg, nonlin, dimension_of(cfg, space)), cfg.eps.value_or(0.0));
  if (cfg.out.empty()) {
    write_profile_csv(io.out, p, aux);
  } else {
    std::ofstream file(cfg.out);
    if (!file) throw Error(ErrorKind::InvalidParameter, "cannot write '" + cfg.out + "'");
    write_profile_csv(file, p, aux);
  }
  io.err << profile_summary(p).dump() << "\n";
  return kSuccess;
}

inline void write_plot_data(const std::string& path, const SolutionProfile& p, const AuxiliaryParams& a) {
  std::ofstream file(path);
  if (!file) throw Error(ErrorKind::InvalidParameter, "cannot write '" + path + "'");
  write_profile_csv(file, p, a);
}

inline int cmd_verify(const RunConfig& cfg, Output io) {
  const auto space = parse_space(cfg.space);
  const auto nonlin = parse_nonlinearity(cfg.f);
  const double N = dimension_of(cfg, space);
  const auto cert = build_certificate(cfg, nonlin, N);
  const auto p = solve_radial_bvp(space, nonlin, cfg.R, cfg.boundary, solver_config(cfg));
  // Curvature over the whole computational ball, never a user-supplied K.
  const auto curv = curvature_bound(space, 2.0 * cfg.R);
  const double K = curv.effective_K;
  const auto kind = cfg.kind.empty() ? default_kind(cert) : parse_estimate_kind(cfg.kind);

  std::vector<EstimateReport> reports;
  const bool shifted = kind == EstimateKind::eps_first || kind == EstimateKind::eps_second;
  if (shifted && !cfg.eps) {
    reports = check_shifted_sweep(p, cert, K, cfg.R);
  } else {
    reports.push_back(check_estimate(p, cert, K, cfg.R, kind, cfg.eps));
  }
  bool pass = cert.certified;
  nlohmann::json estimates = nlohmann::json::array();
  for (const auto& r : reports) {
    pass = pass && r.pass;
    estimates.push_back(to_json(r));
  }
  nlohmann::json result{{"certificate", {{"theorem", to_string(cert.theorem)}, {"certified", cert.certified},
                                          {"constant", cert.constant}, {"worst_margin", cert.worst_margin}}},
                        {"curvature", to_json(curv)},
                        {"profile", profile_summary(p)},
                        {"estimates", estimates},
                        {"pass", pass}};
  if (reports.size() == 1) result["estimate"] = estimates.front();
  if (!cfg.plot.empty()) write_plot_data(cfg.plot, p, auxiliary_params(cert, cfg.eps.value_or(0.0)));
  emit(cfg, result, io);
  io.err << fmt::format("{} on {} with K={}: {} ({} checks)\n", to_string(kind), cfg.space, K, pass ? "pass" : "FAIL",
                        reports.size());
  return pass ? kSuccess : kCheckFailed;
}

inline int cmd_appendix(const RunConfig& cfg, Output io) {
  if (!cfg.N) throw Error(ErrorKind::InvalidParameter, "--N is required");
  bool ok = false;
  const auto bundle = appendix_bundle(*cfg.N, cfg.alpha.value_or(2.0), cfg.K.value_or(1.0), cfg.seed, ok);
  emit(cfg, bundle, io);
  io.err << fmt::format("mu={} residual={} sharpness ratio={}: {}\n", bundle["space"]["mu"].get<double>(),
                        bundle["relative_residual"].get<double>(), bundle["sharpness"]["ratio"].get<double>(),
                        ok ? "pass" : "FAIL");
  return ok ? kSuccess : kCheckFailed;
}

inline int cmd_implications(const RunConfig& cfg, Output io) {
  const auto space = parse_space(cfg.space);
  const auto nonlin = parse_nonlinearity(cfg.f);
  const double K = curvature_bound(space, 2.0 * cfg.R).effective_K;
  const auto corpus = boundary_sweep(space, nonlin, cfg.R, cfg.b_min, cfg.b_max, cfg.count, solver_config(cfg));
  const auto rep = implication_suite(corpus, dimension_of(cfg, space), nonlin, K);
  if (!cfg.plot.empty()) {
    std::ofstream file(cfg.plot);
    if (!file) throw Error(ErrorKind::InvalidParameter, "cannot write '" + cfg.plot + "'");
    write_implication_csv(file, rep);
  }
  emit(cfg, to_json(rep), io);
  const bool ok = rep.arrow_a && rep.arrow_b && rep.arrow_c;
  io.err << fmt::format("arrows a={} b={} c={} over {} profiles\n", rep.arrow_a, rep.arrow_b, rep.arrow_c,
                        rep.profiles.size());
  return ok ? kSuccess : kCheckFailed;
}

inline int cmd_suite(const RunConfig& cfg, Output io) {
  const auto results = run_battery({cfg.seed});
  bool all = true;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    table.push_back(to_json(r));
    io.out << fmt::format("[{}] {:>2} {:<28} {:>8.3f}s  {}\n", r.pass ? "PASS" : "FAIL", r.id, r.title, r.seconds,
                          r.detail);
  }
  io.out << fmt::format("{} of {} criteria passed\n",
                        std::count_if(results.begin(), results.end(), [](const auto& r) { return r.pass; }),
                        results.size());
  if (!cfg.out.empty()) emit(cfg, {{"criteria", table}, {"pass", all}}, io);
  return all ? kSuccess : kCheckFailed;
}

/// Parses `args` (without the program name) and dispatches.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  Output io{out, err};
  RunConfig cfg;
  std::string config_path;

  CLI::App app{"Radial semilinear elliptic estimate lab"};
  app.fallthrough();
  app.require_subcommand(1);
  app.add_option("--config", config_path, "JSON file with the same keys as the flags");
  app.add_option("--f", cfg.f, "nonlinearity: power:a | powersum:c,a;... | lichnerowicz:a,b,sigma,c,tau | JSON");
  app.add_option("--space", cfg.space, "flat:n | appendix:N,alpha,K | JSON");
  app.add_option("--N", cfg.N, "dimension parameter (defaults to the space's)");
  app.add_option("--K", cfg.K, "curvature bound for the explicit family");
  app.add_option("--R", cfg.R, "estimate radius; the grid covers [0, 2R]");
  app.add_option("--theorem", cfg.theorem, "positive-subcritical | signed-monotone | shifted | supercritical | lane-emden | lichnerowicz");
  app.add_option("--grid", cfg.grid, "number of grid intervals");
  app.add_option("--tol", cfg.tol, "Newton step tolerance relative to max u");
  app.add_option("--alpha", cfg.alpha, "monotonicity exponent, or the power of the explicit family");
  app.add_option("--delta", cfg.delta, "Lichnerowicz allowance parameter");
  app.add_option("--boundary", cfg.boundary, "boundary value u(2R)");
  app.add_option("--b-min", cfg.b_min, "smallest boundary value of a sweep");
  app.add_option("--b-max", cfg.b_max, "largest boundary value of a sweep");
  app.add_option("--count", cfg.count, "number of boundary values in a sweep");
  app.add_option("--kind", cfg.kind, "estimate kind to check");
  app.add_option("--eps", cfg.eps, "shift for the shifted estimates");
  app.add_option("--seed", cfg.seed, "seed for random sample points");
  app.add_option("--out", cfg.out, "output path (default stdout)");
  app.add_option("--emit-plot-data", cfg.plot, "write (r, diagnostic) tables to this path");

  using Handler = int (*)(const RunConfig&, Output);
  struct Command {
    std::string name;
    Handler handler;
    std::string about;
  };
  const std::vector<Command> commands{
      {"indices", cmd_indices, "growth indices, critical exponents and hypothesis checks for --f at --N"},
      {"certify", cmd_certify, "search coefficient parameters that certify --theorem for --f at --N"},
      {"solve", cmd_solve, "solve the radial Dirichlet problem on [0, 2R] and print the profile as CSV"},
      {"verify", cmd_verify, "solve, then compare measured gradient quantities with the certified bound"},
      {"appendix", cmd_appendix, "explicit solution on the weighted model space (--N, --alpha, --K)"},
      {"implications", cmd_implications, "sweep boundary values and test the estimate/Harnack implications"},
      {"suite", cmd_suite, "run the acceptance battery and print one line per criterion"}};
  for (const auto& c : commands) app.add_subcommand(c.name, c.about);

  try {
    // First pass only to find --config.
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--config") config_path = args[i + 1];
    }
    if (!config_path.empty()) {
      std::ifstream file(config_path);
      if (!file) throw Error(ErrorKind::InvalidParameter, "cannot read config '" + config_path + "'");
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(file);
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ParseError, e.what());
      }
      args = merge_config(std::move(args), j);
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kUsage;
  }

  for (const auto& [name, handler, about] : commands) {
    if (!app.got_subcommand(name)) continue;
    cfg.command = name;
    try {
      return handler(cfg, io);
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      switch (e.kind()) {
        case ErrorKind::ParseError:
        case ErrorKind::InvalidParameter:
        case ErrorKind::InvalidAlpha:
        case ErrorKind::InvalidDelta:
        case ErrorKind::UnsupportedTheorem:
        case ErrorKind::KindMismatch:
        case ErrorKind::DimensionMismatch:
        case ErrorKind::RhoUndefined:
          return kUsage;
        default:
          return kCheckFailed;
      }
    } catch (const std::exception& e) {
      err << "error: " << e.what() << "\n";
      return kCheckFailed;
    }
  }
  return kUsage;
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args));
}

}  // namespace semilin::cli
