#include "conecalc/cli_driver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "conecalc/calculus.hpp"
#include "conecalc/cone_laplacian.hpp"
#include "conecalc/ellipticity.hpp"
#include "conecalc/json_io.hpp"
#include "conecalc/kernel_estimates.hpp"
#include "conecalc/parallel.hpp"
#include "conecalc/version.hpp"

namespace conecalc::cli {

namespace {

using io::Json;

constexpr std::uint64_t kDefaultSeed = 0x5EED;

struct RunContext {
  Json parameters;  // command parameters (already key-validated)
  std::string out_dir;
  std::uint64_t seed = kDefaultSeed;
  bool verbose = false;
};

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

Json make_verdict(const std::string& condition, bool pass, Json violations,
                  Json parameters) {
  Json v;
  v["condition"] = condition;
  v["verdict"] = pass ? "pass" : "fail";
  v["violations"] = std::move(violations);
  v["parameters"] = std::move(parameters);
  return v;
}

// Appends the verdict and folds its outcome into the run-level flag.
void push_verdict(Json& report, bool& all_pass, const std::string& condition,
                  bool pass, Json violations = Json::array(),
                  Json parameters = Json::object()) {
  all_pass = all_pass && pass;
  report["verdicts"].push_back(
      make_verdict(condition, pass, std::move(violations), std::move(parameters)));
}

int finish(const RunContext& ctx, Json& report, bool all_pass) {
  io::write_text_file(join_path(ctx.out_dir, "report.json"),
                      report.dump(2) + "\n");
  if (ctx.verbose) {
    std::cout << report["command"].get<std::string>() << ": "
              << (all_pass ? "pass" : "FAIL") << "\n";
  }
  return all_pass ? 0 : 2;
}

// ---------------------------------------------------------------------------
// Operator sources
// ---------------------------------------------------------------------------

struct ParsedOperator {
  std::unique_ptr<ops::ResolventProvider> provider;
  CVec diagonal_entries;  // non-empty only for diagonal sources
  std::string kind;
};

ParsedOperator parse_operator(const Json& spec) {
  io::validate_keys(spec,
                    {"type", "entries", "matrix", "weights", "n", "gamma", "p",
                     "lambda", "grid"},
                    "operator");
  ParsedOperator out;
  const std::string type = io::string_or(spec, "type", "", "operator");
  RVec weights;
  if (spec.contains("weights")) weights = io::rvec_from_json(spec.at("weights"));
  if (type == "diagonal") {
    if (!spec.contains("entries")) {
      throw InvalidRequestError("diagonal operator needs \"entries\"");
    }
    out.diagonal_entries = io::cvec_from_json(spec.at("entries"));
    out.provider =
        std::make_unique<ops::DiagonalOperator>(out.diagonal_entries, weights);
  } else if (type == "dense") {
    if (!spec.contains("matrix")) {
      throw InvalidRequestError("dense operator needs \"matrix\"");
    }
    out.provider = std::make_unique<ops::DenseOperator>(
        io::cmat_from_json(spec.at("matrix")), weights);
  } else if (type == "cone-mode") {
    const Json& g = spec.contains("grid") ? spec.at("grid") : Json::object();
    io::validate_keys(g, {"N", "R"}, "operator.grid");
    const cone::LogGrid grid = cone::make_log_grid(
        io::require_int(g, "N", "operator.grid"),
        io::require_number(g, "R", "operator.grid"));
    out.provider = std::make_unique<cone::ConeModeOperator>(
        grid, io::require_int(spec, "n", "operator"),
        io::require_number(spec, "lambda", "operator"),
        io::number_or(spec, "gamma", 0.0, "operator"),
        io::number_or(spec, "p", 2.0, "operator"));
  } else {
    throw InvalidRequestError(
        "operator.type must be one of diagonal|dense|cone-mode");
  }
  out.kind = type;
  return out;
}

RVec spectrum_from_params(const Json& p, const std::string& where) {
  if (p.contains("spectrum")) return io::rvec_from_json(p.at("spectrum"));
  const std::string bc = io::string_or(p, "bc", "Dirichlet", where);
  cone::BoundaryCondition cond;
  if (bc == "Dirichlet") {
    cond = cone::BoundaryCondition::Dirichlet;
  } else if (bc == "Neumann") {
    cond = cone::BoundaryCondition::Neumann;
  } else {
    throw InvalidRequestError(where + ".bc must be Dirichlet or Neumann");
  }
  const double length = io::number_or(p, "length", kPi, where);
  const int count = io::int_or(p, "count", 3, where);
  return cone::interval_spectrum(length, cond, count);
}

holo::HFunction parse_function(const Json& spec, const sectors::Sector& sector) {
  io::validate_keys(spec, {"kind", "delta", "a", "t", "eps", "tau"}, "function");
  const std::string kind = io::string_or(spec, "kind", "", "function");
  if (kind == "power-quotient") {
    return holo::power_quotient(io::require_number(spec, "delta", "function"),
                                sector);
  }
  if (kind == "shifted-rational") {
    return holo::shifted_rational(io::require_number(spec, "a", "function"),
                                  sector);
  }
  if (kind == "imaginary-power") {
    return holo::imaginary_power_regularized(
        io::require_number(spec, "t", "function"),
        io::number_or(spec, "eps", 0.5, "function"), sector);
  }
  if (kind == "exponential") {
    return holo::exponential_decay(io::require_number(spec, "tau", "function"),
                                   sector);
  }
  throw InvalidRequestError(
      "function.kind must be one of power-quotient|shifted-rational|"
      "imaginary-power|exponential");
}

// ---------------------------------------------------------------------------
// Subcommand handlers
// ---------------------------------------------------------------------------

int handle_sector_check(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p,
                    {"theta", "operator", "radii_per_decade", "decades_below",
                     "decades_above", "angles", "power_iterations", "bound"},
                    "parameters");
  const sectors::Sector sector(io::require_number(p, "theta", "parameters"));
  if (!p.contains("operator")) {
    throw InvalidRequestError("sector-check needs \"operator\"");
  }
  ParsedOperator op = parse_operator(p.at("operator"));
  ops::ScanOptions options;
  options.radii_per_decade = io::int_or(p, "radii_per_decade",
                                        options.radii_per_decade, "parameters");
  options.decades_below =
      io::number_or(p, "decades_below", options.decades_below, "parameters");
  options.decades_above =
      io::number_or(p, "decades_above", options.decades_above, "parameters");
  options.angles = io::int_or(p, "angles", options.angles, "parameters");
  options.power_iterations = io::int_or(p, "power_iterations",
                                        options.power_iterations, "parameters");
  options.bound = io::number_or(p, "bound", 0.0, "parameters");

  const ops::ScanResult scan = ops::sectoriality_scan(*op.provider, sector, options);

  Json report = io::report_envelope("sector-check", ctx.seed, p);
  report["results"]["sup_norm"] = scan.sup_norm;
  report["results"]["argmax_lambda"] = io::complex_to_json(scan.argmax_lambda);
  report["results"]["samples"] = static_cast<int>(scan.samples.size());

  bool all_pass = true;
  Json violations = Json::array();
  if (!scan.pass) violations.push_back(io::complex_to_json(scan.argmax_lambda));
  push_verdict(report, all_pass, "resolvent-bound", scan.pass, violations,
               Json{{"bound", options.bound}, {"sup_norm", scan.sup_norm}});

  std::vector<std::vector<std::string>> rows;
  rows.reserve(scan.samples.size());
  for (const auto& s : scan.samples) {
    rows.push_back({io::double_to_string(s.radius),
                    io::double_to_string(s.angle),
                    io::double_to_string(s.norm)});
  }
  io::write_text_file(join_path(ctx.out_dir, "scan.csv"),
                      io::csv_table({"radius", "angle", "norm"}, rows));
  return finish(ctx, report, all_pass);
}

int handle_weight_window(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p, {"n", "bc", "lambda0", "length", "count", "spectrum"},
                    "parameters");
  const int n = io::require_int(p, "n", "parameters");
  RVec spectrum;
  if (p.contains("lambda0")) {
    spectrum = RVec::Constant(1, io::require_number(p, "lambda0", "parameters"));
  } else {
    spectrum = spectrum_from_params(p, "parameters");
  }
  const elliptic::WeightWindow window = elliptic::weight_window(n, spectrum);

  Json report = io::report_envelope("weight-window", ctx.seed, p);
  report["results"]["s0"] = window.s0;
  report["results"]["admissible"] = window.admissible;
  if (window.admissible) {
    report["results"]["lower"] = window.lo;
    report["results"]["upper"] = window.hi;
  }
  bool all_pass = true;
  push_verdict(report, all_pass, "weight-window-admissible", window.admissible,
               window.admissible ? Json::array() : Json::array({window.s0}),
               Json{{"n", n}, {"s0", window.s0}});
  return finish(ctx, report, all_pass);
}

int handle_ellipticity_report(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(
      p,
      {"n", "gamma", "mu", "bc", "length", "count", "spectrum", "strip_mode",
       "theta", "grid", "levels", "p", "shift_condition_assumed",
       "check_symbol", "resolvent_bound"},
      "parameters");
  const int n = io::require_int(p, "n", "parameters");
  const double gamma = io::number_or(p, "gamma", 0.0, "parameters");
  const double mu = io::number_or(p, "mu", 2.0, "parameters");
  const double pnorm = io::number_or(p, "p", 2.0, "parameters");
  const RVec spectrum = spectrum_from_params(p, "parameters");
  const std::string strip_mode = io::string_or(p, "strip_mode", "strip", "parameters");
  if (strip_mode != "strip" && strip_mode != "line") {
    throw InvalidRequestError("strip_mode must be \"strip\" or \"line\"");
  }
  const sectors::Sector sector(io::number_or(p, "theta", kPi / 4, "parameters"));

  const elliptic::WeightWindow window = elliptic::weight_window(n, spectrum);
  const elliptic::StripCheckResult strip = elliptic::strip_check(
      n, spectrum, gamma, mu,
      strip_mode == "line" ? elliptic::StripMode::Line
                           : elliptic::StripMode::Strip);

  std::optional<elliptic::SymbolCheckResult> symbol;
  if (io::bool_or(p, "check_symbol", true, "parameters")) {
    // Principal symbol of the model operator: |xi|^2 (scalar), sampled on the
    // unit covariable shell; homogeneity covers the rest.
    auto principal = [](const RVec&, const RVec& xi) {
      CMat m(1, 1);
      m(0, 0) = xi.squaredNorm();
      return m;
    };
    std::vector<RVec> base{RVec::Zero(1)};
    std::vector<RVec> covectors{RVec::Constant(1, 1.0), RVec::Constant(1, -1.0)};
    symbol = elliptic::symbol_sector_check(principal, base, covectors, sector);
  }

  std::optional<elliptic::NumericSectorCheck> numeric;
  Json numeric_modes = Json::array();
  if (p.contains("grid")) {
    const Json& g = p.at("grid");
    io::validate_keys(g, {"N", "R"}, "parameters.grid");
    const int base_n = io::require_int(g, "N", "parameters.grid");
    const double base_r = io::require_number(g, "R", "parameters.grid");
    const int levels = io::int_or(p, "levels", 2, "parameters");
    if (levels < 2) throw InvalidRequestError("levels must be >= 2");

    std::vector<std::vector<cone::ConeModeOperator>> level_modes;
    for (int level = 0; level < levels; ++level) {
      level_modes.push_back(
          cone::build_cone_modes(cone::make_log_grid(base_n << level,
                                                     base_r + level),
                                 n, spectrum, gamma, pnorm));
    }
    elliptic::NumericSectorOptions options;
    options.resolvent_bound =
        io::number_or(p, "resolvent_bound", 0.0, "parameters");
    elliptic::NumericSectorCheck combined;
    combined.pass = true;
    combined.scan_pass = true;
    combined.refinement_consistent = true;
    combined.spectrum_pass = true;
    combined.angular_margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < spectrum.size(); ++j) {
      std::vector<const ops::ResolventProvider*> levels_j;
      for (const auto& modes : level_modes) {
        levels_j.push_back(&modes[static_cast<std::size_t>(j)]);
      }
      const elliptic::NumericSectorCheck check =
          elliptic::numeric_sector_check(levels_j, sector, options);
      numeric_modes.push_back(Json{{"lambda", spectrum(j)},
                                   {"pass", check.pass},
                                   {"sup_norm", check.sup_norm_finest},
                                   {"angular_margin", check.angular_margin}});
      combined.pass = combined.pass && check.pass;
      combined.scan_pass = combined.scan_pass && check.scan_pass;
      combined.refinement_consistent =
          combined.refinement_consistent && check.refinement_consistent;
      combined.spectrum_pass = combined.spectrum_pass && check.spectrum_pass;
      combined.sup_norm_finest =
          std::max(combined.sup_norm_finest, check.sup_norm_finest);
      combined.sup_variation =
          std::max(combined.sup_variation, check.sup_variation);
      combined.angular_margin =
          std::min(combined.angular_margin, check.angular_margin);
    }
    numeric = combined;
  }

  const bool shift_assumed =
      io::bool_or(p, "shift_condition_assumed", true, "parameters");
  const elliptic::EllipticityReport full =
      elliptic::assemble_report(symbol, shift_assumed, window, strip, numeric);

  Json report = io::report_envelope("ellipticity-report", ctx.seed, p);
  report["results"]["s0"] = window.s0;
  report["results"]["window"] =
      window.admissible ? Json::array({window.lo, window.hi}) : Json();
  report["results"]["strip"] =
      Json{{"clear", strip.clear},
           {"line_lo", strip.line_lo},
           {"line_hi", strip.line_hi},
           {"min_distance", strip.min_distance}};
  report["results"]["shift_condition_assumed"] = shift_assumed;
  if (numeric) {
    report["results"]["numeric_modes"] = numeric_modes;
    report["results"]["angular_margin"] = numeric->angular_margin;
  }
  report["results"]["admissible"] = full.admissible;

  bool all_pass = true;
  if (symbol) {
    Json violations = Json::array();
    for (const Complex& z : symbol->violations) {
      violations.push_back(io::complex_to_json(z));
    }
    push_verdict(report, all_pass, "interior-symbol", symbol->pass, violations,
                 Json{{"samples", symbol->samples}});
  }
  push_verdict(report, all_pass, "weight-window-admissible", window.admissible,
               Json::array(), Json{{"s0", window.s0}});
  {
    Json violations = Json::array();
    for (const Complex& z : strip.violations) {
      violations.push_back(io::complex_to_json(z));
    }
    push_verdict(report, all_pass, "strip-clear", strip.clear, violations,
                 Json{{"gamma", gamma}, {"mu", mu}, {"mode", strip_mode}});
  }
  if (numeric) {
    push_verdict(report, all_pass, "numeric-sector", numeric->pass,
                 Json::array(),
                 Json{{"sup_norm", numeric->sup_norm_finest},
                      {"sup_variation", numeric->sup_variation},
                      {"angular_margin", numeric->angular_margin}});
  }
  push_verdict(report, all_pass, "admissible-overall", full.admissible);
  return finish(ctx, report, all_pass);
}

int handle_funcalc(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p,
                    {"operator", "theta", "function", "tol", "max_nodes",
                     "path", "resolvent_bound", "include_matrix"},
                    "parameters");
  const sectors::Sector sector(io::require_number(p, "theta", "parameters"));
  if (!p.contains("operator") || !p.contains("function")) {
    throw InvalidRequestError("funcalc needs \"operator\" and \"function\"");
  }
  ParsedOperator op = parse_operator(p.at("operator"));
  const holo::HFunction f = parse_function(p.at("function"), sector);
  const double tol = io::number_or(p, "tol", 1e-8, "parameters");
  const int max_nodes = io::int_or(p, "max_nodes", 400, "parameters");
  std::string path = io::string_or(p, "path", "auto", "parameters");
  if (path == "auto") {
    path = f.certificate ? "sector-boundary" : "closed-circle";
  }

  CalcResult result;
  if (path == "sector-boundary") {
    if (!f.certificate) {
      throw InvalidRequestError(
          "sector-boundary path needs a decay certificate on the function");
    }
    sectors::ContourOptions copts;
    copts.resolvent_bound =
        io::number_or(p, "resolvent_bound", 1.0, "parameters");
    copts.integrand_scale = f.certificate->scale;
    copts.imag_order = f.imag_order;
    const sectors::Contour contour = sectors::boundary_contour(
        sector, f.certificate->delta, tol, max_nodes, copts);
    result = calc::dunford(*op.provider, f, contour);
  } else if (path == "closed-circle") {
    calc::ClosedPathOptions copts;
    copts.tol = tol;
    copts.max_nodes = std::max(16, max_nodes);
    copts.origin_singular = f.kind != holo::Kind::ExponentialDecay;
    result = calc::closed_path(*op.provider, f, copts);
  } else {
    throw InvalidRequestError(
        "path must be auto|sector-boundary|closed-circle");
  }

  Json report = io::report_envelope("funcalc", ctx.seed, p);
  report["results"]["error_estimate"] = result.error_estimate;
  report["results"]["nodes_used"] = result.nodes_used;
  report["results"]["path"] = result.path;
  report["results"]["norm"] = ops::weighted_spectral_norm(
      result.value, op.provider->norm_weights());
  if (io::bool_or(p, "include_matrix", result.value.rows() <= 32,
                  "parameters")) {
    report["results"]["value"] = io::cmat_to_json(result.value);
  }

  bool all_pass = true;
  push_verdict(report, all_pass, "error-tolerance",
               result.error_estimate <= tol, Json::array(),
               Json{{"tol", tol}, {"error_estimate", result.error_estimate}});
  if (op.kind == "diagonal") {
    CMat oracle = CMat::Zero(op.diagonal_entries.size(),
                             op.diagonal_entries.size());
    for (Eigen::Index i = 0; i < op.diagonal_entries.size(); ++i) {
      oracle(i, i) = f(op.diagonal_entries(i));
    }
    const double gap = (result.value - oracle).cwiseAbs().maxCoeff();
    report["results"]["oracle_gap"] = gap;
    push_verdict(report, all_pass, "oracle-gap",
                 gap <= result.error_estimate + 1e-12, Json::array(),
                 Json{{"gap", gap}, {"error_estimate", result.error_estimate}});
  }
  return finish(ctx, report, all_pass);
}

int handle_hinf_bound(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p,
                    {"operator", "theta", "random_members", "contour_tol",
                     "max_nodes", "max_ratio", "node_multiplier"},
                    "parameters");
  const sectors::Sector sector(io::require_number(p, "theta", "parameters"));
  if (!p.contains("operator")) {
    throw InvalidRequestError("hinf-bound needs \"operator\"");
  }
  ParsedOperator op = parse_operator(p.at("operator"));
  const int random_members = io::int_or(p, "random_members", 4, "parameters");
  const double contour_tol =
      io::number_or(p, "contour_tol", 1e-6, "parameters");
  const int max_nodes = io::int_or(p, "max_nodes", 4000, "parameters");
  const double max_ratio = io::number_or(p, "max_ratio", 1.05, "parameters");
  const int node_multiplier = io::int_or(p, "node_multiplier", 1, "parameters");

  const std::vector<calc::FamilyMember> members =
      calc::default_bound_family(sector, ctx.seed, random_members);
  const calc::BoundReport bound = calc::sup_calculus_bound(
      *op.provider, sector, members, contour_tol, max_nodes, node_multiplier);

  Json report = io::report_envelope("hinf-bound", ctx.seed, p);
  report["results"]["m_hat"] = bound.bound;
  report["results"]["total_nodes"] = bound.total_nodes;
  Json table = Json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& [name, ratio] : bound.member_ratios) {
    table.push_back(Json{{"member", name}, {"ratio", ratio}});
    rows.push_back({name, io::double_to_string(ratio)});
  }
  report["results"]["members"] = table;
  io::write_text_file(join_path(ctx.out_dir, "ratios.csv"),
                      io::csv_table({"member", "ratio"}, rows));

  bool all_pass = true;
  push_verdict(report, all_pass, "calculus-bound", bound.bound <= max_ratio,
               Json::array(),
               Json{{"m_hat", bound.bound}, {"max_ratio", max_ratio}});
  return finish(ctx, report, all_pass);
}

int handle_heat_solve(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p, {"operator", "theta", "tau", "taus", "tol",
                        "include_matrix"},
                    "parameters");
  const sectors::Sector sector(
      io::number_or(p, "theta", kPi / 2, "parameters"));
  if (sector.theta > kPi / 2 + 1e-12) {
    throw InvalidRequestError(
        "heat-solve needs an aperture theta <= pi/2 (otherwise e^{-tau "
        "lambda} is unbounded on the spectral region)");
  }
  if (!p.contains("operator")) {
    throw InvalidRequestError("heat-solve needs \"operator\"");
  }
  ParsedOperator op = parse_operator(p.at("operator"));
  std::vector<double> taus;
  if (p.contains("taus")) {
    const RVec v = io::rvec_from_json(p.at("taus"));
    taus.assign(v.data(), v.data() + v.size());
  } else {
    taus.push_back(io::require_number(p, "tau", "parameters"));
  }
  for (double tau : taus) {
    if (!(tau > 0)) throw InvalidRequestError("tau must be positive");
  }
  const double tol = io::number_or(p, "tol", 1e-9, "parameters");
  calc::HeatOptions options;
  options.tol = tol;

  Json report = io::report_envelope("heat-solve", ctx.seed, p);
  Json entries = Json::array();
  bool all_pass = true;
  std::vector<std::vector<std::string>> rows;
  const bool include_matrix = io::bool_or(
      p, "include_matrix", op.provider->dim() <= 32, "parameters");
  for (double tau : taus) {
    const CalcResult result = calc::heat_semigroup(*op.provider, tau, options);
    const double norm = ops::weighted_spectral_norm(
        result.value, op.provider->norm_weights());
    Json entry;
    entry["tau"] = tau;
    entry["error_estimate"] = result.error_estimate;
    entry["nodes_used"] = result.nodes_used;
    entry["path"] = result.path;
    entry["norm"] = norm;
    if (include_matrix) entry["value"] = io::cmat_to_json(result.value);
    entries.push_back(std::move(entry));
    rows.push_back({io::double_to_string(tau),
                    io::double_to_string(result.error_estimate),
                    io::double_to_string(norm), result.path});
    push_verdict(report, all_pass, "error-tolerance",
                 result.error_estimate <= tol, Json::array(),
                 Json{{"tau", tau},
                      {"error_estimate", result.error_estimate},
                      {"tol", tol}});
  }
  report["results"]["semigroups"] = std::move(entries);
  io::write_text_file(
      join_path(ctx.out_dir, "heat.csv"),
      io::csv_table({"tau", "error_estimate", "norm", "path"}, rows));
  return finish(ctx, report, all_pass);
}

int handle_cauchy(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p,
                    {"n", "gamma", "p", "bc", "length", "count", "spectrum",
                     "grid", "theta", "T", "steps", "r", "forcings",
                     "rho_max"},
                    "parameters");
  const int n = io::require_int(p, "n", "parameters");
  const double gamma = io::number_or(p, "gamma", 0.0, "parameters");
  const double pnorm = io::number_or(p, "p", 2.0, "parameters");
  const RVec spectrum = spectrum_from_params(p, "parameters");
  if (!p.contains("grid")) throw InvalidRequestError("cauchy needs \"grid\"");
  const Json& g = p.at("grid");
  io::validate_keys(g, {"N", "R"}, "parameters.grid");
  const cone::LogGrid grid =
      cone::make_log_grid(io::require_int(g, "N", "parameters.grid"),
                          io::require_number(g, "R", "parameters.grid"));
  const sectors::Sector sector(
      io::number_or(p, "theta", kPi / 2, "parameters"));
  calc::CauchyOptions options;
  options.T = io::number_or(p, "T", 1.0, "parameters");
  options.steps = io::int_or(p, "steps", 256, "parameters");
  options.r_time = io::number_or(p, "r", 2.0, "parameters");
  const int forcings = io::int_or(p, "forcings", 1, "parameters");
  const double rho_max = io::number_or(p, "rho_max", 50.0, "parameters");

  const std::vector<cone::ConeModeOperator> modes =
      cone::build_cone_modes(grid, n, spectrum, gamma, pnorm);
  std::vector<const ops::ResolventProvider*> mode_ptrs;
  for (const auto& m : modes) mode_ptrs.push_back(&m);

  // Seeded smooth random forcings: per mode a fixed spatial profile
  // t^q (1 - t) modulated by a random low-order trigonometric time factor.
  std::mt19937_64 rng(ctx.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::uniform_real_distribution<double> expo(1.0, 3.0);

  Json report = io::report_envelope("cauchy", ctx.seed, p);
  Json runs = Json::array();
  bool all_pass = true;
  double max_rho = 0.0;
  std::vector<std::vector<std::string>> trajectory_rows;
  for (int run = 0; run < forcings; ++run) {
    std::vector<std::function<CVec(double)>> forcing;
    for (std::size_t j = 0; j < modes.size(); ++j) {
      const double a0 = unif(rng), a1 = unif(rng), a2 = unif(rng);
      const double q = expo(rng);
      RVec profile(grid.N);
      for (int i = 0; i < grid.N; ++i) {
        profile(i) = std::pow(grid.t(i), q) * (1.0 - grid.t(i));
      }
      const double T = options.T;
      forcing.push_back([profile, a0, a1, a2, T](double tau) {
        const double factor = 1.5 + a0 + a1 * std::sin(kPi * tau / T) +
                              a2 * std::cos(2 * kPi * tau / T);
        return (profile * factor).cast<Complex>().eval();
      });
    }
    const calc::CauchyResult result =
        calc::cauchy_solve(mode_ptrs, forcing, sector, options);
    max_rho = std::max(max_rho, result.rho);
    runs.push_back(Json{{"rho", result.rho},
                        {"norm_du", result.norm_du},
                        {"norm_au", result.norm_au},
                        {"norm_f", result.norm_f}});
    if (run == 0) {
      for (Eigen::Index k = 0; k < result.times.size(); ++k) {
        for (std::size_t j = 0; j < result.trajectories.size(); ++j) {
          const CMat& traj = result.trajectories[j];
          for (Eigen::Index i = 0; i < traj.cols(); ++i) {
            trajectory_rows.push_back(
                {io::double_to_string(result.times(k)), std::to_string(j),
                 std::to_string(i), io::double_to_string(traj(k, i).real()),
                 io::double_to_string(traj(k, i).imag())});
          }
        }
      }
    }
  }
  report["results"]["runs"] = std::move(runs);
  report["results"]["max_rho"] = max_rho;
  io::write_text_file(
      join_path(ctx.out_dir, "trajectories.csv"),
      io::csv_table({"tau", "mode_j", "node_i", "value_re", "value_im"},
                    trajectory_rows));
  push_verdict(report, all_pass, "maximal-regularity-ratio",
               max_rho <= rho_max, Json::array(),
               Json{{"max_rho", max_rho}, {"rho_max", rho_max}});
  return finish(ctx, report, all_pass);
}

int handle_hardy_check(const RunContext& ctx) {
  const Json& p = ctx.parameters;
  io::validate_keys(p,
                    {"n", "eps", "p", "grids", "tolerance_factor", "samples",
                     "power_iterations", "slope_range"},
                    "parameters");
  const int n = io::int_or(p, "n", 0, "parameters");
  std::vector<double> eps_list{0.5};
  if (p.contains("eps")) {
    const RVec v = io::rvec_from_json(p.at("eps"));
    eps_list.assign(v.data(), v.data() + v.size());
  }
  for (double eps : eps_list) {
    if (!(eps > 0)) {
      throw InvalidRequestError("eps values must be > 0");
    }
  }
  std::vector<double> p_list{2.0};
  if (p.contains("p")) {
    const RVec v = io::rvec_from_json(p.at("p"));
    p_list.assign(v.data(), v.data() + v.size());
  }
  for (double pe : p_list) {
    if (!(pe > 1)) throw InvalidRequestError("p values must be > 1");
  }
  std::vector<std::pair<int, double>> grids{{200, 8.0}, {400, 10.0}};
  if (p.contains("grids")) {
    grids.clear();
    for (const auto& g : p.at("grids")) {
      io::validate_keys(g, {"N", "R"}, "parameters.grids[]");
      grids.emplace_back(io::require_int(g, "N", "parameters.grids[]"),
                         io::require_number(g, "R", "parameters.grids[]"));
    }
    if (grids.empty()) throw InvalidRequestError("grids must be non-empty");
  }
  const double tolerance_factor =
      io::number_or(p, "tolerance_factor", 1.05, "parameters");
  std::pair<double, double> slope_range{0.8, 1.1};
  if (p.contains("slope_range")) {
    const RVec v = io::rvec_from_json(p.at("slope_range"));
    if (v.size() != 2) {
      throw InvalidRequestError("slope_range must be [lo, hi]");
    }
    slope_range = {v(0), v(1)};
  }

  Json report = io::report_envelope("hardy-check", ctx.seed, p);
  Json table = Json::array();
  std::vector<std::vector<std::string>> rows;
  bool all_bound_pass = true;
  bool monotone = true;
  // norm at the finest grid, per p then per eps, for the slope fit
  std::vector<std::vector<double>> finest(p_list.size());

  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    for (double eps : eps_list) {
      double previous = -1.0;
      for (std::size_t gi = 0; gi < grids.size(); ++gi) {
        kernels::HardyParams params;
        params.n = n;
        params.eps = eps;
        params.p = p_list[pi];
        params.N = grids[gi].first;
        params.R = grids[gi].second;
        params.seed = ctx.seed;
        params.samples = io::int_or(p, "samples", params.samples, "parameters");
        params.power_iterations = io::int_or(
            p, "power_iterations", params.power_iterations, "parameters");
        const kernels::HardyResult result =
            kernels::hardy_norm(params, tolerance_factor);
        all_bound_pass = all_bound_pass && result.pass;
        if (previous >= 0.0 && result.norm_estimate < previous - 1e-6) {
          monotone = false;
        }
        previous = result.norm_estimate;
        if (gi + 1 == grids.size()) finest[pi].push_back(result.norm_estimate);
        table.push_back(Json{{"epsilon", eps},
                             {"p", p_list[pi]},
                             {"N", params.N},
                             {"R", params.R},
                             {"norm_estimate", result.norm_estimate},
                             {"bound", result.bound},
                             {"pass", result.pass}});
        rows.push_back({io::double_to_string(eps),
                        io::double_to_string(p_list[pi]),
                        std::to_string(params.N), io::double_to_string(params.R),
                        io::double_to_string(result.norm_estimate),
                        io::double_to_string(result.bound),
                        result.pass ? "true" : "false"});
      }
    }
  }
  report["results"]["table"] = std::move(table);
  io::write_text_file(
      join_path(ctx.out_dir, "hardy.csv"),
      io::csv_table({"epsilon", "p", "N", "R", "norm_estimate", "bound",
                     "pass"},
                    rows));

  bool all_pass = true;
  push_verdict(report, all_pass, "hardy-bound", all_bound_pass, Json::array(),
               Json{{"tolerance_factor", tolerance_factor}});
  push_verdict(report, all_pass, "refinement-monotone", monotone);
  if (eps_list.size() >= 3) {
    Json slopes = Json::array();
    bool slope_pass = true;
    for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
      // least-squares slope of log(norm) against log(1/eps)
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const auto count = static_cast<double>(eps_list.size());
      for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const double x = std::log(1.0 / eps_list[k]);
        const double y = std::log(finest[pi][k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
      }
      const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
      slopes.push_back(Json{{"p", p_list[pi]}, {"slope", slope}});
      slope_pass = slope_pass && slope >= slope_range.first &&
                   slope <= slope_range.second;
    }
    report["results"]["slopes"] = slopes;
    push_verdict(report, all_pass, "norm-growth-order", slope_pass,
                 Json::array(),
                 Json{{"lo", slope_range.first}, {"hi", slope_range.second}});
  }
  return finish(ctx, report, all_pass);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"operator-calculus experiment runner"};
  app.set_version_flag("--version", std::string(kToolVersion));
  std::string config_path;
  app.add_option("--config", config_path, "experiment config (JSON)")
      ->required();
  std::string out_flag;
  app.add_option("--out", out_flag, "output directory (overrides config)");
  std::uint64_t seed_flag = 0;
  const auto* seed_opt =
      app.add_option("--seed", seed_flag, "random seed (overrides env/config)");
  int threads = 0;
  app.add_option("--threads", threads, "worker cap for parallel loops");
  bool verbose = false;
  app.add_flag("--verbose", verbose, "print a one-line summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (threads > 0) set_max_threads(threads);

    std::ifstream in(config_path);
    if (!in) throw InvalidRequestError("cannot open config " + config_path);
    Json config = Json::parse(in, nullptr, true);
    io::validate_keys(config, {"command", "parameters", "output", "seed"},
                      "config");
    const std::string command = io::string_or(config, "command", "", "config");
    RunContext ctx;
    ctx.parameters = config.contains("parameters") ? config.at("parameters")
                                                   : Json::object();
    if (!ctx.parameters.is_object()) {
      throw InvalidRequestError("config.parameters must be an object");
    }
    ctx.verbose = verbose;
    ctx.out_dir = !out_flag.empty()
                      ? out_flag
                      : io::string_or(config, "output", ".", "config");

    // Seed precedence: --seed flag, then CONECALC_SEED, then config, then
    // the built-in default.
    ctx.seed = kDefaultSeed;
    if (config.contains("seed")) {
      if (!config.at("seed").is_number_integer()) {
        throw InvalidRequestError("config.seed must be an integer");
      }
      ctx.seed = config.at("seed").get<std::uint64_t>();
    }
    if (const char* env = std::getenv("CONECALC_SEED")) {
      ctx.seed = std::strtoull(env, nullptr, 10);
    }
    if (seed_opt->count() > 0) ctx.seed = seed_flag;

    if (command == "sector-check") return handle_sector_check(ctx);
    if (command == "weight-window") return handle_weight_window(ctx);
    if (command == "ellipticity-report") return handle_ellipticity_report(ctx);
    if (command == "funcalc") return handle_funcalc(ctx);
    if (command == "hinf-bound") return handle_hinf_bound(ctx);
    if (command == "heat-solve") return handle_heat_solve(ctx);
    if (command == "cauchy") return handle_cauchy(ctx);
    if (command == "hardy-check") return handle_hardy_check(ctx);
    throw InvalidRequestError("unknown command \"" + command + "\"");
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace conecalc::cli
