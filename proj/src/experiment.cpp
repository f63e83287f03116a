#include "evoflow/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "evoflow/flow.hpp"
#include "evoflow/io.hpp"
#include "evoflow/nes.hpp"
#include "evoflow/oracle.hpp"
#include "evoflow/simplex.hpp"
#include "evoflow/verify.hpp"

namespace evoflow {
namespace {

using nlohmann::json;

Eigen::VectorXd parse_vector(const json& node, const std::string& field) {
  if (!node.is_array())
    throw validation_error("config field '" + field + "' must be a numeric array");
  Eigen::VectorXd v(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    if (!node[i].is_number())
      throw validation_error("config field '" + field + "' must be a numeric array");
    v[static_cast<Eigen::Index>(i)] = node[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const json& node, const std::string& field) {
  if (!node.is_array() || node.empty())
    throw validation_error("config field '" + field + "' must be an array of rows");
  const std::size_t rows = node.size();
  std::size_t cols = 0;
  Eigen::MatrixXd M;
  for (std::size_t i = 0; i < rows; ++i) {
    if (!node[i].is_array())
      throw validation_error("config field '" + field + "' must be an array of rows");
    if (i == 0) {
      cols = node[i].size();
      if (cols == 0)
        throw validation_error("config field '" + field + "' has an empty row");
      M.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (node[i].size() != cols) {
      throw validation_error("config field '" + field + "' has ragged rows");
    }
    for (std::size_t j = 0; j < cols; ++j) {
      if (!node[i][j].is_number())
        throw validation_error("config field '" + field + "' must be numeric");
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          node[i][j].get<double>();
    }
  }
  return M;
}

const json& require(const json& doc, const std::string& key, const std::string& where) {
  auto it = doc.find(key);
  if (it == doc.end())
    throw validation_error("config: missing required field '" + where + "'");
  return *it;
}

double number_at(const json& doc, const std::string& key, const std::string& where,
                 std::optional<double> fallback = std::nullopt) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    if (fallback) return *fallback;
    throw validation_error("config: missing required field '" + where + "'");
  }
  if (!it->is_number())
    throw validation_error("config field '" + where + "' must be a number");
  return it->get<double>();
}

FlowConfig parse_flow(const json& doc) {
  FlowConfig cfg;
  if (auto it = doc.find("flow"); it != doc.end()) {
    cfg.dt = number_at(*it, "dt", "flow.dt", cfg.dt);
    cfg.t_end = number_at(*it, "t_end", "flow.t_end", cfg.t_end);
    cfg.record_every = static_cast<int>(
        number_at(*it, "record_every", "flow.record_every", cfg.record_every));
    cfg.boundary_eps =
        number_at(*it, "boundary_eps", "flow.boundary_eps", cfg.boundary_eps);
  }
  cfg.validate();
  return cfg;
}

struct OutputSpec {
  std::string path;
  TrajectoryFormat format = TrajectoryFormat::Csv;
  std::string report_path;
};

OutputSpec parse_output(const json& doc, const CliOverrides& overrides) {
  OutputSpec out;
  std::string format_name = "csv";
  if (auto it = doc.find("output"); it != doc.end()) {
    if (auto p = it->find("path"); p != it->end()) out.path = p->get<std::string>();
    if (auto f = it->find("format"); f != it->end()) format_name = f->get<std::string>();
    if (auto r = it->find("report_path"); r != it->end())
      out.report_path = r->get<std::string>();
  }
  if (overrides.output_path) out.path = *overrides.output_path;
  if (overrides.format) format_name = *overrides.format;
  if (out.path.empty())
    throw validation_error("config: missing required field 'output.path'");
  out.format = parse_format(format_name);
  if (out.report_path.empty()) out.report_path = out.path + ".report.json";
  return out;
}

void require_finite(const json& node, const std::string& where) {
  if (node.is_number_float() && !std::isfinite(node.get<double>()))
    throw numerical_error("report field '" + where + "' is not finite");
  if (node.is_object() || node.is_array())
    for (auto it = node.begin(); it != node.end(); ++it)
      require_finite(*it,
                     node.is_object() ? where + "." + it.key() : where + "[]");
}

void write_report(const json& report, const std::string& path) {
  json checked = report;
  require_finite(checked, "report");
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open report path '" + path + "'");
  out << checked.dump(2) << '\n';
  if (!out) throw validation_error("report write failed for '" + path + "'");
}

json rate_to_json(const FittedRate& rate) {
  return {{"model", rate.model_name()},
          {"rate", rate.rate},
          {"r_squared", rate.r_squared}};
}

/// Fit on the traceC series when the trajectory is long and healthy
/// enough; otherwise report nothing.
std::optional<FittedRate> try_fit(const Trajectory<GaussianParams>& traj) {
  try {
    return fit_convergence_rate(traj);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

json gaussian_state_json(const GaussianParams& g) {
  std::vector<double> a(g.a().data(), g.a().data() + g.dim());
  std::vector<std::vector<double>> C;
  for (Eigen::Index i = 0; i < g.dim(); ++i) {
    std::vector<double> row;
    for (Eigen::Index j = 0; j < g.dim(); ++j) row.push_back(g.C()(i, j));
    C.push_back(std::move(row));
  }
  return {{"a", a}, {"C", C}};
}

int run_simplex_flow(const json& doc, const OutputSpec& out) {
  const json& landscape = require(doc, "landscape", "landscape");
  const FiniteLandscape f =
      FiniteLandscape::from_matrix(parse_matrix(require(landscape, "A", "landscape.A"),
                                                "landscape.A"));
  const json& initial = require(doc, "initial", "initial");
  const SimplexPoint p0(parse_vector(require(initial, "p", "initial.p"), "initial.p"));
  if (p0.dim() != f.dim())
    throw validation_error("config: initial.p dimension does not match landscape.A");

  std::optional<SimplexPoint> target;
  if (auto it = doc.find("target"); it != doc.end()) {
    target.emplace(parse_vector(*it, "target"));
    if (target->dim() != f.dim())
      throw validation_error("config: target dimension does not match landscape.A");
  }

  const FlowConfig cfg = parse_flow(doc);

  DiagnosticSet<Eigen::VectorXd> diag;
  diag.emplace_back("J", [&f](double, const Eigen::VectorXd& p) {
    return p.dot(f.fitness(p));
  });
  if (target) {
    const Eigen::VectorXd t = target->p();
    diag.emplace_back("kl_to_target", [t](double, const Eigen::VectorXd& p) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < t.size(); ++i) acc += t[i] * std::log(t[i] / p[i]);
      return acc;
    });
  }

  const auto traj = integrate(
      [&f](double, const Eigen::VectorXd& p) { return replicator_field(p, f); }, p0, cfg,
      diag);
  emit_trajectory(traj, out.format, out.path);

  json summary;
  summary["final_J"] = traj.diagnostic("J").back();
  if (target) {
    const auto& series = traj.diagnostic("kl_to_target");
    bool monotone = true;
    for (std::size_t i = 1; i < series.size(); ++i)
      if (series[i] > series[i - 1] + 1e-12) monotone = false;
    summary["lyapunov_monotone"] = monotone;
    summary["final_kl_to_target"] = series.back();
  }

  json report;
  report["config"] = doc;
  report["final_state"] = {
      {"p", std::vector<double>(traj.states.back().data(),
                                traj.states.back().data() + traj.states.back().size())}};
  report["summary"] = summary;
  write_report(report, out.report_path);
  return kStatusOk;
}

int run_gaussian_flow(const json& doc, const OutputSpec& out, bool sigma_normalized) {
  const json& landscape = require(doc, "landscape", "landscape");
  const QuadBilinearLandscape L(
      parse_matrix(require(landscape, "Q", "landscape.Q"), "landscape.Q"),
      parse_matrix(require(landscape, "B", "landscape.B"), "landscape.B"));
  const json& initial = require(doc, "initial", "initial");
  const GaussianParams g0(parse_vector(require(initial, "a", "initial.a"), "initial.a"),
                          parse_matrix(require(initial, "C", "initial.C"), "initial.C"));
  if (g0.dim() != L.dim())
    throw validation_error("config: initial state dimension does not match landscape.Q");
  const FlowConfig cfg = parse_flow(doc);

  DiagnosticSet<GaussianParams> diag;
  diag.emplace_back("J", [&L](double, const GaussianParams& g) {
    return expected_fitness(g, L);
  });
  diag.emplace_back("traceC", [](double, const GaussianParams& g) {
    return g.C().trace();
  });

  GaussianField field;
  if (sigma_normalized)
    field = [&L](double, const GaussianParams& g) { return sigma_normalized_rhs(g, L); };
  else
    field = [&L](double, const GaussianParams& g) { return replicator_rhs_gaussian(g, L); };

  const auto traj = integrate(field, g0, cfg, diag);
  emit_trajectory(traj, out.format, out.path);

  const AsymptoticReport asym = classify_asymptotics(L);
  json summary;
  summary["final_J"] = traj.diagnostic("J").back();
  summary["final_traceC"] = traj.diagnostic("traceC").back();
  summary["converges_to_delta_at_zero"] = asym.converges_to_delta_at_zero;
  std::vector<double> eig_real, eig_imag;
  for (Eigen::Index i = 0; i < asym.eigenvalues.size(); ++i) {
    eig_real.push_back(asym.eigenvalues[i].real());
    eig_imag.push_back(asym.eigenvalues[i].imag());
  }
  summary["eigenvalues_real"] = eig_real;
  summary["eigenvalues_imag"] = eig_imag;
  if (auto rate = try_fit(traj)) summary["fitted_rate"] = rate_to_json(*rate);

  json report;
  report["config"] = doc;
  report["final_state"] = gaussian_state_json(traj.states.back());
  report["summary"] = summary;
  write_report(report, out.report_path);
  return kStatusOk;
}

int run_nes(const json& doc, const OutputSpec& out, const CliOverrides& overrides) {
  const json& landscape = require(doc, "landscape", "landscape");
  const QuadBilinearLandscape L(
      parse_matrix(require(landscape, "Q", "landscape.Q"), "landscape.Q"),
      parse_matrix(require(landscape, "B", "landscape.B"), "landscape.B"));
  const json& initial = require(doc, "initial", "initial");
  const GaussianParams g0(parse_vector(require(initial, "a", "initial.a"), "initial.a"),
                          parse_matrix(require(initial, "C", "initial.C"), "initial.C"));
  if (g0.dim() != L.dim())
    throw validation_error("config: initial state dimension does not match landscape.Q");

  const json& nes = require(doc, "nes", "nes");
  const double step = number_at(nes, "step", "nes.step");
  const int iters = static_cast<int>(number_at(nes, "iters", "nes.iters"));

  AscentMode mode;
  const std::string kind = require(nes, "mode", "nes.mode").get<std::string>();
  if (kind == "analytic") {
    mode.kind = AscentMode::Kind::Analytic;
  } else if (kind == "sampled") {
    mode.kind = AscentMode::Kind::Sampled;
    mode.m = static_cast<int>(number_at(nes, "m", "nes.m"));
    mode.seed = static_cast<std::uint64_t>(number_at(nes, "seed", "nes.seed", 0.0));
    if (auto it = nes.find("shaping"); it != nes.end()) {
      const std::string shaping_kind =
          require(*it, "kind", "nes.shaping.kind").get<std::string>();
      if (shaping_kind == "rank")
        mode.shaping.kind = ShapingSpec::Kind::Rank;
      else if (shaping_kind == "none")
        mode.shaping.kind = ShapingSpec::Kind::None;
      else
        throw validation_error("config field 'nes.shaping.kind' must be none|rank");
      mode.shaping.truncation = number_at(*it, "truncation", "nes.shaping.truncation",
                                          mode.shaping.truncation);
    }
    if (auto it = nes.find("opponent"); it != nes.end()) {
      const std::string opp = it->get<std::string>();
      if (opp == "mean")
        mode.opponent = OpponentModel::Mean;
      else if (opp == "paired")
        mode.opponent = OpponentModel::Paired;
      else
        throw validation_error("config field 'nes.opponent' must be mean|paired");
    }
  } else {
    throw validation_error("config field 'nes.mode' must be analytic|sampled");
  }
  if (overrides.seed) mode.seed = *overrides.seed;

  const auto traj = natural_gradient_ascent(g0, L, step, iters, mode);
  emit_trajectory(traj, out.format, out.path);

  json summary;
  summary["final_J"] = traj.diagnostic("J").back();
  summary["final_traceC"] = traj.diagnostic("traceC").back();
  if (auto rate = try_fit(traj)) summary["fitted_rate"] = rate_to_json(*rate);

  json report;
  report["config"] = doc;
  report["final_state"] = gaussian_state_json(traj.states.back());
  report["summary"] = summary;
  write_report(report, out.report_path);
  return kStatusOk;
}

int run_grid_oracle(const json& doc, const OutputSpec& out) {
  const json& landscape = require(doc, "landscape", "landscape");
  const double q = number_at(landscape, "q", "landscape.q");
  const double b = number_at(landscape, "b", "landscape.b");
  if (!(q > 0.0)) throw validation_error("config field 'landscape.q' must be > 0");

  const json& initial = require(doc, "initial", "initial");
  const double s_min = number_at(initial, "s_min", "initial.s_min");
  const double s_max = number_at(initial, "s_max", "initial.s_max");
  const int K = static_cast<int>(number_at(initial, "K", "initial.K"));
  const double mean = number_at(initial, "mean", "initial.mean", 0.0);
  const double variance = number_at(initial, "variance", "initial.variance", 1.0);
  const GridDensity d0 = GridDensity::discretized_gaussian(s_min, s_max, K, mean, variance);

  const FlowConfig cfg = parse_flow(doc);
  const auto traj = integrate(d0, q, b, cfg);
  emit_trajectory(traj, out.format, out.path);

  const double t_end = traj.times.back();
  const Eigen::MatrixXd c0 = Eigen::MatrixXd::Constant(1, 1, variance);
  const Eigen::MatrixXd qm = Eigen::MatrixXd::Constant(1, 1, q);
  const double var_closed = closed_form_covariance(c0, qm, t_end)(0, 0);
  const double mean_closed = mean_closed_form_1d(mean, variance, q, b, t_end);

  double max_drift = 0.0;
  for (double d : traj.diagnostic("renorm_drift")) max_drift = std::max(max_drift, d);

  json summary;
  summary["final_mean"] = traj.diagnostic("mean").back();
  summary["final_variance"] = traj.diagnostic("variance").back();
  summary["final_skewness"] = traj.diagnostic("skewness").back();
  summary["final_excess_kurtosis"] = traj.diagnostic("excess_kurtosis").back();
  summary["oracle_delta"] = {
      {"variance_vs_closed_form",
       std::abs(traj.diagnostic("variance").back() - var_closed)},
      {"mean_vs_closed_form", std::abs(traj.diagnostic("mean").back() - mean_closed)}};
  summary["max_renorm_drift"] = max_drift;

  json report;
  report["config"] = doc;
  report["final_state"] = {{"moments",
                            {{"mean", summary["final_mean"]},
                             {"variance", summary["final_variance"]},
                             {"skewness", summary["final_skewness"]},
                             {"excess_kurtosis", summary["final_excess_kurtosis"]}}}};
  report["summary"] = summary;
  write_report(report, out.report_path);
  return kStatusOk;
}

}  // namespace

int run_experiment_file(const std::string& config_path, const CliOverrides& overrides) {
  json doc;
  {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot read config file '" << config_path << "'\n";
      return kStatusParse;
    }
    try {
      in >> doc;
    } catch (const json::exception& e) {
      std::cerr << "error: config parse failure: " << e.what() << '\n';
      return kStatusParse;
    }
  }

  const auto started = std::chrono::steady_clock::now();
  try {
    const auto kind_it = doc.find("experiment");
    if (kind_it == doc.end() || !kind_it->is_string()) {
      std::cerr << "error: config missing string field 'experiment'\n";
      return kStatusParse;
    }
    const std::string kind = kind_it->get<std::string>();

    int status = kStatusOk;
    OutputSpec out;
    if (kind == "verify") {
      std::string report_path;
      if (auto it = doc.find("output"); it != doc.end())
        if (auto p = it->find("path"); p != it->end()) report_path = p->get<std::string>();
      if (overrides.output_path) report_path = *overrides.output_path;
      status = run_verify_command(report_path);
    } else {
      out = parse_output(doc, overrides);
      if (kind == "simplex-flow")
        status = run_simplex_flow(doc, out);
      else if (kind == "gaussian-flow")
        status = run_gaussian_flow(doc, out, /*sigma_normalized=*/false);
      else if (kind == "sigma-flow")
        status = run_gaussian_flow(doc, out, /*sigma_normalized=*/true);
      else if (kind == "nes-run")
        status = run_nes(doc, out, overrides);
      else if (kind == "grid-oracle")
        status = run_grid_oracle(doc, out);
      else {
        std::cerr << "error: unknown experiment kind '" << kind << "'\n";
        return kStatusParse;
      }
    }
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started;
    // Wall-clock goes to the console, not into the report file, so that
    // identical configs produce byte-identical output files.
    std::cout << kind << " finished in " << elapsed.count() << " s";
    if (!out.path.empty()) std::cout << "; trajectory: " << out.path;
    std::cout << '\n';
    return status;
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kStatusValidation;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kStatusNumerical;
  } catch (const json::exception& e) {
    std::cerr << "error: config parse failure: " << e.what() << '\n';
    return kStatusParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStatusUnexpected;
  }
}

int run_verify_command(const std::string& report_path) {
  const auto checks = run_verification();
  bool all_passed = true;
  json items = json::array();
  for (const auto& check : checks) {
    all_passed = all_passed && check.passed;
    std::cout << (check.passed ? "PASS " : "FAIL ") << check.suite << '/' << check.name;
    if (!check.detail.empty()) std::cout << " (" << check.detail << ')';
    std::cout << '\n';
    items.push_back({{"suite", check.suite},
                     {"name", check.name},
                     {"passed", check.passed},
                     {"detail", check.detail}});
  }
  std::cout << (all_passed ? "VERIFY OK" : "VERIFY FAILED") << " (" << checks.size()
            << " checks)\n";
  if (!report_path.empty()) {
    json report;
    report["checks"] = items;
    report["all_passed"] = all_passed;
    write_report(report, report_path);
  }
  return all_passed ? kStatusOk : kStatusNumerical;
}

}  // namespace evoflow
