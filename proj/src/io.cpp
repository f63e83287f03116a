#include "evoflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <json.hpp>

namespace evoflow {
namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> state_columns(const Trajectory<Eigen::VectorXd>& traj) {
  std::vector<std::string> cols;
  for (Eigen::Index i = 0; i < traj.states.front().size(); ++i)
    cols.push_back("p_" + std::to_string(i + 1));
  return cols;
}

std::vector<std::string> state_columns(const Trajectory<GaussianParams>& traj) {
  const Eigen::Index n = traj.states.front().dim();
  std::vector<std::string> cols;
  for (Eigen::Index i = 0; i < n; ++i) cols.push_back("a_" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      cols.push_back("C_" + std::to_string(i + 1) + std::to_string(j + 1));
  return cols;
}

std::vector<std::string> state_columns(const Trajectory<GridDensity>& traj) {
  std::vector<std::string> cols;
  for (Eigen::Index k = 0; k < traj.states.front().size(); ++k)
    cols.push_back("w_" + std::to_string(k + 1));
  return cols;
}

std::vector<double> flatten(const Eigen::VectorXd& p) {
  return {p.data(), p.data() + p.size()};
}

std::vector<double> flatten(const GaussianParams& g) {
  std::vector<double> flat(g.a().data(), g.a().data() + g.dim());
  for (Eigen::Index i = 0; i < g.dim(); ++i)    // row-major C
    for (Eigen::Index j = 0; j < g.dim(); ++j) flat.push_back(g.C()(i, j));
  return flat;
}

std::vector<double> flatten(const GridDensity& d) {
  return {d.weights().data(), d.weights().data() + d.size()};
}

template <class State>
void check_emittable(const Trajectory<State>& traj) {
  if (traj.times.empty()) throw validation_error("emit_trajectory: empty trajectory");
  if (traj.times.size() != traj.states.size())
    throw validation_error("emit_trajectory: times/states length mismatch");
  for (const auto& d : traj.diagnostics)
    if (d.size() != traj.times.size())
      throw validation_error("emit_trajectory: diagnostic length mismatch");
  for (std::size_t i = 1; i < traj.times.size(); ++i)
    if (!(traj.times[i] > traj.times[i - 1]))
      throw validation_error("emit_trajectory: times not strictly increasing");
}

template <class State>
void write_csv(const Trajectory<State>& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw validation_error("emit_trajectory: cannot open '" + path + "'");
  out << "t";
  for (const std::string& c : state_columns(traj)) out << ',' << c;
  for (const std::string& d : traj.diagnostic_names) out << ',' << d;
  out << '\n';
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << fmt17(traj.times[i]);
    for (double v : flatten(traj.states[i])) out << ',' << fmt17(v);
    for (const auto& d : traj.diagnostics) out << ',' << fmt17(d[i]);
    out << '\n';
  }
  if (!out) throw validation_error("emit_trajectory: write failed for '" + path + "'");
}

template <class State>
void write_json(const Trajectory<State>& traj, const std::string& path) {
  nlohmann::json doc;
  doc["times"] = traj.times;
  nlohmann::json states = nlohmann::json::array();
  for (const State& s : traj.states) states.push_back(flatten(s));
  doc["states"] = std::move(states);
  nlohmann::json diags = nlohmann::json::object();
  for (std::size_t d = 0; d < traj.diagnostic_names.size(); ++d)
    diags[traj.diagnostic_names[d]] = traj.diagnostics[d];
  doc["diagnostics"] = std::move(diags);

  std::ofstream out(path);
  if (!out) throw validation_error("emit_trajectory: cannot open '" + path + "'");
  out << doc.dump(2) << '\n';
  if (!out) throw validation_error("emit_trajectory: write failed for '" + path + "'");
}

template <class State>
void emit(const Trajectory<State>& traj, TrajectoryFormat format, const std::string& path) {
  check_emittable(traj);
  if (format == TrajectoryFormat::Csv)
    write_csv(traj, path);
  else
    write_json(traj, path);
}

}  // namespace

TrajectoryFormat parse_format(const std::string& name) {
  if (name == "csv") return TrajectoryFormat::Csv;
  if (name == "json") return TrajectoryFormat::Json;
  throw validation_error("unknown trajectory format '" + name + "' (want csv|json)");
}

void emit_trajectory(const Trajectory<Eigen::VectorXd>& traj, TrajectoryFormat format,
                     const std::string& path) {
  emit(traj, format, path);
}
void emit_trajectory(const Trajectory<GaussianParams>& traj, TrajectoryFormat format,
                     const std::string& path) {
  emit(traj, format, path);
}
void emit_trajectory(const Trajectory<GridDensity>& traj, TrajectoryFormat format,
                     const std::string& path) {
  emit(traj, format, path);
}

FlatTrajectory load_trajectory_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("load_trajectory_json: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw validation_error(std::string("load_trajectory_json: parse error: ") + e.what());
  }
  FlatTrajectory flat;
  flat.times = doc.at("times").get<std::vector<double>>();
  flat.states = doc.at("states").get<std::vector<std::vector<double>>>();
  for (const auto& [name, values] : doc.at("diagnostics").items())
    flat.diagnostics.emplace_back(name, values.get<std::vector<double>>());
  return flat;
}

}  // namespace evoflow
