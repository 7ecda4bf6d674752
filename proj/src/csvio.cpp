#include "ergokit/csvio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ergokit {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const int idx = column(name);
  if (idx < 0) throw SchemaError("missing column: " + name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    if (static_cast<std::size_t>(idx) >= row.size()) throw SchemaError("short row under column " + name);
    out.push_back(std::stod(row[idx]));
  }
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open CSV: " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      table.rows.push_back(std::move(fields));
    }
  }
  return table;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write: " + path.string());
  return out;
}

}  // namespace

void write_csv(const fs::path& path, const CsvTable& table) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    out << (i ? "," : "") << table.header[i];
  }
  out << "\n";
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_trajectory_csv(const fs::path& path, const TrajectoryRecord& rec) {
  auto out = open_out(path);
  out << "seed,step,state,action,reward,return\n";
  for (std::size_t k = 0; k < rec.horizon; ++k) {
    out << rec.seed << ',' << k << ',' << rec.states[k] << ',' << rec.actions[k] << ','
        << format_double(rec.rewards[k]) << ',' << format_double(rec.returns[k]) << "\n";
  }
}

void write_learning_curve_csv(const fs::path& path, const LearningCurve& curve,
                              bool growth_column) {
  auto out = open_out(path);
  out << "iteration,objective,mean_final_return,mean_alpha";
  if (growth_column) out << ",growth_estimate";
  out << "\n";
  for (const auto& pt : curve) {
    out << pt.iteration << ',' << format_double(pt.objective) << ','
        << format_double(pt.mean_final_return) << ',' << format_double(pt.mean_alpha);
    if (growth_column) out << ',' << format_double(pt.growth_estimate);
    out << "\n";
  }
}

void write_gap_ensemble_csv(const fs::path& path, const ErgodicityGapReport& rep) {
  auto out = open_out(path);
  out << "t,ensemble_mean,ci\n";
  for (std::size_t i = 0; i < rep.probe_times.size(); ++i) {
    out << rep.probe_times[i] << ',' << format_double(rep.ensemble_mean_at[i]) << ','
        << format_double(rep.ensemble_ci[i]) << "\n";
  }
}

void write_gap_time_csv(const fs::path& path, const ErgodicityGapReport& rep) {
  auto out = open_out(path);
  out << "trajectory,time_mean\n";
  for (std::size_t i = 0; i < rep.time_mean_per_traj.size(); ++i) {
    out << i << ',' << format_double(rep.time_mean_per_traj[i]) << "\n";
  }
}

void write_transformation_csv(const fs::path& path, const TransformationCurve& curve) {
  auto out = open_out(path);
  out << "R,h\n";
  for (std::size_t i = 0; i < curve.grid().size(); ++i) {
    out << format_double(curve.grid()[i]) << ',' << format_double(curve.h_values()[i]) << "\n";
  }
}

void write_preference_csv(const fs::path& path, const PreferenceCurve& curve) {
  auto out = open_out(path);
  out << "p,safe_preference,ci\n";
  for (std::size_t i = 0; i < curve.p_grid.size(); ++i) {
    out << format_double(curve.p_grid[i]) << ',' << format_double(curve.safe_preference[i]) << ','
        << format_double(curve.ci[i]) << "\n";
  }
}

void write_indifference_csv(const fs::path& path, const std::string& rule, double empirical,
                            double analytic_pe, double analytic_pt) {
  auto out = open_out(path);
  out << "rule,empirical_indifference,analytic_pE,analytic_pT\n";
  out << rule << ',' << format_double(empirical) << ',' << format_double(analytic_pe) << ','
      << format_double(analytic_pt) << "\n";
}

namespace {

json parse_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace

MdpSpec load_mdp_spec(const fs::path& path) {
  const json j = parse_json_file(path);
  MdpSpec mdp;
  try {
    mdp.n_states = j.at("n_states").get<int>();
    mdp.n_actions = j.at("n_actions").get<int>();
    mdp.kernel = j.at("kernel").get<std::vector<double>>();
    mdp.reward = j.at("reward").get<std::vector<double>>();
    mdp.initial_dist = j.at("initial_dist").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  try {
    mdp.validate();
  } catch (const ShapeError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return mdp;
}

void save_mdp_spec(const fs::path& path, const MdpSpec& mdp) {
  json j;
  j["n_states"] = mdp.n_states;
  j["n_actions"] = mdp.n_actions;
  j["kernel"] = mdp.kernel;
  j["reward"] = mdp.reward;
  j["initial_dist"] = mdp.initial_dist;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

PolicySpec load_policy_spec(const fs::path& path) {
  const json j = parse_json_file(path);
  try {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "deterministic") {
      return PolicySpec::deterministic(j.at("table").get<std::vector<int>>(),
                                       j.at("n_actions").get<int>());
    }
    if (kind == "stochastic") {
      auto table = j.at("table").get<std::vector<double>>();
      const int n_actions = j.at("n_actions").get<int>();
      const int n_states = static_cast<int>(table.size()) / n_actions;
      return PolicySpec::stochastic(std::move(table), n_states, n_actions);
    }
    if (kind == "fraction") {
      return PolicySpec::parametric_fraction(j.at("fraction").get<double>());
    }
    throw ConfigError(path.string() + ": unknown policy kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string render_chain_report(const ChainReport& rep) {
  std::ostringstream out;
  out << "classification: " << to_string(rep.classification) << "\n";
  out << "sccs:";
  for (const auto& scc : rep.sccs) {
    out << " {";
    for (std::size_t i = 0; i < scc.size(); ++i) out << (i ? "," : "") << scc[i];
    out << "}";
  }
  out << "\nrecurrent_classes:";
  for (std::size_t i = 0; i < rep.recurrent_sccs.size(); ++i) {
    const auto& scc = rep.sccs[rep.recurrent_sccs[i]];
    out << " {";
    for (std::size_t k = 0; k < scc.size(); ++k) out << (k ? "," : "") << scc[k];
    out << "} period=" << rep.periods[i];
  }
  out << "\ntransient_states:";
  if (rep.transient_states.empty()) out << " none";
  for (int s : rep.transient_states) out << ' ' << s;
  out << "\n";
  if (rep.stationary) {
    out << "stationary:";
    for (double v : *rep.stationary) out << ' ' << format_double(v);
    out << "\n";
  }
  if (rep.rho) out << "rho: " << format_double(*rep.rho) << "\n";
  return out.str();
}

std::string chain_report_dot(const TransitionMatrix& P, const ChainReport& rep) {
  // Condensation: one node per SCC, edge when any cross-component mass exists.
  std::vector<int> comp_of(P.n, -1);
  for (std::size_t i = 0; i < rep.sccs.size(); ++i) {
    for (int s : rep.sccs[i]) comp_of[s] = static_cast<int>(i);
  }
  std::ostringstream out;
  out << "digraph condensation {\n";
  for (std::size_t i = 0; i < rep.sccs.size(); ++i) {
    const bool recurrent =
        std::find(rep.recurrent_sccs.begin(), rep.recurrent_sccs.end(), i) != rep.recurrent_sccs.end();
    out << "  c" << i << " [label=\"{";
    for (std::size_t k = 0; k < rep.sccs[i].size(); ++k) out << (k ? "," : "") << rep.sccs[i][k];
    out << "}\"" << (recurrent ? ", shape=doublecircle" : ", shape=circle") << "];\n";
  }
  std::vector<std::vector<bool>> seen(rep.sccs.size(), std::vector<bool>(rep.sccs.size(), false));
  for (int s = 0; s < P.n; ++s) {
    for (int s2 = 0; s2 < P.n; ++s2) {
      if (P.p(s, s2) > 0.0 && comp_of[s] != comp_of[s2] && !seen[comp_of[s]][comp_of[s2]]) {
        seen[comp_of[s]][comp_of[s2]] = true;
        out << "  c" << comp_of[s] << " -> c" << comp_of[s2] << ";\n";
      }
    }
  }
  out << "}\n";
  return out.str();
}

}  // namespace ergokit
