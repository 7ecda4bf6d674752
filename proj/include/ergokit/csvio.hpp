#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ergokit/chain.hpp"
#include "ergokit/diagnostics.hpp"
#include "ergokit/optimizers.hpp"
#include "ergokit/temporal.hpp"
#include "ergokit/transform.hpp"
#include "ergokit/types.hpp"

namespace ergokit {

/// Shortest round-trip decimal rendering of a double.
std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> numeric_column(const std::string& name) const;  // SchemaError when absent
};

CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// Writers for the documented schemas. Every writer creates parent directories.
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& rec);
void write_learning_curve_csv(const std::filesystem::path& path, const LearningCurve& curve,
                              bool growth_column);
void write_gap_ensemble_csv(const std::filesystem::path& path, const ErgodicityGapReport& rep);
void write_gap_time_csv(const std::filesystem::path& path, const ErgodicityGapReport& rep);
void write_transformation_csv(const std::filesystem::path& path, const TransformationCurve& curve);
void write_preference_csv(const std::filesystem::path& path, const PreferenceCurve& curve);
void write_indifference_csv(const std::filesystem::path& path, const std::string& rule,
                            double empirical, double analytic_pe, double analytic_pt);

// MDP spec and policy files (JSON). Parse failures surface as ConfigError with
// the parser's line diagnostic.
MdpSpec load_mdp_spec(const std::filesystem::path& path);
void save_mdp_spec(const std::filesystem::path& path, const MdpSpec& mdp);
PolicySpec load_policy_spec(const std::filesystem::path& path);

/// Human-readable chain report plus optional DOT condensation graph.
std::string render_chain_report(const ChainReport& rep);
std::string chain_report_dot(const TransitionMatrix& P, const ChainReport& rep);

}  // namespace ergokit
