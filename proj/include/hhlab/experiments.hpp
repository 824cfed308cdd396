#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hhlab/dynamics.hpp"
#include "hhlab/params.hpp"
#include "hhlab/table.hpp"

namespace hhlab {

enum class ExperimentKind { Atlas, Classification, EnergyAudit, GreenStudy };

/// How initial data are drawn.
///   Box:       center + U(-radius, radius)^4, integrated from t_start to t_end.
///   Singular:  w* plus the fastest real decaying-backward mode, launched at
///              depth and integrated forward to t = 0.
///   Removable: A e^{Bt}(1, B, B², B³) + C e^{(B+2)t}(...), from 0 at depth
///              forward to t = 0.
///   Mixed:     Singular on even rows, Removable on odd rows.
enum class Sampling { Box, Singular, Removable, Mixed };
enum class Center { FixedPoint, Zero };

std::string_view to_string(ExperimentKind kind);
std::string_view to_string(Sampling sampling);
std::string_view to_string(Center center);
Sampling parse_sampling(std::string_view text);
Center parse_center(std::string_view text);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Atlas;
  std::vector<ProblemParams> param_grid;

  double tol = 1e-10;
  std::size_t samples = 64;
  std::uint64_t seed = 0;

  Sampling sampling = Sampling::Box;
  Center center = Center::FixedPoint;
  double radius = 1e-3;     // Box half-width
  double amplitude = 0.05;  // Singular: size of the mode coefficient at t = 0
  double depth = -16.0;     // Singular/Removable launch time
  double t_start = 0.0;     // Box start
  double t_end = -60.0;     // Box horizon

  double margin = 1e-3;
  double window = 5.0;
  double sample_spacing = 1e-2;  // classification runs; audits use 1e-3

  std::size_t grid_nodes = 2048;  // green study: grid_nodes, 2x, 4x

  /// Worker threads; the table does not depend on it.
  unsigned jobs = 1;

  /// Canonical key=value text of every field that affects results.
  std::string canonical_text() const;
  std::uint64_t hash() const { return fnv1a(canonical_text()); }
};

/// Uniform [0, 1) draw keyed by (seed, row, index): independent of the order
/// in which rows are computed.
double counter_uniform(std::uint64_t seed, std::uint64_t row, std::uint64_t index);

/// The initial-data scheme of the config applied to one row.
Trajectory generate_trajectory(const ExperimentConfig& config, const ProblemParams& params, std::size_t row,
                               double tol, double sample_spacing);

ResultTable run_atlas(const ExperimentConfig& config);
ResultTable run_classification_sweep(const ExperimentConfig& config);
ResultTable run_energy_audit(const ExperimentConfig& config);
ResultTable run_green_study(const ExperimentConfig& config);
ResultTable run_experiment(const ExperimentConfig& config);

}  // namespace hhlab
