#ifndef KBAD_RESOLUTION_HPP
#define KBAD_RESOLUTION_HPP

#include <span>
#include <vector>

#include "kbad/types.hpp"

namespace kbad {

struct ResolutionOptions {
  double bandwidth = 3.0;    // Gaussian kernel SD, ms
  double grid_step = 1.0;    // ms
  double grid_min = 0.0;
  double grid_max = 500.0;
  double prominence = 0.05;  // fraction of the global density maximum
};

struct ResolutionEstimate {
  double quantum = 0.0;        // mean spacing between consecutive modes, ms
  std::vector<double> modes;   // grid positions of the accepted modes
  std::vector<double> grid;
  std::vector<double> density;
};

/// Gaussian KDE of the latencies evaluated on a uniform grid. Modes are
/// strict local maxima (plateaus count once, at their centre) whose
/// topographic prominence reaches the configured fraction of the global
/// maximum. The quantum is the mean spacing between consecutive modes, where
/// a gap close to k times the median spacing counts as k spacings (a missed
/// mode in a sparse tail). Throws Error("resolution indeterminate") with
/// fewer than 2 modes.
ResolutionEstimate estimate_resolution(std::span<const double> latencies, const ResolutionOptions& options = {});

/// Press-press latencies of every sample in the dataset.
std::vector<double> dataset_latencies(const SubjectDataset& dataset);

}  // namespace kbad

#endif  // KBAD_RESOLUTION_HPP
