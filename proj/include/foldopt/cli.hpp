#pragma once

#include "foldopt/io.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace foldopt::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitInput = 2,
  kExitRegistration = 3,
  kExitOptimization = 4,
};

/// Entry point of the `foldopt` tool. argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct RunLogRow {
  int step = 0;
  int evaluation = 0;
  double cost = 0.0;
  double squared_cost = 0.0;
  double length = 0.0;
  double dissimilarity = 0.0;
  bool diverged = false;
};
std::vector<RunLogRow> runlog_from_jsonl(const std::string& text);

/// Squared costs of the accepted records in trace order.
std::vector<double> accepted_costs(const std::vector<TraceRow>& rows);

constexpr int kPlotSamples = 64;

/// Top (x-y) and side (x-z) orthographic views; one polyline per arm and
/// view sampled at `samples` curve parameters.
std::string trajectory_svg(const std::vector<TrajectorySet>& steps, int samples = kPlotSamples);
/// Accepted squared cost against LM iteration, rejected trials as markers.
std::string trace_svg(const std::vector<TraceRow>& rows);
/// Cost of every evaluation in a run log, one series per step.
std::string runlog_svg(const std::vector<RunLogRow>& rows);

std::string trajectory_csv(const std::vector<TrajectorySet>& steps, int samples = kPlotSamples);
std::string trace_plot_csv(const std::vector<TraceRow>& rows);
std::string runlog_csv(const std::vector<RunLogRow>& rows);

}  // namespace foldopt::cli
