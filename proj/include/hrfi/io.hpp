#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "hrfi/dynamics.hpp"
#include "hrfi/fitting.hpp"

namespace hrfi::io {

inline constexpr std::string_view kTrialHeader = "trial,stimulus_n,response_n";
inline constexpr std::string_view kTraceHeader = "run,k,phase,force_n";

// Shortest form is not required; 17 significant digits always round-trips.
std::string format_double(double x);

void write_trials(std::ostream& out,
                  const std::vector<ReproductionTrial>& trials);
// Throws SchemaError on a missing or wrong header, a malformed row or a
// non-positive force.
std::vector<ReproductionTrial> read_trials(std::istream& in);

enum class Phase { kRobot, kHuman };

// One row of the trace schema. Rows carry any finite force so servo time
// series (where transients may dip below zero) fit the same schema.
struct TraceRow {
  std::size_t run = 0;
  std::size_t k = 0;
  Phase phase = Phase::kRobot;
  double force = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

void write_trace_rows(std::ostream& out, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace_rows(std::istream& in);

// Pair k of run j becomes the rows (j, k, robot, r_k) and
// (j, k + 1, human, h_{k+1}).
std::vector<TraceRow> to_rows(const std::vector<InteractionTrace>& traces);
// Rebuilds traces; every run needs contiguous robot rows 0..n-1 and human
// rows 1..n with positive forces.
std::vector<InteractionTrace> from_rows(const std::vector<TraceRow>& rows);

void write_traces(std::ostream& out,
                  const std::vector<InteractionTrace>& traces);
std::vector<InteractionTrace> read_traces(std::istream& in);

std::vector<ReproductionTrial> read_trials_file(const std::string& path);
std::vector<InteractionTrace> read_traces_file(const std::string& path);

// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string git_blob_hash(std::string_view content);

}  // namespace hrfi::io
