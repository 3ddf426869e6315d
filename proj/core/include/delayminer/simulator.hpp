#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "delayminer/bps_model.hpp"
#include "delayminer/log_io.hpp"

namespace delayminer {

/// Monday 2024-01-01T00:00:00Z.
inline constexpr Timestamp kDefaultSimulationStart = 1704067200;

struct SimulationConfig {
  std::size_t num_traces = 1000;
  std::uint64_t seed = 0;
  Timestamp start_instant = kDefaultSimulationStart;
  /// Upper bound on processed events; 0 picks 10000 per trace plus 10^6.
  std::size_t max_events = 0;

  void validate() const;
};

/// Simulated log plus, for each instance (same index), the wall-clock timer
/// delay the case spent since its previous task completed.
struct TracedLog {
  ActivityInstanceLog log;
  std::vector<Seconds> timer_delays;
};

/// Runs the model as a discrete-event simulation. Cases arrive from
/// `start_instant`; tasks wait for an idle, on-duty resource of their pool
/// (FIFO by enablement, then case, then label; longest-idle resource first,
/// ties by label) and their processing time only elapses on-calendar. Timers
/// hold the token for a wall-clock duration. All event times are whole
/// seconds. Trace ids are "0" .. "N-1"; instances are ordered by start.
/// Throws SimulationError when a case cannot complete and ResourceLimitError
/// when the event budget is exhausted.
ActivityInstanceLog simulate(const BpsModel& model, const SimulationConfig& cfg);
TracedLog simulate_traced(const BpsModel& model, const SimulationConfig& cfg);

/// `runs` independent simulations with seeds seed, seed+1, ...; may run in
/// parallel. Result k always corresponds to seed+k.
std::vector<ActivityInstanceLog> simulate_many(const BpsModel& model, const SimulationConfig& cfg, std::size_t runs);

}  // namespace delayminer
