#pragma once

#include <Eigen/Dense>
#include <ostream>
#include <vector>

#include "stsync/graph.hpp"

namespace stsync::cloud {

/// One agent's row of the repository: last access time, the state and the
/// held input at that time, and the planned next access time (+inf marker
/// means the agent will not access again).
struct CloudRecord {
  int agent_id = 0;
  double last_access_time = 0.0;
  Eigen::VectorXd last_state;
  Eigen::VectorXd held_input;
  double next_access_time = 0.0;
  long access_count = 0;
};

struct LogEntry {
  double time = 0.0;
  int agent_id = 0;
  CloudRecord record;
};

/// Shared repository with instantaneous atomic access. Reads are restricted
/// to the accessibility graph; writes replace the agent's record and append
/// to the access log.
class Repository {
 public:
  explicit Repository(const graph::AccessibilityGraph& g);

  /// Install a bootstrap record without counting it as an access (count 0).
  void seed(const CloudRecord& record);

  /// Atomically replace the agent's record at time `now` and log the access.
  void post(const CloudRecord& record, double now);

  /// Copy of the target's record; the target must be the reader itself or one
  /// of its preassigned neighbors.
  CloudRecord fetch(int reader, int target) const;

  /// Diagnostic-only full copy; bypasses the privacy restriction and is never
  /// available to controllers.
  std::vector<CloudRecord> snapshot() const;

  const std::vector<LogEntry>& access_log() const { return log_; }

  /// Worst violation of last_access_time <= now <= next_access_time over all
  /// records (<= 0 when the invariant holds).
  double time_consistency_margin(double now) const;

  /// CSV columns: time_s, agent, access_count, next_access_time_s.
  void write_events_csv(std::ostream& os) const;

 private:
  const graph::AccessibilityGraph* graph_;
  std::vector<CloudRecord> records_;
  std::vector<LogEntry> log_;
};

}  // namespace stsync::cloud
