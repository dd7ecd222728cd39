#include "stsync/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "stsync/errors.hpp"

namespace stsync::cloud {

Repository::Repository(const graph::AccessibilityGraph& g) : graph_(&g) {
  records_.resize(static_cast<size_t>(g.n_agents));
  for (int i = 1; i <= g.n_agents; ++i) {
    records_[static_cast<size_t>(i - 1)].agent_id = i;
  }
}

void Repository::seed(const CloudRecord& record) {
  if (record.agent_id < 1 || record.agent_id > graph_->n_agents) {
    throw MonitorViolation("cloud: seed for unknown agent " +
                           std::to_string(record.agent_id));
  }
  records_[static_cast<size_t>(record.agent_id - 1)] = record;
}

void Repository::post(const CloudRecord& record, double now) {
  if (record.agent_id < 1 || record.agent_id > graph_->n_agents) {
    throw MonitorViolation("cloud: post for unknown agent " +
                           std::to_string(record.agent_id));
  }
  const CloudRecord& prev = records_[static_cast<size_t>(record.agent_id - 1)];
  if (record.last_access_time != now) {
    throw MonitorViolation("cloud: post stamped " +
                           std::to_string(record.last_access_time) +
                           " but the access happens at " + std::to_string(now));
  }
  if (now < prev.last_access_time) {
    throw MonitorViolation("cloud: stale post for agent " +
                           std::to_string(record.agent_id));
  }
  if (record.access_count != prev.access_count + 1) {
    throw MonitorViolation("cloud: access count skip for agent " +
                           std::to_string(record.agent_id) + " (" +
                           std::to_string(prev.access_count) + " -> " +
                           std::to_string(record.access_count) + ")");
  }
  if (!(record.next_access_time > record.last_access_time)) {
    throw MonitorViolation("cloud: next access time must be strictly after the "
                           "access for agent " + std::to_string(record.agent_id));
  }
  records_[static_cast<size_t>(record.agent_id - 1)] = record;
  log_.push_back({now, record.agent_id, record});
}

CloudRecord Repository::fetch(int reader, int target) const {
  if (reader < 1 || reader > graph_->n_agents || target < 1 ||
      target > graph_->n_agents) {
    throw MonitorViolation("cloud: fetch with invalid agent id");
  }
  if (target != reader) {
    const auto& ns = graph_->neighbors(reader);
    if (!std::binary_search(ns.begin(), ns.end(), target)) {
      throw MonitorViolation("cloud: privacy violation, agent " +
                             std::to_string(reader) + " may not read agent " +
                             std::to_string(target));
    }
  }
  return records_[static_cast<size_t>(target - 1)];
}

std::vector<CloudRecord> Repository::snapshot() const { return records_; }

double Repository::time_consistency_margin(double now) const {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : records_) {
    worst = std::max(worst, r.last_access_time - now);
    if (std::isfinite(r.next_access_time)) {
      worst = std::max(worst, now - r.next_access_time);
    }
  }
  return worst;
}

void Repository::write_events_csv(std::ostream& os) const {
  os << "time_s,agent,access_count,next_access_time_s\n";
  char buf[128];
  for (const auto& e : log_) {
    std::snprintf(buf, sizeof(buf), "%.17g,%d,%ld,%.17g\n", e.time, e.agent_id,
                  e.record.access_count, e.record.next_access_time);
    os << buf;
  }
}

}  // namespace stsync::cloud
