#include <doctest.h>

#include <sstream>

#include "stsync/cloud.hpp"
#include "stsync/errors.hpp"
#include "stsync/graph.hpp"

using namespace stsync;
using namespace stsync::cloud;

namespace {

CloudRecord make_record(int agent, double t, double next, long count) {
  CloudRecord r;
  r.agent_id = agent;
  r.last_access_time = t;
  r.last_state = Eigen::VectorXd::Constant(2, static_cast<double>(agent));
  r.held_input = Eigen::VectorXd::Zero(2);
  r.next_access_time = next;
  r.access_count = count;
  return r;
}

}  // namespace

TEST_SUITE_BEGIN("cloud");

TEST_CASE("post stores the record and appends to the log") {
  const auto g = graph::build_graph(2, {{1, 2}});
  Repository repo(g);
  repo.post(make_record(1, 0.0, 0.4, 1), 0.0);
  CHECK(repo.access_log().size() == 1);
  const auto rec = repo.fetch(1, 1);
  CHECK(rec.last_access_time == 0.0);
  CHECK(rec.access_count == 1);
  CHECK(rec.next_access_time == 0.4);

  repo.post(make_record(1, 0.4, 0.9, 2), 0.4);
  CHECK(repo.access_log().size() == 2);
  CHECK(repo.fetch(1, 1).access_count == 2);
}

TEST_CASE("post rejects malformed records") {
  const auto g = graph::build_graph(2, {{1, 2}});
  Repository repo(g);
  repo.post(make_record(1, 0.0, 0.4, 1), 0.0);
  // next access must be strictly later
  CHECK_THROWS_AS(repo.post(make_record(1, 0.4, 0.4, 2), 0.4), MonitorViolation);
  // early access (before the previous planned next) is allowed
  CHECK_NOTHROW(repo.post(make_record(1, 0.2, 0.5, 2), 0.2));
  // posting before the previous access is not
  CHECK_THROWS_AS(repo.post(make_record(1, 0.1, 0.5, 3), 0.1), MonitorViolation);
  // count skips are detected
  CHECK_THROWS_AS(repo.post(make_record(1, 0.3, 0.6, 4), 0.3), MonitorViolation);
  // the record must be stamped with the access instant
  CHECK_THROWS_AS(repo.post(make_record(1, 0.25, 0.6, 3), 0.3), MonitorViolation);
}

TEST_CASE("fetch respects the accessibility graph") {
  const auto g = graph::build_graph(3, {{1, 2}});
  Repository repo(g);
  repo.post(make_record(1, 0.0, 1.0, 1), 0.0);
  repo.post(make_record(3, 0.0, 1.0, 1), 0.0);
  // (1, 2) is an edge: agent 2 reads agent 1
  CHECK(repo.fetch(2, 1).agent_id == 1);
  // agent 1 may not read agent 3
  CHECK_THROWS_AS(repo.fetch(1, 3), MonitorViolation);
  // own record is always readable
  CHECK(repo.fetch(3, 3).agent_id == 3);
}

TEST_CASE("fetch never mutates") {
  const auto g = graph::build_graph(2, {{1, 2}});
  Repository repo(g);
  repo.post(make_record(1, 0.0, 0.7, 1), 0.0);
  const auto a = repo.fetch(2, 1);
  const auto b = repo.fetch(2, 1);
  CHECK(a.last_access_time == b.last_access_time);
  CHECK(a.access_count == b.access_count);
  CHECK((a.last_state - b.last_state).norm() == 0.0);
  CHECK(repo.access_log().size() == 1);
}

TEST_CASE("snapshot returns one record per agent") {
  const auto g = graph::build_graph(3, {{1, 2}, {2, 3}});
  Repository repo(g);
  auto records = repo.snapshot();
  CHECK(records.size() == 3);  // unset records before any post
  for (const auto& r : records) {
    CHECK(r.access_count == 0);
  }
  repo.post(make_record(2, 0.0, 0.5, 1), 0.0);
  records = repo.snapshot();
  CHECK(records[1].access_count == 1);
}

TEST_CASE("per-agent log is strictly increasing and contiguous in count") {
  const auto g = graph::build_graph(2, {{1, 2}});
  Repository repo(g);
  double t = 0.0;
  for (long k = 1; k <= 5; ++k) {
    repo.post(make_record(2, t, t + 0.3, k), t);
    t += 0.3;
  }
  double prev_t = -1.0;
  long prev_count = 0;
  for (const auto& e : repo.access_log()) {
    CHECK(e.time > prev_t);
    CHECK(e.record.access_count == prev_count + 1);
    prev_t = e.time;
    prev_count = e.record.access_count;
  }
}

TEST_CASE("time consistency margin tracks the repository invariant") {
  const auto g = graph::build_graph(2, {{1, 2}});
  Repository repo(g);
  repo.post(make_record(1, 0.0, 0.5, 1), 0.0);
  repo.post(make_record(2, 0.0, 0.8, 1), 0.0);
  CHECK(repo.time_consistency_margin(0.3) <= 0.0);
  CHECK(repo.time_consistency_margin(0.5) <= 0.0);
  // past the earliest planned next access the invariant is violated
  CHECK(repo.time_consistency_margin(0.6) > 0.0);
}

TEST_CASE("events CSV carries the log") {
  const auto g = graph::build_graph(2, {{1, 2}});
  Repository repo(g);
  repo.post(make_record(1, 0.0, 0.5, 1), 0.0);
  std::ostringstream os;
  repo.write_events_csv(os);
  CHECK(os.str().rfind("time_s,agent,access_count,next_access_time_s\n0,1,1,", 0) ==
        0);
}

TEST_SUITE_END();
