#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "jcrdt/core.hpp"
#include "jcrdt/harness.hpp"
#include "jcrdt/interp.hpp"
#include "jcrdt/replica.hpp"

namespace jcrdt::test {

inline LamportTimestamp ts(std::uint64_t c, const std::string& r) {
  return LamportTimestamp{c, ReplicaId(r)};
}

/// One-way exchange: everything a knows reaches b and is applied.
inline void transfer(ReplicaState& a, ReplicaState& b) {
  a.yield_send();
  b.yield_recv(a.send_buffer());
  b.apply_remote_ready();
}

/// Two-way exchange.
inline void sync_pair(ReplicaState& a, ReplicaState& b) {
  transfer(a, b);
  transfer(b, a);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream out;
  out << in.rdbuf();
  return out.str();
}

inline std::string scenario_path(const std::string& name) {
  return std::string(JCRDT_SCENARIO_DIR) + "/" + name;
}

/// Collects every operation the replicas generated into a trace, stored in
/// a causally valid order.
inline ExecutionTrace trace_of(const std::vector<const ReplicaState*>& replicas) {
  std::vector<Operation> pool;
  IdSet seen;
  for (const ReplicaState* r : replicas) {
    for (const Operation& op : r->queue()) {
      if (seen.insert(op.id).second) pool.push_back(op);
    }
  }
  ExecutionTrace trace;
  IdSet placed;
  while (trace.ops.size() < pool.size()) {
    for (const Operation& op : pool) {
      if (placed.count(op.id)) continue;
      bool ready = true;
      for (const auto& d : op.deps) {
        if (seen.count(d) && !placed.count(d)) {
          ready = false;
          break;
        }
      }
      if (ready) {
        placed.insert(op.id);
        trace.ops.push_back(op);
        trace.per_replica[op.id.replica].push_back(op.id);
      }
    }
  }
  return trace;
}

}  // namespace jcrdt::test
