#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcrdt/replica.hpp"
#include "jcrdt/rng.hpp"

namespace jcrdt {

/// Knobs of the simulated network. reorder is the probability that a step
/// abandons the orderly round-robin schedule and performs a uniformly
/// random action instead; duplication is how many times each transfer
/// delivers the sender's buffer; the weights bias random action selection.
struct DeliveryPolicy {
  double reorder = 0.5;
  int duplication = 1;
  double weight_send = 1.0;
  double weight_transfer = 2.0;
  double weight_apply = 2.0;
  double weight_noop = 0.5;
};

enum class YieldKind { SendFrom, Transfer, ApplyAt, NoOp };

/// One nondeterministic resolution of a yield: move a queue into the send
/// buffer, deliver one send buffer to one receiver, or apply buffered
/// operations whose dependencies are met.
struct YieldAction {
  YieldKind kind = YieldKind::NoOp;
  ReplicaId from;
  ReplicaId to;

  static YieldAction send_from(ReplicaId p) { return {YieldKind::SendFrom, std::move(p), {}}; }
  static YieldAction transfer(ReplicaId from, ReplicaId to) {
    return {YieldKind::Transfer, std::move(from), std::move(to)};
  }
  static YieldAction apply_at(ReplicaId p) { return {YieldKind::ApplyAt, std::move(p), {}}; }
  static YieldAction noop() { return {}; }

  std::string to_string() const;
};

/// Deterministic simulated network over a set of replicas. Given the same
/// seed, policy, and driving script, every trace and every final state is
/// reproducible bit for bit.
class Simulation {
 public:
  Simulation(std::uint64_t seed, DeliveryPolicy policy = {});

  ReplicaState& add_replica(const ReplicaId& id);
  ReplicaState& replica(const ReplicaId& id);
  const ReplicaState& replica(const ReplicaId& id) const;
  bool has_replica(const ReplicaId& id) const;
  const std::map<ReplicaId, ReplicaState>& replicas() const { return replicas_; }

  /// Performs one action, appending a trace line
  /// `STEP <n> <action> | <applied ops...>`.
  void step(const YieldAction& action);

  /// Draws and performs n policy-driven actions.
  void run_random(std::size_t n_steps);

  /// Exchanges and applies over all ordered replica pairs until no applied
  /// set changes. Throws SyncDiverged if the fixpoint is not reached within
  /// the op-count bound (which would indicate a rule bug).
  void sync_all();

  const std::vector<std::string>& trace() const { return trace_; }
  std::string trace_text() const;

 private:
  YieldAction next_action();

  std::map<ReplicaId, ReplicaState> replicas_;
  Rng rng_;
  DeliveryPolicy policy_;
  std::vector<std::string> trace_;
  std::uint64_t step_count_ = 0;
  std::size_t rotation_ = 0;
};

}  // namespace jcrdt
