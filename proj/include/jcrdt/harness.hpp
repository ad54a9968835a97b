#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "jcrdt/core.hpp"
#include "jcrdt/netsim.hpp"
#include "jcrdt/replica.hpp"
#include "jcrdt/rng.hpp"
#include "jcrdt/state.hpp"

namespace jcrdt {

/// A valid execution recorded for offline verification: the operations in a
/// causally consistent generation order, which replica generated what, and
/// (for inserts) the neighbours observed at the source when the element was
/// spliced in.
struct ExecutionTrace {
  std::vector<Operation> ops;
  std::map<ReplicaId, std::vector<LamportTimestamp>> per_replica;
  std::map<LamportTimestamp, std::pair<Key, Key>> insert_intervals;
};

struct GenParams {
  std::size_t replicas = 3;
  std::size_t ops = 8;
  double sync_probability = 0.3;
  double insert_bias = 0.0;  // skews generation towards lists and inserts
};

/// Deterministically generates a random valid execution: commands are drawn
/// against the generating replica's live state (indices within live bounds,
/// variables from the bound set), so replaying the trace never gets stuck.
ExecutionTrace gen_execution(std::uint64_t seed, const GenParams& params = {});

/// Draws one command that cannot get stuck on this replica. Exposed for the
/// adversarial-delivery driver. insert_bias as in GenParams.
Command random_command(Rng& rng, const ReplicaState& replica, double insert_bias = 0.0);

/// Number of total orders of trace.ops extending the causal order.
std::uint64_t count_linear_extensions(const ExecutionTrace& trace);

/// All linear extensions, materialized. Throws TooManyExtensions when the
/// count exceeds the bound.
std::vector<std::vector<Operation>> linear_extensions(const ExecutionTrace& trace,
                                                      std::uint64_t bound = 50000);

struct Verdict {
  bool pass = true;
  std::string message;
  std::vector<Operation> history_a;  // on failure: two diverging histories
  std::vector<Operation> history_b;
  std::string diff;
  std::uint64_t checked = 0;  // extensions or prefixes examined
  bool exhaustive = true;
};

struct ConvergenceOptions {
  std::uint64_t max_full_extensions = 45000;  // covers 8 concurrent ops (8!)
  std::uint64_t samples = 200;
  std::uint64_t sample_seed = 1;
  bool check_invariants = true;  // chain integrity, order persistence,
                                 // source-observed insertion intervals
  bool shrink = true;
};

/// Brute-force convergence oracle: replays every (or a sampled set of)
/// causally valid history and verifies all resulting documents are
/// state-equal. On failure the verdict carries a minimal diverging pair.
Verdict check_convergence(const ExecutionTrace& trace, const ConvergenceOptions& opts = {});

struct PairwiseOptions {
  std::uint64_t max_prefixes_per_pair = 32;
  std::uint64_t sample_seed = 1;
};

struct PairwiseReport {
  Verdict verdict;
  std::uint64_t pairs_tested = 0;
  std::uint64_t insert_insert_same_list = 0;
  std::uint64_t delete_any = 0;
  std::uint64_t assign_any = 0;
};

/// Order-swap oracle: for every concurrent pair and a set of causally valid
/// prefixes, applying the pair in both orders must yield state-equal
/// results. Causally ordered pairs are skipped.
PairwiseReport check_pairwise_commutativity(const ExecutionTrace& trace,
                                            const PairwiseOptions& opts = {});

/// Replays a history onto a fresh document root, enforcing the list
/// invariants after every operation when intervals are supplied. Throws
/// Error(SyncDiverged) on an invariant violation.
Node replay_history(const std::vector<Operation>& history,
                    const std::map<LamportTimestamp, std::pair<Key, Key>>* intervals = nullptr);

struct AdversarialParams {
  std::size_t replicas = 3;
  std::size_t commands = 10;
  std::size_t yield_steps = 30;
};

/// Runs random commands interleaved with policy-driven delivery, then
/// sync_all. Returns the simulation for inspection; all replicas must be
/// pairwise state-equal afterwards (the caller asserts it).
Simulation run_adversarial(std::uint64_t seed, const DeliveryPolicy& policy,
                           const AdversarialParams& params = {});

}  // namespace jcrdt
