#include "jcrdt/netsim.hpp"

#include <algorithm>

#include "jcrdt/error.hpp"

namespace jcrdt {

std::string YieldAction::to_string() const {
  switch (kind) {
    case YieldKind::SendFrom:
      return "SendFrom(" + from.text() + ")";
    case YieldKind::Transfer:
      return "Transfer(" + from.text() + "," + to.text() + ")";
    case YieldKind::ApplyAt:
      return "ApplyAt(" + from.text() + ")";
    case YieldKind::NoOp:
      return "NoOp";
  }
  return "?";
}

Simulation::Simulation(std::uint64_t seed, DeliveryPolicy policy)
    : rng_(seed), policy_(policy) {}

ReplicaState& Simulation::add_replica(const ReplicaId& id) {
  auto it = replicas_.find(id);
  if (it == replicas_.end()) it = replicas_.emplace(id, ReplicaState(id)).first;
  return it->second;
}

ReplicaState& Simulation::replica(const ReplicaId& id) {
  auto it = replicas_.find(id);
  if (it == replicas_.end())
    throw Error(Errc::UnknownReplica, "no replica named '" + id.text() + "'");
  return it->second;
}

const ReplicaState& Simulation::replica(const ReplicaId& id) const {
  return const_cast<Simulation*>(this)->replica(id);
}

bool Simulation::has_replica(const ReplicaId& id) const { return replicas_.count(id) != 0; }

void Simulation::step(const YieldAction& action) {
  std::string line = "STEP " + std::to_string(step_count_++) + " " + action.to_string();
  switch (action.kind) {
    case YieldKind::SendFrom:
      replica(action.from).yield_send();
      break;
    case YieldKind::Transfer: {
      ReplicaState& from = replica(action.from);
      ReplicaState& to = replica(action.to);
      int times = std::max(1, policy_.duplication);
      for (int i = 0; i < times; ++i) to.yield_recv(from.send_buffer());
      break;
    }
    case YieldKind::ApplyAt: {
      std::vector<Operation> applied = replica(action.from).apply_remote_ready();
      if (!applied.empty()) {
        line += " |";
        for (const auto& op : applied) line += " " + encode_operation(op);
      }
      break;
    }
    case YieldKind::NoOp:
      break;
  }
  trace_.push_back(std::move(line));
}

YieldAction Simulation::next_action() {
  std::vector<ReplicaId> ids;
  ids.reserve(replicas_.size());
  for (const auto& [id, unused] : replicas_) ids.push_back(id);
  if (ids.empty()) return YieldAction::noop();

  if (!rng_.chance(policy_.reorder)) {
    // Orderly schedule: every replica sends, every ordered pair transfers,
    // every replica applies, cycling.
    std::size_t n = ids.size();
    std::size_t total = n + n * (n - 1) + n;
    std::size_t slot = rotation_++ % std::max<std::size_t>(total, 1);
    if (slot < n) return YieldAction::send_from(ids[slot]);
    slot -= n;
    if (slot < n * (n - 1)) {
      std::size_t from = slot / (n - 1);
      std::size_t to = slot % (n - 1);
      if (to >= from) ++to;
      return YieldAction::transfer(ids[from], ids[to]);
    }
    slot -= n * (n - 1);
    return YieldAction::apply_at(ids[slot]);
  }

  switch (rng_.weighted({policy_.weight_send, policy_.weight_transfer, policy_.weight_apply,
                         policy_.weight_noop})) {
    case 0:
      return YieldAction::send_from(ids[rng_.below(ids.size())]);
    case 1: {
      if (ids.size() < 2) return YieldAction::noop();
      std::size_t from = rng_.below(ids.size());
      std::size_t to = rng_.below(ids.size() - 1);
      if (to >= from) ++to;
      return YieldAction::transfer(ids[from], ids[to]);
    }
    case 2:
      return YieldAction::apply_at(ids[rng_.below(ids.size())]);
    default:
      return YieldAction::noop();
  }
}

void Simulation::run_random(std::size_t n_steps) {
  for (std::size_t i = 0; i < n_steps; ++i) step(next_action());
}

void Simulation::sync_all() {
  std::size_t total_ops = 0;
  for (const auto& [id, r] : replicas_) total_ops += r.queue().size();
  std::size_t max_rounds = total_ops * replicas_.size() + 2;

  for (std::size_t round = 0; round < max_rounds; ++round) {
    bool changed = false;
    for (auto& [id, r] : replicas_) step(YieldAction::send_from(id));
    for (auto& [from, unused_f] : replicas_) {
      for (auto& [to, unused_t] : replicas_) {
        if (from == to) continue;
        std::size_t before = replica(to).ops().size();
        step(YieldAction::transfer(from, to));
        step(YieldAction::apply_at(to));
        if (replica(to).ops().size() != before) changed = true;
      }
    }
    if (!changed) return;
  }
  throw Error(Errc::SyncDiverged, "sync did not reach a fixpoint within its bound");
}

std::string Simulation::trace_text() const {
  std::string out;
  for (const auto& line : trace_) {
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace jcrdt
