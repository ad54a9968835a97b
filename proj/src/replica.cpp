#include "jcrdt/replica.hpp"

#include <algorithm>

#include "jcrdt/apply.hpp"
#include "jcrdt/error.hpp"

namespace jcrdt {

Command Command::let(std::string name, Expr e) {
  Command c;
  c.kind = CommandKind::Let;
  c.name = std::move(name);
  c.expr = Box<Expr>(std::move(e));
  return c;
}

Command Command::assign(Expr e, Value v) {
  Command c;
  c.kind = CommandKind::Assign;
  c.expr = Box<Expr>(std::move(e));
  c.value = std::move(v);
  return c;
}

Command Command::insert_after(Expr e, Value v) {
  Command c;
  c.kind = CommandKind::InsertAfter;
  c.expr = Box<Expr>(std::move(e));
  c.value = std::move(v);
  return c;
}

Command Command::del(Expr e) {
  Command c;
  c.kind = CommandKind::Delete;
  c.expr = Box<Expr>(std::move(e));
  return c;
}

Command Command::yield() {
  Command c;
  c.kind = CommandKind::Yield;
  return c;
}

bool Command::operator==(const Command& o) const {
  if (kind != o.kind || name != o.name || value != o.value) return false;
  if (static_cast<bool>(expr) != static_cast<bool>(o.expr)) return false;
  return !expr || *expr == *o.expr;
}

std::string Command::to_string() const {
  switch (kind) {
    case CommandKind::Let:
      return "let " + name + " = " + expr->to_string();
    case CommandKind::Assign:
      return expr->to_string() + " := " + value.to_string();
    case CommandKind::InsertAfter:
      return expr->to_string() + ".insertAfter(" + value.to_string() + ")";
    case CommandKind::Delete:
      return expr->to_string() + ".delete";
    case CommandKind::Yield:
      return "yield";
  }
  return "?";
}

void ReplicaState::exec_command(const Command& cmd) {
  switch (cmd.kind) {
    case CommandKind::Let:
      if (cmd.expr->is_query()) {
        // Queries have no side effect and nothing cursor-shaped to bind;
        // they are still evaluated so that stuck programs fail here.
        if (cmd.expr->kind() == ExprKind::Keys)
          keys(*this, resolve(*this, cmd.expr->base()));
        else
          values(*this, resolve(*this, cmd.expr->base()));
      } else {
        vars_[cmd.name] = resolve(*this, *cmd.expr);
      }
      break;
    case CommandKind::Assign:
      make_op(resolve(*this, *cmd.expr), Mutation::assign(cmd.value));
      break;
    case CommandKind::InsertAfter:
      make_op(resolve(*this, *cmd.expr), Mutation::insert(cmd.value));
      break;
    case CommandKind::Delete:
      make_op(resolve(*this, *cmd.expr), Mutation::del());
      break;
    case CommandKind::Yield:
      throw Error(Errc::ScriptError, "yield is driven by the simulator, not the replica");
  }
}

const Operation& ReplicaState::make_op(const Cursor& cursor, Mutation mutation) {
  // ops_ is ordered by counter first, so the greatest counter is at the end.
  std::uint64_t ctr = ops_.empty() ? 0 : ops_.rbegin()->counter;
  Operation op;
  op.id = LamportTimestamp{ctr + 1, id_};
  op.deps = ops_;
  op.cursor = cursor;
  op.mutation = std::move(mutation);
  apply_op(root_, op);
  ops_.insert(op.id);
  queue_.push_back(std::move(op));
  return queue_.back();
}

void ReplicaState::yield_send() {
  for (const auto& op : queue_) send_.emplace(op.id, op);
}

void ReplicaState::yield_recv(const std::map<LamportTimestamp, Operation>& peer_send) {
  for (const auto& [id, op] : peer_send) recv_.emplace(id, op);
}

std::vector<Operation> ReplicaState::apply_remote_ready() {
  std::vector<Operation> applied;
  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (const auto& [id, op] : recv_) {
      if (ops_.count(id)) continue;
      if (!std::includes(ops_.begin(), ops_.end(), op.deps.begin(), op.deps.end())) continue;
      apply_op(root_, op);
      ops_.insert(id);
      applied.push_back(op);
      progressed = true;
      break;  // restart: applying may make smaller ids ready
    }
  }
  return applied;
}

bool documents_equal(const ReplicaState& a, const ReplicaState& b) {
  return state_equal(a.root(), b.root());
}

}  // namespace jcrdt
