#pragma once

#include <map>
#include <string>
#include <vector>

#include "jcrdt/core.hpp"
#include "jcrdt/eval.hpp"
#include "jcrdt/state.hpp"

namespace jcrdt {

enum class CommandKind { Let, Assign, InsertAfter, Delete, Yield };

/// One command of the editing language. Sequencing is a list of commands.
struct Command {
  CommandKind kind = CommandKind::Yield;
  std::string name;  // Let binding
  Box<Expr> expr;    // all but Yield
  Value value;       // Assign / InsertAfter payload

  static Command let(std::string name, Expr e);
  static Command assign(Expr e, Value v);
  static Command insert_after(Expr e, Value v);
  static Command del(Expr e);
  static Command yield();

  bool operator==(const Command& o) const;

  std::string to_string() const;
};

/// One replica: the document tree, local variable bindings, the set of
/// applied operation ids, and the queue/send/recv buffers of the network
/// rules. Owned and mutated by a single executor; replicas exchange only
/// immutable operations.
class ReplicaState {
 public:
  explicit ReplicaState(ReplicaId id) : id_(std::move(id)), root_(NodeKind::Map) {}

  const ReplicaId& id() const { return id_; }
  const Node& root() const { return root_; }
  const IdSet& ops() const { return ops_; }
  const std::vector<Operation>& queue() const { return queue_; }
  const std::map<LamportTimestamp, Operation>& send_buffer() const { return send_; }
  const std::map<LamportTimestamp, Operation>& recv_buffer() const { return recv_; }
  const std::map<std::string, Cursor>& vars() const { return vars_; }

  /// Executes one non-yield command: let binds a cursor (queries evaluate
  /// for their effect and are discarded), the mutating commands resolve
  /// their cursor and generate the matching operation. Errors from
  /// expression evaluation propagate; commands never partially apply.
  void exec_command(const Command& cmd);

  /// Generates a fresh operation at the cursor: id counter is one greater
  /// than any applied counter, deps snapshot the applied set. The operation
  /// is applied locally and queued for broadcast. Returns it.
  const Operation& make_op(const Cursor& cursor, Mutation mutation);

  /// Send rule: the queue is merged into the send buffer (and retained).
  void yield_send();

  /// Recv rule: a peer's entire send buffer is merged into recv.
  void yield_recv(const std::map<LamportTimestamp, Operation>& peer_send);

  /// Applies every received operation whose dependencies are satisfied,
  /// repeatedly, smallest id first. Returns the operations applied.
  std::vector<Operation> apply_remote_ready();

  std::string render() const { return render_root(root_); }

  friend Cursor resolve(const ReplicaState& replica, const Expr& expr);
  friend std::set<std::string> keys(const ReplicaState& replica, const Cursor& cursor);
  friend std::set<Value> values(const ReplicaState& replica, const Cursor& cursor);

 private:
  ReplicaId id_;
  Node root_;
  std::map<std::string, Cursor> vars_;
  IdSet ops_;
  std::vector<Operation> queue_;
  std::map<LamportTimestamp, Operation> send_;
  std::map<LamportTimestamp, Operation> recv_;
};

/// Theorem-level comparison: full structural equality of the document
/// trees (variables are local and excluded).
bool documents_equal(const ReplicaState& a, const ReplicaState& b);

}  // namespace jcrdt
