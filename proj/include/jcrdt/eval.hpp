#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "jcrdt/core.hpp"
#include "jcrdt/state.hpp"

namespace jcrdt {

class ReplicaState;

enum class ExprKind { Doc, Var, Get, Idx, Keys, Values };

/// Expression of the command language. Doc/Var/Get/Idx evaluate to cursors;
/// Keys/Values are queries over the state at their base cursor.
class Expr {
 public:
  static Expr doc() { return Expr(ExprKind::Doc); }
  static Expr var(std::string name) {
    Expr e(ExprKind::Var);
    e.name_ = std::move(name);
    return e;
  }
  static Expr get(Expr base, std::string key) {
    Expr e(ExprKind::Get);
    e.base_ = Box<Expr>(std::move(base));
    e.name_ = std::move(key);
    return e;
  }
  static Expr idx(Expr base, std::uint64_t index) {
    Expr e(ExprKind::Idx);
    e.base_ = Box<Expr>(std::move(base));
    e.index_ = index;
    return e;
  }
  static Expr keys(Expr base) {
    Expr e(ExprKind::Keys);
    e.base_ = Box<Expr>(std::move(base));
    return e;
  }
  static Expr values(Expr base) {
    Expr e(ExprKind::Values);
    e.base_ = Box<Expr>(std::move(base));
    return e;
  }

  ExprKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  std::uint64_t index() const { return index_; }
  const Expr& base() const { return *base_; }

  bool is_query() const { return kind_ == ExprKind::Keys || kind_ == ExprKind::Values; }

  bool operator==(const Expr& o) const {
    return kind_ == o.kind_ && name_ == o.name_ && index_ == o.index_ &&
           (kind_ == ExprKind::Doc || kind_ == ExprKind::Var || *base_ == *o.base_);
  }

  std::string to_string() const;

 private:
  explicit Expr(ExprKind kind) : kind_(kind) {}

  ExprKind kind_;
  std::string name_;          // Var name or Get key
  std::uint64_t index_ = 0;   // Idx
  Box<Expr> base_;
};

/// Evaluates a cursor expression against one replica's state. Pure: never
/// mutates the replica. Stuck reductions raise named errors:
/// UnboundVariable, GetOnHead, NotAList, IndexOutOfBounds, NotACursor.
Cursor resolve(const ReplicaState& replica, const Expr& expr);

/// Index iteration over the chain of one list: returns the key reached
/// after skipping i live elements from start (head or an element id).
/// i = 0 returns start itself; tombstones are not counted.
Key idx_resolve(const ListNode& list, const Key& start, std::uint64_t i);

/// Live key set of the map at the cursor. NotAMap when there is none.
std::set<std::string> keys(const ReplicaState& replica, const Cursor& cursor);

/// Current contents of the register at the cursor. NotARegister when the
/// cursor does not address one.
std::set<Value> values(const ReplicaState& replica, const Cursor& cursor);

}  // namespace jcrdt
