#include "jcrdt/eval.hpp"

#include <algorithm>

#include "jcrdt/error.hpp"
#include "jcrdt/replica.hpp"

namespace jcrdt {

std::string Expr::to_string() const {
  switch (kind_) {
    case ExprKind::Doc:
      return "doc";
    case ExprKind::Var:
      return name_;
    case ExprKind::Get:
      return base_->to_string() + ".get(" + Value::str(name_).to_string() + ")";
    case ExprKind::Idx:
      return base_->to_string() + ".idx(" + std::to_string(index_) + ")";
    case ExprKind::Keys:
      return base_->to_string() + ".keys";
    case ExprKind::Values:
      return base_->to_string() + ".values";
  }
  return "?";
}

namespace {

// Walks the stored state along a cursor path. Missing or mistyped segments
// are stuck reductions.
const Node* descend_path(const Node& root, const std::vector<TaggedKey>& path, Errc missing) {
  const Node* node = &root;
  for (const auto& seg : path) {
    if (!node->is_branch()) throw Error(missing, "path descends through a register");
    const Node* child = child_find(node->branch(), seg);
    if (!child)
      throw Error(missing, "no " + std::string(tag_name(seg.tag)) + " entry at " + seg.key.to_string());
    node = child;
  }
  return node;
}

}  // namespace

Key idx_resolve(const ListNode& list, const Key& start, std::uint64_t i) {
  Key k = start;
  std::uint64_t remaining = i;
  while (remaining > 0) {
    auto it = list.next.find(k);
    if (it == list.next.end())
      throw Error(Errc::CursorMismatch, "element " + k.to_string() + " not in chain");
    if (it->second == tail_key())
      throw Error(Errc::IndexOutOfBounds, "index runs past the end of the list");
    k = it->second;
    if (!presence(list, k).empty()) --remaining;  // tombstones are not counted
  }
  return k;
}

Cursor resolve(const ReplicaState& replica, const Expr& expr) {
  switch (expr.kind()) {
    case ExprKind::Doc:
      return Cursor::root();
    case ExprKind::Var: {
      auto it = replica.vars_.find(expr.name());
      if (it == replica.vars_.end())
        throw Error(Errc::UnboundVariable, "variable '" + expr.name() + "' is not bound");
      return it->second;
    }
    case ExprKind::Get: {
      Cursor base = resolve(replica, expr.base());
      if (base.final.is_head())
        throw Error(Errc::GetOnHead, "get() cannot follow the list head");
      Cursor out;
      out.path = base.path;
      out.path.push_back(map_of(base.final));
      out.final = Key::str(expr.name());
      return out;
    }
    case ExprKind::Idx: {
      Cursor base = resolve(replica, expr.base());
      Cursor out;
      out.path = base.path;
      out.path.push_back(list_of(base.final));
      const Node* node = descend_path(replica.root_, out.path, Errc::NotAList);
      if (node->kind() != NodeKind::List)
        throw Error(Errc::NotAList, "idx() applies to lists");
      out.final = idx_resolve(node->list(), Key::head(), expr.index());
      return out;
    }
    case ExprKind::Keys:
    case ExprKind::Values:
      throw Error(Errc::NotACursor, "a query result is not a document position");
  }
  throw Error(Errc::NotACursor, "unreachable");
}

std::set<std::string> keys(const ReplicaState& replica, const Cursor& cursor) {
  const Node* ctx = descend_path(replica.root_, cursor.path, Errc::NotAMap);
  if (!ctx->is_branch()) throw Error(Errc::NotAMap, "keys applies to maps");
  const Node* map = child_find(ctx->branch(), map_of(cursor.final));
  if (!map) throw Error(Errc::NotAMap, "no map at " + cursor.final.to_string());
  std::set<std::string> out;
  for (const auto& [k, pres] : map->branch().presence) {
    if (k.is_str()) out.insert(k.str());
  }
  return out;
}

std::set<Value> values(const ReplicaState& replica, const Cursor& cursor) {
  const Node* ctx = descend_path(replica.root_, cursor.path, Errc::NotARegister);
  if (!ctx->is_branch()) throw Error(Errc::NotARegister, "values applies to registers");
  const Node* reg = child_find(ctx->branch(), reg_of(cursor.final));
  if (!reg) throw Error(Errc::NotARegister, "no register at " + cursor.final.to_string());
  std::set<Value> out;
  for (const auto& [ts, v] : reg->reg().writes) out.insert(v);
  return out;
}

}  // namespace jcrdt
