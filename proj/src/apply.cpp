#include "jcrdt/apply.hpp"

#include <algorithm>
#include <iterator>
#include <span>
#include <vector>

#include "jcrdt/error.hpp"

namespace jcrdt {

namespace {

IdSet set_minus(const IdSet& a, const IdSet& b) {
  IdSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

void apply_at(Node& ctx, const Operation& op, std::span<const TaggedKey> path, const Key& final_key);

// Assignment at the target context. Primitive values overwrite the register
// after clearing causally prior writes; the container literals clear the
// whole element and (re)use a map or list child under the matching tag.
void apply_assign(BranchNode& ctx, const Operation& op, const Key& k, const Value& val) {
  if (val.kind() == ValueKind::EmptyMap) {
    clear_elem(ctx, op.deps, k);
    add_id(ctx, map_of(k), op.id, op.mutation);
    child_get_or_create(ctx, map_of(k));
  } else if (val.kind() == ValueKind::EmptyList) {
    clear_elem(ctx, op.deps, k);
    add_id(ctx, list_of(k), op.id, op.mutation);
    child_get_or_create(ctx, list_of(k));
  } else {
    clear(ctx, op.deps, reg_of(k));
    add_id(ctx, reg_of(k), op.id, op.mutation);
    child_get_or_create(ctx, reg_of(k)).reg().writes[op.id] = val;
  }
}

// RGA insertion: walk the chain from the cursor element, skipping elements
// with a greater id, and splice before the first lesser id or the tail.
// Concurrent inserts at one position therefore order by descending id on
// every replica. The payload is then assigned at the new element's key.
void apply_insert(Node& ctx, const Operation& op, const Key& cursor_elem, const Value& val) {
  if (ctx.kind() != NodeKind::List)
    throw Error(Errc::CursorMismatch, "insert targets a non-list at " + cursor_elem.to_string());
  ListNode& list = ctx.list();
  Key prev = cursor_elem;
  while (true) {
    auto it = list.next.find(prev);
    if (it == list.next.end())
      throw Error(Errc::CursorMismatch, "cursor element " + prev.to_string() + " not in chain");
    Key next = it->second;
    if (next != tail_key() && ts_less(op.id, next.id())) {
      prev = next;  // a concurrent insert with a greater id stays in front
      continue;
    }
    apply_assign(list, op, Key::id(op.id), val);
    list.next[prev] = Key::id(op.id);
    list.next[Key::id(op.id)] = next;
    return;
  }
}

void apply_at(Node& ctx, const Operation& op, std::span<const TaggedKey> path, const Key& final_key) {
  if (!path.empty()) {
    const TaggedKey& step = path.front();
    if (!ctx.is_branch())
      throw Error(Errc::CursorMismatch, "cursor descends through a register");
    BranchNode& b = ctx.branch();
    Node& child = child_get_or_create(b, step);
    apply_at(child, op, path.subspan(1), final_key);
    add_id(b, step, op.id, op.mutation);
    return;
  }
  switch (op.mutation.kind) {
    case MutationKind::Assign:
      apply_assign(ctx.branch(), op, final_key, op.mutation.value);
      break;
    case MutationKind::Delete:
      clear_elem(ctx.branch(), op.deps, final_key);
      break;
    case MutationKind::Insert:
      apply_insert(ctx, op, final_key, op.mutation.value);
      break;
  }
}

}  // namespace

void apply_op(Node& root, const Operation& op) {
  apply_at(root, op, std::span<const TaggedKey>(op.cursor.path), op.cursor.final);
}

namespace {

// Keeps the per-tag liveness sets in step with a clear of that tag.
void clear_tag_presence(BranchNode& node, const IdSet& deps, const TaggedKey& tk,
                        const IdSet& survivors) {
  IdSet ids = survivors;
  auto it = node.tag_presence.find(tk);
  if (it != node.tag_presence.end()) ids.insert(it->second.begin(), it->second.end());
  IdSet remaining = set_minus(ids, deps);
  if (remaining.empty())
    node.tag_presence.erase(tk);
  else
    node.tag_presence[tk] = std::move(remaining);
}

}  // namespace

IdSet clear(BranchNode& node, const IdSet& deps, const TaggedKey& tk) {
  Node* child = child_find(node, tk);
  if (!child) return {};  // nothing stored under this tag
  IdSet survivors;
  switch (tk.tag) {
    case KeyTag::Reg: {
      auto& writes = child->reg().writes;
      for (auto it = writes.begin(); it != writes.end();) {
        if (deps.count(it->first)) {
          it = writes.erase(it);
        } else {
          survivors.insert(it->first);
          ++it;
        }
      }
      break;
    }
    case KeyTag::Map: {
      BranchNode& map = child->branch();
      std::set<Key> keys;
      for (const auto& entry : map.children) keys.insert(entry.first.key);
      for (const auto& k : keys) {
        IdSet pres = clear_elem(map, deps, k);
        survivors.insert(pres.begin(), pres.end());
      }
      break;
    }
    case KeyTag::List: {
      ListNode& list = child->list();
      Key k = Key::head();
      while (true) {
        auto it = list.next.find(k);
        if (it == list.next.end() || it->second == tail_key()) break;
        k = it->second;
        IdSet pres = clear_elem(list, deps, k);
        survivors.insert(pres.begin(), pres.end());
      }
      break;
    }
  }
  clear_tag_presence(node, deps, tk, survivors);
  return survivors;
}

IdSet clear_elem(BranchNode& node, const IdSet& deps, const Key& k) {
  IdSet survivors;
  for (KeyTag tag : {KeyTag::Map, KeyTag::List, KeyTag::Reg}) {
    IdSet s = clear(node, deps, TaggedKey{tag, k});
    survivors.insert(s.begin(), s.end());
  }
  const IdSet& stored = presence(node, k);
  survivors.insert(stored.begin(), stored.end());
  IdSet pres = set_minus(survivors, deps);
  set_presence(node, k, pres);
  return pres;
}

}  // namespace jcrdt
