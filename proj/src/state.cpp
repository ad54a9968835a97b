#include "jcrdt/state.hpp"

#include <algorithm>
#include <json.hpp>
#include <vector>

#include "jcrdt/error.hpp"

namespace jcrdt {

using ordered_json = nlohmann::ordered_json;

const Key& tail_key() {
  static const Key tail = Key::id(LamportTimestamp{0, ReplicaId("")});
  return tail;
}

Node::Node(NodeKind kind) {
  switch (kind) {
    case NodeKind::Map:
      data_.emplace<MapNode>();
      break;
    case NodeKind::List: {
      ListNode list;
      list.next[Key::head()] = tail_key();
      data_.emplace<ListNode>(std::move(list));
      break;
    }
    case NodeKind::Reg:
      data_.emplace<RegNode>();
      break;
  }
}

NodeKind Node::kind() const {
  if (std::holds_alternative<MapNode>(data_)) return NodeKind::Map;
  if (std::holds_alternative<ListNode>(data_)) return NodeKind::List;
  return NodeKind::Reg;
}

BranchNode& Node::branch() {
  if (auto* m = std::get_if<MapNode>(&data_)) return *m;
  if (auto* l = std::get_if<ListNode>(&data_)) return *l;
  throw Error(Errc::CursorMismatch, "register node has no children");
}

const BranchNode& Node::branch() const { return const_cast<Node*>(this)->branch(); }

ListNode& Node::list() {
  if (auto* l = std::get_if<ListNode>(&data_)) return *l;
  throw Error(Errc::CursorMismatch, "node is not a list");
}

const ListNode& Node::list() const { return const_cast<Node*>(this)->list(); }

RegNode& Node::reg() {
  if (auto* r = std::get_if<RegNode>(&data_)) return *r;
  throw Error(Errc::CursorMismatch, "node is not a register");
}

const RegNode& Node::reg() const { return const_cast<Node*>(this)->reg(); }

Node Node::fresh(KeyTag tag) {
  switch (tag) {
    case KeyTag::Map:
      return Node(NodeKind::Map);
    case KeyTag::List:
      return Node(NodeKind::List);
    case KeyTag::Reg:
      return Node(NodeKind::Reg);
  }
  return Node(NodeKind::Map);
}

Node& child_get_or_create(BranchNode& node, const TaggedKey& tk) {
  auto it = node.children.find(tk);
  if (it != node.children.end()) return *it->second;
  auto [inserted, ok] = node.children.emplace(tk, Box<Node>(Node::fresh(tk.tag)));
  return *inserted->second;
}

const Node* child_find(const BranchNode& node, const TaggedKey& tk) {
  auto it = node.children.find(tk);
  return it == node.children.end() ? nullptr : &*it->second;
}

Node* child_find(BranchNode& node, const TaggedKey& tk) {
  auto it = node.children.find(tk);
  return it == node.children.end() ? nullptr : &*it->second;
}

const IdSet& presence(const BranchNode& node, const Key& k) {
  static const IdSet empty;
  auto it = node.presence.find(k);
  return it == node.presence.end() ? empty : it->second;
}

void set_presence(BranchNode& node, const Key& k, IdSet ids) {
  if (ids.empty())
    node.presence.erase(k);
  else
    node.presence[k] = std::move(ids);
}

void add_id(BranchNode& node, const TaggedKey& tk, const LamportTimestamp& id,
            const Mutation& mut) {
  if (mut.is_delete()) return;
  node.presence[tk.key].insert(id);
  node.tag_presence[tk].insert(id);
}

namespace {

bool branch_equal(const BranchNode& a, const BranchNode& b) {
  if (a.presence != b.presence) return false;
  if (a.tag_presence != b.tag_presence) return false;
  if (a.children.size() != b.children.size()) return false;
  auto ia = a.children.begin();
  auto ib = b.children.begin();
  for (; ia != a.children.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!state_equal(*ia->second, *ib->second)) return false;
  }
  return true;
}

}  // namespace

bool state_equal(const Node& a, const Node& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case NodeKind::Map:
      return branch_equal(a.branch(), b.branch());
    case NodeKind::List:
      return branch_equal(a.branch(), b.branch()) && a.list().next == b.list().next;
    case NodeKind::Reg:
      return a.reg().writes == b.reg().writes;
  }
  return false;
}

namespace {

ordered_json value_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::Null:
      return nullptr;
    case ValueKind::True:
      return true;
    case ValueKind::False:
      return false;
    case ValueKind::Number:
      return v.is_int() ? ordered_json(v.as_int()) : ordered_json(v.as_double());
    case ValueKind::Str:
      return v.as_str();
    case ValueKind::EmptyMap:
      return ordered_json::object();
    case ValueKind::EmptyList:
      return ordered_json::array();
  }
  return nullptr;
}

ordered_json render_node(const Node& node);

ordered_json render_register(const RegNode& reg) {
  // Distinct values in ascending writer order; duplicates collapse onto the
  // earliest writer. The read of a register is a set, so equal concurrent
  // writes are one value.
  std::vector<Value> values;
  for (const auto& [ts, v] : reg.writes) {
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  if (values.empty()) return nullptr;
  if (values.size() == 1) return value_json(values[0]);
  ordered_json arr = ordered_json::array();
  for (const auto& v : values) arr.push_back(value_json(v));
  ordered_json out = ordered_json::object();
  out["?mv"] = std::move(arr);
  return out;
}

// The tags of a key that are live: some operation asserted the tag and was
// not causally overwritten. A register additionally needs surviving writes
// (those two conditions coincide for registers).
std::vector<std::pair<KeyTag, const Node*>> visible_tags(const BranchNode& node, const Key& k) {
  std::vector<std::pair<KeyTag, const Node*>> out;
  for (KeyTag tag : {KeyTag::Map, KeyTag::List, KeyTag::Reg}) {
    const Node* child = child_find(node, TaggedKey{tag, k});
    if (!child) continue;
    if (tag == KeyTag::Reg) {
      if (child->reg().writes.empty()) continue;
    } else {
      auto it = node.tag_presence.find(TaggedKey{tag, k});
      if (it == node.tag_presence.end() || it->second.empty()) continue;
    }
    out.emplace_back(tag, child);
  }
  return out;
}

void render_entries(const BranchNode& node, const Key& k, const std::string& name,
                    ordered_json& object) {
  auto tags = visible_tags(node, k);
  if (tags.empty()) {
    object[name] = nullptr;
    return;
  }
  if (tags.size() == 1) {
    object[name] = render_node(*tags[0].second);
    return;
  }
  for (const auto& [tag, child] : tags) {
    object[name + "?" + tag_name(tag)] = render_node(*child);
  }
}

ordered_json render_map(const BranchNode& map) {
  // Live keys ordered by the smallest operation id asserting them, so the
  // output is identical on every converged replica.
  std::vector<std::pair<LamportTimestamp, const Key*>> live;
  for (const auto& [k, pres] : map.presence) live.emplace_back(*pres.begin(), &k);
  std::sort(live.begin(), live.end());
  ordered_json out = ordered_json::object();
  for (const auto& [min_id, k] : live) {
    render_entries(map, *k, k->is_str() ? k->str() : k->to_string(), out);
  }
  return out;
}

ordered_json render_list(const ListNode& list) {
  ordered_json out = ordered_json::array();
  Key k = Key::head();
  while (true) {
    auto it = list.next.find(k);
    if (it == list.next.end() || it->second == tail_key()) break;
    k = it->second;
    if (presence(list, k).empty()) continue;  // tombstone
    auto tags = visible_tags(list, k);
    if (tags.empty()) {
      out.push_back(nullptr);
    } else if (tags.size() == 1) {
      out.push_back(render_node(*tags[0].second));
    } else {
      ordered_json conflict = ordered_json::object();
      for (const auto& [tag, child] : tags) conflict[std::string("?") + tag_name(tag)] = render_node(*child);
      out.push_back(std::move(conflict));
    }
  }
  return out;
}

ordered_json render_node(const Node& node) {
  switch (node.kind()) {
    case NodeKind::Map:
      return render_map(node.branch());
    case NodeKind::List:
      return render_list(node.list());
    case NodeKind::Reg:
      return render_register(node.reg());
  }
  return nullptr;
}

}  // namespace

std::string render_json(const Node& document) { return render_node(document).dump(); }

std::string render_root(const Node& root) {
  const BranchNode& top = root.branch();
  if (presence(top, Key::doc()).empty()) return "null";
  auto tags = visible_tags(top, Key::doc());
  if (tags.empty()) return "null";
  if (tags.size() == 1) return render_node(*tags[0].second).dump();
  ordered_json out = ordered_json::object();
  for (const auto& [tag, child] : tags) out[std::string("doc?") + tag_name(tag)] = render_node(*child);
  return out.dump();
}

namespace {

ordered_json ts_json(const LamportTimestamp& ts) {
  return ordered_json::array({ts.counter, ts.replica.text()});
}

ordered_json key_json(const Key& k) {
  switch (k.kind()) {
    case KeyKind::Doc:
      return "doc";
    case KeyKind::Head:
      return "head";
    case KeyKind::Str:
      return k.str();
    case KeyKind::Id:
      return k == tail_key() ? ordered_json("tail") : ts_json(k.id());
  }
  return nullptr;
}

ordered_json debug_node(const Node& node) {
  ordered_json out = ordered_json::object();
  if (node.kind() == NodeKind::Reg) {
    out["kind"] = "reg";
    ordered_json writes = ordered_json::array();
    for (const auto& [ts, v] : node.reg().writes)
      writes.push_back({{"id", ts_json(ts)}, {"value", value_json(v)}});
    out["writes"] = std::move(writes);
    return out;
  }
  out["kind"] = node.kind() == NodeKind::Map ? "map" : "list";
  const BranchNode& b = node.branch();
  ordered_json children = ordered_json::array();
  for (const auto& [tk, child] : b.children)
    children.push_back(
        {{"tag", tag_name(tk.tag)}, {"key", key_json(tk.key)}, {"node", debug_node(*child)}});
  out["children"] = std::move(children);
  ordered_json pres = ordered_json::array();
  for (const auto& [k, ids] : b.presence) {
    ordered_json set = ordered_json::array();
    for (const auto& ts : ids) set.push_back(ts_json(ts));
    pres.push_back({{"key", key_json(k)}, {"ids", std::move(set)}});
  }
  out["presence"] = std::move(pres);
  ordered_json tagged = ordered_json::array();
  for (const auto& [tk, ids] : b.tag_presence) {
    ordered_json set = ordered_json::array();
    for (const auto& ts : ids) set.push_back(ts_json(ts));
    tagged.push_back(
        {{"tag", tag_name(tk.tag)}, {"key", key_json(tk.key)}, {"ids", std::move(set)}});
  }
  out["tag_presence"] = std::move(tagged);
  if (node.kind() == NodeKind::List) {
    ordered_json chain = ordered_json::array();
    for (const auto& [from, to] : node.list().next)
      chain.push_back({{"from", key_json(from)}, {"to", key_json(to)}});
    out["next"] = std::move(chain);
  }
  return out;
}

}  // namespace

std::string debug_state_json(const Node& node) { return debug_node(node).dump(); }

}  // namespace jcrdt
