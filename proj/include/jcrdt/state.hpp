#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <variant>

#include "jcrdt/core.hpp"

namespace jcrdt {

/// Value-semantics box so that recursive structures can nest through
/// containers while still copying deeply. Default-constructed boxes are
/// empty; dereferencing one is undefined.
template <typename T>
class Box {
 public:
  Box() = default;
  Box(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Box(const Box& other) : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Box(Box&&) noexcept = default;
  Box& operator=(const Box& other) {
    ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    return *this;
  }
  Box& operator=(Box&&) noexcept = default;

  explicit operator bool() const { return ptr_ != nullptr; }
  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }

 private:
  std::unique_ptr<T> ptr_;
};

enum class NodeKind { Map, List, Reg };

class Node;

/// Shared shape of map and list nodes: tagged children plus per-key presence
/// sets. A key is live iff its presence set is non-empty; empty sets are
/// never stored (absent and empty are the same thing in the semantics).
///
/// tag_presence refines presence by the tag an id asserted: operations add
/// their id to the tag they touch, clears subtract their dependencies.
/// Cleared-out child nodes stay in children (tombstones), so this is what
/// distinguishes a live entry from a leftover husk when rendering.
struct BranchNode {
  std::map<TaggedKey, Box<Node>> children;
  std::map<Key, IdSet> presence;
  std::map<TaggedKey, IdSet> tag_presence;
};

struct MapNode : BranchNode {};

/// Ordered list. next forms a single chain Head -> ... -> Tail over every
/// element ever inserted; deleted elements stay linked as tombstones. The
/// sentinels are Key::head() and the reserved tail key below.
struct ListNode : BranchNode {
  std::map<Key, Key> next;
};

/// Multi-value register: one surviving value per assigning operation.
struct RegNode {
  std::map<LamportTimestamp, Value> writes;
};

/// The tail sentinel of list chains. Encoded as an id key with counter 0,
/// which no real operation can carry.
const Key& tail_key();

class Node {
 public:
  explicit Node(NodeKind kind = NodeKind::Map);

  NodeKind kind() const;
  bool is_branch() const { return kind() != NodeKind::Reg; }

  BranchNode& branch();
  const BranchNode& branch() const;
  ListNode& list();
  const ListNode& list() const;
  RegNode& reg();
  const RegNode& reg() const;

  /// Fresh node of the shape implied by a tag: map -> empty map,
  /// reg -> empty register, list -> list with next(head) = tail.
  static Node fresh(KeyTag tag);

 private:
  std::variant<MapNode, ListNode, RegNode> data_;
};

/// Existing child for the tagged key, or a freshly created one. The tag
/// fixes the kind of the created node.
Node& child_get_or_create(BranchNode& node, const TaggedKey& tk);

/// Child lookup without creation; nullptr when absent.
const Node* child_find(const BranchNode& node, const TaggedKey& tk);
Node* child_find(BranchNode& node, const TaggedKey& tk);

/// Stored presence set for a key, or the empty set when absent.
const IdSet& presence(const BranchNode& node, const Key& k);

/// Replaces the presence set of a key, erasing the entry when empty.
void set_presence(BranchNode& node, const Key& k, IdSet ids);

/// Adds the operation id to the presence set of the key under the tag,
/// unless the mutation is a deletion (deletions only ever clear).
void add_id(BranchNode& node, const TaggedKey& tk, const LamportTimestamp& id,
            const Mutation& mut);

/// Structural equality over the full tree: children, presence sets
/// (including tombstoned list elements), next chains, and register writes.
bool state_equal(const Node& a, const Node& b);

/// Projects the document subtree onto plain JSON text (single-line, UTF-8):
///  - map keys render iff their presence set is non-empty, ordered by the
///    smallest operation id asserting them;
///  - list elements render in chain order, skipping tombstones;
///  - a register with one distinct value renders as that value; several
///    concurrent values render as {"?mv":[...]} in ascending writer order;
///  - a key live under several type tags renders as sibling keys
///    "k?map" / "k?list" / "k?reg", in that order.
std::string render_json(const Node& document);

/// Render of a whole replica root (the branch holding the "doc" entry).
/// "null" when no document has been created yet.
std::string render_root(const Node& root);

/// Raw dump of the internal tree (children, presence, chains, writes) for
/// debugging convergence failures. Deterministic but not a stable format.
std::string debug_state_json(const Node& node);

}  // namespace jcrdt
