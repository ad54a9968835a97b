#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace jcrdt {

/// Opaque replica identifier with a total order given by its canonical text
/// form (e.g. "p", "q"). Used as the tie-breaker in the Lamport order.
class ReplicaId {
 public:
  ReplicaId() = default;
  explicit ReplicaId(std::string text) : text_(std::move(text)) {}

  const std::string& text() const { return text_; }

  auto operator<=>(const ReplicaId&) const = default;

 private:
  std::string text_;
};

/// Globally unique operation identifier: (counter, replica). Ordered by
/// counter first, replica second, which yields a strict total order that is
/// consistent with causality.
struct LamportTimestamp {
  std::uint64_t counter = 0;
  ReplicaId replica;

  auto operator<=>(const LamportTimestamp&) const = default;

  std::string to_string() const;
};

/// Strict total order on timestamps: (c1,p1) < (c2,p2) iff
/// c1 < c2, or c1 = c2 and p1 < p2.
inline bool ts_less(const LamportTimestamp& a, const LamportTimestamp& b) {
  return a.counter < b.counter || (a.counter == b.counter && a.replica < b.replica);
}

using IdSet = std::set<LamportTimestamp>;

enum class KeyKind { Doc, Head, Str, Id };

/// A key addresses an entry of a branch node: the document root (doc), a
/// string key of a map, the head sentinel of a list, or a list element
/// identified by the operation that inserted it.
class Key {
 public:
  Key() : kind_(KeyKind::Doc) {}

  static Key doc() { return Key(KeyKind::Doc); }
  static Key head() { return Key(KeyKind::Head); }
  static Key str(std::string s) {
    Key k(KeyKind::Str);
    k.str_ = std::move(s);
    return k;
  }
  static Key id(LamportTimestamp ts) {
    Key k(KeyKind::Id);
    k.id_ = std::move(ts);
    return k;
  }

  KeyKind kind() const { return kind_; }
  bool is_doc() const { return kind_ == KeyKind::Doc; }
  bool is_head() const { return kind_ == KeyKind::Head; }
  bool is_str() const { return kind_ == KeyKind::Str; }
  bool is_id() const { return kind_ == KeyKind::Id; }

  const std::string& str() const { return str_; }
  const LamportTimestamp& id() const { return id_; }

  auto operator<=>(const Key&) const = default;

  std::string to_string() const;

 private:
  explicit Key(KeyKind kind) : kind_(kind) {}

  KeyKind kind_;
  std::string str_;
  LamportTimestamp id_;
};

enum class KeyTag { Map, List, Reg };

const char* tag_name(KeyTag tag);

/// Key plus the datatype annotation of the branch entry it traverses.
/// The same key under different tags addresses distinct entries.
struct TaggedKey {
  KeyTag tag = KeyTag::Map;
  Key key;

  auto operator<=>(const TaggedKey&) const = default;

  std::string to_string() const;
};

inline TaggedKey map_of(Key k) { return TaggedKey{KeyTag::Map, std::move(k)}; }
inline TaggedKey list_of(Key k) { return TaggedKey{KeyTag::List, std::move(k)}; }
inline TaggedKey reg_of(Key k) { return TaggedKey{KeyTag::Reg, std::move(k)}; }

/// Path from the document root to a position in the document, identifying it
/// by immutable keys and operation ids rather than by index. The path holds
/// the tagged branch keys traversed; the final key is untagged.
struct Cursor {
  std::vector<TaggedKey> path;
  Key final;

  auto operator<=>(const Cursor&) const = default;

  static Cursor root() { return Cursor{{}, Key::doc()}; }

  std::string to_string() const;
};

enum class ValueKind { Null, True, False, Number, Str, EmptyMap, EmptyList };

/// A literal of the command language: a JSON primitive, or one of the empty
/// container literals {} and []. Numbers keep their integer/double spelling
/// so that rendering is reproducible.
class Value {
 public:
  Value() : kind_(ValueKind::Null) {}

  static Value null() { return Value(ValueKind::Null); }
  static Value boolean(bool b) { return Value(b ? ValueKind::True : ValueKind::False); }
  static Value integer(std::int64_t n) {
    Value v(ValueKind::Number);
    v.is_int_ = true;
    v.int_ = n;
    return v;
  }
  static Value number(double d) {
    Value v(ValueKind::Number);
    v.is_int_ = false;
    v.dbl_ = d;
    return v;
  }
  static Value str(std::string s) {
    Value v(ValueKind::Str);
    v.str_ = std::move(s);
    return v;
  }
  static Value empty_map() { return Value(ValueKind::EmptyMap); }
  static Value empty_list() { return Value(ValueKind::EmptyList); }

  ValueKind kind() const { return kind_; }
  bool is_container() const {
    return kind_ == ValueKind::EmptyMap || kind_ == ValueKind::EmptyList;
  }
  bool is_int() const { return is_int_; }
  std::int64_t as_int() const { return int_; }
  double as_double() const { return dbl_; }
  const std::string& as_str() const { return str_; }

  auto operator<=>(const Value&) const = default;

  std::string to_string() const;

 private:
  explicit Value(ValueKind kind) : kind_(kind) {}

  ValueKind kind_;
  bool is_int_ = false;
  std::int64_t int_ = 0;
  double dbl_ = 0.0;
  std::string str_;
};

enum class MutationKind { Insert, Delete, Assign };

/// The requested change at a cursor position: insert a new list element,
/// delete the addressed element, or assign a value to it.
struct Mutation {
  MutationKind kind = MutationKind::Assign;
  Value value;  // unused for Delete

  static Mutation insert(Value v) { return Mutation{MutationKind::Insert, std::move(v)}; }
  static Mutation del() { return Mutation{MutationKind::Delete, Value()}; }
  static Mutation assign(Value v) { return Mutation{MutationKind::Assign, std::move(v)}; }

  bool is_delete() const { return kind == MutationKind::Delete; }

  auto operator<=>(const Mutation&) const = default;
};

/// One replicated mutation. deps is the full set of operation ids applied at
/// the generating replica when this operation was created; it induces the
/// causal partial order on operations.
struct Operation {
  LamportTimestamp id;
  IdSet deps;
  Cursor cursor;
  Mutation mutation;

  auto operator<=>(const Operation&) const = default;
};

/// Canonical wire encoding. Encoding the same operation always yields the
/// same bytes, so byte equality coincides with operation equality.
std::string encode_operation(const Operation& op);

/// Inverse of encode_operation. Throws Error(ParseError) naming the
/// offending field on malformed input.
Operation decode_operation(const std::string& bytes);

}  // namespace jcrdt
