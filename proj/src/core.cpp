#include "jcrdt/core.hpp"

#include <json.hpp>

#include "jcrdt/error.hpp"

namespace jcrdt {

using ordered_json = nlohmann::ordered_json;

std::string LamportTimestamp::to_string() const {
  return "(" + std::to_string(counter) + "," + replica.text() + ")";
}

std::string Key::to_string() const {
  switch (kind_) {
    case KeyKind::Doc:
      return "doc";
    case KeyKind::Head:
      return "head";
    case KeyKind::Str:
      return "\"" + str_ + "\"";
    case KeyKind::Id:
      return id_.to_string();
  }
  return "?";
}

const char* tag_name(KeyTag tag) {
  switch (tag) {
    case KeyTag::Map:
      return "map";
    case KeyTag::List:
      return "list";
    case KeyTag::Reg:
      return "reg";
  }
  return "?";
}

std::string TaggedKey::to_string() const {
  return std::string(tag_name(tag)) + "T(" + key.to_string() + ")";
}

std::string Cursor::to_string() const {
  std::string out = "cursor(<";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) out += ", ";
    out += path[i].to_string();
  }
  out += ">, " + final.to_string() + ")";
  return out;
}

std::string Value::to_string() const {
  switch (kind_) {
    case ValueKind::Null:
      return "null";
    case ValueKind::True:
      return "true";
    case ValueKind::False:
      return "false";
    case ValueKind::Number:
      return is_int_ ? ordered_json(int_).dump() : ordered_json(dbl_).dump();
    case ValueKind::Str:
      return ordered_json(str_).dump();
    case ValueKind::EmptyMap:
      return "{}";
    case ValueKind::EmptyList:
      return "[]";
  }
  return "?";
}

namespace {

ordered_json ts_to_json(const LamportTimestamp& ts) {
  return ordered_json::array({ts.counter, ts.replica.text()});
}

ordered_json key_to_json(const Key& k) {
  ordered_json j = ordered_json::object();
  switch (k.kind()) {
    case KeyKind::Doc:
      j["doc"] = nullptr;
      break;
    case KeyKind::Head:
      j["head"] = nullptr;
      break;
    case KeyKind::Str:
      j["str"] = k.str();
      break;
    case KeyKind::Id:
      j["id"] = ts_to_json(k.id());
      break;
  }
  return j;
}

ordered_json value_to_json(const Value& v) {
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

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw Error(Errc::ParseError, "field '" + field + "': " + what);
}

LamportTimestamp ts_from_json(const ordered_json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_unsigned() || !j[1].is_string())
    fail(field, "expected [counter, replica]");
  return LamportTimestamp{j[0].get<std::uint64_t>(), ReplicaId(j[1].get<std::string>())};
}

Key key_from_json(const ordered_json& j, const std::string& field) {
  if (!j.is_object() || j.size() != 1) fail(field, "expected a single-entry key object");
  auto it = j.begin();
  const std::string& name = it.key();
  if (name == "doc") return Key::doc();
  if (name == "head") return Key::head();
  if (name == "str") {
    if (!it.value().is_string()) fail(field, "'str' key must hold a string");
    return Key::str(it.value().get<std::string>());
  }
  if (name == "id") return Key::id(ts_from_json(it.value(), field));
  fail(field, "unknown key kind '" + name + "'");
}

Value value_from_json(const ordered_json& j, const std::string& field) {
  if (j.is_null()) return Value::null();
  if (j.is_boolean()) return Value::boolean(j.get<bool>());
  if (j.is_number_integer() || j.is_number_unsigned()) return Value::integer(j.get<std::int64_t>());
  if (j.is_number_float()) return Value::number(j.get<double>());
  if (j.is_string()) return Value::str(j.get<std::string>());
  if (j.is_object()) {
    if (!j.empty()) fail(field, "non-empty object is not a legal literal");
    return Value::empty_map();
  }
  if (j.is_array()) {
    if (!j.empty()) fail(field, "non-empty array is not a legal literal");
    return Value::empty_list();
  }
  fail(field, "unsupported literal");
}

// Structural constraints on wire cursors: path tags are map/list only, head
// never names a branch segment, doc appears at the start only, and each key
// matches the tag of the segment it is reached through.
void check_cursor(const Cursor& cur) {
  for (std::size_t i = 0; i < cur.path.size(); ++i) {
    const std::string field = "cur.path[" + std::to_string(i) + "]";
    const Key& k = cur.path[i].key;
    if (k.is_head()) fail(field, "head cannot name a branch segment");
    if (k.is_doc() && i != 0) fail(field, "doc key is only legal at the path root");
    if (i > 0) {
      KeyTag prev = cur.path[i - 1].tag;
      if (prev == KeyTag::Map && !k.is_str()) fail(field, "map segments are followed by string keys");
      if (prev == KeyTag::List && !k.is_id()) fail(field, "list segments are followed by element ids");
    }
  }
  if (!cur.path.empty()) {
    KeyTag last = cur.path.back().tag;
    if (last == KeyTag::Map && !cur.final.is_str())
      fail("cur.key", "map segments are followed by string keys");
    if (last == KeyTag::List && !cur.final.is_id() && !cur.final.is_head())
      fail("cur.key", "list segments are followed by head or element ids");
  } else if (!cur.final.is_doc()) {
    fail("cur.key", "an empty path must target the document root");
  }
}

}  // namespace

std::string encode_operation(const Operation& op) {
  ordered_json j;
  j["id"] = ts_to_json(op.id);
  ordered_json deps = ordered_json::array();
  for (const auto& d : op.deps) deps.push_back(ts_to_json(d));
  j["deps"] = std::move(deps);
  ordered_json path = ordered_json::array();
  for (const auto& seg : op.cursor.path) {
    path.push_back({{"tag", tag_name(seg.tag)}, {"key", key_to_json(seg.key)}});
  }
  j["cur"] = {{"path", std::move(path)}, {"key", key_to_json(op.cursor.final)}};
  ordered_json mut = ordered_json::object();
  switch (op.mutation.kind) {
    case MutationKind::Insert:
      mut["type"] = "insert";
      mut["value"] = value_to_json(op.mutation.value);
      break;
    case MutationKind::Delete:
      mut["type"] = "delete";
      break;
    case MutationKind::Assign:
      mut["type"] = "assign";
      mut["value"] = value_to_json(op.mutation.value);
      break;
  }
  j["mut"] = std::move(mut);
  return j.dump();
}

Operation decode_operation(const std::string& bytes) {
  ordered_json j;
  try {
    j = ordered_json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("malformed operation encoding: ") + e.what());
  }
  if (!j.is_object()) fail("operation", "expected an object");
  for (const auto& item : j.items()) {
    const std::string& k = item.key();
    if (k != "id" && k != "deps" && k != "cur" && k != "mut") fail(k, "unknown field");
  }
  if (!j.contains("id")) fail("id", "missing");
  if (!j.contains("deps")) fail("deps", "missing");
  if (!j.contains("cur")) fail("cur", "missing");
  if (!j.contains("mut")) fail("mut", "missing");

  Operation op;
  op.id = ts_from_json(j["id"], "id");

  const auto& deps = j["deps"];
  if (!deps.is_array()) fail("deps", "expected an array");
  for (std::size_t i = 0; i < deps.size(); ++i) {
    const std::string field = "deps[" + std::to_string(i) + "]";
    LamportTimestamp d = ts_from_json(deps[i], field);
    if (!op.deps.empty() && !ts_less(*op.deps.rbegin(), d))
      fail(field, "dependencies must be strictly ascending");
    if (d == op.id) fail(field, "an operation cannot depend on itself");
    op.deps.insert(d);
  }

  const auto& cur = j["cur"];
  if (!cur.is_object() || !cur.contains("path") || !cur.contains("key") || cur.size() != 2)
    fail("cur", "expected {path, key}");
  const auto& path = cur["path"];
  if (!path.is_array()) fail("cur.path", "expected an array");
  for (std::size_t i = 0; i < path.size(); ++i) {
    const std::string field = "cur.path[" + std::to_string(i) + "]";
    const auto& seg = path[i];
    if (!seg.is_object() || !seg.contains("tag") || !seg.contains("key") || seg.size() != 2)
      fail(field, "expected {tag, key}");
    if (!seg["tag"].is_string()) fail(field + ".tag", "expected a string");
    const std::string tag = seg["tag"].get<std::string>();
    KeyTag kt;
    if (tag == "map")
      kt = KeyTag::Map;
    else if (tag == "list")
      kt = KeyTag::List;
    else
      fail(field + ".tag", "cursor paths traverse map and list segments only");
    op.cursor.path.push_back(TaggedKey{kt, key_from_json(seg["key"], field + ".key")});
  }
  op.cursor.final = key_from_json(cur["key"], "cur.key");
  check_cursor(op.cursor);

  const auto& mut = j["mut"];
  if (!mut.is_object() || !mut.contains("type")) fail("mut", "expected {type, value?}");
  if (!mut["type"].is_string()) fail("mut.type", "expected a string");
  const std::string type = mut["type"].get<std::string>();
  if (type == "delete") {
    if (mut.size() != 1) fail("mut.value", "delete carries no value");
    op.mutation = Mutation::del();
  } else if (type == "insert" || type == "assign") {
    if (mut.size() != 2 || !mut.contains("value")) fail("mut.value", "missing");
    Value v = value_from_json(mut["value"], "mut.value");
    op.mutation = type == "insert" ? Mutation::insert(std::move(v)) : Mutation::assign(std::move(v));
  } else {
    fail("mut.type", "unknown mutation '" + type + "'");
  }
  return op;
}

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::UnboundVariable:
      return "UnboundVariable";
    case Errc::GetOnHead:
      return "GetOnHead";
    case Errc::IndexOutOfBounds:
      return "IndexOutOfBounds";
    case Errc::NotAMap:
      return "NotAMap";
    case Errc::NotAList:
      return "NotAList";
    case Errc::NotARegister:
      return "NotARegister";
    case Errc::NotACursor:
      return "NotACursor";
    case Errc::CursorMismatch:
      return "CursorMismatch";
    case Errc::UnknownReplica:
      return "UnknownReplica";
    case Errc::ParseError:
      return "ParseError";
    case Errc::ScriptError:
      return "ScriptError";
    case Errc::ExpectMismatch:
      return "ExpectMismatch";
    case Errc::TooManyExtensions:
      return "TooManyExtensions";
    case Errc::SyncDiverged:
      return "SyncDiverged";
    case Errc::InvariantViolation:
      return "InvariantViolation";
  }
  return "UnknownError";
}

}  // namespace jcrdt
