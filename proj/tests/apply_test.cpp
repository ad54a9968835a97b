#include <doctest.h>

#include "jcrdt/apply.hpp"
#include "jcrdt/error.hpp"
#include "jcrdt/replica.hpp"
#include "helpers.hpp"

using namespace jcrdt;
using jcrdt::test::ts;
using jcrdt::test::sync_pair;
using jcrdt::test::transfer;

TEST_SUITE_BEGIN("apply");

TEST_CASE("assign descends, asserts presence, and writes the register") {
  Node root(NodeKind::Map);
  Operation op;
  op.id = ts(1, "p");
  op.cursor.path = {map_of(Key::doc())};
  op.cursor.final = Key::str("key");
  op.mutation = Mutation::assign(Value::str("A"));
  apply_op(root, op);

  CHECK(presence(root.branch(), Key::doc()) == IdSet{ts(1, "p")});
  const Node* doc = child_find(root.branch(), map_of(Key::doc()));
  REQUIRE(doc != nullptr);
  CHECK(presence(doc->branch(), Key::str("key")) == IdSet{ts(1, "p")});
  const Node* reg = child_find(doc->branch(), reg_of(Key::str("key")));
  REQUIRE(reg != nullptr);
  REQUIRE(reg->reg().writes.size() == 1);
  CHECK(reg->reg().writes.at(ts(1, "p")) == Value::str("A"));
}

TEST_CASE("application touches only the cursor path") {
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "left"), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::get(Expr::doc(), "left"), "x"), Value::integer(1)));
  const Node* doc = child_find(p.root().branch(), map_of(Key::doc()));
  std::string left_before = debug_state_json(*child_find(doc->branch(), map_of(Key::str("left"))));

  p.exec_command(Command::assign(Expr::get(Expr::get(Expr::doc(), "right"), "y"), Value::integer(2)));
  doc = child_find(p.root().branch(), map_of(Key::doc()));
  CHECK(debug_state_json(*child_find(doc->branch(), map_of(Key::str("left")))) == left_before);
}

TEST_CASE("concurrent register assignment keeps both values in either order") {
  // A is overwritten; B and C are concurrent with each other.
  Operation init;
  init.id = ts(1, "s");
  init.cursor.path = {map_of(Key::doc())};
  init.cursor.final = Key::str("key");
  init.mutation = Mutation::assign(Value::str("A"));

  Operation b = init;
  b.id = ts(2, "p");
  b.deps = {init.id};
  b.mutation = Mutation::assign(Value::str("B"));
  Operation c = init;
  c.id = ts(2, "q");
  c.deps = {init.id};
  c.mutation = Mutation::assign(Value::str("C"));

  Node order1(NodeKind::Map);
  for (const auto& op : {init, b, c}) apply_op(order1, op);
  Node order2(NodeKind::Map);
  for (const auto& op : {init, c, b}) apply_op(order2, op);

  CHECK(state_equal(order1, order2));
  const Node* doc = child_find(order1.branch(), map_of(Key::doc()));
  const Node* reg = child_find(doc->branch(), reg_of(Key::str("key")));
  REQUIRE(reg != nullptr);
  CHECK(reg->reg().writes ==
        std::map<LamportTimestamp, Value>{{b.id, Value::str("B")}, {c.id, Value::str("C")}});
}

TEST_CASE("overwriting a map clears prior entries but keeps concurrent ones") {
  // "red" is added inside the map while the whole map is blanked out.
  ReplicaState p{ReplicaId("p")}, q{ReplicaId("q")};
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "colors"), Value::empty_map()));
  p.exec_command(
      Command::assign(Expr::get(Expr::get(Expr::doc(), "colors"), "blue"), Value::str("#0000ff")));
  sync_pair(p, q);
  p.exec_command(
      Command::assign(Expr::get(Expr::get(Expr::doc(), "colors"), "red"), Value::str("#ff0000")));
  q.exec_command(Command::assign(Expr::get(Expr::doc(), "colors"), Value::empty_map()));
  q.exec_command(
      Command::assign(Expr::get(Expr::get(Expr::doc(), "colors"), "green"), Value::str("#00ff00")));
  sync_pair(p, q);

  CHECK(documents_equal(p, q));
  CHECK(p.render() == R"({"colors":{"red":"#ff0000","green":"#00ff00"}})");
}

TEST_CASE("assign over empty state is a plain write") {
  Node root(NodeKind::Map);
  Operation op;
  op.id = ts(1, "p");
  op.cursor.path = {map_of(Key::doc())};
  op.cursor.final = Key::str("k");
  op.mutation = Mutation::assign(Value::integer(7));
  apply_op(root, op);  // clear of an absent key is the identity
  const Node* doc = child_find(root.branch(), map_of(Key::doc()));
  CHECK(child_find(doc->branch(), reg_of(Key::str("k")))->reg().writes.size() == 1);
}

TEST_CASE("first operations of two replicas inserting at the same head") {
  // Two fresh replicas (no shared history at all) insert at the head; the
  // descent creates the list on demand and the chain still merges the same
  // way around: head -> (1,q) -> (1,p) -> tail.
  Operation ip;
  ip.id = ts(1, "p");
  ip.cursor.path = {list_of(Key::doc())};
  ip.cursor.final = Key::head();
  ip.mutation = Mutation::insert(Value::str("p"));
  Operation iq = ip;
  iq.id = ts(1, "q");
  iq.mutation = Mutation::insert(Value::str("q"));

  for (bool p_first : {true, false}) {
    Node root(NodeKind::Map);
    apply_op(root, p_first ? ip : iq);
    apply_op(root, p_first ? iq : ip);
    const ListNode& list = child_find(root.branch(), list_of(Key::doc()))->list();
    CHECK(list.next.at(Key::head()) == Key::id(iq.id));
    CHECK(list.next.at(Key::id(iq.id)) == Key::id(ip.id));
    CHECK(list.next.at(Key::id(ip.id)) == tail_key());
  }
}

TEST_CASE("concurrent head inserts order by descending id in either order") {
  Operation make_list;
  make_list.id = ts(1, "s");
  make_list.cursor = Cursor::root();
  make_list.mutation = Mutation::assign(Value::empty_list());

  Operation ip;
  ip.id = ts(2, "p");
  ip.deps = {make_list.id};
  ip.cursor.path = {list_of(Key::doc())};
  ip.cursor.final = Key::head();
  ip.mutation = Mutation::insert(Value::str("from-p"));
  Operation iq = ip;
  iq.id = ts(2, "q");
  iq.mutation = Mutation::insert(Value::str("from-q"));

  for (bool p_first : {true, false}) {
    Node root(NodeKind::Map);
    apply_op(root, make_list);
    apply_op(root, p_first ? ip : iq);
    apply_op(root, p_first ? iq : ip);
    const ListNode& list = child_find(root.branch(), list_of(Key::doc()))->list();
    CHECK(list.next.at(Key::head()) == Key::id(iq.id));  // greater id first
    CHECK(list.next.at(Key::id(iq.id)) == Key::id(ip.id));
    CHECK(list.next.at(Key::id(ip.id)) == tail_key());
  }
}

TEST_CASE("merged lists keep per-replica runs adjacent") {
  // Exchange in both directions.
  auto build = [](const char* name, const char* first, const char* second) {
    ReplicaState r{ReplicaId(name)};
    r.exec_command(Command::assign(Expr::get(Expr::doc(), "grocery"), Value::empty_list()));
    r.exec_command(
        Command::insert_after(Expr::idx(Expr::get(Expr::doc(), "grocery"), 0), Value::str(first)));
    r.exec_command(
        Command::insert_after(Expr::idx(Expr::get(Expr::doc(), "grocery"), 1), Value::str(second)));
    return r;
  };
  ReplicaState p = build("p", "milk", "flour");
  ReplicaState q = build("q", "eggs", "ham");
  sync_pair(p, q);
  CHECK(documents_equal(p, q));
  CHECK(p.render() == R"({"grocery":["eggs","ham","milk","flour"]})");
}

TEST_CASE("delete tombstones an element and a concurrent update resurrects it") {
  ReplicaState p{ReplicaId("p")}, q{ReplicaId("q")};
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "todo"), Value::empty_list()));
  p.exec_command(
      Command::insert_after(Expr::idx(Expr::get(Expr::doc(), "todo"), 0), Value::empty_map()));
  Expr item = Expr::idx(Expr::get(Expr::doc(), "todo"), 1);
  p.exec_command(Command::assign(Expr::get(item, "title"), Value::str("buy milk")));
  p.exec_command(Command::assign(Expr::get(item, "done"), Value::boolean(false)));
  sync_pair(p, q);

  p.exec_command(Command::del(item));
  CHECK(p.render() == R"({"todo":[]})");
  q.exec_command(Command::assign(Expr::get(item, "done"), Value::boolean(true)));
  sync_pair(p, q);

  CHECK(documents_equal(p, q));
  CHECK(p.render() == R"({"todo":[{"done":true}]})");
}

TEST_CASE("deleting an absent key changes nothing") {
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  std::string before = debug_state_json(p.root());
  Operation del;
  del.id = ts(9, "x");
  del.deps = {ts(1, "p")};
  del.cursor.path = {map_of(Key::doc())};
  del.cursor.final = Key::str("ghost");
  del.mutation = Mutation::del();
  Node root = p.root();
  apply_op(root, del);
  CHECK(debug_state_json(root) == before);
}

TEST_CASE("clear on registers") {
  Node node(NodeKind::Map);
  BranchNode& b = node.branch();
  Key k = Key::str("k");
  child_get_or_create(b, reg_of(k)).reg().writes = {{ts(1, "p"), Value::str("A")},
                                                    {ts(2, "q"), Value::str("B")}};

  SUBCASE("all writers in deps empties the register") {
    IdSet survivors = clear(b, IdSet{ts(1, "p"), ts(2, "q"), ts(3, "p")}, reg_of(k));
    CHECK(survivors.empty());
    CHECK(child_find(b, reg_of(k))->reg().writes.empty());
  }
  SUBCASE("concurrent writers survive") {
    IdSet survivors = clear(b, IdSet{ts(1, "p")}, reg_of(k));
    CHECK(survivors == IdSet{ts(2, "q")});
    CHECK(child_find(b, reg_of(k))->reg().writes ==
          std::map<LamportTimestamp, Value>{{ts(2, "q"), Value::str("B")}});
  }
  SUBCASE("clearing an absent tag is the identity") {
    IdSet survivors = clear(b, IdSet{ts(1, "p")}, map_of(k));
    CHECK(survivors.empty());
  }
}

TEST_CASE("clear_elem combines survivors with stored presence minus deps") {
  Node node(NodeKind::Map);
  BranchNode& b = node.branch();
  Key k = Key::str("k");
  child_get_or_create(b, reg_of(k)).reg().writes = {{ts(2, "q"), Value::str("B")}};
  set_presence(b, k, IdSet{ts(1, "p"), ts(2, "q")});

  IdSet pres = clear_elem(b, IdSet{ts(1, "p")}, k);
  CHECK(pres == IdSet{ts(2, "q")});
  CHECK(presence(b, k) == IdSet{ts(2, "q")});

  // Element touched only by ops in deps ends up absent.
  pres = clear_elem(b, IdSet{ts(1, "p"), ts(2, "q")}, k);
  CHECK(pres.empty());
  CHECK(presence(b, k).empty());

  // Absent key under every tag: unchanged, empty result.
  std::string before = debug_state_json(node);
  CHECK(clear_elem(b, IdSet{ts(1, "p")}, Key::str("missing")).empty());
  CHECK(debug_state_json(node) == before);
}

TEST_CASE("insert via a tombstone cursor still works") {
  // The cursor element is deleted concurrently; the insert still lands
  // after it because tombstones stay linked.
  ReplicaState p{ReplicaId("p")}, q{ReplicaId("q")};
  p.exec_command(Command::assign(Expr::doc(), Value::empty_list()));
  p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 0), Value::str("a")));
  p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 1), Value::str("b")));
  sync_pair(p, q);
  p.exec_command(Command::del(Expr::idx(Expr::doc(), 1)));        // delete "a"
  q.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 1), Value::str("x")));  // after "a"
  sync_pair(p, q);
  CHECK(documents_equal(p, q));
  CHECK(p.render() == R"(["x","b"])");
}

TEST_CASE("deletion asserts nothing along its path") {
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::get(Expr::doc(), "m"), "k"), Value::integer(1)));
  IdSet doc_pres = presence(p.root().branch(), Key::doc());

  p.exec_command(Command::del(Expr::get(Expr::get(Expr::doc(), "m"), "k")));
  // The delete descended through doc and "m" without adding its id there.
  CHECK(presence(p.root().branch(), Key::doc()) == doc_pres);
  const Node* doc = child_find(p.root().branch(), map_of(Key::doc()));
  const Node* m = child_find(doc->branch(), map_of(Key::str("m")));
  CHECK(presence(m->branch(), Key::str("k")).empty());
  CHECK(presence(doc->branch(), Key::str("m")) == IdSet{ts(2, "p")});
}

TEST_CASE("overwriting with a container clears every sibling tag") {
  // The key first holds a list, then is overwritten with {}: the element
  // and the old register write are gone, only the new map remains visible.
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "k"), Value::str("prim")));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "k"), Value::empty_list()));
  p.exec_command(Command::insert_after(Expr::idx(Expr::get(Expr::doc(), "k"), 0), Value::integer(1)));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "k"), Value::empty_map()));
  CHECK(p.render() == R"({"k":{}})");
}

TEST_CASE("assigning a primitive clears only the register tag") {
  // The rules overwrite just the register when a primitive is assigned; a
  // map previously stored under the same key stays visible alongside it.
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "k"), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "k"), Value::str("v")));
  CHECK(p.render() == R"({"k?map":{},"k?reg":"v"})");
}

TEST_CASE("type conflict on a list element") {
  ReplicaState p{ReplicaId("p")}, q{ReplicaId("q")};
  p.exec_command(Command::assign(Expr::doc(), Value::empty_list()));
  p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 0), Value::str("plain")));
  sync_pair(p, q);
  p.exec_command(Command::assign(Expr::idx(Expr::doc(), 1), Value::empty_map()));
  q.exec_command(Command::assign(Expr::idx(Expr::doc(), 1), Value::integer(9)));
  sync_pair(p, q);
  CHECK(documents_equal(p, q));
  CHECK(p.render() == R"([{"?map":{},"?reg":9}])");
}

TEST_CASE("pairwise commutativity over random concurrent pairs") {
  // Lemmas 4-6 as properties over freshly generated concurrent pairs.
  std::size_t insert_insert = 0, delete_any = 0, assign_any = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    ExecutionTrace trace = gen_execution(seed, {3, 8, 0.4, 0.7});
    PairwiseReport report = check_pairwise_commutativity(trace);
    CHECK(report.verdict.pass);
    if (!report.verdict.pass) {
      MESSAGE(report.verdict.message);
      break;
    }
    insert_insert += report.insert_insert_same_list;
    delete_any += report.delete_any;
    assign_any += report.assign_any;
  }
  CHECK(insert_insert > 0);
  CHECK(delete_any > 0);
  CHECK(assign_any > 0);
}

TEST_SUITE_END();
