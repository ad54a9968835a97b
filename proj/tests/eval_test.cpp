#include <doctest.h>

#include "jcrdt/error.hpp"
#include "jcrdt/eval.hpp"
#include "jcrdt/replica.hpp"
#include "helpers.hpp"

using namespace jcrdt;
using jcrdt::test::ts;
using jcrdt::test::sync_pair;

TEST_SUITE_BEGIN("eval");

namespace {

ReplicaState shopping_replica() {
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "shopping"), Value::empty_list()));
  p.exec_command(Command::let("head", Expr::idx(Expr::get(Expr::doc(), "shopping"), 0)));
  p.exec_command(Command::insert_after(Expr::var("head"), Value::str("eggs")));
  p.exec_command(Command::let("eggs", Expr::idx(Expr::get(Expr::doc(), "shopping"), 1)));
  p.exec_command(Command::insert_after(Expr::var("head"), Value::str("cheese")));
  p.exec_command(Command::insert_after(Expr::var("eggs"), Value::str("milk")));
  return p;
}

}  // namespace

TEST_CASE("doc resolves to the root cursor") {
  ReplicaState p(ReplicaId("p"));
  Cursor c = resolve(p, Expr::doc());
  CHECK(c.path.empty());
  CHECK(c.final == Key::doc());
}

TEST_CASE("cursor through the shopping list") {
  ReplicaState p = shopping_replica();
  // ops: 1 root map, 2 list, 3 eggs, 4 cheese, 5 milk. Index 1 is "cheese",
  // the element inserted by operation (4,p).
  Cursor c = resolve(p, Expr::idx(Expr::get(Expr::doc(), "shopping"), 1));
  REQUIRE(c.path.size() == 2);
  CHECK(c.path[0] == map_of(Key::doc()));
  CHECK(c.path[1] == list_of(Key::str("shopping")));
  CHECK(c.final == Key::id(ts(4, "p")));

  Cursor at_head = resolve(p, Expr::idx(Expr::get(Expr::doc(), "shopping"), 0));
  CHECK(at_head.final == Key::head());

  CHECK(resolve(p, Expr::idx(Expr::get(Expr::doc(), "shopping"), 2)) ==
        Cursor{{map_of(Key::doc()), list_of(Key::str("shopping"))}, Key::id(ts(3, "p"))});
}

TEST_CASE("get never follows the head and vars must be bound") {
  ReplicaState p = shopping_replica();
  CHECK_THROWS_AS((void)resolve(p, Expr::get(Expr::var("head"), "x")), Error);
  try {
    (void)resolve(p, Expr::get(Expr::idx(Expr::get(Expr::doc(), "shopping"), 0), "x"));
    FAIL("expected GetOnHead");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::GetOnHead);
  }
  try {
    (void)resolve(p, Expr::var("nope"));
    FAIL("expected UnboundVariable");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnboundVariable);
  }
}

TEST_CASE("idx iteration skips tombstones") {
  ReplicaState p(ReplicaId("p"));
  p.exec_command(Command::assign(Expr::doc(), Value::empty_list()));
  p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 0), Value::str("a")));
  p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 1), Value::str("b")));
  p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), 2), Value::str("c")));
  p.exec_command(Command::del(Expr::idx(Expr::doc(), 2)));  // tombstones "b"

  const Node* list = child_find(p.root().branch(), list_of(Key::doc()));
  REQUIRE(list != nullptr);

  CHECK(idx_resolve(list->list(), Key::head(), 0) == Key::head());
  CHECK(idx_resolve(list->list(), Key::head(), 1) == Key::id(ts(2, "p")));  // "a"
  CHECK(idx_resolve(list->list(), Key::head(), 2) == Key::id(ts(4, "p")));  // "c", skipping "b"
  try {
    (void)idx_resolve(list->list(), Key::head(), 3);
    FAIL("expected IndexOutOfBounds");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::IndexOutOfBounds);
  }
}

TEST_CASE("idx agrees with the live-projection oracle") {
  // Oracle: filter the chain on non-empty presence, then index directly.
  Rng rng(2024);
  for (int round = 0; round < 50; ++round) {
    ReplicaState p(ReplicaId("p"));
    p.exec_command(Command::assign(Expr::doc(), Value::empty_list()));
    std::size_t live = 0;
    std::size_t inserted = 0;
    for (int step = 0; step < 12; ++step) {
      if (live > 0 && rng.chance(0.3)) {
        p.exec_command(Command::del(Expr::idx(Expr::doc(), 1 + rng.below(live))));
        --live;
      } else {
        p.exec_command(Command::insert_after(Expr::idx(Expr::doc(), rng.below(live + 1)),
                                             Value::integer(static_cast<std::int64_t>(step))));
        ++live;
        ++inserted;
      }
    }
    const ListNode& list = child_find(p.root().branch(), list_of(Key::doc()))->list();
    std::vector<Key> projection;
    Key k = Key::head();
    while (true) {
      auto it = list.next.find(k);
      if (it == list.next.end() || it->second == tail_key()) break;
      k = it->second;
      if (!presence(list, k).empty()) projection.push_back(k);
    }
    REQUIRE(projection.size() == live);
    for (std::size_t i = 1; i <= projection.size(); ++i) {
      CHECK(idx_resolve(list, Key::head(), i) == projection[i - 1]);
    }
    CHECK_THROWS_AS((void)idx_resolve(list, Key::head(), projection.size() + 1), Error);
  }
}

TEST_CASE("keys of a map") {
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

  Cursor colors = resolve(p, Expr::get(Expr::doc(), "colors"));
  CHECK(keys(p, colors) == std::set<std::string>{"red", "green"});
  CHECK(keys(q, colors) == std::set<std::string>{"red", "green"});

  ReplicaState fresh(ReplicaId("f"));
  fresh.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  fresh.exec_command(Command::assign(Expr::get(Expr::doc(), "m"), Value::empty_map()));
  CHECK(keys(fresh, resolve(fresh, Expr::get(Expr::doc(), "m"))).empty());

  fresh.exec_command(Command::assign(Expr::get(Expr::get(Expr::doc(), "m"), "only"), Value::null()));
  fresh.exec_command(Command::del(Expr::get(Expr::get(Expr::doc(), "m"), "only")));
  CHECK(keys(fresh, resolve(fresh, Expr::get(Expr::doc(), "m"))).empty());
}

TEST_CASE("values of a register") {
  ReplicaState p{ReplicaId("p")}, q{ReplicaId("q")};
  p.exec_command(Command::assign(Expr::doc(), Value::empty_map()));
  p.exec_command(Command::assign(Expr::get(Expr::doc(), "key"), Value::str("A")));
  sync_pair(p, q);
  Cursor key = resolve(p, Expr::get(Expr::doc(), "key"));
  CHECK(values(p, key) == std::set<Value>{Value::str("A")});

  p.exec_command(Command::assign(Expr::get(Expr::doc(), "key"), Value::str("B")));
  q.exec_command(Command::assign(Expr::get(Expr::doc(), "key"), Value::str("C")));
  sync_pair(p, q);
  CHECK(values(p, key) == std::set<Value>{Value::str("B"), Value::str("C")});
  CHECK(values(q, key) == values(p, key));

  try {
    (void)values(p, Cursor::root());  // the root holds a map here
    FAIL("expected NotARegister");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotARegister);
  }
}

TEST_CASE("resolution never mutates the replica") {
  ReplicaState p = shopping_replica();
  std::string before = debug_state_json(p.root());
  (void)resolve(p, Expr::idx(Expr::get(Expr::doc(), "shopping"), 2));
  try {
    (void)resolve(p, Expr::get(Expr::get(Expr::doc(), "missing"), "deeper"));
  } catch (const Error&) {
  }
  try {
    (void)keys(p, resolve(p, Expr::get(Expr::doc(), "missing")));
  } catch (const Error&) {
  }
  CHECK(debug_state_json(p.root()) == before);
}

TEST_CASE("cursors identify elements, not indices") {
  ReplicaState p = shopping_replica();
  // "eggs" moved from index 1 to index 2 when "cheese" was inserted at the
  // head, but the element cursor still names the same id.
  Cursor eggs_now = resolve(p, Expr::idx(Expr::get(Expr::doc(), "shopping"), 2));
  CHECK(eggs_now == p.vars().at("eggs"));
}

TEST_SUITE_END();
