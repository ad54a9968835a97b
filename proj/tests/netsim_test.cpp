#include <doctest.h>

#include "jcrdt/error.hpp"
#include "jcrdt/harness.hpp"
#include "jcrdt/netsim.hpp"
#include "helpers.hpp"

using namespace jcrdt;
using jcrdt::test::ts;

TEST_SUITE_BEGIN("netsim");

namespace {

ReplicaId P{"p"}, Q{"q"}, R{"r"};

void make_doc_op(Simulation& sim, const ReplicaId& id) {
  sim.replica(id).exec_command(Command::assign(Expr::doc(), Value::empty_map()));
}

}  // namespace

TEST_CASE("step composes the network rules") {
  Simulation sim(0);
  sim.add_replica(P);
  sim.add_replica(Q);
  make_doc_op(sim, P);

  sim.step(YieldAction::send_from(P));
  sim.step(YieldAction::transfer(P, Q));
  sim.step(YieldAction::apply_at(Q));
  CHECK(sim.replica(Q).ops() == sim.replica(P).ops());

  std::string before = debug_state_json(sim.replica(Q).root());
  sim.step(YieldAction::transfer(P, Q));  // repeated transfer: set union
  sim.step(YieldAction::apply_at(Q));
  sim.step(YieldAction::noop());
  CHECK(debug_state_json(sim.replica(Q).root()) == before);
  CHECK(sim.replica(Q).recv_buffer().size() == 1);
}

TEST_CASE("unknown replicas are rejected") {
  Simulation sim(0);
  sim.add_replica(P);
  try {
    sim.step(YieldAction::send_from(ReplicaId("ghost")));
    FAIL("expected UnknownReplica");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownReplica);
  }
}

TEST_CASE("equal seeds replay identical traces") {
  auto run = [](std::uint64_t seed) {
    Simulation sim(seed);
    sim.add_replica(P);
    sim.add_replica(Q);
    Rng rng(7);
    for (int i = 0; i < 6; ++i) {
      ReplicaState& r = sim.replica(rng.chance(0.5) ? P : Q);
      r.exec_command(random_command(rng, r));
      sim.run_random(4);
    }
    sim.sync_all();
    return std::pair(sim.trace_text(), sim.replica(P).render());
  };
  auto [trace1, render1] = run(42);
  auto [trace2, render2] = run(42);
  CHECK(trace1 == trace2);
  CHECK(render1 == render2);
  auto [trace3, render3] = run(43);
  CHECK(trace1 != trace3);
  (void)render3;
}

TEST_CASE("a policy without transfers keeps replicas isolated") {
  DeliveryPolicy policy;
  policy.reorder = 1.0;  // always draw weighted random actions
  policy.weight_transfer = 0.0;
  Simulation sim(5, policy);
  sim.add_replica(P);
  sim.add_replica(Q);
  make_doc_op(sim, P);
  make_doc_op(sim, Q);
  sim.run_random(60);
  for (const auto& [id, r] : sim.replicas()) {
    CHECK(r.ops().size() == 1);  // its own operation only
    CHECK(r.recv_buffer().empty());
  }
}

TEST_CASE("sync_all reaches the fixpoint and is idempotent") {
  Simulation sim(1);
  sim.add_replica(P);
  sim.add_replica(Q);
  sim.add_replica(R);
  make_doc_op(sim, P);
  sim.replica(Q).exec_command(Command::assign(Expr::get(Expr::doc(), "x"), Value::integer(1)));
  sim.replica(R).exec_command(Command::assign(Expr::get(Expr::doc(), "y"), Value::integer(2)));

  sim.sync_all();
  const IdSet& ops = sim.replica(P).ops();
  CHECK(ops.size() == 3);
  CHECK(sim.replica(Q).ops() == ops);
  CHECK(sim.replica(R).ops() == ops);
  CHECK(documents_equal(sim.replica(P), sim.replica(Q)));
  CHECK(documents_equal(sim.replica(P), sim.replica(R)));

  std::string settled = debug_state_json(sim.replica(P).root());
  sim.sync_all();  // already synced: a no-op on states
  CHECK(debug_state_json(sim.replica(P).root()) == settled);
}

TEST_CASE("send buffers carry only locally generated operations") {
  // A relay via q does not forward p's operations; r needs a direct
  // exchange with p (sync_all provides one for every ordered pair).
  Simulation sim(2);
  sim.add_replica(P);
  sim.add_replica(Q);
  sim.add_replica(R);
  make_doc_op(sim, P);

  sim.step(YieldAction::send_from(P));
  sim.step(YieldAction::transfer(P, Q));
  sim.step(YieldAction::apply_at(Q));
  CHECK(sim.replica(Q).ops().size() == 1);

  sim.step(YieldAction::send_from(Q));
  sim.step(YieldAction::transfer(Q, R));
  sim.step(YieldAction::apply_at(R));
  CHECK(sim.replica(R).ops().empty());  // nothing of p's was forwarded

  sim.step(YieldAction::transfer(P, R));
  sim.step(YieldAction::apply_at(R));
  CHECK(sim.replica(R).ops().size() == 1);
}

TEST_CASE("duplication and reordering never break convergence") {
  DeliveryPolicy policy;
  policy.reorder = 0.9;
  policy.duplication = 3;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Simulation sim = run_adversarial(seed, policy, {3, 8, 24});
    const ReplicaState* first = nullptr;
    for (const auto& [id, r] : sim.replicas()) {
      if (!first) {
        first = &r;
        continue;
      }
      CHECK(documents_equal(*first, r));
    }
  }
}

TEST_SUITE_END();
