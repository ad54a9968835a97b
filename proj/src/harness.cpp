#include "jcrdt/harness.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "jcrdt/apply.hpp"
#include "jcrdt/error.hpp"

namespace jcrdt {

namespace {

// ---------------------------------------------------------------------------
// Random command generation against live state

const std::vector<std::string>& key_pool() {
  static const std::vector<std::string> pool = {"a", "b", "c", "k1", "k2"};
  return pool;
}

Value random_value(Rng& rng, double insert_bias) {
  if (insert_bias > 0 && rng.chance(insert_bias * 0.4)) return Value::empty_list();
  switch (rng.below(9)) {
    case 0: return Value::str("a");
    case 1: return Value::str("b");
    case 2: return Value::str("x");
    case 3: return Value::integer(1);
    case 4: return Value::integer(2);
    case 5: return Value::boolean(true);
    case 6: return Value::null();
    case 7: return Value::empty_map();
    default: return Value::empty_list();
  }
}

std::size_t live_count(const ListNode& list) {
  std::size_t n = 0;
  Key k = Key::head();
  while (true) {
    auto it = list.next.find(k);
    if (it == list.next.end() || it->second == tail_key()) break;
    k = it->second;
    if (!presence(list, k).empty()) ++n;
  }
  return n;
}

struct WalkTarget {
  Expr expr;
  KeyKind final_kind = KeyKind::Doc;
  bool list_position = false;  // final came from idx(): head or element id
};

// Random cursor expression that resolves on this replica: get() steps may
// name fresh keys (the entry need not exist yet), idx() steps stay within
// the live bounds of an existing list.
WalkTarget random_target(Rng& rng, const ReplicaState& replica, double insert_bias) {
  WalkTarget t{Expr::doc(), KeyKind::Doc, false};
  const BranchNode* ctx = &replica.root().branch();
  Key final = Key::doc();

  for (int depth = 0; depth < 4; ++depth) {
    const Node* map_child = ctx ? child_find(*ctx, map_of(final)) : nullptr;
    const Node* list_child = ctx ? child_find(*ctx, list_of(final)) : nullptr;

    bool can_get = final.kind() != KeyKind::Head;
    bool can_idx = list_child != nullptr;
    if ((!can_idx || !rng.chance(insert_bias)) && (rng.chance(0.35) || (!can_get && !can_idx)))
      break;

    if (can_idx && (!can_get || rng.chance(0.5 + insert_bias * 0.4))) {
      std::size_t live = live_count(list_child->list());
      std::uint64_t i = rng.below(live + 1);  // 0 addresses the head
      t.expr = Expr::idx(std::move(t.expr), i);
      t.list_position = true;
      final = idx_resolve(list_child->list(), Key::head(), i);
      t.final_kind = final.kind();
      ctx = &list_child->branch();
    } else if (can_get) {
      std::string key;
      if (map_child && !map_child->branch().presence.empty() && rng.chance(0.6)) {
        const auto& pres = map_child->branch().presence;
        std::size_t pick = rng.below(pres.size());
        auto it = pres.begin();
        std::advance(it, pick);
        key = it->first.is_str() ? it->first.str() : key_pool()[rng.below(key_pool().size())];
      } else {
        key = key_pool()[rng.below(key_pool().size())];
      }
      t.expr = Expr::get(std::move(t.expr), key);
      t.list_position = false;
      final = Key::str(key);
      t.final_kind = KeyKind::Str;
      ctx = map_child ? &map_child->branch() : nullptr;
    } else {
      break;
    }
  }
  return t;
}

int var_counter_for(Rng& rng) { return static_cast<int>(rng.below(8)); }

}  // namespace

Command random_command(Rng& rng, const ReplicaState& replica, double insert_bias) {
  // Occasionally reuse a bound variable; its cursor may be stale but stays
  // valid to apply (list elements are never unlinked).
  if (!replica.vars().empty() && rng.chance(0.2)) {
    const auto& vars = replica.vars();
    auto it = vars.begin();
    std::advance(it, rng.below(vars.size()));
    const Cursor& cur = it->second;
    Expr e = Expr::var(it->first);
    if (cur.final.is_head()) return Command::insert_after(std::move(e), random_value(rng, insert_bias));
    if (cur.final.is_id()) {
      switch (rng.below(3)) {
        case 0: return Command::insert_after(std::move(e), random_value(rng, insert_bias));
        case 1: return Command::del(std::move(e));
        default: return Command::assign(std::move(e), random_value(rng, insert_bias));
      }
    }
    return rng.chance(0.5) ? Command::assign(std::move(e), random_value(rng, insert_bias))
                           : Command::del(std::move(e));
  }

  WalkTarget t = random_target(rng, replica, insert_bias);

  if (rng.chance(0.15 * (1.0 - insert_bias))) {
    return Command::let("v" + std::to_string(var_counter_for(rng)), std::move(t.expr));
  }

  if (t.final_kind == KeyKind::Head) {
    return Command::insert_after(std::move(t.expr), random_value(rng, insert_bias));
  }
  if (t.final_kind == KeyKind::Doc) {
    if (insert_bias > 0 && rng.chance(insert_bias))
      return Command::assign(std::move(t.expr), Value::empty_list());
    return rng.chance(0.85) ? Command::assign(std::move(t.expr), random_value(rng, insert_bias))
                            : Command::del(std::move(t.expr));
  }
  if (t.list_position) {
    if (insert_bias > 0 && rng.chance(insert_bias))
      return Command::insert_after(std::move(t.expr), random_value(rng, insert_bias));
    switch (rng.below(3)) {
      case 0: return Command::insert_after(std::move(t.expr), random_value(rng, insert_bias));
      case 1: return Command::del(std::move(t.expr));
      default: return Command::assign(std::move(t.expr), random_value(rng, insert_bias));
    }
  }
  if (insert_bias > 0 && rng.chance(insert_bias * 0.6))
    return Command::assign(std::move(t.expr), Value::empty_list());
  return rng.chance(0.6) ? Command::assign(std::move(t.expr), random_value(rng, insert_bias))
                         : Command::del(std::move(t.expr));
}

namespace {

const Node* locate(const Node& root, const std::vector<TaggedKey>& path) {
  const Node* node = &root;
  for (const auto& seg : path) {
    if (!node->is_branch()) return nullptr;
    node = child_find(node->branch(), seg);
    if (!node) return nullptr;
  }
  return node;
}

std::pair<Key, Key> neighbours_of(const ListNode& list, const LamportTimestamp& id) {
  Key self = Key::id(id);
  Key before = Key::head();
  for (const auto& [from, to] : list.next) {
    if (to == self) before = from;
  }
  auto it = list.next.find(self);
  Key after = it == list.next.end() ? tail_key() : it->second;
  return {before, after};
}

}  // namespace

ExecutionTrace gen_execution(std::uint64_t seed, const GenParams& params) {
  static const char* names[] = {"p", "q", "r", "s", "t"};
  std::size_t n_replicas = std::min<std::size_t>(std::max<std::size_t>(params.replicas, 1), 5);

  Rng rng(seed);
  std::vector<ReplicaState> replicas;
  replicas.reserve(n_replicas);
  for (std::size_t i = 0; i < n_replicas; ++i) replicas.emplace_back(ReplicaId(names[i]));

  ExecutionTrace trace;
  std::size_t guard = params.ops * 20 + 20;
  while (trace.ops.size() < params.ops && guard-- > 0) {
    if (n_replicas > 1 && rng.chance(params.sync_probability)) {
      std::size_t from = rng.below(n_replicas);
      std::size_t to = rng.below(n_replicas - 1);
      if (to >= from) ++to;
      replicas[from].yield_send();
      replicas[to].yield_recv(replicas[from].send_buffer());
      replicas[to].apply_remote_ready();
      continue;
    }
    ReplicaState& r = replicas[rng.below(n_replicas)];
    std::size_t before = r.queue().size();
    r.exec_command(random_command(rng, r, params.insert_bias));
    if (r.queue().size() == before) continue;  // a let binds, no operation
    const Operation& op = r.queue().back();
    trace.ops.push_back(op);
    trace.per_replica[r.id()].push_back(op.id);
    if (op.mutation.kind == MutationKind::Insert) {
      const Node* list = locate(r.root(), op.cursor.path);
      if (list && list->kind() == NodeKind::List)
        trace.insert_intervals[op.id] = neighbours_of(list->list(), op.id);
    }
  }
  return trace;
}

// ---------------------------------------------------------------------------
// Linear extensions

namespace {

struct DepMasks {
  std::vector<std::uint32_t> dep;  // bit j set: op j must precede op i
  std::size_t n = 0;
};

DepMasks build_masks(const ExecutionTrace& trace) {
  DepMasks m;
  m.n = trace.ops.size();
  if (m.n > 20)
    throw Error(Errc::TooManyExtensions,
                "trace with " + std::to_string(m.n) + " operations is beyond the enumeration bound");
  std::map<LamportTimestamp, std::size_t> index;
  for (std::size_t i = 0; i < m.n; ++i) index[trace.ops[i].id] = i;
  m.dep.assign(m.n, 0);
  for (std::size_t i = 0; i < m.n; ++i) {
    for (const auto& d : trace.ops[i].deps) {
      auto it = index.find(d);
      if (it != index.end()) m.dep[i] |= (1u << it->second);
    }
  }
  return m;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a + b;
  return s < a ? UINT64_MAX : s;
}

std::uint64_t count_from(const DepMasks& m, std::uint32_t mask, std::vector<std::uint64_t>& memo) {
  const std::uint32_t full = m.n == 32 ? 0xFFFFFFFFu : ((1u << m.n) - 1);
  if (mask == full) return 1;
  if (memo[mask] != UINT64_MAX) return memo[mask];
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < m.n; ++i) {
    if (mask & (1u << i)) continue;
    if ((m.dep[i] & mask) != m.dep[i]) continue;
    total = saturating_add(total, count_from(m, mask | (1u << i), memo));
  }
  memo[mask] = total;
  return total;
}

// Visits extensions in a deterministic order; the visitor returns false to
// stop early.
bool visit_extensions(const DepMasks& m, std::vector<std::size_t>& order, std::uint32_t mask,
                      const std::function<bool(const std::vector<std::size_t>&)>& visitor) {
  if (order.size() == m.n) return visitor(order);
  for (std::size_t i = 0; i < m.n; ++i) {
    if (mask & (1u << i)) continue;
    if ((m.dep[i] & mask) != m.dep[i]) continue;
    order.push_back(i);
    bool keep_going = visit_extensions(m, order, mask | (1u << i), visitor);
    order.pop_back();
    if (!keep_going) return false;
  }
  return true;
}

std::vector<std::size_t> sample_extension(const DepMasks& m, Rng& rng) {
  std::vector<std::size_t> order;
  std::uint32_t mask = 0;
  while (order.size() < m.n) {
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < m.n; ++i) {
      if (mask & (1u << i)) continue;
      if ((m.dep[i] & mask) == m.dep[i]) ready.push_back(i);
    }
    std::size_t pick = ready[rng.below(ready.size())];
    order.push_back(pick);
    mask |= (1u << pick);
  }
  return order;
}

}  // namespace

std::uint64_t count_linear_extensions(const ExecutionTrace& trace) {
  if (trace.ops.empty()) return 1;
  DepMasks m = build_masks(trace);
  std::vector<std::uint64_t> memo(std::size_t(1) << m.n, UINT64_MAX);
  return count_from(m, 0, memo);
}

std::vector<std::vector<Operation>> linear_extensions(const ExecutionTrace& trace,
                                                      std::uint64_t bound) {
  std::uint64_t count = count_linear_extensions(trace);
  if (count > bound)
    throw Error(Errc::TooManyExtensions, std::to_string(count) + " extensions exceed the bound of " +
                                             std::to_string(bound));
  std::vector<std::vector<Operation>> out;
  if (trace.ops.empty()) {
    out.emplace_back();
    return out;
  }
  DepMasks m = build_masks(trace);
  std::vector<std::size_t> order;
  visit_extensions(m, order, 0, [&](const std::vector<std::size_t>& ext) {
    std::vector<Operation> history;
    history.reserve(ext.size());
    for (std::size_t i : ext) history.push_back(trace.ops[i]);
    out.push_back(std::move(history));
    return true;
  });
  return out;
}

// ---------------------------------------------------------------------------
// History replay with list invariants

namespace {

using Chains = std::map<std::string, std::vector<Key>>;

void collect_chains(const Node& node, const std::string& path, Chains& out) {
  if (node.kind() == NodeKind::Reg) return;
  if (node.kind() == NodeKind::List) {
    const ListNode& list = node.list();
    std::vector<Key> seq;
    Key k = Key::head();
    std::size_t steps = 0;
    while (true) {
      auto it = list.next.find(k);
      if (it == list.next.end())
        throw Error(Errc::InvariantViolation, "broken chain at " + path + ": no successor of " + k.to_string());
      if (++steps > list.next.size())
        throw Error(Errc::InvariantViolation, "chain at " + path + " does not reach the tail");
      if (it->second == tail_key()) break;
      k = it->second;
      seq.push_back(k);
    }
    if (steps != list.next.size())
      throw Error(Errc::InvariantViolation, "chain at " + path + " skips linked elements");
    out[path] = std::move(seq);
  }
  for (const auto& [tk, child] : node.branch().children) {
    collect_chains(*child, path + "/" + tk.to_string(), out);
  }
}

bool is_subsequence(const std::vector<Key>& small, const std::vector<Key>& big) {
  std::size_t j = 0;
  for (const auto& k : big) {
    if (j < small.size() && small[j] == k) ++j;
  }
  return j == small.size();
}

void check_order_persistence(const Chains& before, const Chains& after) {
  for (const auto& [path, old_seq] : before) {
    auto it = after.find(path);
    if (it == after.end())
      throw Error(Errc::InvariantViolation, "list at " + path + " disappeared");
    if (!is_subsequence(old_seq, it->second))
      throw Error(Errc::InvariantViolation, "existing order not preserved at " + path);
  }
}

void check_insert_interval(const Node& root, const Operation& op,
                           const std::pair<Key, Key>& interval) {
  const Node* node = locate(root, op.cursor.path);
  if (!node || node->kind() != NodeKind::List)
    throw Error(Errc::InvariantViolation, "inserted list not found for " + op.id.to_string());
  const ListNode& list = node->list();
  std::map<Key, long> pos;
  pos[Key::head()] = -1;
  long p = 0;
  Key k = Key::head();
  while (true) {
    auto it = list.next.find(k);
    if (it == list.next.end() || it->second == tail_key()) break;
    k = it->second;
    pos[k] = p++;
  }
  pos[tail_key()] = p;
  auto self = pos.find(Key::id(op.id));
  auto before = pos.find(interval.first);
  auto after = pos.find(interval.second);
  if (self == pos.end() || before == pos.end() || after == pos.end() ||
      before->second >= self->second || after->second <= self->second)
    throw Error(Errc::InvariantViolation,
                "element " + op.id.to_string() + " escaped its source interval");
}

}  // namespace

Node replay_history(const std::vector<Operation>& history,
                    const std::map<LamportTimestamp, std::pair<Key, Key>>* intervals) {
  Node root(NodeKind::Map);
  Chains previous;
  if (intervals) collect_chains(root, "", previous);
  for (const auto& op : history) {
    apply_op(root, op);
    if (!intervals) continue;
    Chains now;
    collect_chains(root, "", now);
    check_order_persistence(previous, now);
    auto it = intervals->find(op.id);
    if (it != intervals->end()) check_insert_interval(root, op, it->second);
    previous = std::move(now);
  }
  return root;
}

// ---------------------------------------------------------------------------
// Convergence oracle

namespace {

Node replay_indices(const ExecutionTrace& trace, const std::vector<std::size_t>& order,
                    bool invariants) {
  std::vector<Operation> history;
  history.reserve(order.size());
  for (std::size_t i : order) history.push_back(trace.ops[i]);
  return replay_history(history, invariants ? &trace.insert_intervals : nullptr);
}

std::vector<Operation> indices_to_history(const ExecutionTrace& trace,
                                          const std::vector<std::size_t>& order) {
  std::vector<Operation> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(trace.ops[i]);
  return out;
}

struct DivergenceSearch {
  bool found = false;
  std::vector<std::size_t> reference_order;
  std::vector<std::size_t> diverging_order;
  std::string reason;
  std::uint64_t checked = 0;
  bool exhaustive = true;
};

// Extension sampling that works for any trace size: repeatedly pick one of
// the causally ready operations.
std::vector<std::size_t> sample_extension_large(const ExecutionTrace& trace, Rng* rng) {
  std::map<LamportTimestamp, std::size_t> index;
  for (std::size_t i = 0; i < trace.ops.size(); ++i) index[trace.ops[i].id] = i;
  std::vector<std::size_t> order;
  std::vector<bool> placed(trace.ops.size(), false);
  IdSet applied;
  while (order.size() < trace.ops.size()) {
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < trace.ops.size(); ++i) {
      if (placed[i]) continue;
      bool ok = true;
      for (const auto& d : trace.ops[i].deps) {
        if (index.count(d) && !applied.count(d)) {
          ok = false;
          break;
        }
      }
      if (ok) ready.push_back(i);
    }
    std::size_t pick = rng ? ready[rng->below(ready.size())] : ready.front();
    placed[pick] = true;
    applied.insert(trace.ops[pick].id);
    order.push_back(pick);
  }
  return order;
}

DivergenceSearch search_divergence(const ExecutionTrace& trace, const ConvergenceOptions& opts) {
  DivergenceSearch result;
  if (trace.ops.empty()) return result;

  bool first = true;
  Node reference(NodeKind::Map);
  auto inspect = [&](const std::vector<std::size_t>& order) {
    ++result.checked;
    Node state(NodeKind::Map);
    try {
      state = replay_indices(trace, order, opts.check_invariants);
    } catch (const Error& e) {
      result.found = true;
      result.diverging_order = order;
      result.reason = e.what();
      return false;
    }
    if (first) {
      reference = std::move(state);
      result.reference_order = order;
      first = false;
      return true;
    }
    if (!state_equal(reference, state)) {
      result.found = true;
      result.diverging_order = order;
      result.reason = "document states diverge";
      return false;
    }
    return true;
  };

  if (trace.ops.size() > 20) {
    // Beyond the enumeration bound: sampled extensions only.
    result.exhaustive = false;
    Rng rng(opts.sample_seed);
    if (!inspect(sample_extension_large(trace, nullptr))) return result;
    for (std::uint64_t s = 0; s < opts.samples; ++s) {
      if (!inspect(sample_extension_large(trace, &rng))) return result;
    }
    return result;
  }

  DepMasks m = build_masks(trace);
  std::vector<std::uint64_t> memo(std::size_t(1) << m.n, UINT64_MAX);
  std::uint64_t count = count_from(m, 0, memo);

  if (count <= opts.max_full_extensions) {
    std::vector<std::size_t> order;
    visit_extensions(m, order, 0, inspect);
  } else {
    result.exhaustive = false;
    Rng rng(opts.sample_seed);
    if (!inspect(sample_extension_large(trace, nullptr))) return result;
    for (std::uint64_t s = 0; s < opts.samples; ++s) {
      if (!inspect(sample_extension(m, rng))) return result;
    }
  }
  return result;
}

ExecutionTrace remove_with_dependents(const ExecutionTrace& trace, const LamportTimestamp& id) {
  std::set<LamportTimestamp> removed = {id};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& op : trace.ops) {
      if (removed.count(op.id)) continue;
      for (const auto& d : op.deps) {
        if (removed.count(d)) {
          removed.insert(op.id);
          grew = true;
          break;
        }
      }
    }
  }
  ExecutionTrace out;
  for (const auto& op : trace.ops) {
    if (!removed.count(op.id)) out.ops.push_back(op);
  }
  for (const auto& [replica, ids] : trace.per_replica) {
    for (const auto& i : ids) {
      if (!removed.count(i)) out.per_replica[replica].push_back(i);
    }
  }
  for (const auto& [i, interval] : trace.insert_intervals) {
    if (!removed.count(i)) out.insert_intervals[i] = interval;
  }
  return out;
}

}  // namespace

Verdict check_convergence(const ExecutionTrace& trace, const ConvergenceOptions& opts) {
  Verdict verdict;
  DivergenceSearch search = search_divergence(trace, opts);
  verdict.checked = search.checked;
  verdict.exhaustive = search.exhaustive;
  if (!search.found) return verdict;

  // Shrink: drop operations (with their dependents) while the divergence
  // persists, then report a minimal diverging pair of histories.
  ExecutionTrace minimal = trace;
  DivergenceSearch minimal_search = search;
  if (opts.shrink) {
    ConvergenceOptions probe = opts;
    probe.shrink = false;
    bool improved = true;
    while (improved) {
      improved = false;
      for (const auto& op : minimal.ops) {
        ExecutionTrace candidate = remove_with_dependents(minimal, op.id);
        if (candidate.ops.size() >= minimal.ops.size()) continue;
        DivergenceSearch s = search_divergence(candidate, probe);
        if (s.found) {
          minimal = std::move(candidate);
          minimal_search = std::move(s);
          improved = true;
          break;
        }
      }
    }
  }

  verdict.pass = false;
  verdict.message = minimal_search.reason + " (" + std::to_string(minimal.ops.size()) +
                    " operations after shrinking)";
  verdict.history_a = indices_to_history(minimal, minimal_search.reference_order);
  verdict.history_b = indices_to_history(minimal, minimal_search.diverging_order);
  try {
    Node a = replay_history(verdict.history_a);
    Node b = replay_history(verdict.history_b);
    verdict.diff = "state A: " + debug_state_json(a) + "\nstate B: " + debug_state_json(b);
  } catch (const Error& e) {
    verdict.diff = e.what();
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Pairwise commutativity oracle

namespace {

bool concurrent(const Operation& a, const Operation& b) {
  return !a.deps.count(b.id) && !b.deps.count(a.id);
}

// Downward closure of a candidate optional-index set: drops members whose
// dependencies are not all inside base+set, repeatedly.
std::set<std::size_t> close_down(const ExecutionTrace& trace, const IdSet& base,
                                 std::set<std::size_t> candidate) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = candidate.begin(); it != candidate.end();) {
      bool ok = true;
      for (const auto& d : trace.ops[*it].deps) {
        if (base.count(d)) continue;
        bool inside = false;
        for (std::size_t j : candidate) {
          if (trace.ops[j].id == d) {
            inside = true;
            break;
          }
        }
        if (!inside) {
          ok = false;
          break;
        }
      }
      if (!ok) {
        it = candidate.erase(it);
        changed = true;
      } else {
        ++it;
      }
    }
  }
  return candidate;
}

}  // namespace

PairwiseReport check_pairwise_commutativity(const ExecutionTrace& trace,
                                            const PairwiseOptions& opts) {
  PairwiseReport report;
  Rng rng(opts.sample_seed);
  const auto& ops = trace.ops;

  for (std::size_t i = 0; i < ops.size() && report.verdict.pass; ++i) {
    for (std::size_t j = i + 1; j < ops.size() && report.verdict.pass; ++j) {
      if (!concurrent(ops[i], ops[j])) continue;  // only concurrent pairs commute by claim
      ++report.pairs_tested;
      bool both_insert = ops[i].mutation.kind == MutationKind::Insert &&
                         ops[j].mutation.kind == MutationKind::Insert;
      if (both_insert && ops[i].cursor.path == ops[j].cursor.path)
        ++report.insert_insert_same_list;
      if (ops[i].mutation.kind == MutationKind::Delete ||
          ops[j].mutation.kind == MutationKind::Delete)
        ++report.delete_any;
      if (ops[i].mutation.kind == MutationKind::Assign ||
          ops[j].mutation.kind == MutationKind::Assign)
        ++report.assign_any;

      IdSet required = ops[i].deps;
      required.insert(ops[j].deps.begin(), ops[j].deps.end());

      // Optional operations that may be part of a prefix: everything that is
      // not the pair, not required, and not causally after either element.
      std::vector<std::size_t> optional;
      for (std::size_t k = 0; k < ops.size(); ++k) {
        if (k == i || k == j) continue;
        if (required.count(ops[k].id)) continue;
        if (ops[k].deps.count(ops[i].id) || ops[k].deps.count(ops[j].id)) continue;
        optional.push_back(k);
      }

      std::vector<std::set<std::size_t>> prefixes;
      if (optional.size() <= 5 &&
          (std::uint64_t(1) << optional.size()) <= opts.max_prefixes_per_pair) {
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << optional.size()); ++mask) {
          std::set<std::size_t> subset;
          for (std::size_t b = 0; b < optional.size(); ++b) {
            if (mask & (std::uint64_t(1) << b)) subset.insert(optional[b]);
          }
          if (close_down(trace, required, subset) == subset) prefixes.push_back(std::move(subset));
        }
      } else {
        prefixes.push_back({});
        prefixes.push_back(close_down(trace, required,
                                      std::set<std::size_t>(optional.begin(), optional.end())));
        for (std::uint64_t s = 0; s + 2 < opts.max_prefixes_per_pair; ++s) {
          std::set<std::size_t> subset;
          for (std::size_t k : optional) {
            if (rng.chance(0.5)) subset.insert(k);
          }
          prefixes.push_back(close_down(trace, required, subset));
        }
      }

      for (const auto& prefix : prefixes) {
        ++report.verdict.checked;
        // Prefix state in trace order (the trace order is causally valid,
        // and the prefix set is downward closed).
        Node base(NodeKind::Map);
        for (std::size_t k = 0; k < ops.size(); ++k) {
          if (required.count(ops[k].id) || prefix.count(k)) apply_op(base, ops[k]);
        }
        Node ab = base;
        apply_op(ab, ops[i]);
        apply_op(ab, ops[j]);
        Node ba = std::move(base);
        apply_op(ba, ops[j]);
        apply_op(ba, ops[i]);
        if (!state_equal(ab, ba)) {
          report.verdict.pass = false;
          report.verdict.message = "operations " + ops[i].id.to_string() + " and " +
                                   ops[j].id.to_string() + " do not commute";
          report.verdict.history_a = {ops[i], ops[j]};
          report.verdict.history_b = {ops[j], ops[i]};
          report.verdict.diff =
              "state A: " + debug_state_json(ab) + "\nstate B: " + debug_state_json(ba);
          break;
        }
      }
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Adversarial delivery driver

Simulation run_adversarial(std::uint64_t seed, const DeliveryPolicy& policy,
                           const AdversarialParams& params) {
  static const char* names[] = {"p", "q", "r", "s", "t"};
  Simulation sim(seed, policy);
  std::size_t n = std::min<std::size_t>(std::max<std::size_t>(params.replicas, 1), 5);
  std::vector<ReplicaId> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(sim.add_replica(ReplicaId(names[i])).id());

  Rng rng(seed ^ 0xADE5A11ULL);
  std::size_t per_command = params.yield_steps / std::max<std::size_t>(params.commands, 1) + 1;
  for (std::size_t c = 0; c < params.commands; ++c) {
    ReplicaState& r = sim.replica(ids[rng.below(ids.size())]);
    r.exec_command(random_command(rng, r));
    sim.run_random(per_command);
  }
  sim.sync_all();
  return sim;
}

}  // namespace jcrdt
