#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "jcrdt/error.hpp"
#include "jcrdt/harness.hpp"
#include "jcrdt/interp.hpp"

namespace {

jcrdt::DeliveryPolicy parse_policy(const std::string& text) {
  jcrdt::DeliveryPolicy policy;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw jcrdt::Error(jcrdt::Errc::ParseError, "policy entries look like key=value: " + item);
    std::string key = item.substr(0, eq);
    std::string value = item.substr(eq + 1);
    if (key == "reorder")
      policy.reorder = std::stod(value);
    else if (key == "dup")
      policy.duplication = std::stoi(value);
    else
      throw jcrdt::Error(jcrdt::Errc::ParseError, "unknown policy key '" + key + "'");
  }
  return policy;
}

int cmd_run(const std::string& path, std::uint64_t seed, const std::string& policy_text,
            bool dump_state, const std::string& trace_path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "cannot open script: " << path << "\n";
    return 2;
  }
  std::stringstream buffer;
  buffer << in.rdbuf();

  jcrdt::RunOptions opts;
  opts.seed = seed;
  opts.policy = parse_policy(policy_text);

  jcrdt::RunResult result;
  try {
    jcrdt::Script script = jcrdt::parse_script(buffer.str());
    result = jcrdt::run_script(script, opts);
  } catch (const jcrdt::Error& e) {
    std::cerr << e.what() << "\n";
    return e.code() == jcrdt::Errc::ExpectMismatch ? 1 : 2;
  }

  for (const auto& line : result.render_lines) std::cout << line << "\n";
  for (const auto& [id, render] : result.final_renders)
    std::cout << "final " << id.text() << " " << render << "\n";
  if (dump_state) {
    for (const auto& [id, state] : result.final_states)
      std::cout << "state " << id.text() << " " << state << "\n";
  }
  if (!trace_path.empty()) {
    std::ofstream out(trace_path, std::ios::binary);
    if (!out) {
      std::cerr << "cannot write trace: " << trace_path << "\n";
      return 2;
    }
    out << result.trace;
  }
  return 0;
}

int cmd_check(std::uint64_t seed_from, std::uint64_t seed_to, std::size_t replicas,
              std::size_t ops, double sync_probability) {
  jcrdt::GenParams params;
  params.replicas = replicas;
  params.ops = ops;
  params.sync_probability = sync_probability;

  bool all_pass = true;
  for (std::uint64_t seed = seed_from; seed <= seed_to; ++seed) {
    jcrdt::ExecutionTrace trace = jcrdt::gen_execution(seed, params);
    jcrdt::Verdict verdict = jcrdt::check_convergence(trace);
    if (verdict.pass) {
      std::cout << "seed " << seed << ": PASS (" << trace.ops.size() << " ops, "
                << verdict.checked << (verdict.exhaustive ? " extensions)" : " sampled extensions)")
                << "\n";
      continue;
    }
    all_pass = false;
    std::cout << "seed " << seed << ": FAIL " << verdict.message << "\n";
    std::cout << "history A:\n";
    for (const auto& op : verdict.history_a) std::cout << "  " << jcrdt::encode_operation(op) << "\n";
    std::cout << "history B:\n";
    for (const auto& op : verdict.history_b) std::cout << "  " << jcrdt::encode_operation(op) << "\n";
    std::cout << verdict.diff << "\n";
  }
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Replicated JSON document interpreter and convergence checker"};
  app.require_subcommand(1);

  std::string script_path;
  std::uint64_t seed = 0;
  std::string policy_text;
  bool dump_state = false;
  std::string trace_path;
  auto* run = app.add_subcommand("run", "Execute a script against a simulated network");
  run->add_option("script", script_path, "script file (UTF-8, LF line endings)")->required();
  run->add_option("--seed", seed, "seed for the simulated network");
  run->add_option("--policy", policy_text, "delivery policy, e.g. reorder=0.5,dup=3");
  run->add_flag("--dump-state", dump_state, "also dump raw replica state");
  run->add_option("--trace", trace_path, "write the action trace to this file");

  std::string seed_range = "0..9";
  std::size_t replicas = 3;
  std::size_t ops = 8;
  double sync_probability = 0.3;
  auto* check = app.add_subcommand("check", "Verify convergence over random executions");
  check->add_option("--seed-range", seed_range, "inclusive seed range A..B");
  check->add_option("--replicas", replicas, "number of replicas (max 5)");
  check->add_option("--ops", ops, "operations per execution");
  check->add_option("--sync-prob", sync_probability, "probability of a sync step");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(script_path, seed, policy_text, dump_state, trace_path);
    auto dots = seed_range.find("..");
    if (dots == std::string::npos) {
      std::cerr << "--seed-range expects A..B\n";
      return 2;
    }
    std::uint64_t from = std::stoull(seed_range.substr(0, dots));
    std::uint64_t to = std::stoull(seed_range.substr(dots + 2));
    return cmd_check(from, to, replicas, ops, sync_probability);
  } catch (const jcrdt::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
}
