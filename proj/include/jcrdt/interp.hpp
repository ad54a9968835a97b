#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "jcrdt/netsim.hpp"
#include "jcrdt/replica.hpp"

namespace jcrdt {

/// One script directive: either a command of the editing language run on
/// the current replica, or a driver instruction (switch replica, exchange
/// messages, render, assert a rendering).
struct Directive {
  enum class Kind { ReplicaSwitch, Cmd, Sync, YieldSteps, Render, Expect };

  Kind kind = Kind::Sync;
  ReplicaId replica;             // ReplicaSwitch; Render/Expect target if has_replica
  bool has_replica = false;      // Render/Expect: explicit target given
  Command command;               // Cmd
  std::uint64_t steps = 1;       // YieldSteps
  std::string expected;          // Expect: canonical JSON text
  int line = 0;
};

struct Script {
  std::vector<Directive> directives;
};

/// Parses a script. Concrete syntax of commands follows the editing
/// language (`doc.get("k") := v`, `expr.insertAfter(v)`, `expr.delete`,
/// `let x = expr`, `yield`); driver directives are `replica <id>;`,
/// `sync;`, `yield <n>;`, `render [<id>];`, `expect [<id>] <json>;`.
/// `//` starts a line comment. Throws Error(ParseError) with line/column
/// and the expected token set on bad input.
Script parse_script(const std::string& text);

struct RunOptions {
  std::uint64_t seed = 0;
  DeliveryPolicy policy;
};

struct RunResult {
  std::map<ReplicaId, std::string> final_renders;
  std::vector<std::string> render_lines;  // one "<replica> <json>" per render directive
  std::string trace;
  std::map<ReplicaId, std::string> final_states;  // raw state dumps
};

/// Executes the directives in order against a fresh simulation. Expect
/// mismatches throw Error(ExpectMismatch) with a diff; evaluation errors
/// are rethrown with the replica and directive position attached.
RunResult run_script(const Script& script, const RunOptions& opts = {});

/// Re-prints a command in concrete syntax (parse . print is the identity
/// on the command sublanguage).
std::string print_command(const Command& cmd);

}  // namespace jcrdt
