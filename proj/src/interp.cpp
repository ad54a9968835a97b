#include "jcrdt/interp.hpp"

#include <cctype>
#include <json.hpp>

#include "jcrdt/error.hpp"

namespace jcrdt {

using ordered_json = nlohmann::ordered_json;

namespace {

enum class Tok { Ident, Str, Num, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;   // identifier, punctuation, or raw number spelling
  std::string value;  // unescaped string payload
  int line = 1;
  int col = 1;
};

bool is_reserved(const std::string& s) {
  static const std::set<std::string> words = {
      "doc",  "let",    "yield",  "delete", "insertAfter", "get",    "idx",  "keys",
      "values", "true", "false",  "null",   "replica",     "sync",   "render", "expect"};
  return words.count(s) != 0;
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t = next_token();
      bool end = t.kind == Tok::End;
      out.push_back(std::move(t));
      if (end) break;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw Error(Errc::ParseError,
                "line " + std::to_string(line_) + " col " + std::to_string(col_) + ": " + what);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  char peek2() const { return pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0'; }

  char advance() {
    char c = text_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < text_.size()) {
      char c = peek();
      if (c == '/' && peek2() == '/') {
        while (pos_ < text_.size() && peek() != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token make(Tok kind, std::string text, std::string value = "") {
    Token t;
    t.kind = kind;
    t.text = std::move(text);
    t.value = std::move(value);
    t.line = tok_line_;
    t.col = tok_col_;
    return t;
  }

  Token next_token() {
    tok_line_ = line_;
    tok_col_ = col_;
    if (pos_ >= text_.size()) return make(Tok::End, "<end>");
    char c = peek();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return ident();
    if (std::isdigit(static_cast<unsigned char>(c)) || (c == '-' && std::isdigit(static_cast<unsigned char>(peek2()))))
      return number();
    if (c == '"') return string_lit();
    if (c == ':' && peek2() == '=') {
      advance();
      advance();
      return make(Tok::Punct, ":=");
    }
    static const std::string singles = ".();,{}[]:=";
    if (singles.find(c) != std::string::npos) {
      advance();
      return make(Tok::Punct, std::string(1, c));
    }
    fail(std::string("unexpected character '") + c + "'");
  }

  Token ident() {
    std::string s;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_'))
      s += advance();
    return make(Tok::Ident, std::move(s));
  }

  Token number() {
    std::string s;
    if (peek() == '-') s += advance();
    auto digits = [&] {
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("malformed number");
      while (std::isdigit(static_cast<unsigned char>(peek()))) s += advance();
    };
    digits();
    if (peek() == '.') {
      s += advance();
      digits();
    }
    if (peek() == 'e' || peek() == 'E') {
      s += advance();
      if (peek() == '+' || peek() == '-') s += advance();
      digits();
    }
    return make(Tok::Num, std::move(s));
  }

  void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
      out += static_cast<char>(cp);
    } else if (cp < 0x800) {
      out += static_cast<char>(0xC0 | (cp >> 6));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
      out += static_cast<char>(0xE0 | (cp >> 12));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (cp >> 18));
      out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (cp & 0x3F));
    }
  }

  unsigned long hex4() {
    unsigned long v = 0;
    for (int i = 0; i < 4; ++i) {
      char c = peek();
      if (!std::isxdigit(static_cast<unsigned char>(c))) fail("malformed \\u escape");
      advance();
      v = v * 16 + static_cast<unsigned long>(
                       std::isdigit(static_cast<unsigned char>(c)) ? c - '0'
                                                                   : std::tolower(c) - 'a' + 10);
    }
    return v;
  }

  Token string_lit() {
    advance();  // opening quote
    std::string raw = "\"";
    std::string value;
    while (true) {
      if (pos_ >= text_.size()) fail("unterminated string literal");
      char c = advance();
      raw += c;
      if (c == '"') break;
      if (c != '\\') {
        value += c;
        continue;
      }
      if (pos_ >= text_.size()) fail("unterminated escape");
      char e = advance();
      raw += e;
      switch (e) {
        case '"': value += '"'; break;
        case '\\': value += '\\'; break;
        case '/': value += '/'; break;
        case 'b': value += '\b'; break;
        case 'f': value += '\f'; break;
        case 'n': value += '\n'; break;
        case 'r': value += '\r'; break;
        case 't': value += '\t'; break;
        case 'u': {
          unsigned long cp = hex4();
          if (cp >= 0xD800 && cp <= 0xDBFF && peek() == '\\' && peek2() == 'u') {
            advance();
            advance();
            unsigned long lo = hex4();
            cp = 0x10000 + ((cp - 0xD800) << 10) + (lo - 0xDC00);
          }
          append_utf8(value, cp);
          break;
        }
        default:
          fail(std::string("unknown escape '\\") + e + "'");
      }
    }
    return make(Tok::Str, std::move(raw), std::move(value));
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  int tok_line_ = 1;
  int tok_col_ = 1;
};

Value number_value(const std::string& spelling) {
  if (spelling.find_first_of(".eE") == std::string::npos) {
    try {
      return Value::integer(std::stoll(spelling));
    } catch (const std::exception&) {
      // falls through to double on overflow
    }
  }
  return Value::number(std::stod(spelling));
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  Script parse() {
    Script script;
    while (!at_end()) {
      script.directives.push_back(directive());
    }
    if (!script.directives.empty() && script.directives[0].kind != Directive::Kind::ReplicaSwitch)
      throw Error(Errc::ParseError, "line 1 col 1: a script starts with a 'replica' directive");
    return script;
  }

 private:
  const Token& cur() const { return tokens_[pos_]; }
  bool at_end() const { return cur().kind == Tok::End; }

  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = cur();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw Error(Errc::ParseError, "line " + std::to_string(t.line) + " col " +
                                      std::to_string(t.col) + ": expected " + expected + ", got " + got);
  }

  const Token& advance() { return tokens_[pos_++]; }

  bool is_punct(const char* p) const { return cur().kind == Tok::Punct && cur().text == p; }
  bool is_word(const char* w) const { return cur().kind == Tok::Ident && cur().text == w; }

  void expect_punct(const char* p) {
    if (!is_punct(p)) fail(std::string("'") + p + "'");
    advance();
  }

  std::string expect_ident(const char* what) {
    if (cur().kind != Tok::Ident) fail(what);
    return advance().text;
  }

  std::string expect_name(const char* what) {
    if (cur().kind != Tok::Ident || is_reserved(cur().text)) fail(what);
    return advance().text;
  }

  Directive directive() {
    Directive d;
    d.line = cur().line;
    if (is_word("replica")) {
      advance();
      d.kind = Directive::Kind::ReplicaSwitch;
      d.replica = ReplicaId(expect_name("a replica name"));
      expect_punct(";");
      return d;
    }
    if (is_word("sync")) {
      advance();
      d.kind = Directive::Kind::Sync;
      expect_punct(";");
      return d;
    }
    if (is_word("yield")) {
      advance();
      d.kind = Directive::Kind::YieldSteps;
      d.steps = 1;
      if (cur().kind == Tok::Num) {
        if (cur().text[0] == '-' || cur().text.find_first_of(".eE") != std::string::npos)
          fail("a non-negative step count");
        d.steps = static_cast<std::uint64_t>(std::stoull(advance().text));
      }
      expect_punct(";");
      return d;
    }
    if (is_word("render")) {
      advance();
      d.kind = Directive::Kind::Render;
      if (cur().kind == Tok::Ident && !is_reserved(cur().text)) {
        d.has_replica = true;
        d.replica = ReplicaId(advance().text);
      }
      expect_punct(";");
      return d;
    }
    if (is_word("expect")) {
      advance();
      d.kind = Directive::Kind::Expect;
      if (cur().kind == Tok::Ident && !is_reserved(cur().text)) {
        d.has_replica = true;
        d.replica = ReplicaId(advance().text);
      }
      d.expected = json_value().dump();
      expect_punct(";");
      return d;
    }
    d.kind = Directive::Kind::Cmd;
    d.command = command();
    expect_punct(";");
    return d;
  }

  Command command() {
    if (is_word("let")) {
      advance();
      std::string name = expect_name("a variable name");
      expect_punct("=");
      return Command::let(std::move(name), expr());
    }
    Expr e = expr();
    if (is_punct(":=")) {
      advance();
      return Command::assign(std::move(e), value_literal());
    }
    if (is_punct(".")) {
      advance();
      if (is_word("insertAfter")) {
        advance();
        expect_punct("(");
        Value v = value_literal();
        expect_punct(")");
        return Command::insert_after(std::move(e), std::move(v));
      }
      if (is_word("delete")) {
        advance();
        return Command::del(std::move(e));
      }
      fail("'insertAfter' or 'delete'");
    }
    fail("':=', '.insertAfter' or '.delete'");
  }

  Expr expr() {
    Expr e = Expr::doc();
    if (is_word("doc")) {
      advance();
    } else if (cur().kind == Tok::Ident && !is_reserved(cur().text)) {
      e = Expr::var(advance().text);
    } else {
      fail("'doc' or a variable name");
    }
    while (is_punct(".")) {
      // A trailing .insertAfter / .delete belongs to the command.
      const Token& after = tokens_[pos_ + 1];
      if (after.kind == Tok::Ident && (after.text == "insertAfter" || after.text == "delete")) break;
      advance();
      if (is_word("get")) {
        advance();
        expect_punct("(");
        if (cur().kind != Tok::Str) fail("a string key");
        std::string key = advance().value;
        expect_punct(")");
        e = Expr::get(std::move(e), std::move(key));
      } else if (is_word("idx")) {
        advance();
        expect_punct("(");
        if (cur().kind != Tok::Num || cur().text[0] == '-' ||
            cur().text.find_first_of(".eE") != std::string::npos)
          fail("a non-negative integer index");
        std::uint64_t i = std::stoull(advance().text);
        expect_punct(")");
        e = Expr::idx(std::move(e), i);
      } else if (is_word("keys")) {
        advance();
        e = Expr::keys(std::move(e));
      } else if (is_word("values")) {
        advance();
        e = Expr::values(std::move(e));
      } else {
        fail("'get', 'idx', 'keys' or 'values'");
      }
    }
    return e;
  }

  Value value_literal() {
    if (cur().kind == Tok::Num) return number_value(advance().text);
    if (cur().kind == Tok::Str) return Value::str(advance().value);
    if (is_word("true")) {
      advance();
      return Value::boolean(true);
    }
    if (is_word("false")) {
      advance();
      return Value::boolean(false);
    }
    if (is_word("null")) {
      advance();
      return Value::null();
    }
    if (is_punct("{")) {
      advance();
      expect_punct("}");
      return Value::empty_map();
    }
    if (is_punct("[")) {
      advance();
      expect_punct("]");
      return Value::empty_list();
    }
    fail("a literal value");
  }

  ordered_json json_value() {
    if (cur().kind == Tok::Num) {
      std::string s = advance().text;
      if (s.find_first_of(".eE") == std::string::npos) return ordered_json(std::stoll(s));
      return ordered_json(std::stod(s));
    }
    if (cur().kind == Tok::Str) return ordered_json(advance().value);
    if (is_word("true")) {
      advance();
      return ordered_json(true);
    }
    if (is_word("false")) {
      advance();
      return ordered_json(false);
    }
    if (is_word("null")) {
      advance();
      return ordered_json(nullptr);
    }
    if (is_punct("{")) {
      advance();
      ordered_json obj = ordered_json::object();
      if (!is_punct("}")) {
        while (true) {
          if (cur().kind != Tok::Str) fail("a string object key");
          std::string key = advance().value;
          expect_punct(":");
          obj[key] = json_value();
          if (is_punct(",")) {
            advance();
            continue;
          }
          break;
        }
      }
      expect_punct("}");
      return obj;
    }
    if (is_punct("[")) {
      advance();
      ordered_json arr = ordered_json::array();
      if (!is_punct("]")) {
        while (true) {
          arr.push_back(json_value());
          if (is_punct(",")) {
            advance();
            continue;
          }
          break;
        }
      }
      expect_punct("]");
      return arr;
    }
    fail("a JSON value");
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

Script parse_script(const std::string& text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.parse();
}

std::string print_command(const Command& cmd) { return cmd.to_string(); }

RunResult run_script(const Script& script, const RunOptions& opts) {
  Simulation sim(opts.seed, opts.policy);
  const ReplicaId* current = nullptr;

  auto positioned = [&](std::size_t index, const Directive& d, const std::string& what) {
    std::string who = current ? current->text() : "<none>";
    return "directive #" + std::to_string(index + 1) + " (line " + std::to_string(d.line) +
           ", replica '" + who + "'): " + what;
  };

  RunResult result;
  for (std::size_t i = 0; i < script.directives.size(); ++i) {
    const Directive& d = script.directives[i];
    try {
      switch (d.kind) {
        case Directive::Kind::ReplicaSwitch:
          current = &sim.add_replica(d.replica).id();
          break;
        case Directive::Kind::Cmd:
          if (!current) throw Error(Errc::ScriptError, "no current replica");
          if (d.command.kind == CommandKind::Yield) {
            sim.run_random(1);
            break;
          }
          sim.replica(*current).exec_command(d.command);
          break;
        case Directive::Kind::Sync:
          sim.sync_all();
          break;
        case Directive::Kind::YieldSteps:
          sim.run_random(d.steps);
          break;
        case Directive::Kind::Render: {
          const ReplicaId* target = d.has_replica ? &d.replica : current;
          if (!target) throw Error(Errc::ScriptError, "no current replica");
          result.render_lines.push_back(target->text() + " " + sim.replica(*target).render());
          break;
        }
        case Directive::Kind::Expect: {
          const ReplicaId* target = d.has_replica ? &d.replica : current;
          if (!target) throw Error(Errc::ScriptError, "no current replica");
          std::string actual = sim.replica(*target).render();
          if (actual != d.expected)
            throw Error(Errc::ExpectMismatch,
                        "\n  expected: " + d.expected + "\n  actual:   " + actual);
          break;
        }
      }
    } catch (const Error& e) {
      throw Error(e.code(), positioned(i, d, e.message()));
    }
  }
  for (const auto& [id, r] : sim.replicas()) {
    result.final_renders[id] = r.render();
    result.final_states[id] = debug_state_json(r.root());
  }
  result.trace = sim.trace_text();
  return result;
}

}  // namespace jcrdt
