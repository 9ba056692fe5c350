#ifndef PMCAST_PATTERN_HPP_
#define PMCAST_PATTERN_HPP_

// Pattern language: regular expressions over a declared alphabet of event
// types.
//
//   expr   := term ('+' term)*        union
//   term   := factor (';' factor)*    concatenation
//   factor := base '*'*               star closure
//   base   := IDENT | '(' expr ')' | <empty>
//
// IDENT is [A-Za-z_][A-Za-z0-9_]*. Whitespace outside identifiers is ignored.
// Union and concatenation nest to the right: "a;b;c" is Concat(a, Concat(b, c)).

#include <cctype>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pmcast/error.hpp"

namespace pmcast {

using SymbolId = std::uint16_t;

/// Ordered set of event-type names. Symbol ids are positions in declaration order.
class Alphabet {
 public:
  Alphabet() = default;

  explicit Alphabet(std::vector<std::string> symbols) : symbols_(std::move(symbols)) {
    if (symbols_.empty()) throw ConfigError("alphabet must not be empty");
    if (symbols_.size() > 0xFFFF) throw ConfigError("alphabet too large");
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
      if (!is_identifier(symbols_[i]))
        throw ConfigError("alphabet symbol '" + symbols_[i] + "' is not an identifier");
      if (!index_.emplace(symbols_[i], static_cast<SymbolId>(i)).second)
        throw ConfigError("duplicate alphabet symbol '" + symbols_[i] + "'");
    }
  }

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  const std::string& name(SymbolId id) const { return symbols_.at(id); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }

  std::optional<SymbolId> find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  SymbolId id(std::string_view name) const {
    if (auto found = find(name)) return *found;
    throw UnknownSymbolError(std::string(name));
  }

  bool contains(std::string_view name) const { return find(name).has_value(); }

  friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.symbols_ == b.symbols_; }

  static bool is_identifier(std::string_view s) {
    if (s.empty()) return false;
    auto head = static_cast<unsigned char>(s[0]);
    if (!(std::isalpha(head) || head == '_')) return false;
    for (char c : s.substr(1)) {
      auto u = static_cast<unsigned char>(c);
      if (!(std::isalnum(u) || u == '_')) return false;
    }
    return true;
  }

 private:
  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> index_;
};

enum class NodeKind { Epsilon, Symbol, Union, Concat, Star };

struct PatternNode;
using PatternAst = std::shared_ptr<const PatternNode>;

/// Immutable regular-expression tree node. Subtrees may be shared.
struct PatternNode {
  NodeKind kind = NodeKind::Epsilon;
  std::string symbol;  // Symbol only
  PatternAst left;     // Union, Concat, Star (child)
  PatternAst right;    // Union, Concat
};

namespace ast {

inline PatternAst epsilon() { return std::make_shared<const PatternNode>(PatternNode{NodeKind::Epsilon, {}, nullptr, nullptr}); }
inline PatternAst symbol(std::string name) {
  return std::make_shared<const PatternNode>(PatternNode{NodeKind::Symbol, std::move(name), nullptr, nullptr});
}
inline PatternAst alt(PatternAst l, PatternAst r) {
  return std::make_shared<const PatternNode>(PatternNode{NodeKind::Union, {}, std::move(l), std::move(r)});
}
inline PatternAst concat(PatternAst l, PatternAst r) {
  return std::make_shared<const PatternNode>(PatternNode{NodeKind::Concat, {}, std::move(l), std::move(r)});
}
inline PatternAst star(PatternAst child) {
  return std::make_shared<const PatternNode>(PatternNode{NodeKind::Star, {}, std::move(child), nullptr});
}

}  // namespace ast

/// Structural equality.
inline bool equal(const PatternAst& a, const PatternAst& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case NodeKind::Epsilon: return true;
    case NodeKind::Symbol: return a->symbol == b->symbol;
    case NodeKind::Star: return equal(a->left, b->left);
    case NodeKind::Union:
    case NodeKind::Concat: return equal(a->left, b->left) && equal(a->right, b->right);
  }
  return false;
}

namespace detail {

inline void collect_symbols(const PatternNode& node, std::set<std::string>& out) {
  switch (node.kind) {
    case NodeKind::Epsilon: return;
    case NodeKind::Symbol: out.insert(node.symbol); return;
    case NodeKind::Star: collect_symbols(*node.left, out); return;
    case NodeKind::Union:
    case NodeKind::Concat:
      collect_symbols(*node.left, out);
      collect_symbols(*node.right, out);
      return;
  }
}

inline int precedence(NodeKind kind) {
  switch (kind) {
    case NodeKind::Union: return 0;
    case NodeKind::Concat: return 1;
    default: return 2;
  }
}

inline void print(const PatternNode& node, std::string& out) {
  auto wrapped = [&out](const PatternNode& child, bool parens) {
    if (parens) out += '(';
    print(child, out);
    if (parens) out += ')';
  };
  switch (node.kind) {
    case NodeKind::Epsilon: out += "()"; return;
    case NodeKind::Symbol: out += node.symbol; return;
    case NodeKind::Star:
      wrapped(*node.left, precedence(node.left->kind) < 2);
      out += '*';
      return;
    case NodeKind::Union:
      // right-nested, so only a Union on the left needs grouping
      wrapped(*node.left, node.left->kind == NodeKind::Union);
      out += '+';
      wrapped(*node.right, false);
      return;
    case NodeKind::Concat:
      wrapped(*node.left, precedence(node.left->kind) <= 1);
      out += ';';
      wrapped(*node.right, precedence(node.right->kind) < 1);
      return;
  }
}

class Parser {
 public:
  Parser(std::string_view text, const Alphabet& alphabet) : text_(text), alphabet_(alphabet) {}

  PatternAst parse() {
    PatternAst result = expr();
    skip_space();
    if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return result;
  }

 private:
  PatternAst expr() {
    std::vector<PatternAst> terms{term()};
    while (accept('+')) terms.push_back(term());
    return fold(terms, ast::alt);
  }

  PatternAst term() {
    std::vector<PatternAst> factors{factor()};
    while (accept(';')) factors.push_back(factor());
    return fold(factors, ast::concat);
  }

  PatternAst factor() {
    PatternAst node = base();
    while (accept('*')) node = ast::star(std::move(node));
    return node;
  }

  PatternAst base() {
    skip_space();
    if (pos_ >= text_.size()) return ast::epsilon();
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      PatternAst inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t begin = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string name(text_.substr(begin, pos_ - begin));
      if (!alphabet_.contains(name)) throw UnknownSymbolError(name);
      return ast::symbol(std::move(name));
    }
    if (c == '+' || c == ';' || c == '*' || c == ')') return ast::epsilon();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  template <typename Combine>
  static PatternAst fold(std::vector<PatternAst>& items, Combine combine) {
    PatternAst acc = items.back();
    for (std::size_t i = items.size() - 1; i-- > 0;) acc = combine(items[i], acc);
    return acc;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw SyntaxError(what, pos_); }

  std::string_view text_;
  const Alphabet& alphabet_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses pattern text. Throws SyntaxError or UnknownSymbolError.
inline PatternAst parse_pattern(std::string_view text, const Alphabet& alphabet) {
  return detail::Parser(text, alphabet).parse();
}

inline std::set<std::string> ast_symbols(const PatternAst& root) {
  std::set<std::string> out;
  if (root) detail::collect_symbols(*root, out);
  return out;
}

/// Canonical text form; parse_pattern(to_string(x)) is structurally equal to x.
inline std::string to_string(const PatternAst& root) {
  std::string out;
  if (root && root->kind != NodeKind::Epsilon) detail::print(*root, out);
  return out;
}

/// True when the empty string is in the language.
inline bool nullable(const PatternAst& root) {
  switch (root->kind) {
    case NodeKind::Epsilon:
    case NodeKind::Star: return true;
    case NodeKind::Symbol: return false;
    case NodeKind::Union: return nullable(root->left) || nullable(root->right);
    case NodeKind::Concat: return nullable(root->left) && nullable(root->right);
  }
  return false;
}

}  // namespace pmcast

#endif  // PMCAST_PATTERN_HPP_
