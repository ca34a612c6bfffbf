#include "fairrec/rules/rule.hpp"

#include <cctype>
#include <cstdlib>
#include <sstream>

#include "fairrec/common.hpp"

namespace fairrec {

namespace {

struct Lexer {
  std::string_view text;
  int line;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg, size_t at) const {
    throw ParseError(msg, line, static_cast<int>(at) + 1);
  }

  void skipSpace() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }

  bool atEnd() {
    skipSpace();
    return pos >= text.size();
  }

  char peek() {
    skipSpace();
    return pos < text.size() ? text[pos] : '\0';
  }

  bool consume(char c) {
    skipSpace();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  bool consume(std::string_view s) {
    skipSpace();
    if (text.substr(pos, s.size()) == s) {
      pos += s.size();
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!consume(c)) fail(std::string("expected ") + what, pos);
  }

  std::string ident() {
    skipSpace();
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier", start);
    return std::string(text.substr(start, pos - start));
  }

  double number() {
    skipSpace();
    size_t start = pos;
    bool negative = pos < text.size() && text[pos] == '-';
    if (negative) ++pos;
    size_t digits = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.' ||
            text[pos] == 'e' || text[pos] == 'E' ||
            ((text[pos] == '+' || text[pos] == '-') && pos > digits &&
             (text[pos - 1] == 'e' || text[pos - 1] == 'E'))))
      ++pos;
    if (pos == digits) fail("expected a numeric weight", start);
    std::string tok(text.substr(start, pos - start));
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) fail("malformed number '" + tok + "'", start);
    return v;
  }
};

LiteralPattern parseLiteral(Lexer& lx, const Vocabulary& vocab) {
  LiteralPattern lit;
  lit.negated = lx.consume('!');
  size_t nameAt = lx.pos;
  std::string name = lx.ident();
  auto pred = vocab.find(name);
  if (!pred) lx.fail("unknown predicate name '" + name + "'", nameAt);
  lit.predicate = *pred;
  lx.expect('(', "'('");
  lit.vars.push_back(lx.ident());
  while (lx.consume(',')) lit.vars.push_back(lx.ident());
  lx.expect(')', "')'");
  int arity = vocab.at(lit.predicate).arity();
  if (static_cast<int>(lit.vars.size()) != arity)
    lx.fail("predicate '" + name + "' expects " + std::to_string(arity) +
                " argument(s), got " + std::to_string(lit.vars.size()),
            nameAt);
  return lit;
}

}  // namespace

RuleTemplate parse_rule(std::string_view text, const Vocabulary& vocab, int line) {
  Lexer lx{text, line};
  RuleTemplate rule;
  size_t weightAt = lx.pos;
  rule.weight = lx.number();
  if (rule.weight < 0.0) lx.fail("negative weight", weightAt);
  lx.expect(':', "':' after weight");
  rule.body.push_back(parseLiteral(lx, vocab));
  while (lx.consume('&')) rule.body.push_back(parseLiteral(lx, vocab));
  if (lx.consume("->")) rule.head = parseLiteral(lx, vocab);
  rule.exponent = 1;
  if (lx.consume('^')) {
    if (!lx.consume('2')) lx.fail("only '^2' is supported", lx.pos);
    rule.exponent = 2;
  }
  if (!lx.atEnd()) lx.fail("unexpected trailing input", lx.pos);
  if (!rule.head && rule.body.size() != 1)
    lx.fail("a rule without '->' must be a single-literal prior", 0);
  return rule;
}

std::string render_rule(const RuleTemplate& rule, const Vocabulary& vocab) {
  std::ostringstream out;
  auto literal = [&](const LiteralPattern& lit) {
    if (lit.negated) out << '!';
    out << vocab.at(lit.predicate).name << '(';
    for (size_t i = 0; i < lit.vars.size(); ++i) {
      if (i) out << ", ";
      out << lit.vars[i];
    }
    out << ')';
  };
  out << format_double(rule.weight) << ": ";
  for (size_t i = 0; i < rule.body.size(); ++i) {
    if (i) out << " & ";
    literal(rule.body[i]);
  }
  if (rule.head) {
    out << " -> ";
    literal(*rule.head);
  }
  if (rule.exponent == 2) out << " ^2";
  return out.str();
}

std::vector<RuleTemplate> parse_rule_file(std::string_view content, const Vocabulary& vocab) {
  std::vector<RuleTemplate> rules;
  int line = 0;
  size_t start = 0;
  while (start <= content.size()) {
    size_t end = content.find('\n', start);
    if (end == std::string_view::npos) end = content.size();
    std::string_view raw = content.substr(start, end - start);
    ++line;
    start = end + 1;
    if (size_t hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    size_t a = raw.find_first_not_of(" \t\r");
    if (a == std::string_view::npos) continue;
    size_t b = raw.find_last_not_of(" \t\r");
    rules.push_back(parse_rule(raw.substr(a, b - a + 1), vocab, line));
    if (end == content.size()) break;
  }
  return rules;
}

}  // namespace fairrec
