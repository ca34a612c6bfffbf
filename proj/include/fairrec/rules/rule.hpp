#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fairrec/rules/vocabulary.hpp"

namespace fairrec {

// One literal of a rule template, e.g. `!Rating(U, I)`.
struct LiteralPattern {
  PredicateId predicate;
  bool negated = false;
  std::vector<std::string> vars;

  bool operator==(const LiteralPattern&) const = default;
};

// Weighted first-order rule: body conjunction implying an optional head.
// A template with no head must have a single body literal (a prior).
struct RuleTemplate {
  std::vector<LiteralPattern> body;
  std::optional<LiteralPattern> head;
  double weight = 1.0;
  int exponent = 1;  // 1 or 2

  bool operator==(const RuleTemplate&) const = default;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error(msg + " (line " + std::to_string(line) + ", column " +
                           std::to_string(column) + ")"),
        line(line),
        column(column) {}
  int line;
  int column;
};

// Parses one rule of the form
//   <weight> ':' <literal> ('&' <literal>)* ('->' <literal>)? ('^2')?
// with literal ::= ['!'] Name '(' Var (',' Var)* ')'.
// `line` is only used for error reporting.
RuleTemplate parse_rule(std::string_view text, const Vocabulary& vocab, int line = 1);

// Inverse of parse_rule up to whitespace: parse_rule(render_rule(t)) == t.
std::string render_rule(const RuleTemplate& rule, const Vocabulary& vocab);

// Parses a rule file: one rule per line, '#' starts a comment, blank
// lines ignored.
std::vector<RuleTemplate> parse_rule_file(std::string_view content, const Vocabulary& vocab);

}  // namespace fairrec
