#include "spatel/parser.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

namespace spatel {

ParseError::ParseError(const std::string& what, int line, int column)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

enum class Tok { Ident, Number, Symbol, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  double number = 0;
  int line = 1;
  int column = 1;
};

const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = {"A",  "E",  "O",  "F",  "G",    "U",     "L",
                                              "NW", "NE", "SW", "SE", "mu",   "true",  "let",
                                              "const"};
  return words;
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < text.size() && (std::isalnum(static_cast<unsigned char>(text[j])) || text[j] == '_'))
        ++j;
      t.kind = Tok::Ident;
      t.text = text.substr(i, j - i);
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
      std::size_t j = i;
      while (j < text.size() && (std::isdigit(static_cast<unsigned char>(text[j])) || text[j] == '.'))
        ++j;
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      t.kind = Tok::Number;
      t.text = text.substr(i, j - i);
      auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), t.number);
      if (res.ec != std::errc() || res.ptr != t.text.data() + t.text.size())
        throw ParseError("malformed number '" + t.text + "'", line, col);
      advance(j - i);
    } else {
      static const char* two[] = {">=", "<=", "=="};
      t.kind = Tok::Symbol;
      for (const char* s : two) {
        if (text.compare(i, 2, s) == 0) t.text = s;
      }
      if (t.text.empty()) {
        if (std::string("()[],!&|;=-").find(c) == std::string::npos)
          throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        t.text = std::string(1, c);
      }
      advance(t.text.size());
    }
    out.push_back(std::move(t));
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  Parser(std::vector<Token> toks, Bindings& bindings) : toks_(std::move(toks)), b_(bindings) {}

  Spatel formula_only() {
    Spatel f = parse_until();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after formula");
    return f;
  }

  Spatel program() {
    for (;;) {
      if (is_ident("const")) {
        next();
        const Token name = take_name();
        expect("=");
        const double v = value();
        if (b_.constants.count(name.text) || b_.formulas.count(name.text))
          fail_at("duplicate name '" + name.text + "'", name);
        b_.constants[name.text] = v;
        expect(";");
      } else if (is_ident("let")) {
        next();
        const Token name = take_name();
        expect("=");
        Spatel f = parse_until();
        if (b_.constants.count(name.text) || b_.formulas.count(name.text))
          fail_at("duplicate name '" + name.text + "'", name);
        b_.formulas.emplace(name.text, std::move(f));
        expect(";");
      } else {
        break;
      }
    }
    Spatel f = parse_until();
    if (is_symbol(";")) next();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after formula");
    return f;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return toks_[std::min(pos_ + ahead, toks_.size() - 1)];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }

  bool is_symbol(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Symbol && peek(ahead).text == s;
  }
  bool is_ident(const char* s, std::size_t ahead = 0) const {
    return peek(ahead).kind == Tok::Ident && peek(ahead).text == s;
  }

  [[noreturn]] void fail(const std::string& what) const { fail_at(what, peek()); }
  [[noreturn]] static void fail_at(const std::string& what, const Token& t) {
    throw ParseError(what, t.line, t.column);
  }

  void expect(const char* s) {
    if (!is_symbol(s)) {
      const std::string got = peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
      fail(std::string("expected '") + s + "', got " + got);
    }
    next();
  }

  Token take_name() {
    if (peek().kind != Tok::Ident) fail("expected a name");
    if (reserved_words().count(peek().text)) fail("'" + peek().text + "' is reserved");
    return next();
  }

  double value() {
    bool negative = false;
    if (is_symbol("-")) {
      next();
      negative = true;
    }
    double v = 0;
    if (peek().kind == Tok::Number) {
      v = next().number;
    } else if (peek().kind == Tok::Ident && !reserved_words().count(peek().text)) {
      const Token& t = next();
      auto it = b_.constants.find(t.text);
      if (it == b_.constants.end()) fail_at("undefined constant '" + t.text + "'", t);
      v = it->second;
    } else {
      fail("expected a number");
    }
    return negative ? -v : v;
  }

  Interval interval() {
    const Token start = peek();
    expect("[");
    const double a = value();
    expect(",");
    const double b = value();
    expect(")");
    if (!(a >= 0) || !(a < b))
      fail_at("malformed interval [" + format_number(a) + "," + format_number(b) + ")", start);
    return Interval{a, b};
  }

  LabelSet labels() {
    expect("[");
    LabelSet set;
    for (;;) {
      const Token& t = peek();
      if (t.kind != Tok::Ident) fail("expected a label");
      std::uint8_t bits = 0;
      if (t.text == "L") bits = 0xF;
      else if (t.text == "NW") bits = 1;
      else if (t.text == "NE") bits = 2;
      else if (t.text == "SW") bits = 4;
      else if (t.text == "SE") bits = 8;
      else fail("unknown label '" + t.text + "'");
      set = LabelSet::from_bits(set.bits() | bits);
      next();
      if (is_symbol(",")) {
        next();
        continue;
      }
      break;
    }
    expect("]");
    return set;
  }

  // 'U' '[' value ',' ... marks a temporal until; 'U' '[' int ']' a spatial one.
  bool at_temporal_until() const {
    if (!is_ident("U") || !is_symbol("[", 1)) return false;
    std::size_t k = 2;
    if (is_symbol("-", k)) ++k;
    return is_symbol(",", k + 1);
  }

  Tssl spatial_operand(const Spatel& f, const Token& where) const {
    if (f.kind() != Spatel::Kind::Tssl)
      fail_at("temporal operator inside a spatial operator", where);
    return f.tssl();
  }

  Spatel parse_until() {
    Spatel lhs = parse_or();
    while (at_temporal_until()) {
      next();
      const Interval i = interval();
      Spatel rhs = parse_or();
      lhs = Spatel::until(i, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  Spatel parse_or() {
    std::vector<Spatel> items{parse_and()};
    while (is_symbol("|")) {
      next();
      items.push_back(parse_and());
    }
    return Spatel::disj(std::move(items));
  }

  Spatel parse_and() {
    std::vector<Spatel> items{parse_unary()};
    while (is_symbol("&")) {
      next();
      items.push_back(parse_unary());
    }
    return Spatel::conj(std::move(items));
  }

  Spatel parse_unary() {
    if (is_symbol("!")) {
      next();
      return Spatel::negate(parse_unary());
    }
    if ((is_ident("F") || is_ident("G")) && is_symbol("[", 1)) {
      const bool eventually = next().text == "F";
      const Interval i = interval();
      Spatel body = parse_unary();
      return eventually ? Spatel::eventually(i, std::move(body))
                        : Spatel::always(i, std::move(body));
    }
    if ((is_ident("A") || is_ident("E")) && is_symbol("[", 1)) {
      const bool exists = next().text == "E";
      const LabelSet b = labels();
      if (is_ident("O")) {
        next();
        const Token where = peek();
        Tssl body = spatial_operand(parse_unary(), where);
        return Spatel::spatial(exists ? Tssl::exists_next(b, std::move(body))
                                      : Tssl::forall_next(b, std::move(body)));
      }
      if (is_symbol("(")) {
        next();
        const Token lhs_at = peek();
        Tssl lhs = spatial_operand(parse_or(), lhs_at);
        if (!is_ident("U") || !is_symbol("[", 1)) fail("expected 'U[k]' in spatial until");
        next();
        next();
        if (peek().kind != Tok::Number || peek().number != std::floor(peek().number) ||
            peek().number < 1)
          fail("spatial until bound must be a positive integer");
        const int kappa = static_cast<int>(next().number);
        expect("]");
        const Token rhs_at = peek();
        Tssl rhs = spatial_operand(parse_or(), rhs_at);
        expect(")");
        return Spatel::spatial(exists ? Tssl::exists_until(b, kappa, std::move(lhs), std::move(rhs))
                                      : Tssl::forall_until(b, kappa, std::move(lhs), std::move(rhs)));
      }
      fail("expected 'O' or '(' after spatial quantifier");
    }
    return parse_atom();
  }

  Spatel parse_atom() {
    if (is_symbol("(")) {
      next();
      Spatel f = parse_until();
      expect(")");
      return f;
    }
    if (is_ident("true")) {
      next();
      return Spatel::spatial(Tssl::top());
    }
    if (is_ident("mu")) {
      next();
      const Token op = peek();
      if (!(is_symbol(">=") || is_symbol("<=") || is_symbol("=="))) fail("expected '>=', '<=' or '=='");
      next();
      const double c = value();
      if (op.text == ">=") return Spatel::spatial(Tssl::pred(Cmp::Ge, c));
      if (op.text == "<=") return Spatel::spatial(Tssl::pred(Cmp::Le, c));
      return Spatel::spatial(Tssl::conj({Tssl::pred(Cmp::Ge, c), Tssl::pred(Cmp::Le, c)}));
    }
    if (peek().kind == Tok::Ident && !reserved_words().count(peek().text)) {
      const Token& t = next();
      auto it = b_.formulas.find(t.text);
      if (it == b_.formulas.end()) fail_at("undefined formula '" + t.text + "'", t);
      return it->second;
    }
    if (peek().kind == Tok::End) fail("unexpected end of input");
    fail("unexpected '" + peek().text + "'");
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Bindings& b_;
};

}  // namespace

Spatel parse(const std::string& text, const Bindings& bindings) {
  Bindings copy = bindings;
  Parser p(tokenize(text), copy);
  return p.formula_only();
}

Program parse_program(const std::string& text, Bindings base) {
  Parser p(tokenize(text), base);
  Spatel f = p.program();
  return Program{std::move(base), std::move(f)};
}

}  // namespace spatel
