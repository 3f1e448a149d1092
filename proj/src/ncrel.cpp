#include "toral/ncrel.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

namespace toral {

bool WordLess::operator()(const Word& a, const Word& b) const {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

NCPoly NCPoly::scalar(cplx c) {
  NCPoly p;
  p.add_term({}, c);
  return p;
}

NCPoly NCPoly::variable(const std::string& name) {
  NCPoly p;
  p.add_term({Letter{name, false}}, 1.0);
  return p;
}

void NCPoly::add_term(const Word& w, cplx c) {
  auto it = terms_.find(w);
  if (it == terms_.end()) {
    if (c != cplx(0.0, 0.0)) terms_.emplace(w, c);
    return;
  }
  it->second += c;
  if (it->second == cplx(0.0, 0.0)) terms_.erase(it);
}

std::vector<std::string> NCPoly::variables() const {
  std::set<std::string> names;
  for (const auto& [w, c] : terms_)
    for (const auto& l : w) names.insert(l.var);
  return {names.begin(), names.end()};
}

NCPoly& NCPoly::operator+=(const NCPoly& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, c);
  return *this;
}

NCPoly& NCPoly::operator-=(const NCPoly& o) {
  for (const auto& [w, c] : o.terms_) add_term(w, -c);
  return *this;
}

NCPoly operator*(const NCPoly& a, const NCPoly& b) {
  NCPoly out;
  for (const auto& [wa, ca] : a.terms_)
    for (const auto& [wb, cb] : b.terms_) {
      Word w = wa;
      w.insert(w.end(), wb.begin(), wb.end());
      out.add_term(w, ca * cb);
    }
  return out;
}

NCPoly operator*(cplx s, const NCPoly& a) {
  NCPoly out;
  for (const auto& [w, c] : a.terms_) out.add_term(w, s * c);
  return out;
}

NCPoly NCPoly::adjoint() const {
  NCPoly out;
  for (const auto& [w, c] : terms_) {
    Word r(w.rbegin(), w.rend());
    for (auto& l : r) l.adjoint = !l.adjoint;
    out.add_term(r, std::conj(c));
  }
  return out;
}

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string print(const NCPoly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& [w, c] : p.terms()) {
    if (!first) out += " + ";
    first = false;
    out += "(" + format_number(c.real());
    out += c.imag() < 0.0 ? "-" : "+";
    out += format_number(std::abs(c.imag())) + "i)";
    for (const auto& l : w) {
      out += " " + l.var;
      if (l.adjoint) out += "'";
    }
  }
  return out;
}

std::string print(const Relation& r) {
  if (r.kind == Relation::Kind::Eq0) return print(r.poly) + " = 0";
  return "norm(" + print(r.poly) + ") <= " + format_number(r.bound);
}

std::string print(const RelationSet& rs) {
  std::string out;
  if (rs.name) out += "# " + *rs.name + "\n";
  for (const auto& r : rs.relations) out += print(r) + "\n";
  return out;
}

std::vector<std::string> RelationSet::variables() const {
  std::set<std::string> names;
  for (const auto& r : relations)
    for (auto& v : r.poly.variables()) names.insert(v);
  return {names.begin(), names.end()};
}

namespace {

enum class Tok { Ident, Number, LParen, RParen, Plus, Minus, Star, Prime, Eq, Le, End };

struct Token {
  Tok kind;
  std::string text;
  double value = 0.0;
  bool imaginary = false;
  std::size_t col = 0;  // 1-based
};

class Lexer {
 public:
  Lexer(const std::string& s, std::size_t line) : s_(s), line_(line) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    std::size_t i = 0;
    while (true) {
      while (i < s_.size() && std::isspace(static_cast<unsigned char>(s_[i]))) ++i;
      if (i >= s_.size()) break;
      const char ch = s_[i];
      const std::size_t col = i + 1;
      if (std::islower(static_cast<unsigned char>(ch))) {
        std::size_t j = i;
        while (j < s_.size() && (std::islower(static_cast<unsigned char>(s_[j])) ||
                                 std::isdigit(static_cast<unsigned char>(s_[j]))))
          ++j;
        out.push_back({Tok::Ident, s_.substr(i, j - i), 0.0, false, col});
        i = j;
      } else if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
        std::size_t j = i;
        while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        if (j < s_.size() && s_[j] == '.') {
          ++j;
          while (j < s_.size() && std::isdigit(static_cast<unsigned char>(s_[j]))) ++j;
        }
        if (j < s_.size() && (s_[j] == 'e' || s_[j] == 'E')) {
          std::size_t k = j + 1;
          if (k < s_.size() && (s_[k] == '+' || s_[k] == '-')) ++k;
          if (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) {
            while (k < s_.size() && std::isdigit(static_cast<unsigned char>(s_[k]))) ++k;
            j = k;
          }
        }
        double v = 0.0;
        const auto res = std::from_chars(s_.data() + i, s_.data() + j, v);
        if (res.ec != std::errc() || res.ptr != s_.data() + j)
          throw ParseError("malformed number '" + s_.substr(i, j - i) + "'", line_, col);
        bool imag = false;
        if (j < s_.size() && s_[j] == 'i' &&
            (j + 1 >= s_.size() || !std::isalnum(static_cast<unsigned char>(s_[j + 1])))) {
          imag = true;
          ++j;
        }
        out.push_back({Tok::Number, s_.substr(i, j - i), v, imag, col});
        i = j;
      } else {
        Tok k;
        std::size_t len = 1;
        switch (ch) {
          case '(': k = Tok::LParen; break;
          case ')': k = Tok::RParen; break;
          case '+': k = Tok::Plus; break;
          case '-': k = Tok::Minus; break;
          case '*': k = Tok::Star; break;
          case '\'': k = Tok::Prime; break;
          case '=': k = Tok::Eq; break;
          case '<':
            if (i + 1 < s_.size() && s_[i + 1] == '=') {
              k = Tok::Le;
              len = 2;
              break;
            }
            [[fallthrough]];
          default:
            throw ParseError(std::string("unexpected character '") + ch + "'", line_, col);
        }
        out.push_back({k, s_.substr(i, len), 0.0, false, col});
        i += len;
      }
    }
    out.push_back({Tok::End, "", 0.0, false, s_.size() + 1});
    return out;
  }

 private:
  const std::string& s_;
  std::size_t line_;
};

class Parser {
 public:
  Parser(std::vector<Token> toks, std::size_t line, const std::vector<std::string>* allowed)
      : toks_(std::move(toks)), line_(line), allowed_(allowed) {}

  NCPoly poly_only() {
    NCPoly p = expr();
    expect_end();
    return p;
  }

  Relation statement() {
    Relation r;
    if (peek().kind == Tok::Ident && peek().text == "norm") {
      next();
      expect(Tok::LParen, "'('");
      r.poly = expr();
      expect(Tok::RParen, "')'");
      expect(Tok::Le, "'<='");
      const Token t = next();
      if (t.kind != Tok::Number || t.imaginary) fail("expected a real bound", t);
      if (!std::isfinite(t.value) || t.value < 0.0) fail("bound must be finite and nonnegative", t);
      r.kind = Relation::Kind::NormLE;
      r.bound = t.value;
    } else {
      NCPoly lhs = expr();
      expect(Tok::Eq, "'='");
      NCPoly rhs = expr();
      r.poly = lhs - rhs;
      r.kind = Relation::Kind::Eq0;
    }
    expect_end();
    return r;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  [[noreturn]] void fail(const std::string& msg, const Token& t) const { throw ParseError(msg, line_, t.col); }
  void expect(Tok k, const char* what) {
    const Token t = next();
    if (t.kind != k) fail(std::string("expected ") + what, t);
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'", peek());
  }

  static bool starts_factor(const Token& t) {
    return t.kind == Tok::Ident || t.kind == Tok::Number || t.kind == Tok::LParen;
  }

  NCPoly expr() {
    NCPoly acc = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      const bool minus = next().kind == Tok::Minus;
      NCPoly t = term();
      if (minus) acc -= t;
      else acc += t;
    }
    return acc;
  }

  NCPoly term() {
    NCPoly acc = factor();
    while (true) {
      if (peek().kind == Tok::Star) {
        next();
        acc = acc * factor();
      } else if (starts_factor(peek()) && !(peek().kind == Tok::Ident && peek().text == "norm")) {
        acc = acc * factor();
      } else {
        break;
      }
    }
    return acc;
  }

  NCPoly factor() {
    if (peek().kind == Tok::Minus) {
      next();
      return cplx(-1.0, 0.0) * factor();
    }
    if (peek().kind == Tok::Plus) {
      next();
      return factor();
    }
    NCPoly p = primary();
    while (peek().kind == Tok::Prime) {
      next();
      p = p.adjoint();
    }
    return p;
  }

  NCPoly primary() {
    const Token t = next();
    switch (t.kind) {
      case Tok::Number:
        return NCPoly::scalar(t.imaginary ? cplx(0.0, t.value) : cplx(t.value, 0.0));
      case Tok::Ident:
        if (t.text == "i") return NCPoly::scalar(cplx(0.0, 1.0));
        if (t.text == "norm") fail("'norm' is only allowed at the start of a relation", t);
        if (allowed_ && std::find(allowed_->begin(), allowed_->end(), t.text) == allowed_->end())
          fail("unknown variable '" + t.text + "'", t);
        return NCPoly::variable(t.text);
      case Tok::LParen: {
        NCPoly p = expr();
        expect(Tok::RParen, "')'");
        return p;
      }
      default:
        fail(t.kind == Tok::End ? "unexpected end of input" : "unexpected '" + t.text + "'", t);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t line_;
  const std::vector<std::string>* allowed_;
};

}  // namespace

NCPoly parse_poly(const std::string& text, const std::vector<std::string>* allowed) {
  Parser p(Lexer(text, 1).run(), 1, allowed);
  return p.poly_only();
}

RelationSet parse_relations(const std::string& text, const std::vector<std::string>* allowed) {
  RelationSet rs;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Parser p(Lexer(line, lineno).run(), lineno, allowed);
    rs.relations.push_back(p.statement());
  }
  return rs;
}

CMatrix evaluate(const NCPoly& p, const Assignment& assign) {
  std::size_t n = 0;
  for (const auto& [name, m] : assign) {
    require_finite(m, "evaluate");
    if (n == 0) n = m.dim();
    else if (m.dim() != n) throw InputError("evaluate: assignment has mixed dimensions");
  }
  std::map<std::string, std::pair<const CMatrix*, CMatrix>> letters;
  for (const auto& v : p.variables()) {
    const auto it = assign.find(v);
    if (it == assign.end()) throw InputError("evaluate: variable '" + v + "' is unbound");
    letters.emplace(v, std::make_pair(&it->second, it->second.adjoint()));
  }
  if (n == 0) throw InputError("evaluate: empty assignment");
  CMatrix out(n);
  for (const auto& [w, c] : p.terms()) {
    CMatrix prod = CMatrix::identity(n);
    for (const auto& l : w) {
      const auto& entry = letters.at(l.var);
      prod = prod * (l.adjoint ? entry.second : *entry.first);
    }
    out += c * prod;
  }
  return out;
}

MembershipReport membership(const Assignment& assign, const RelationSet& rs, double slack) {
  if (!(slack >= 0.0)) throw InputError("membership: slack must be nonnegative");
  MembershipReport r;
  for (const auto& rel : rs.relations) {
    const double d = op_norm(evaluate(rel.poly, assign));
    const double bound = rel.kind == Relation::Kind::Eq0 ? 0.0 : rel.bound;
    const bool ok = d <= bound + slack;
    r.defects.push_back(d);
    r.passed.push_back(ok);
    r.member = r.member && ok;
  }
  return r;
}

std::vector<std::string> preset_names() {
  return {"free_pair", "soft_torus", "soft_cylinder", "soft_z2xz", "interval", "circle"};
}

RelationSet preset(const std::string& name, double param) {
  if (!std::isfinite(param) || param < 0.0) throw InputError("preset: parameter must be finite and nonnegative");
  const std::string bound = format_number(param);
  const std::string unitary_u = "u u' = 1\nu' u = 1\n";
  const std::string unitary_v = "v v' = 1\nv' v = 1\n";
  const std::string hermitian_h = "h' = h\nnorm(h) <= 1\n";
  std::string text;
  if (name == "interval") text = hermitian_h;
  else if (name == "circle") text = unitary_u;
  else if (name == "free_pair") text = unitary_u + unitary_v;
  else if (name == "soft_torus") text = unitary_u + unitary_v + "norm(u v - v u) <= " + bound + "\n";
  else if (name == "soft_cylinder") text = hermitian_h + unitary_u + "norm(h u - u h) <= " + bound + "\n";
  else if (name == "soft_z2xz") text = unitary_u + "u u = 1\n" + unitary_v + "norm(u v - v u) <= " + bound + "\n";
  else throw InputError("unknown preset '" + name + "'");
  RelationSet rs = parse_relations(text);
  rs.name = name;
  return rs;
}

}  // namespace toral
