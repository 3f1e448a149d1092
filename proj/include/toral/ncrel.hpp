#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "toral/matcore.hpp"

namespace toral {

struct Letter {
  std::string var;
  bool adjoint = false;
  auto operator<=>(const Letter&) const = default;
};

using Word = std::vector<Letter>;

// Graded lexicographic: shorter words first, then letterwise.
struct WordLess {
  bool operator()(const Word& a, const Word& b) const;
};

// Noncommutative *-polynomial kept in canonical form (merged, no zero terms).
class NCPoly {
 public:
  NCPoly() = default;
  static NCPoly scalar(cplx c);
  static NCPoly variable(const std::string& name);

  const std::map<Word, cplx, WordLess>& terms() const noexcept { return terms_; }
  std::vector<std::string> variables() const;  // sorted, unique
  bool is_zero() const noexcept { return terms_.empty(); }

  void add_term(const Word& w, cplx c);

  NCPoly& operator+=(const NCPoly& o);
  NCPoly& operator-=(const NCPoly& o);
  friend NCPoly operator+(NCPoly a, const NCPoly& b) { return a += b; }
  friend NCPoly operator-(NCPoly a, const NCPoly& b) { return a -= b; }
  friend NCPoly operator*(const NCPoly& a, const NCPoly& b);
  friend NCPoly operator*(cplx s, const NCPoly& a);
  NCPoly adjoint() const;

  bool operator==(const NCPoly& o) const { return terms_ == o.terms_; }

 private:
  std::map<Word, cplx, WordLess> terms_;
};

std::string format_number(double v);
std::string print(const NCPoly& p);

struct Relation {
  enum class Kind { Eq0, NormLE };
  NCPoly poly;
  Kind kind = Kind::Eq0;
  double bound = 0.0;
  bool operator==(const Relation&) const = default;
};

struct RelationSet {
  std::vector<Relation> relations;
  std::optional<std::string> name;
  std::vector<std::string> variables() const;
};

std::string print(const Relation& r);
std::string print(const RelationSet& rs);

// Syntax errors report the 1-based line and column.
class ParseError : public InputError {
 public:
  ParseError(const std::string& msg, std::size_t line, std::size_t col)
      : InputError(msg + " at line " + std::to_string(line) + ", column " + std::to_string(col)),
        line_(line), col_(col) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return col_; }

 private:
  std::size_t line_, col_;
};

// When allowed is given, any other identifier is an unknown-variable error.
NCPoly parse_poly(const std::string& text, const std::vector<std::string>* allowed = nullptr);
RelationSet parse_relations(const std::string& text, const std::vector<std::string>* allowed = nullptr);

using Assignment = std::map<std::string, CMatrix>;

CMatrix evaluate(const NCPoly& p, const Assignment& assign);

struct MembershipReport {
  std::vector<double> defects;
  std::vector<bool> passed;
  bool member = true;
};

MembershipReport membership(const Assignment& assign, const RelationSet& rs, double slack);

// free_pair, soft_torus, soft_cylinder, soft_z2xz, interval, circle
RelationSet preset(const std::string& name, double param = 0.0);
std::vector<std::string> preset_names();

}  // namespace toral
