// Copyright (c) Polydom contributors.
// SPDX-License-Identifier: Apache-2.0

#include "polydom/io_formats.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace polydom {
namespace {

struct Token {
  std::string text;
  std::size_t line = 0;
  std::size_t col = 0;  // 1-based
};

[[noreturn]] void fail(const std::string& msg, std::size_t line,
                       std::size_t col) {
  throw DomainError(ErrorKind::parse_error, msg, line, col);
}

[[noreturn]] void fail_at(const std::string& msg, const Token& t) {
  fail(msg + " '" + t.text + "'", t.line, t.col);
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

// Splits one line into whitespace-separated tokens with column positions.
void split_line(const std::string& line, std::size_t line_no,
                std::vector<Token>& out) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    out.push_back({line.substr(start, i - start), line_no, start + 1});
  }
}

// Whole-file tokenizer; lines whose first nonblank character is '*' are
// comments.
std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '*') continue;
    split_line(line, line_no, out);
  }
  return out;
}

Rational number_of(const Token& t) {
  try {
    return Rational::from_decimal(t.text);
  } catch (const DomainError&) {
    fail_at("expected a number, got", t);
  }
}

std::size_t count_of(const Token& t) {
  for (char c : t.text)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      fail_at("expected a nonnegative integer, got", t);
  try {
    return std::stoull(t.text);
  } catch (const std::exception&) {
    fail_at("count out of range:", t);
  }
}

// Scales a rational row to integers and divides out the common factor; the
// positive scale preserves both constraint and generator readings.
std::vector<Coefficient> clear_row(const std::vector<Rational>& row) {
  Coefficient scale(1);
  for (const Rational& q : row) scale = Coefficient::lcm(scale, q.den());
  std::vector<Coefficient> out;
  out.reserve(row.size());
  for (const Rational& q : row)
    out.push_back(q.num() * Coefficient::div_exact(scale, q.den()));
  Coefficient g(0);
  for (const Coefficient& c : out) g = Coefficient::gcd(g, c);
  if (!g.is_zero() && !g.is_one())
    for (Coefficient& c : out) c = Coefficient::div_exact(c, g);
  return out;
}

LinearExpression row_expression(const std::vector<Coefficient>& ints,
                                dim_t dim, Coefficient::Mode mode) {
  std::vector<std::pair<dim_t, Coefficient>> terms;
  for (std::size_t j = 1; j < ints.size(); ++j)
    if (!ints[j].is_zero())
      terms.emplace_back(static_cast<dim_t>(j - 1), ints[j].with_mode(mode));
  LinearExpression e =
      LinearExpression::from_terms(terms, Coefficient(0).with_mode(mode));
  e.extend_to(dim);
  return e;
}

void check_well_formed(const PolyFile& f) {
  for (const auto& row : f.rows)
    if (row.size() != f.cols)
      throw DomainError(ErrorKind::invalid_argument,
                        "file row width differs from declared column count");
  if (!f.linearity.empty() && *f.linearity.rbegin() >= f.rows.size())
    throw DomainError(ErrorKind::invalid_argument,
                      "linearity index out of range");
}

}  // namespace

PolyFile parse_poly_file(const std::string& text) {
  std::vector<Token> toks = tokenize(text);
  PolyFile f;
  std::size_t i = 0;
  auto need = [&](const char* what) -> const Token& {
    if (i >= toks.size())
      fail(std::string("unexpected end of file, expected ") + what,
           toks.empty() ? 1 : toks.back().line, 1);
    return toks[i];
  };

  bool have_rep = false;
  std::vector<std::pair<std::size_t, Token>> linearity_raw;  // 1-based
  for (;;) {
    const Token& t = need("'begin'");
    if (t.text == "begin") {
      ++i;
      break;
    }
    if (t.text == "H-representation" || t.text == "V-representation") {
      if (have_rep) fail("duplicate representation line", t.line, t.col);
      f.representation = t.text[0] == 'H' ? PolyRep::H : PolyRep::V;
      have_rep = true;
      ++i;
      continue;
    }
    if (t.text == "linearity") {
      if (!linearity_raw.empty())
        fail("duplicate linearity line", t.line, t.col);
      ++i;
      std::size_t k = count_of(need("the linearity count"));
      ++i;
      if (k == 0) fail("empty linearity list", t.line, t.col);
      for (std::size_t j = 0; j < k; ++j) {
        const Token& idx = need("a linearity index");
        linearity_raw.emplace_back(count_of(idx), idx);
        ++i;
      }
      continue;
    }
    fail_at("unexpected directive before 'begin':", t);
  }

  std::size_t m = count_of(need("the row count"));
  ++i;
  f.cols = count_of(need("the column count"));
  ++i;
  if (f.cols == 0) {
    const Token& t = toks[i - 1];
    fail("column count must be positive", t.line, t.col);
  }
  {
    const Token& ty = need("the number type");
    if (ty.text == "integer")
      f.rational = false;
    else if (ty.text == "rational")
      f.rational = true;
    else
      fail_at("unsupported number type", ty);
    ++i;
  }

  f.rows.reserve(m);
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<Rational> row;
    row.reserve(f.cols);
    for (std::size_t c = 0; c < f.cols; ++c) {
      row.push_back(number_of(need("a number")));
      ++i;
    }
    f.rows.push_back(std::move(row));
  }

  {
    const Token& t = need("'end'");
    if (t.text != "end") fail_at("expected 'end', got", t);
    ++i;
  }

  for (const auto& [idx, tok] : linearity_raw) {
    if (idx == 0 || idx > m) fail_at("linearity index out of range:", tok);
    f.linearity.insert(idx - 1);
  }

  for (; i < toks.size(); ++i)
    f.warnings.push_back("ignored directive '" + toks[i].text + "' (line " +
                         std::to_string(toks[i].line) + ")");
  return f;
}

std::string write_poly_file(const PolyFile& f) {
  check_well_formed(f);
  std::ostringstream os;
  os << (f.representation == PolyRep::H ? "H-representation\n"
                                        : "V-representation\n");
  if (!f.linearity.empty()) {
    os << "linearity " << f.linearity.size();
    for (std::size_t idx : f.linearity) os << ' ' << idx + 1;
    os << '\n';
  }
  os << "begin\n " << f.rows.size() << ' ' << f.cols << " integer\n";
  for (const auto& row : f.rows) {
    std::vector<Coefficient> ints = clear_row(row);
    for (const Coefficient& c : ints) os << ' ' << c.to_string();
    os << '\n';
  }
  os << "end\n";
  return os.str();
}

ConstraintSystem to_constraint_system(const PolyFile& f,
                                      Coefficient::Mode mode) {
  if (f.representation != PolyRep::H)
    throw DomainError(ErrorKind::invalid_argument,
                      "expected an H-representation file");
  check_well_formed(f);
  dim_t n = f.space_dimension();
  ConstraintSystem cs(n);
  for (std::size_t r = 0; r < f.rows.size(); ++r) {
    std::vector<Coefficient> ints = clear_row(f.rows[r]);
    LinearExpression e = row_expression(ints, n, mode);
    e.set_inhomogeneous_term(ints[0].with_mode(mode));
    cs.insert(Constraint(std::move(e), f.linearity.count(r) != 0
                                           ? RelKind::equal
                                           : RelKind::nonstrict));
  }
  return cs;
}

GeneratorSystem to_generator_system(const PolyFile& f,
                                    Coefficient::Mode mode) {
  if (f.representation != PolyRep::V)
    throw DomainError(ErrorKind::invalid_argument,
                      "expected a V-representation file");
  check_well_formed(f);
  dim_t n = f.space_dimension();
  GeneratorSystem gs(n);
  for (std::size_t r = 0; r < f.rows.size(); ++r) {
    std::vector<Coefficient> ints = clear_row(f.rows[r]);
    LinearExpression e = row_expression(ints, n, mode);
    const Coefficient& leading = ints[0];
    bool marked_linear = f.linearity.count(r) != 0;
    if (leading.sign() < 0)
      throw DomainError(ErrorKind::invalid_argument,
                        "negative leading entry in V row " +
                            std::to_string(r + 1));
    if (leading.is_zero()) {
      gs.insert(marked_linear ? Generator::line(e) : Generator::ray(e));
    } else {
      if (marked_linear)
        throw DomainError(ErrorKind::invalid_argument,
                          "linearity marks V row " + std::to_string(r + 1) +
                              ", which is a point");
      gs.insert(Generator::point(e, leading.with_mode(mode)));
    }
  }
  return gs;
}

Polyhedron poly_to_domain(const PolyFile& f, Coefficient::Mode mode) {
  if (f.representation == PolyRep::H)
    return Polyhedron(to_constraint_system(f, mode));
  if (f.rows.empty()) return Polyhedron::empty(f.space_dimension());
  return Polyhedron(to_generator_system(f, mode));
}

PolyFile domain_to_poly(const Polyhedron& p, PolyRep rep) {
  PolyFile f;
  f.representation = rep;
  f.cols = p.space_dimension() + 1;
  dim_t n = p.space_dimension();
  if (rep == PolyRep::H) {
    ConstraintSystem cs = p.minimized_constraints();
    if (cs.has_strict_inequalities())
      throw DomainError(ErrorKind::topology_mismatch,
                        "strict inequalities cannot be written to a "
                        "topologically closed file format");
    for (std::size_t i = 0; i < cs.size(); ++i) {
      const Constraint& c = cs[i];
      std::vector<Rational> row;
      row.reserve(f.cols);
      row.emplace_back(c.inhomogeneous_term());
      for (dim_t j = 0; j < n; ++j)
        row.emplace_back(c.coefficient(Variable(j)));
      f.rows.push_back(std::move(row));
      if (c.is_equality()) f.linearity.insert(i);
    }
    return f;
  }
  if (p.is_empty()) return f;  // declared empty: no generator rows
  GeneratorSystem gs = p.minimized_generators();
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const Generator& g = gs[i];
    if (g.kind() == GenKind::closure_point)
      throw DomainError(ErrorKind::topology_mismatch,
                        "closure points cannot be written to a "
                        "topologically closed file format");
    std::vector<Rational> row;
    row.reserve(f.cols);
    row.emplace_back(g.kind() == GenKind::point ? g.divisor()
                                                : Coefficient(0));
    for (dim_t j = 0; j < n; ++j) row.emplace_back(g.coefficient(Variable(j)));
    f.rows.push_back(std::move(row));
    if (g.kind() == GenKind::line) f.linearity.insert(i);
  }
  return f;
}

namespace {

struct ClearedRow {
  std::vector<std::pair<dim_t, Coefficient>> terms;
  Coefficient rhs;    // right-hand side scaled by the same factor
  Coefficient scale;  // positive
};

ClearedRow clear_sparse(const std::map<dim_t, Rational>& terms,
                        const Rational& rhs) {
  Coefficient scale = rhs.den();
  for (const auto& [j, q] : terms) scale = Coefficient::lcm(scale, q.den());
  ClearedRow out;
  out.scale = scale;
  out.rhs = rhs.num() * Coefficient::div_exact(scale, rhs.den());
  for (const auto& [j, q] : terms) {
    Coefficient c = q.num() * Coefficient::div_exact(scale, q.den());
    if (!c.is_zero()) out.terms.emplace_back(j, std::move(c));
  }
  return out;
}

// a·x >= rhs when geq, a·x <= rhs otherwise (equality via RelKind::equal).
Constraint row_constraint(const std::map<dim_t, Rational>& terms,
                          const Rational& rhs, bool geq, RelKind kind,
                          dim_t dim) {
  ClearedRow c = clear_sparse(terms, rhs);
  LinearExpression e = LinearExpression::from_terms(c.terms, -c.rhs);
  if (!geq) e = -e;
  e.extend_to(dim);
  return Constraint(std::move(e), kind);
}

}  // namespace

MpsProblem parse_mps(const std::string& text) {
  enum class Sec { none, name, rows, columns, rhs, ranges, bounds };
  Sec sec = Sec::none;

  struct RawRow {
    char kind;
    std::string name;
  };
  std::vector<RawRow> rows;
  std::map<std::string, std::size_t> row_index;
  std::vector<std::map<dim_t, Rational>> row_terms;
  std::map<std::size_t, Rational> rhs_of;
  std::map<std::size_t, Rational> range_of;
  struct BoundRec {
    std::string kind;
    dim_t col;
    Rational value;
  };
  std::vector<BoundRec> bound_recs;

  MpsProblem mp;
  std::map<std::string, dim_t> col_index;
  bool saw_endata = false;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<Token> toks;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '*') continue;
    toks.clear();
    split_line(line, line_no, toks);
    if (toks.empty()) continue;

    if (!is_space(line[0])) {  // section header
      const std::string& s = toks[0].text;
      if (s == "NAME") {
        mp.name = toks.size() > 1 ? toks[1].text : "";
        sec = Sec::name;
      } else if (s == "ROWS") {
        sec = Sec::rows;
      } else if (s == "COLUMNS") {
        sec = Sec::columns;
      } else if (s == "RHS") {
        sec = Sec::rhs;
      } else if (s == "RANGES") {
        sec = Sec::ranges;
      } else if (s == "BOUNDS") {
        sec = Sec::bounds;
      } else if (s == "ENDATA") {
        saw_endata = true;
        break;
      } else {
        fail_at("unsupported section", toks[0]);
      }
      continue;
    }

    switch (sec) {
      case Sec::rows: {
        if (toks.size() != 2) fail("expected 'kind name'", line_no, toks[0].col);
        std::string k = toks[0].text;
        for (char& c : k) c = static_cast<char>(std::toupper(c));
        if (k.size() != 1 || std::string("NLGE").find(k[0]) == std::string::npos)
          fail_at("unknown row kind", toks[0]);
        if (!row_index.emplace(toks[1].text, rows.size()).second)
          fail_at("duplicate row", toks[1]);
        rows.push_back({k[0], toks[1].text});
        row_terms.emplace_back();
        break;
      }
      case Sec::columns: {
        for (const Token& t : toks)
          if (t.text == "'MARKER'" || t.text == "MARKER")
            fail("integer markers are not supported", t.line, t.col);
        if (toks.size() < 3 || toks.size() % 2 == 0)
          fail("expected 'column row value [row value]'", line_no,
               toks[0].col);
        auto [it, fresh] = col_index.emplace(
            toks[0].text, static_cast<dim_t>(mp.column_names.size()));
        if (fresh) mp.column_names.push_back(toks[0].text);
        dim_t col = it->second;
        for (std::size_t i = 1; i + 1 < toks.size(); i += 2) {
          auto row_it = row_index.find(toks[i].text);
          if (row_it == row_index.end()) fail_at("unknown row", toks[i]);
          Rational v = number_of(toks[i + 1]);
          auto [cell, inserted] =
              row_terms[row_it->second].emplace(col, v);
          if (!inserted) cell->second += v;
        }
        break;
      }
      case Sec::rhs:
      case Sec::ranges: {
        std::size_t i = toks.size() % 2 == 1 ? 1 : 0;  // skip the set name
        if (toks.size() - i == 0)
          fail("expected 'row value' pairs", line_no, toks[0].col);
        for (; i + 1 < toks.size(); i += 2) {
          auto row_it = row_index.find(toks[i].text);
          if (row_it == row_index.end()) fail_at("unknown row", toks[i]);
          Rational v = number_of(toks[i + 1]);
          (sec == Sec::rhs ? rhs_of : range_of)[row_it->second] = std::move(v);
        }
        break;
      }
      case Sec::bounds: {
        std::string k = toks[0].text;
        for (char& c : k) c = static_cast<char>(std::toupper(c));
        bool valued = k == "UP" || k == "LO" || k == "FX";
        if (!valued && k != "FR" && k != "MI" && k != "PL")
          fail_at("unsupported bound type", toks[0]);
        std::size_t expect_min = valued ? 3 : 2;
        if (toks.size() < expect_min || toks.size() > expect_min + 1)
          fail("malformed bound line", line_no, toks[0].col);
        const Token& col_tok = toks[toks.size() - (valued ? 2 : 1)];
        auto col_it = col_index.find(col_tok.text);
        if (col_it == col_index.end()) fail_at("unknown column", col_tok);
        Rational v;
        if (valued) v = number_of(toks.back());
        bound_recs.push_back({k, col_it->second, std::move(v)});
        break;
      }
      case Sec::name:
      case Sec::none:
        fail("expected a section header", line_no, toks[0].col);
    }
  }
  if (!saw_endata) fail("missing ENDATA", line_no == 0 ? 1 : line_no, 1);

  std::optional<std::size_t> obj;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].kind != 'N') continue;
    if (!obj)
      obj = i;
    else
      mp.warnings.push_back("ignored free row '" + rows[i].name + "'");
  }
  if (!obj)
    throw DomainError(ErrorKind::parse_error, "no objective (N) row");
  mp.objective_name = rows[*obj].name;

  dim_t n = static_cast<dim_t>(mp.column_names.size());
  mp.constraints = ConstraintSystem(n);
  const Rational zero;

  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].kind == 'N') continue;
    const std::map<dim_t, Rational>& terms = row_terms[i];
    auto rhs_it = rhs_of.find(i);
    const Rational& rhs = rhs_it == rhs_of.end() ? zero : rhs_it->second;
    auto rng_it = range_of.find(i);

    switch (rows[i].kind) {
      case 'L':
        mp.constraints.insert(
            row_constraint(terms, rhs, false, RelKind::nonstrict, n));
        if (rng_it != range_of.end())
          mp.constraints.insert(row_constraint(
              terms, rhs - rng_it->second.abs(), true, RelKind::nonstrict, n));
        break;
      case 'G':
        mp.constraints.insert(
            row_constraint(terms, rhs, true, RelKind::nonstrict, n));
        if (rng_it != range_of.end())
          mp.constraints.insert(row_constraint(
              terms, rhs + rng_it->second.abs(), false, RelKind::nonstrict, n));
        break;
      case 'E':
        if (rng_it == range_of.end() || rng_it->second.is_zero()) {
          mp.constraints.insert(
              row_constraint(terms, rhs, true, RelKind::equal, n));
        } else if (rng_it->second.sign() > 0) {
          mp.constraints.insert(
              row_constraint(terms, rhs, true, RelKind::nonstrict, n));
          mp.constraints.insert(row_constraint(
              terms, rhs + rng_it->second, false, RelKind::nonstrict, n));
        } else {
          mp.constraints.insert(row_constraint(
              terms, rhs + rng_it->second, true, RelKind::nonstrict, n));
          mp.constraints.insert(
              row_constraint(terms, rhs, false, RelKind::nonstrict, n));
        }
        break;
    }
  }
  mp.structural_rows = mp.constraints.size();

  // Column bounds: 0 <= x < +infinity unless overridden, applied in file
  // order; a constraint per finite side, in column order.
  std::vector<std::optional<Rational>> lo(n, Rational(0));
  std::vector<std::optional<Rational>> up(n);
  for (const BoundRec& b : bound_recs) {
    if (b.kind == "UP") {
      if (b.value.sign() < 0 && lo[b.col] && lo[b.col]->is_zero())
        mp.warnings.push_back("upper bound of column '" +
                              mp.column_names[b.col] +
                              "' lies below its default lower bound 0");
      up[b.col] = b.value;
    } else if (b.kind == "LO") {
      lo[b.col] = b.value;
    } else if (b.kind == "FX") {
      lo[b.col] = b.value;
      up[b.col] = b.value;
    } else if (b.kind == "FR") {
      lo[b.col].reset();
      up[b.col].reset();
    } else if (b.kind == "MI") {
      lo[b.col].reset();
    } else {  // PL
      up[b.col].reset();
    }
  }
  for (dim_t j = 0; j < n; ++j) {
    std::map<dim_t, Rational> unit{{j, Rational(1)}};
    if (lo[j] && up[j] && *lo[j] == *up[j]) {
      mp.constraints.insert(
          row_constraint(unit, *lo[j], true, RelKind::equal, n));
      continue;
    }
    if (lo[j])
      mp.constraints.insert(
          row_constraint(unit, *lo[j], true, RelKind::nonstrict, n));
    if (up[j])
      mp.constraints.insert(
          row_constraint(unit, *up[j], false, RelKind::nonstrict, n));
  }

  {
    auto rhs_it = rhs_of.find(*obj);
    const Rational& rhs = rhs_it == rhs_of.end() ? zero : rhs_it->second;
    ClearedRow c = clear_sparse(row_terms[*obj], rhs);
    mp.objective = LinearExpression::from_terms(c.terms, -c.rhs);
    mp.objective.extend_to(n);
    mp.objective_denominator = c.scale;
  }
  return mp;
}

ConstraintSystem with_coefficient_mode(const ConstraintSystem& cs,
                                       Coefficient::Mode mode) {
  ConstraintSystem out(cs.space_dimension());
  for (const Constraint& c : cs) {
    std::vector<std::pair<dim_t, Coefficient>> terms;
    for (dim_t j = 0; j < cs.space_dimension(); ++j) {
      const Coefficient& a = c.coefficient(Variable(j));
      if (!a.is_zero()) terms.emplace_back(j, a.with_mode(mode));
    }
    LinearExpression e = LinearExpression::from_terms(
        terms, c.inhomogeneous_term().with_mode(mode));
    e.extend_to(cs.space_dimension());
    out.insert(Constraint(std::move(e), c.kind()));
  }
  return out;
}

}  // namespace polydom
