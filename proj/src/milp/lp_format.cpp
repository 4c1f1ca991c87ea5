#include "spatel/milp/lp_format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "spatel/formula.hpp"

namespace spatel::milp {

namespace {

constexpr std::size_t kWrap = 100;

class LineWriter {
 public:
  explicit LineWriter(std::ostream& out) : out_(out) {}

  void start(const std::string& head) {
    line_ = head;
    first_ = true;
  }

  void term(double coef, const std::string& name) {
    std::string piece;
    if (first_) {
      if (coef == -1) piece = "- ";
      else if (coef < 0) piece = "- " + format_number(-coef) + " ";
      else if (coef != 1) piece = format_number(coef) + " ";
    } else {
      piece = coef < 0 ? "- " : "+ ";
      if (std::abs(coef) != 1) piece += format_number(std::abs(coef)) + " ";
    }
    piece += name;
    push(piece);
    first_ = false;
  }

  void push(const std::string& piece) {
    if (line_.size() + 1 + piece.size() > kWrap && line_.find_first_not_of(' ') != std::string::npos) {
      out_ << line_ << "\n";
      line_ = "   " + piece;
    } else {
      line_ += (line_.empty() || line_.back() == ' ' ? "" : " ") + piece;
    }
  }

  void end() { out_ << line_ << "\n"; }

 private:
  std::ostream& out_;
  std::string line_;
  bool first_ = true;
};

}  // namespace

void write_lp(std::ostream& out, const Model& model) {
  LineWriter w(out);
  out << "Minimize\n";
  w.start(" obj:");
  const auto& obj = model.objective();
  if (obj.terms().empty() && model.var_count() > 0) w.term(0, model.vars()[0].name);
  for (const auto& t : obj.terms()) w.term(t.coef, model.var(t.var).name);
  if (obj.constant() != 0)
    w.push((obj.constant() < 0 ? "- " : "+ ") + format_number(std::abs(obj.constant())));
  w.end();

  out << "Subject To\n";
  for (const auto& c : model.constraints()) {
    w.start(" " + c.name + ":");
    if (c.terms.empty() && model.var_count() > 0) w.term(0, model.vars()[0].name);
    for (const auto& t : c.terms) w.term(t.coef, model.var(t.var).name);
    w.push(std::string(to_string(c.sense)) + " " + format_number(c.rhs));
    w.end();
  }

  out << "Bounds\n";
  for (const auto& v : model.vars()) {
    if (v.lower == v.upper) out << " " << v.name << " = " << format_number(v.lower) << "\n";
    else out << " " << format_number(v.lower) << " <= " << v.name << " <= " << format_number(v.upper) << "\n";
  }

  bool any_bin = false, any_int = false;
  for (const auto& v : model.vars()) {
    any_bin = any_bin || v.kind == VarKind::Binary;
    any_int = any_int || v.kind == VarKind::Integer;
  }
  if (any_bin) {
    out << "Binaries\n";
    for (const auto& v : model.vars())
      if (v.kind == VarKind::Binary) out << " " << v.name << "\n";
  }
  if (any_int) {
    out << "Generals\n";
    for (const auto& v : model.vars())
      if (v.kind == VarKind::Integer) out << " " << v.name << "\n";
  }
  out << "End\n";
}

void export_lp(const Model& model, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write_lp(f, model);
  if (!f) throw std::runtime_error("error writing " + path.string());
}

Solution read_solution(std::istream& in, const Model& model, std::vector<std::string>* warnings,
                       double tolerance) {
  std::vector<double> x(model.var_count(), std::numeric_limits<double>::quiet_NaN());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string name, value, extra;
    if (!(ls >> name)) continue;
    if (!(ls >> value) || (ls >> extra))
      throw SolutionError("line " + std::to_string(lineno) + ": expected '<name> <value>'");
    double v = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size() || !std::isfinite(v))
      throw SolutionError("line " + std::to_string(lineno) + ": bad value '" + value + "'");
    auto id = model.find(name);
    if (!id) throw SolutionError("line " + std::to_string(lineno) + ": unknown variable '" + name + "'");
    if (!std::isnan(x[id->index]))
      throw SolutionError("line " + std::to_string(lineno) + ": duplicate variable '" + name + "'");
    x[id->index] = v;
  }
  int missing = 0;
  for (int j = 0; j < model.var_count(); ++j) {
    if (!std::isnan(x[j])) continue;
    x[j] = model.vars()[j].lower;
    ++missing;
    if (warnings && missing <= 20)
      warnings->push_back("variable '" + model.vars()[j].name + "' missing, using lower bound " +
                          format_number(x[j]));
  }
  if (warnings && missing > 20)
    warnings->push_back(std::to_string(missing - 20) + " more variables missing");

  const auto worst = model.worst_violation(x, true);
  if (worst.amount > tolerance)
    throw SolutionError("solution violates " + worst.where + " by " + format_number(worst.amount));
  Solution s;
  s.status = Status::Optimal;
  s.values = std::move(x);
  s.objective = model.evaluate(s.values);
  s.bound = s.objective;
  s.gap = 0;
  s.stats.max_violation = worst.amount;
  return s;
}

Solution import_solution(const Model& model, const std::filesystem::path& path, std::vector<std::string>* warnings,
                         double tolerance) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  return read_solution(f, model, warnings, tolerance);
}

void write_solution(std::ostream& out, const Model& model, const std::vector<double>& values) {
  for (int j = 0; j < model.var_count(); ++j) out << model.vars()[j].name << " " << format_number(values.at(j)) << "\n";
}

}  // namespace spatel::milp
