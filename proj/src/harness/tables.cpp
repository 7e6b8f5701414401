#include "qmalab/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace qmalab::harness {

namespace {

// Shortest round-trip representation; "inf" and "nan" for non-finite values.
std::string format(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double min_of(const auto& range, auto&& key) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& x : range) m = std::min(m, key(x));
  return m;
}

}  // namespace

void write_csv(const std::filesystem::path& path, const Table& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t c = 0; c < table.columns.size(); ++c) out << (c ? "," : "") << table.columns[c];
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw std::logic_error("write_csv: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format(row[c]);
    out << '\n';
  }
}

Table read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  Table table;
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument(path.string() + ": missing header row");
  std::stringstream header(line);
  for (std::string cell; std::getline(header, cell, ',');) table.columns.push_back(cell);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": column '" +
                              (row.size() < table.columns.size() ? table.columns[row.size()] : "?") +
                              "' is not numeric");
      }
    }
    if (row.size() != table.columns.size()) {
      throw InvalidArgument(path.string() + ":" + std::to_string(lineno) + ": wrong number of cells");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table phi_a_table(const ExperimentRecord& rec) {
  Table t{{"s", "t", "A_s", "Phi_s", "Phi_s_minus_t", "phi_a_margin", "C4"}, {}};
  for (const auto& r : rec.phi_a) t.rows.push_back({r.s, r.t, r.A_s, r.Phi_s, r.Phi_s_minus_t, r.margin(), rec.ledger.C4});
  return t;
}

Table comparison_table(const ExperimentRecord& rec) {
  Table t{{"k", "s", "A_s", "A_k_s", "eps", "comparison_margin", "trudinger_beta", "alpha_emp",
           "trudinger_chain_margin", "dirichlet_residual"},
          {}};
  for (const auto& r : rec.comparison) {
    t.rows.push_back({double(r.k), r.s, r.A_s, r.A_k_s, r.eps, r.comparison_margin, r.trudinger_beta, r.alpha_emp,
                      r.trudinger_chain_margin, r.dirichlet_residual});
  }
  return t;
}

Table summary_table(const ExperimentRecord& rec) {
  const auto& L = rec.ledger;
  const auto& c = rec.certificate;
  const double phi_a = min_of(rec.phi_a, [](const PhiASample& s) { return s.margin(); });
  const double cmp = min_of(rec.comparison, [](const ComparisonRow& r) { return r.comparison_margin; });
  return Table{{"C4", "c1", "c1_geometric", "delta0", "entropy_p", "sup_F", "sup_abs_psi", "implied_bound",
                "log_implied_bound", "lhs", "rhs", "vacuous", "holds", "b", "cone_margin", "phi_a_margin",
                "comparison_margin", "young_margin", "c0", "r0", "S"},
               {{L.C4, L.c1, L.c1_geometric, L.delta0, rec.entropy_p, rec.sup_F, rec.sup_abs_psi, c.implied_bound,
                 c.log_implied_bound, c.lhs, c.rhs, double(c.vacuous), double(c.holds), rec.solve.b,
                 rec.solve.cone_margin, phi_a, cmp, rec.young_margin, L.c0, L.r0, L.S}}};
}

}  // namespace qmalab::harness
