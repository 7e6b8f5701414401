#include "qmalab/field_io.hpp"
#include "qmalab/solver.hpp"

#include <json.hpp>

#include <fstream>

namespace qmalab::solver {

namespace {
constexpr const char* kReportFile = "report.json";
constexpr const char* kPotentialFile = "potential.field";
}  // namespace

void write_report(const std::filesystem::path& dir, const SolveReport& report) {
  std::filesystem::create_directories(dir);
  geometry::write_field(dir / kPotentialFile, report.potential);
  nlohmann::json j;
  j["format"] = "qmalab-solve-report";
  j["version"] = 1;
  j["potential"] = kPotentialFile;
  j["b"] = report.b;
  j["cone_margin"] = report.cone_margin;
  j["iterations"] = report.iterations;
  j["residual_history"] = report.residual_history;
  j["continuation"] = report.continuation;
  j["sup_potential"] = report.potential.max();
  std::ofstream out(dir / kReportFile);
  if (!out) throw std::runtime_error("cannot write " + (dir / kReportFile).string());
  out << j.dump(2) << '\n';
}

SolveReport read_report(const std::filesystem::path& dir) {
  std::ifstream in(dir / kReportFile);
  if (!in) throw std::runtime_error("cannot read " + (dir / kReportFile).string());
  const nlohmann::json j = nlohmann::json::parse(in);
  if (j.value("format", "") != "qmalab-solve-report") {
    throw InvalidArgument((dir / kReportFile).string() + " is not a solve report");
  }
  SolveReport report(geometry::read_scalar_field(dir / j.at("potential").get<std::string>()));
  report.b = j.at("b").get<double>();
  report.cone_margin = j.at("cone_margin").get<double>();
  report.iterations = j.at("iterations").get<int>();
  report.residual_history = j.at("residual_history").get<std::vector<double>>();
  report.continuation = j.at("continuation").get<std::vector<double>>();
  return report;
}

}  // namespace qmalab::solver
