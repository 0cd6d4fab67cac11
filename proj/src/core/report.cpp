#include "core/report.hpp"

#include <cstdio>

namespace oodcl::report {

namespace {

std::string f6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string pct2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%6.2f", 100.0 * v);
  return buf;
}

void append_metrics(std::string& out, const metrics::MetricsReport& m) {
  out += "\"fpr_at_95\": " + f6(m.fpr_at_95) + ", ";
  out += "\"auroc\": " + f6(m.auroc) + ", ";
  out += "\"aupr\": " + f6(m.aupr);
}

void append_report_body(std::string& out, const std::string& model_name,
                        const std::string& score_name,
                        const train::EvalReport& r, const std::string& indent) {
  out += indent + "\"model\": \"" + model_name + "\",\n";
  out += indent + "\"score\": \"" + score_name + "\",\n";
  out += indent + "\"id_accuracy\": " + f6(r.id_accuracy) + ",\n";
  out += indent + "\"n_id_test\": " +
         std::to_string(r.summary.sets.empty() ? 0
                                               : r.summary.sets[0].report.n_id) +
         ",\n";
  out += indent + "\"ood_sets\": [\n";
  for (std::size_t i = 0; i < r.summary.sets.size(); ++i) {
    const auto& s = r.summary.sets[i];
    out += indent + "  {\"name\": \"" + s.name + "\", \"n_ood\": " +
           std::to_string(s.report.n_ood) + ", ";
    append_metrics(out, s.report);
    out += i + 1 < r.summary.sets.size() ? "},\n" : "}\n";
  }
  out += indent + "],\n";
  out += indent + "\"average\": {";
  append_metrics(out, r.summary.average);
  out += "}";
}

}  // namespace

std::string to_json(const std::string& model_name,
                    const std::string& score_name,
                    const train::EvalReport& report) {
  std::string out = "{\n";
  out += "  \"schema\": \"oodcl-report-v1\",\n";
  append_report_body(out, model_name, score_name, report, "  ");
  out += "\n}\n";
  return out;
}

std::string compare_json(const std::string& score_name,
                         std::span<const NamedReport> reports) {
  std::string out = "{\n";
  out += "  \"schema\": \"oodcl-compare-v1\",\n";
  out += "  \"score\": \"" + score_name + "\",\n";
  out += "  \"models\": [\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += "    {\n";
    append_report_body(out, reports[i].model_name, score_name,
                       reports[i].report, "      ");
    out += i + 1 < reports.size() ? "\n    },\n" : "\n    }\n";
  }
  out += "  ]\n}\n";
  return out;
}

std::string compare_table(std::span<const NamedReport> reports) {
  if (reports.empty()) throw EmptyInputError("compare table: no reports");

  // Row labels come from the first report; all models share the OOD sets.
  std::vector<std::string> rows;
  for (const auto& s : reports[0].report.summary.sets) rows.push_back(s.name);
  rows.push_back("average");

  constexpr int kNameWidth = 16;
  std::string out;
  auto pad = [](std::string s, std::size_t w) {
    if (s.size() < w) s += std::string(w - s.size(), ' ');
    return s;
  };

  out += pad("set", kNameWidth);
  for (const auto& r : reports) {
    out += "| " + pad(r.model_name, 22);
  }
  out += "\n" + pad("", kNameWidth);
  for (std::size_t i = 0; i < reports.size(); ++i) {
    out += "| " + pad("FPR95  AUROC   AUPR", 22);
  }
  out += "\n";
  out += std::string(kNameWidth + reports.size() * 24, '-') + "\n";

  for (std::size_t row = 0; row < rows.size(); ++row) {
    out += pad(rows[row], kNameWidth);
    for (const auto& r : reports) {
      const metrics::MetricsReport& m =
          row + 1 == rows.size() ? r.report.summary.average
                                 : r.report.summary.sets[row].report;
      out += "| " + pct2(m.fpr_at_95) + " " + pct2(m.auroc) + " " +
             pct2(m.aupr) + "  ";
    }
    out += "\n";
  }
  out += "\n";
  out += pad("accuracy", kNameWidth);
  for (const auto& r : reports) {
    out += "| " + pad(pct2(r.report.id_accuracy), 22);
  }
  out += "\n";
  return out;
}

}  // namespace oodcl::report
