#include "searchlab/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include <nlohmann/json.hpp>

#include "searchlab/configuration.h"
#include "searchlab/error.h"

namespace searchlab {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_provenance(std::ostream& out, const Provenance& p) {
  out << "# config_hash=" << p.config_hash << "\n# tool_version=" << p.tool_version << "\n";
}

std::ofstream open_out(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot write " + file.string());
  return out;
}

}  // namespace

std::string display_name(const std::string& column) {
  static const std::map<std::string, std::string> kNames = {
      {"attention_breadth", "Attention Breadth"},
      {"forward_ratio", "Forward Looking Ratio"},
      {"fwd_ratio_x_trial", "Forward Looking Ratio X Trial"},
      {"trial", "Trial"},
      {"early_feedback", "Early Feedback"},
      {"average_feedback", "Average Feedback"},
      {"immediate_feedback", "Immediate Feedback"},
      {"reference", "Reference"},
      {"prior_distance", "Prior Search Distance"},
      {"k5", "K = 5"},
      {"k9", "K = 9"},
      {"inverse_mills", "Inverse Mills Ratio"},
      {"intercept", "Constant"},
  };
  const auto it = kNames.find(column);
  return it == kNames.end() ? column : it->second;
}

void write_rows_csv(const std::filesystem::path& file, const std::vector<ObservationRow>& rows,
                    const Provenance& p) {
  std::ofstream out = open_out(file);
  write_provenance(out, p);
  out << "run_id,trial,active,distance,attention_breadth,forward_ratio,fwd_ratio_x_trial,"
         "early_feedback,average_feedback,immediate_feedback,reference,prior_distance,k5,k9,"
         "has_annotation\n";
  for (const auto& r : rows) {
    out << csv_field(r.run_id) << ',' << r.trial << ',' << r.active << ',' << r.distance << ','
        << r.attention_breadth << ',' << fmt(r.forward_ratio) << ',' << fmt(r.fwd_ratio_x_trial)
        << ',' << fmt(r.early_feedback) << ',' << fmt(r.average_feedback) << ','
        << fmt(r.immediate_feedback) << ',' << fmt(r.reference) << ',' << r.prior_distance << ','
        << r.k5 << ',' << r.k9 << ',' << (r.has_annotation ? 1 : 0) << '\n';
  }
}

void write_series_csv(const std::filesystem::path& file, const std::vector<Series>& series,
                      const std::string& metric, const Provenance& p) {
  std::ofstream out = open_out(file);
  write_provenance(out, p);
  out << "metric,group,trial,value,sd\n";
  for (const auto& s : series) {
    if (s.metric != metric) continue;
    for (const auto& pt : s.points) {
      out << csv_field(s.metric) << ',' << csv_field(s.group) << ',' << pt.trial << ',';
      if (pt.value) out << fmt(*pt.value);
      out << ',';
      if (pt.sd) out << fmt(*pt.sd);
      out << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

}  // namespace

std::vector<Series> read_series_csv(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot open series file " + file.string());
  std::vector<Series> series;
  std::map<std::pair<std::string, std::string>, std::size_t> index;  // (metric, group)
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // header names are fixed by the writer
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 5) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) + ": expected 5 columns");
    }
    SeriesPoint pt;
    try {
      pt.trial = std::stoi(f[2]);
      if (!f[3].empty()) pt.value = std::stod(f[3]);
      if (!f[4].empty()) pt.sd = std::stod(f[4]);
    } catch (const std::exception&) {
      throw FormatError(file.string() + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    const auto key = std::make_pair(f[0], f[1]);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, series.size()).first;
      series.push_back({f[1], f[0], {}});
    }
    series[it->second].points.push_back(pt);
  }
  return series;
}

void write_overall_csv(const std::filesystem::path& file, const std::vector<OverallStat>& stats,
                       const Provenance& p) {
  std::ofstream out = open_out(file);
  write_provenance(out, p);
  out << "label,mean,sd,n\n";
  for (const auto& s : stats) {
    out << csv_field(s.label) << ',' << fmt(s.mean) << ',';
    if (s.sd) out << fmt(*s.sd);
    out << ',' << s.n << '\n';
  }
}

namespace {

const FitTerm* find_term(const std::vector<FitTerm>& terms, const std::string& name) {
  for (const auto& t : terms) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::string cell(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%10.3f", v);
  return buf;
}

void append_term_cells(std::string& line, const FitTerm* t) {
  if (t == nullptr) {
    line += std::string(32, ' ');
  } else {
    line += cell(t->coef) + " " + cell(t->se) + " " + cell(t->p);
  }
}

}  // namespace

std::string heckman_table_text(const HeckmanResult& r, const Provenance& p) {
  // Stage-1 order drives the table; stage-2-only terms follow, intercept last.
  std::vector<std::string> order;
  for (const auto& t : r.stage1.terms) {
    if (t.name != "intercept") order.push_back(t.name);
  }
  for (const auto& t : r.stage2.terms) {
    if (t.name != "intercept" && find_term(r.stage1.terms, t.name) == nullptr) {
      order.push_back(t.name);
    }
  }
  order.push_back("intercept");

  constexpr int kNameWidth = 30;
  const std::string rule(kNameWidth + 2 + 32 + 4 + 32, '-');

  std::ostringstream out;
  out << "# config_hash=" << p.config_hash << "\n# tool_version=" << p.tool_version << "\n\n";
  out << "Two-step selection model of search behavior\n\n";
  auto pad = [&](const std::string& s, int width) {
    return s.size() >= static_cast<std::size_t>(width)
               ? s
               : s + std::string(static_cast<std::size_t>(width) - s.size(), ' ');
  };
  out << pad("", kNameWidth + 2) << pad("1st step: active search", 32 + 4)
      << "2nd step: search distance\n";
  out << pad("Variable", kNameWidth + 2) << "     Coef.       S.E.    P-value    "
      << "     Coef.       S.E.    P-value\n";
  out << rule << "\n";
  for (const auto& name : order) {
    std::string line = pad(display_name(name), kNameWidth + 2);
    append_term_cells(line, find_term(r.stage1.terms, name));
    line += "    ";
    append_term_cells(line, find_term(r.stage2.terms, name));
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << "\n";
  }
  out << rule << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%10ld", r.n_stage1);
  out << pad("Observations", kNameWidth + 2) << buf;
  std::snprintf(buf, sizeof buf, "%10ld", r.n_stage2);
  out << std::string(26, ' ') << buf << "\n";
  out << pad("Log-likelihood", kNameWidth + 2) << cell(r.stage1.log_likelihood) << "\n";
  out << pad("Pseudo R-squared", kNameWidth + 2) << cell(r.pseudo_r2) << "\n";
  out << pad("R-squared", kNameWidth + 2) << std::string(36, ' ') << cell(r.stage2.r2) << "\n\n";
  out << "Notes: stage 1 is a probit of actively searching (distance > 0); stage 2 is OLS of\n"
         "search distance on the actively searching rows with the inverse Mills ratio from\n"
         "stage 1. Early Feedback (best payoff of trials 1-3) is the exclusion restriction and\n"
         "enters stage 1 only; for trials 1-3 it conditions on information from later in the\n"
         "same window. Standard errors: observed information (stage 1), classical OLS without\n"
         "a generated-regressor correction (stage 2). P-values use normal z statistics.\n"
         "Payoff-valued covariates are scaled to [0, 1].\n";
  if (!r.dropped_columns.empty()) {
    out << "Dropped constant columns:";
    for (const auto& c : r.dropped_columns) out << ' ' << c;
    out << "\n";
  }
  if (!r.stage1.converged) {
    out << "WARNING: stage-1 probit did not converge (max |gradient| "
        << fmt(r.stage1.max_abs_gradient) << ")\n";
  }
  return out.str();
}

std::string heckman_json_text(const HeckmanResult& r, const Provenance& p) {
  using nlohmann::json;
  auto terms_json = [](const std::vector<FitTerm>& terms) {
    json arr = json::array();
    for (const auto& t : terms) {
      arr.push_back({{"name", t.name},
                     {"display_name", display_name(t.name)},
                     {"coef", t.coef},
                     {"se", t.se},
                     {"z", t.z},
                     {"p", t.p}});
    }
    return arr;
  };
  json j;
  j["config_hash"] = p.config_hash;
  j["tool_version"] = p.tool_version;
  j["stage1"] = {{"terms", terms_json(r.stage1.terms)},
                 {"log_likelihood", r.stage1.log_likelihood},
                 {"null_log_likelihood", r.stage1.null_log_likelihood},
                 {"converged", r.stage1.converged},
                 {"iterations", r.stage1.iterations},
                 {"max_abs_gradient", r.stage1.max_abs_gradient},
                 {"n", r.n_stage1}};
  j["stage2"] = {{"terms", terms_json(r.stage2.terms)},
                 {"r2", r.stage2.r2},
                 {"sigma", r.stage2.sigma},
                 {"n", r.n_stage2}};
  j["pseudo_r2"] = r.pseudo_r2;
  j["dropped_columns"] = r.dropped_columns;
  j["notes"] = {"stage-2 standard errors carry no generated-regressor correction",
                "early_feedback is the exclusion restriction and uses trials 1-3",
                "payoff-valued covariates are scaled to [0, 1]"};
  return j.dump(2) + "\n";
}

namespace {

struct BaselineTrial {
  int trial = 0;
  Configuration config;
  double payoff = 0.0;
};

struct BaselineSubject {
  std::optional<BaselineTrial> start;  // trial 0
  std::vector<BaselineTrial> trials;   // 1..T, ordered
};

}  // namespace

std::vector<Series> human_baseline_series(const std::filesystem::path& csv_file) {
  std::ifstream in(csv_file, std::ios::binary);
  if (!in) throw FormatError("cannot open baseline file " + csv_file.string());

  // (k, subject) -> trials, grouped while preserving nothing order-sensitive.
  std::map<int, std::map<std::string, BaselineSubject>> by_k;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_csv_line(line);
    if (!header_seen) {
      header_seen = true;
      const std::vector<std::string> expect = {"subject_id", "k", "trial", "config_bits",
                                               "payoff"};
      if (f.size() != expect.size() || !std::equal(f.begin(), f.end(), expect.begin())) {
        throw FormatError(csv_file.string() +
                          ": header must be subject_id,k,trial,config_bits,payoff");
      }
      continue;
    }
    const std::string at = csv_file.string() + ":" + std::to_string(line_no);
    if (f.size() != 5) throw FormatError(at + ": expected 5 columns, got " +
                                         std::to_string(f.size()));
    BaselineTrial t;
    int k = 0;
    try {
      k = std::stoi(f[1]);
    } catch (const std::exception&) {
      throw FormatError(at + ": column k is not an integer");
    }
    try {
      t.trial = std::stoi(f[2]);
    } catch (const std::exception&) {
      throw FormatError(at + ": column trial is not an integer");
    }
    if (t.trial < 0) throw FormatError(at + ": column trial is negative");
    try {
      t.config = Configuration::from_string(f[3]);
    } catch (const Error& e) {
      throw FormatError(at + ": column config_bits: " + e.what());
    }
    try {
      t.payoff = std::stod(f[4]);
    } catch (const std::exception&) {
      throw FormatError(at + ": column payoff is not a number");
    }
    BaselineSubject& subject = by_k[k][f[0]];
    if (t.trial == 0) {
      if (subject.start) throw FormatError(at + ": duplicate trial 0 for subject " + f[0]);
      subject.start = std::move(t);
    } else {
      subject.trials.push_back(std::move(t));
    }
  }
  if (!header_seen) throw FormatError(csv_file.string() + ": empty baseline file");

  std::vector<Series> out;
  for (auto& [k, subjects] : by_k) {
    int max_trial = 0;
    for (auto& [id, s] : subjects) {
      std::sort(s.trials.begin(), s.trials.end(),
                [](const BaselineTrial& a, const BaselineTrial& b) { return a.trial < b.trial; });
      for (std::size_t i = 1; i < s.trials.size(); ++i) {
        if (s.trials[i].trial == s.trials[i - 1].trial) {
          throw FormatError(csv_file.string() + ": subject " + id + " repeats trial " +
                            std::to_string(s.trials[i].trial));
        }
      }
      if (!s.trials.empty()) max_trial = std::max(max_trial, s.trials.back().trial);
    }

    Series active{"human/k=" + std::to_string(k), "active_fraction", {}};
    Series dist{"human/k=" + std::to_string(k), "distance_mean", {}};
    for (int t = 1; t <= max_trial; ++t) {
      std::vector<double> actives;
      std::vector<double> distances;  // active rows only
      for (const auto& [id, s] : subjects) {
        // Best payoff seen before t, including a disclosed start if present.
        const Configuration* best = nullptr;
        double best_payoff = 0.0;
        if (s.start) {
          best = &s.start->config;
          best_payoff = s.start->payoff;
        }
        const BaselineTrial* current = nullptr;
        for (const auto& tr : s.trials) {
          if (tr.trial == t) {
            current = &tr;
            break;
          }
          if (tr.trial > t) break;
          if (best == nullptr || tr.payoff > best_payoff) {
            best = &tr.config;
            best_payoff = tr.payoff;
          }
        }
        // No prior reference point means distance is undefined, not zero.
        if (current == nullptr || best == nullptr) continue;
        const int d = hamming(current->config, *best);
        actives.push_back(d > 0 ? 1.0 : 0.0);
        if (d > 0) distances.push_back(d);
      }
      SeriesPoint ap{t, std::nullopt, std::nullopt};
      if (!actives.empty()) {
        double sum = 0.0;
        for (double v : actives) sum += v;
        ap.value = sum / static_cast<double>(actives.size());
      }
      active.points.push_back(ap);

      SeriesPoint dp{t, std::nullopt, std::nullopt};
      if (!distances.empty()) {
        double sum = 0.0;
        for (double v : distances) sum += v;
        const double mean = sum / static_cast<double>(distances.size());
        dp.value = mean;
        if (distances.size() >= 2) {
          double ss = 0.0;
          for (double v : distances) ss += (v - mean) * (v - mean);
          dp.sd = std::sqrt(ss / static_cast<double>(distances.size() - 1));
        }
      }
      dist.points.push_back(dp);
    }
    out.push_back(std::move(active));
    out.push_back(std::move(dist));
  }
  return out;
}

}  // namespace searchlab
