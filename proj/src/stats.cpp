#include "searchlab/stats.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "searchlab/error.h"

namespace searchlab {

std::vector<ObservationRow> build_rows(const std::vector<RunRecord>& runs,
                                       const AnnotationIndex& annotations) {
  std::vector<ObservationRow> rows;
  for (const auto& run : runs) {
    if (run.status != RunStatus::complete ||
        static_cast<int>(run.trials.size()) != run.trials_planned) {
      throw IntegrityError("run '" + run.run_id + "' is incomplete (" +
                           std::to_string(run.trials.size()) + " of " +
                           std::to_string(run.trials_planned) + " trials, status " +
                           to_string(run.status) + ")");
    }
    const int T = run.trials_planned;
    for (int t = 1; t <= T; ++t) {
      if (run.trials[static_cast<std::size_t>(t - 1)].trial != t) {
        throw IntegrityError("run '" + run.run_id + "' is missing trial " + std::to_string(t));
      }
    }

    const double start = run.start_payoff / 100.0;
    auto fitness = [&](int t) {  // 1-based trial payoff on the unit scale
      return run.trials[static_cast<std::size_t>(t - 1)].payoff / 100.0;
    };

    double early = fitness(1);
    for (int t = 2; t <= std::min(3, T); ++t) early = std::max(early, fitness(t));

    double running_sum = 0.0;
    double running_max = start;
    for (int t = 1; t <= T; ++t) {
      const auto& tr = run.trials[static_cast<std::size_t>(t - 1)];
      ObservationRow row;
      row.run_id = run.run_id;
      row.trial = t;
      row.active = tr.active ? 1 : 0;
      row.distance = tr.distance;
      row.early_feedback = early;
      row.immediate_feedback = t == 1 ? start : fitness(t - 1);
      row.reference = running_max;
      row.average_feedback = t == 1 ? start : running_sum / (t - 1);
      row.prior_distance = t == 1 ? 0 : run.trials[static_cast<std::size_t>(t - 2)].distance;
      row.k5 = run.landscape.k == 5 ? 1 : 0;
      row.k9 = run.landscape.k == 9 ? 1 : 0;

      const auto it = annotations.find({run.run_id, t});
      if (it != annotations.end()) {
        row.has_annotation = true;
        row.attention_breadth = it->second.breadth;
        row.forward_ratio = forward_ratio(it->second);
        row.fwd_ratio_x_trial = row.forward_ratio * t;
      }
      rows.push_back(std::move(row));

      running_sum += fitness(t);
      running_max = std::max(running_max, fitness(t));
    }
  }
  return rows;
}

namespace {

struct DesignColumn {
  std::string name;
  double ObservationRow::*real = nullptr;
  int ObservationRow::*integer = nullptr;
};

double column_value(const ObservationRow& row, const DesignColumn& col) {
  if (col.real != nullptr) return row.*(col.real);
  return static_cast<double>(row.*(col.integer));
}

const std::vector<DesignColumn>& stage1_columns() {
  static const std::vector<DesignColumn> cols = {
      {"attention_breadth", nullptr, &ObservationRow::attention_breadth},
      {"forward_ratio", &ObservationRow::forward_ratio, nullptr},
      {"fwd_ratio_x_trial", &ObservationRow::fwd_ratio_x_trial, nullptr},
      {"trial", nullptr, &ObservationRow::trial},
      {"early_feedback", &ObservationRow::early_feedback, nullptr},
      {"average_feedback", &ObservationRow::average_feedback, nullptr},
      {"immediate_feedback", &ObservationRow::immediate_feedback, nullptr},
      {"reference", &ObservationRow::reference, nullptr},
      {"prior_distance", nullptr, &ObservationRow::prior_distance},
      {"k5", nullptr, &ObservationRow::k5},
      {"k9", nullptr, &ObservationRow::k9},
  };
  return cols;
}

}  // namespace

HeckmanResult heckman(const std::vector<ObservationRow>& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n == 0) throw ParameterError("heckman needs observation rows");

  // Constant columns carry no information and break the fit; drop them but
  // remember which (sparse scripted stores produce several).
  std::vector<DesignColumn> kept;
  HeckmanResult result;
  for (const auto& col : stage1_columns()) {
    double lo = column_value(rows.front(), col), hi = lo;
    for (const auto& row : rows) {
      const double v = column_value(row, col);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (lo == hi) {
      result.dropped_columns.push_back(col.name);
    } else {
      kept.push_back(col);
    }
  }
  if (kept.empty()) throw ParameterError("every covariate is constant; nothing to fit");

  const auto p1 = static_cast<Eigen::Index>(kept.size()) + 1;
  Eigen::MatrixXd X1(n, p1);
  Eigen::VectorXd y1(n);
  std::vector<std::string> names1;
  for (const auto& col : kept) names1.push_back(col.name);
  names1.push_back("intercept");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < kept.size(); ++j) {
      X1(i, static_cast<Eigen::Index>(j)) = column_value(row, kept[j]);
    }
    X1(i, p1 - 1) = 1.0;
    y1(i) = row.active;
  }

  result.stage1 = probit_fit(names1, X1, y1);
  result.n_stage1 = static_cast<long>(n);
  result.pseudo_r2 = 1.0 - result.stage1.log_likelihood / result.stage1.null_log_likelihood;

  Eigen::VectorXd beta1(p1);
  for (Eigen::Index j = 0; j < p1; ++j) beta1(j) = result.stage1.terms[static_cast<std::size_t>(j)].coef;
  const Eigen::VectorXd xb = X1 * beta1;

  std::vector<Eigen::Index> active_rows;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (rows[static_cast<std::size_t>(i)].active == 1) active_rows.push_back(i);
  }
  result.n_stage2 = static_cast<long>(active_rows.size());
  if (active_rows.empty()) throw ParameterError("no active rows for the second stage");

  std::vector<DesignColumn> kept2;
  for (const auto& col : kept) {
    if (col.name != "early_feedback") kept2.push_back(col);  // exclusion restriction
  }
  const auto p2 = static_cast<Eigen::Index>(kept2.size()) + 2;  // + mills + intercept
  Eigen::MatrixXd X2(static_cast<Eigen::Index>(active_rows.size()), p2);
  Eigen::VectorXd y2(static_cast<Eigen::Index>(active_rows.size()));
  std::vector<std::string> names2;
  for (const auto& col : kept2) names2.push_back(col.name);
  names2.push_back("inverse_mills");
  names2.push_back("intercept");
  for (std::size_t a = 0; a < active_rows.size(); ++a) {
    const Eigen::Index i = active_rows[a];
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < kept2.size(); ++j) {
      X2(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(j)) = column_value(row, kept2[j]);
    }
    X2(static_cast<Eigen::Index>(a), p2 - 2) = inverse_mills(xb(i));
    X2(static_cast<Eigen::Index>(a), p2 - 1) = 1.0;
    y2(static_cast<Eigen::Index>(a)) = row.distance;
  }

  try {
    result.stage2 = ols_fit(names2, X2, y2);
  } catch (const RankError& e) {
    const std::string what = e.what();
    if (what.find("inverse_mills") != std::string::npos) {
      throw RankError(what + "; the Mills term is only identified when early_feedback (the "
                             "exclusion restriction) varies across runs");
    }
    throw;
  }
  return result;
}

namespace {

struct Bucket {
  // (run_id, value) pairs; summed in run_id order so results do not depend on
  // input permutation.
  std::vector<std::pair<std::string, double>> values;

  void add(const std::string& run_id, double v) { values.emplace_back(run_id, v); }

  std::optional<double> mean() {
    if (values.empty()) return std::nullopt;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (const auto& [id, v] : values) sum += v;
    return sum / static_cast<double>(values.size());
  }

  std::optional<double> sample_sd(double m) const {
    if (values.size() < 2) return std::nullopt;
    double ss = 0.0;
    for (const auto& [id, v] : values) ss += (v - m) * (v - m);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
};

}  // namespace

std::vector<Series> aggregates(const std::vector<RunRecord>& runs,
                               const std::vector<ObservationRow>& rows) {
  std::map<std::string, std::pair<std::string, std::string>> groups_of_run;  // id -> (k, label)
  int max_trial = 0;
  for (const auto& run : runs) {
    groups_of_run[run.run_id] = {"k=" + std::to_string(run.landscape.k), run.agent_label};
    max_trial = std::max(max_trial, run.trials_planned);
  }

  // metric -> group -> trial -> bucket
  std::map<std::string, std::map<std::string, std::map<int, Bucket>>> data;
  for (const auto& row : rows) {
    const auto it = groups_of_run.find(row.run_id);
    if (it == groups_of_run.end()) {
      throw IntegrityError("observation row references unknown run '" + row.run_id + "'");
    }
    for (const std::string& group : {it->second.first, it->second.second}) {
      data["active_fraction"][group][row.trial].add(row.run_id, row.active);
      if (row.active == 1) {
        data["distance_mean"][group][row.trial].add(row.run_id, row.distance);
      }
      if (row.has_annotation) {
        data["forward_ratio_mean"][group][row.trial].add(row.run_id, row.forward_ratio);
      }
    }
  }

  std::vector<Series> out;
  for (auto& [metric, by_group] : data) {
    for (auto& [group, by_trial] : by_group) {
      Series series;
      series.group = group;
      series.metric = metric;
      for (int t = 1; t <= max_trial; ++t) {
        SeriesPoint point;
        point.trial = t;
        const auto bt = by_trial.find(t);
        if (bt != by_trial.end()) {
          point.value = bt->second.mean();
          if (metric == "distance_mean" && point.value) {
            point.sd = bt->second.sample_sd(*point.value);
          }
        }
        series.points.push_back(point);
      }
      out.push_back(std::move(series));
    }
  }
  return out;
}

std::vector<OverallStat> overall_distance(const std::vector<RunRecord>& runs,
                                          const std::vector<ObservationRow>& rows) {
  std::map<std::string, std::string> label_of_run;
  for (const auto& run : runs) label_of_run[run.run_id] = run.agent_label;

  std::map<std::string, Bucket> buckets;
  for (const auto& row : rows) {
    if (row.active != 1) continue;
    const auto it = label_of_run.find(row.run_id);
    if (it == label_of_run.end()) {
      throw IntegrityError("observation row references unknown run '" + row.run_id + "'");
    }
    buckets[it->second].add(row.run_id, row.distance);
    buckets["all"].add(row.run_id, row.distance);
  }

  std::vector<OverallStat> out;
  for (auto& [label, bucket] : buckets) {
    OverallStat stat;
    stat.label = label;
    stat.n = static_cast<long>(bucket.values.size());
    const auto m = bucket.mean();
    stat.mean = m.value_or(0.0);
    if (m) stat.sd = bucket.sample_sd(*m);
    out.push_back(std::move(stat));
  }
  return out;
}

}  // namespace searchlab
