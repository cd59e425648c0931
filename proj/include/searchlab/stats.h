#ifndef SEARCHLAB_STATS_H
#define SEARCHLAB_STATS_H

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "searchlab/annotate.h"
#include "searchlab/game.h"

namespace searchlab {

// One regression observation per (run, trial). Payoff-valued covariates are
// raw fitness in [0, 1], i.e. display points / 100.
struct ObservationRow {
  std::string run_id;
  int trial = 0;  // 1-based
  int active = 0;
  int distance = 0;
  int attention_breadth = 0;
  double forward_ratio = 0.0;
  double fwd_ratio_x_trial = 0.0;
  double early_feedback = 0.0;    // max payoff of trials 1..3, constant per run
  double average_feedback = 0.0;  // mean payoff over trials 1..t-1 (t=1: start)
  double immediate_feedback = 0.0;  // payoff at t-1 (t=1: start)
  double reference = 0.0;           // max payoff through t-1 (t=1: start)
  int prior_distance = 0;           // distance at t-1 (t=1: 0)
  int k5 = 0;
  int k9 = 0;
  bool has_annotation = false;  // attention fields zero-filled when false
};

// Expands every complete run into exactly trials_planned rows. Runs lacking
// annotations get zero-filled attention fields with has_annotation = false.
// Throws IntegrityError when a run is incomplete, naming it.
std::vector<ObservationRow> build_rows(const std::vector<RunRecord>& runs,
                                       const AnnotationIndex& annotations);

// Standard normal density / distribution. cdf(0) = 0.5 exactly.
double norm_pdf(double x);
double norm_cdf(double x);
// log(cdf(x)), finite and accurate far into the left tail.
double log_norm_cdf(double x);
// pdf(x)/cdf(x), with a continued-fraction tail for x < -6.
double inverse_mills(double x);

struct FitTerm {
  std::string name;
  double coef = 0.0;
  double se = 0.0;
  double z = 0.0;
  double p = 0.0;
};

struct ProbitFit {
  std::vector<FitTerm> terms;
  double log_likelihood = 0.0;
  double null_log_likelihood = 0.0;
  bool converged = false;
  int iterations = 0;
  double max_abs_gradient = 0.0;
  long n = 0;
};

struct OlsFit {
  std::vector<FitTerm> terms;
  double r2 = 0.0;
  double sigma = 0.0;  // residual standard error
  long n = 0;
};

// Probit MLE by Newton-Raphson with analytic gradient and observed
// information; converged when max|gradient| < 1e-8, capped at 100 iterations.
// SEs are inverse-observed-information diagonals. Throws ParameterError on a
// single-class y or an all-zero column, StateError naming the column on
// single-column perfect separation, RankError on singular information.
ProbitFit probit_fit(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
                     const Eigen::VectorXd& y);

// OLS through a column-pivoted QR with classical SEs. Throws RankError naming
// the dependent columns when X is rank-deficient.
OlsFit ols_fit(const std::vector<std::string>& names, const Eigen::MatrixXd& X,
               const Eigen::VectorXd& y);

struct HeckmanResult {
  ProbitFit stage1;  // active ~ full covariate set
  OlsFit stage2;     // distance ~ covariates minus early_feedback, plus Mills, active rows
  double pseudo_r2 = 0.0;  // McFadden, stage 1
  long n_stage1 = 0;
  long n_stage2 = 0;
  std::vector<std::string> dropped_columns;  // constant columns removed before fitting
};

// Two-step selection model: stage-1 probit of active, stage-2 OLS of distance
// on active rows with the inverse Mills ratio of the stage-1 linear index.
// early_feedback identifies the selection equation and is excluded from stage
// 2. Constant covariate columns are dropped (recorded) so sparse stores still
// fit; the intercept always stays.
HeckmanResult heckman(const std::vector<ObservationRow>& rows);

struct SeriesPoint {
  int trial = 0;
  std::optional<double> value;  // absent = gap
  std::optional<double> sd;     // absent = undefined (e.g. single observation)
};

struct Series {
  std::string group;   // "k=5" or a population label
  std::string metric;  // active_fraction | distance_mean | forward_ratio_mean
  std::vector<SeriesPoint> points;
};

// Per-trial series grouped by K and, separately, by population label:
// active_fraction over all runs in the group; distance mean/SD over actively
// searching rows only; forward-ratio mean over annotated rows. Missing data
// yields explicit gaps, never silent zeros. SDs are sample (n-1) SDs.
std::vector<Series> aggregates(const std::vector<RunRecord>& runs,
                               const std::vector<ObservationRow>& rows);

struct OverallStat {
  std::string label;
  double mean = 0.0;
  std::optional<double> sd;
  long n = 0;
};

// Mean/SD of search distance over active rows, per population label plus a
// pooled "all" row.
std::vector<OverallStat> overall_distance(const std::vector<RunRecord>& runs,
                                          const std::vector<ObservationRow>& rows);

}  // namespace searchlab

#endif  // SEARCHLAB_STATS_H
