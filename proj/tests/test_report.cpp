#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "searchlab/error.h"
#include "searchlab/report.h"
#include "searchlab/svg_plot.h"

using namespace searchlab;
namespace fs = std::filesystem;

namespace {

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t at = hay.find(needle); at != std::string::npos;
       at = hay.find(needle, at + needle.size())) {
    ++n;
  }
  return n;
}

// The full line containing `needle`, without its newline.
std::string line_with(const std::string& text, const std::string& needle) {
  const std::size_t at = text.find(needle);
  REQUIRE_MESSAGE(at != std::string::npos, "no line contains: " << needle);
  const std::size_t begin = text.rfind('\n', at) + 1;  // npos + 1 == 0
  std::size_t end = text.find('\n', at);
  if (end == std::string::npos) end = text.size();
  return text.substr(begin, end - begin);
}

struct ScratchDir {
  fs::path dir;
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    dir = fs::temp_directory_path() / ("searchlab-test-" + tag + "-" + std::to_string(rd()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~ScratchDir() { fs::remove_all(dir); }
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  REQUIRE_MESSAGE(bool(in), "cannot open " << file.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void spit(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << text;
}

const Provenance kProv{"cfg-hash-xyz", "searchlab 0.1.0"};

std::string baseline_error(const fs::path& file) {
  try {
    (void)human_baseline_series(file);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "(no FormatError)";
}

// A hand-filled two-stage result with one stage-1-only term (the exclusion
// restriction) and one stage-2-only term (the Mills ratio).
HeckmanResult sample_result() {
  HeckmanResult r;
  r.stage1.terms = {{"trial", 0.05, 0.01, 5.0, 1e-7},
                    {"early_feedback", -0.3, 0.2, -1.5, 0.13},
                    {"intercept", 0.4, 0.1, 4.0, 6e-5}};
  r.stage1.log_likelihood = -100.5;
  r.stage1.null_log_likelihood = -120.25;
  r.stage1.converged = true;
  r.stage1.iterations = 6;
  r.stage1.max_abs_gradient = 1e-10;
  r.stage1.n = 400;
  r.stage2.terms = {{"trial", 0.02, 0.005, 4.0, 6e-5},
                    {"inverse_mills", 0.8, 0.3, 2.67, 0.0077},
                    {"intercept", 1.2, 0.4, 3.0, 0.0027}};
  r.stage2.r2 = 0.25;
  r.stage2.sigma = 1.1;
  r.stage2.n = 260;
  r.pseudo_r2 = 1.0 - (-100.5) / (-120.25);
  r.n_stage1 = 400;
  r.n_stage2 = 260;
  r.dropped_columns = {"k9"};
  return r;
}

}  // namespace

TEST_CASE("display names cover the regression columns") {
  CHECK(display_name("forward_ratio") == "Forward Looking Ratio");
  CHECK(display_name("fwd_ratio_x_trial") == "Forward Looking Ratio X Trial");
  CHECK(display_name("prior_distance") == "Prior Search Distance");
  CHECK(display_name("inverse_mills") == "Inverse Mills Ratio");
  CHECK(display_name("intercept") == "Constant");
  CHECK(display_name("k5") == "K = 5");
  CHECK(display_name("not_a_column") == "not_a_column");  // pass-through
}

TEST_CASE("rows CSV carries provenance, a fixed header, and exact cells") {
  ScratchDir sd("rowscsv");
  ObservationRow r1;
  r1.run_id = "r1";
  r1.trial = 2;
  r1.active = 1;
  r1.distance = 3;
  r1.attention_breadth = 4;
  r1.forward_ratio = 1.5;
  r1.fwd_ratio_x_trial = 3.0;
  r1.early_feedback = 0.7;
  r1.average_feedback = 0.45;
  r1.immediate_feedback = 0.5;
  r1.reference = 0.7;
  r1.prior_distance = 1;
  r1.k5 = 1;
  r1.k9 = 0;
  r1.has_annotation = true;
  ObservationRow r2;
  r2.run_id = "we,\"ird";  // forces quoting
  r2.trial = 1;

  // A nested target directory is created on demand.
  const fs::path file = sd.dir / "tables" / "rows.csv";
  write_rows_csv(file, {r1, r2}, kProv);

  const std::string text = slurp(file);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# config_hash=cfg-hash-xyz");
  std::getline(in, line);
  CHECK(line == "# tool_version=searchlab 0.1.0");
  std::getline(in, line);
  CHECK(line ==
        "run_id,trial,active,distance,attention_breadth,forward_ratio,fwd_ratio_x_trial,"
        "early_feedback,average_feedback,immediate_feedback,reference,prior_distance,k5,k9,"
        "has_annotation");
  std::getline(in, line);
  CHECK(line == "r1,2,1,3,4,1.5,3,0.7,0.45,0.5,0.7,1,1,0,1");
  std::getline(in, line);
  CHECK(line == "\"we,\"\"ird\",1,0,0,0,0,0,0,0,0,0,0,0,0,0");
  CHECK_FALSE(std::getline(in, line));
}

TEST_CASE("series CSV writes one metric, leaves gaps empty, and reads back") {
  ScratchDir sd("seriescsv");
  Series af{"k=0", "active_fraction",
            {{1, 0.5, std::nullopt}, {2, std::nullopt, std::nullopt}, {3, 1.0, 0.25}}};
  Series dm{"k=0", "distance_mean", {{1, 2.5, 0.5}}};

  const fs::path file = sd.dir / "active.csv";
  write_series_csv(file, {af, dm}, "active_fraction", kProv);
  const std::string text = slurp(file);
  CHECK(contains(text, "metric,group,trial,value,sd\n"));
  CHECK(contains(text, "active_fraction,k=0,1,0.5,\n"));
  CHECK(contains(text, "active_fraction,k=0,2,,\n"));
  CHECK(contains(text, "active_fraction,k=0,3,1,0.25\n"));
  CHECK_FALSE(contains(text, "distance_mean"));  // filtered out

  const std::vector<Series> back = read_series_csv(file);
  REQUIRE(back.size() == 1);
  CHECK(back[0].group == "k=0");
  CHECK(back[0].metric == "active_fraction");
  REQUIRE(back[0].points.size() == 3);
  CHECK(back[0].points[0].value == 0.5);
  CHECK_FALSE(back[0].points[0].sd.has_value());
  CHECK_FALSE(back[0].points[1].value.has_value());  // the gap survives
  CHECK(back[0].points[2].value == 1.0);
  CHECK(back[0].points[2].sd == 0.25);
}

TEST_CASE("series CSV reader handles mixed metrics, quoting, and bad lines") {
  ScratchDir sd("seriesread");
  const fs::path file = sd.dir / "mixed.csv";
  spit(file,
       "# config_hash=x\n"
       "metric,group,trial,value,sd\n"
       "active_fraction,\"k=0,pilot\",1,0.25,\n"
       "distance_mean,k=0,1,2,0.5\n"
       "active_fraction,\"k=0,pilot\",2,0.75,\n");
  const std::vector<Series> series = read_series_csv(file);
  REQUIRE(series.size() == 2);
  CHECK(series[0].metric == "active_fraction");
  CHECK(series[0].group == "k=0,pilot");  // quotes stripped
  REQUIRE(series[0].points.size() == 2);
  CHECK(series[0].points[1].value == 0.75);
  CHECK(series[1].metric == "distance_mean");
  REQUIRE(series[1].points.size() == 1);
  CHECK(series[1].points[0].sd == 0.5);

  spit(file, "metric,group,trial,value\nactive_fraction,k=0,1,0.5\n");
  try {
    (void)read_series_csv(file);
    CHECK(false);
  } catch (const FormatError& e) {
    CHECK(contains(e.what(), ":2: expected 5 columns"));
  }

  spit(file, "metric,group,trial,value,sd\nactive_fraction,k=0,one,0.5,\n");
  try {
    (void)read_series_csv(file);
    CHECK(false);
  } catch (const FormatError& e) {
    CHECK(contains(e.what(), ":2: non-numeric field"));
  }

  try {
    (void)read_series_csv(sd.dir / "absent.csv");
    CHECK(false);
  } catch (const FormatError& e) {
    CHECK(contains(e.what(), "cannot open series file"));
  }
}

TEST_CASE("overall CSV leaves the sd cell empty for singletons") {
  ScratchDir sd("overallcsv");
  const std::vector<OverallStat> stats = {{"all", 3.8, 0.5, 5}, {"local", 3.0, std::nullopt, 1}};
  const fs::path file = sd.dir / "overall.csv";
  write_overall_csv(file, stats, kProv);
  const std::string text = slurp(file);
  CHECK(contains(text, "label,mean,sd,n\n"));
  CHECK(contains(text, "all,3.8,0.5,5\n"));
  CHECK(contains(text, "local,3,,1\n"));
}

TEST_CASE("the two-step table lays out both stages side by side") {
  const HeckmanResult r = sample_result();
  const std::string table = heckman_table_text(r, kProv);

  CHECK(contains(table, "# config_hash=cfg-hash-xyz"));
  CHECK(contains(table, "# tool_version=searchlab 0.1.0"));
  CHECK(contains(table, "Two-step selection model"));
  CHECK(contains(table, "1st step: active search"));
  CHECK(contains(table, "2nd step: search distance"));

  // Stage-1 order first, stage-2-only terms after, the constant last.
  const std::size_t p_trial = table.find("\nTrial ");
  const std::size_t p_early = table.find("\nEarly Feedback");
  const std::size_t p_mills = table.find("\nInverse Mills Ratio");
  const std::size_t p_const = table.find("\nConstant");
  REQUIRE(p_trial != std::string::npos);
  REQUIRE(p_early != std::string::npos);
  REQUIRE(p_mills != std::string::npos);
  REQUIRE(p_const != std::string::npos);
  CHECK(p_trial < p_early);
  CHECK(p_early < p_mills);
  CHECK(p_mills < p_const);

  // The exclusion restriction shows stage-1 cells only.
  const std::string early = line_with(table, "Early Feedback");
  CHECK(contains(early, "-0.300"));
  CHECK(contains(early, "0.130"));
  CHECK(early.size() == 64);  // name column plus stage-1 cells, nothing after

  // The Mills ratio shows stage-2 cells only.
  const std::string mills = line_with(table, "Inverse Mills Ratio");
  CHECK(mills.substr(32, 36) == std::string(36, ' '));
  CHECK(contains(mills, "0.800"));

  const std::string obs = line_with(table, "Observations");
  CHECK(contains(obs, "400"));
  CHECK(contains(obs, "260"));
  CHECK(contains(line_with(table, "Log-likelihood"), "-100.500"));
  const std::size_t pseudo_at = table.find("Pseudo R-squared");
  REQUIRE(pseudo_at != std::string::npos);
  CHECK(contains(line_with(table, "Pseudo R-squared"), "0.164"));
  // The plain R-squared row sits below the pseudo one.
  CHECK(contains(line_with(table.substr(pseudo_at + 16), "R-squared"), "0.250"));

  CHECK(contains(table, "exclusion restriction"));
  CHECK(contains(table, "Dropped constant columns: k9"));
  CHECK_FALSE(contains(table, "WARNING"));

  HeckmanResult shaky = r;
  shaky.stage1.converged = false;
  shaky.stage1.max_abs_gradient = 0.02;
  shaky.dropped_columns.clear();
  const std::string warned = heckman_table_text(shaky, kProv);
  CHECK(contains(warned, "WARNING: stage-1 probit did not converge"));
  CHECK(contains(warned, "0.02"));
  CHECK_FALSE(contains(warned, "Dropped constant columns"));
}

TEST_CASE("the JSON table parses and mirrors the text output") {
  const HeckmanResult r = sample_result();
  const std::string text = heckman_json_text(r, kProv);
  CHECK(text.back() == '\n');

  const nlohmann::json j = nlohmann::json::parse(text);
  CHECK(j.at("config_hash") == "cfg-hash-xyz");
  CHECK(j.at("tool_version") == "searchlab 0.1.0");
  REQUIRE(j.at("stage1").at("terms").size() == 3);
  CHECK(j.at("stage1").at("terms").at(0).at("name") == "trial");
  CHECK(j.at("stage1").at("terms").at(0).at("display_name") == "Trial");
  CHECK(j.at("stage1").at("terms").at(0).at("coef").get<double>() == doctest::Approx(0.05));
  CHECK(j.at("stage1").at("n") == 400);
  CHECK(j.at("stage1").at("converged") == true);
  CHECK(j.at("stage2").at("terms").size() == 3);
  CHECK(j.at("stage2").at("r2").get<double>() == doctest::Approx(0.25));
  CHECK(j.at("stage2").at("n") == 260);
  CHECK(j.at("pseudo_r2").get<double>() == doctest::Approx(1.0 - (-100.5) / (-120.25)));
  CHECK(j.at("dropped_columns") == nlohmann::json::array({"k9"}));
  CHECK(j.at("notes").is_array());
}

TEST_CASE("human baseline series aggregate active shares and distances") {
  ScratchDir sd("baseline");
  const fs::path file = sd.dir / "human.csv";
  spit(file,
       "# exported from the lab spreadsheet\n"
       "subject_id,k,trial,config_bits,payoff\n"
       "s1,3,0,0000,10\n"
       "s1,3,1,0011,40\n"
       "s1,3,2,0011,40\n"
       "\n"
       "s2,3,1,1111,5\n"
       "s2,3,2,1110,50\n"
       "s2,3,3,1110,50\n"
       "s3,3,0,0000,0\n"
       "s3,3,1,0111,60\n"
       "h9,7,0,00,1\n"
       "h9,7,1,01,2\n");

  const std::vector<Series> series = human_baseline_series(file);
  REQUIRE(series.size() == 4);
  CHECK(series[0].group == "human/k=3");
  CHECK(series[0].metric == "active_fraction");
  CHECK(series[1].group == "human/k=3");
  CHECK(series[1].metric == "distance_mean");
  CHECK(series[2].group == "human/k=7");
  CHECK(series[3].group == "human/k=7");

  // k=3, trial 1: s1 moved 2 bits off its start, s3 moved 3; s2 disclosed no
  // start, so its first move has no reference point and stays out entirely.
  const Series& af = series[0];
  REQUIRE(af.points.size() == 3);
  CHECK(af.points[0].trial == 1);
  CHECK(af.points[0].value == 1.0);
  CHECK(af.points[1].value == 0.5);  // s1 resubmits, s2 moves
  CHECK(af.points[2].value == 0.0);  // only s2 left, and it resubmits

  const Series& dm = series[1];
  REQUIRE(dm.points.size() == 3);
  CHECK(dm.points[0].value == doctest::Approx(2.5));
  CHECK(dm.points[0].sd == doctest::Approx(std::sqrt(0.5)));
  CHECK(dm.points[1].value == doctest::Approx(1.0));
  CHECK_FALSE(dm.points[1].sd.has_value());  // one active mover
  CHECK_FALSE(dm.points[2].value.has_value());  // nobody active: a gap

  REQUIRE(series[2].points.size() == 1);
  CHECK(series[2].points[0].value == 1.0);
  CHECK(series[3].points[0].value == doctest::Approx(1.0));
}

TEST_CASE("baseline format errors name the file, line, and column") {
  ScratchDir sd("baselinebad");
  const fs::path file = sd.dir / "human.csv";
  const std::string header = "subject_id,k,trial,config_bits,payoff\n";

  spit(file, "subject,k,trial,bits,payoff\ns1,3,1,0011,40\n");
  CHECK(contains(baseline_error(file), "header must be subject_id,k,trial,config_bits,payoff"));

  spit(file, header + "s1,three,1,0011,40\n");
  {
    const std::string msg = baseline_error(file);
    CHECK(contains(msg, ":2: column k is not an integer"));
    CHECK(contains(msg, file.string()));
  }

  spit(file, header + "s1,3,-1,0011,40\n");
  CHECK(contains(baseline_error(file), ":2: column trial is negative"));

  spit(file, header + "s1,3,1,01x1,40\n");
  CHECK(contains(baseline_error(file), ":2: column config_bits"));

  spit(file, header + "s1,3,1,0011,lots\n");
  CHECK(contains(baseline_error(file), ":2: column payoff is not a number"));

  spit(file, header + "s1,3,0,0011,40\ns1,3,0,0011,41\n");
  CHECK(contains(baseline_error(file), ":3: duplicate trial 0 for subject s1"));

  spit(file, header + "s1,3,2,0011,40\ns1,3,2,0111,41\n");
  CHECK(contains(baseline_error(file), "subject s1 repeats trial 2"));

  spit(file, header + "s1,3,1,0011\n");
  CHECK(contains(baseline_error(file), ":2: expected 5 columns, got 4"));

  spit(file, "# nothing here\n");
  CHECK(contains(baseline_error(file), "empty baseline file"));

  CHECK(contains(baseline_error(sd.dir / "absent.csv"), "cannot open baseline file"));
}

TEST_CASE("line charts are deterministic, break at gaps, and mark loners") {
  Series broken{"k=0", "active_fraction",
                {{1, 0.5, std::nullopt},
                 {2, std::nullopt, std::nullopt},
                 {3, 0.8, std::nullopt},
                 {4, 0.9, std::nullopt}}};
  PlotSpec spec;
  spec.title = "Active <search> & \"share\"";
  spec.y_label = "share";

  const std::string svg = render_line_chart({broken}, spec);
  CHECK(svg.rfind("<svg xmlns=", 0) == 0);
  CHECK(contains(svg, "</svg>\n"));
  // The isolated first point becomes a dot; the rest one unbroken polyline.
  CHECK(count_of(svg, "<circle") == 1);
  CHECK(count_of(svg, "<polyline") == 1);
  CHECK(contains(svg, "Active &lt;search&gt; &amp; &quot;share&quot;"));
  CHECK(svg == render_line_chart({broken}, spec));  // byte-stable

  // Human overlays are dashed, in the plot and in the legend.
  Series model{"k=3", "distance_mean", {{1, 2.0, std::nullopt}, {2, 3.0, std::nullopt}}};
  Series human{"human/k=3", "distance_mean", {{1, 2.5, std::nullopt}, {2, 2.8, std::nullopt}}};
  const std::string overlay = render_line_chart({model, human}, PlotSpec{"d", "trial", "distance"});
  CHECK(count_of(overlay, "stroke-dasharray") == 2);
  CHECK(count_of(overlay, "<polyline") == 2);
  CHECK(contains(overlay, ">human/k=3</text>"));
  CHECK(contains(overlay, ">k=3</text>"));
}

TEST_CASE("line charts shade envelopes only when asked") {
  Series s{"k=5", "distance_mean", {{1, 2.0, 0.5}, {2, 3.0, 0.4}, {3, 2.5, 0.6}}};
  PlotSpec plain;
  plain.title = "d";
  CHECK_FALSE(contains(render_line_chart({s}, plain), "<polygon"));

  PlotSpec banded = plain;
  banded.envelopes = true;
  const std::string svg = render_line_chart({s}, banded);
  CHECK(count_of(svg, "<polygon") == 1);
  CHECK(contains(svg, "fill-opacity=\"0.15\""));
}

TEST_CASE("an empty chart says so instead of plotting nothing") {
  Series gaps{"k=0", "active_fraction",
              {{1, std::nullopt, std::nullopt}, {2, std::nullopt, std::nullopt}}};
  PlotSpec spec;
  spec.title = "empty";
  const std::string svg = render_line_chart({gaps}, spec);
  CHECK(contains(svg, ">no data</text>"));
  CHECK(count_of(svg, "<polyline") == 0);
  CHECK(count_of(svg, "<circle") == 0);

  // Pinned axes show their endpoints even with no data.
  PlotSpec pinned = spec;
  pinned.y_min = 0.0;
  pinned.y_max = 1.0;
  const std::string fixed = render_line_chart({}, pinned);
  CHECK(contains(fixed, ">0</text>"));
  CHECK(contains(fixed, ">1</text>"));
}
