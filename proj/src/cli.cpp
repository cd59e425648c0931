#include "searchlab/cli.h"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "searchlab/annotate.h"
#include "searchlab/error.h"
#include "searchlab/experiment.h"
#include "searchlab/landscape.h"
#include "searchlab/report.h"
#include "searchlab/run_store.h"
#include "searchlab/stats.h"
#include "searchlab/svg_plot.h"
#include "searchlab/version.h"

namespace searchlab {

namespace {

namespace fs = std::filesystem;

std::string read_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + file.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& file, const std::string& content) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw StateError("cannot write " + file.string());
  out << content;
}

int cmd_landscape_gen(int n, int k, std::uint64_t seed, std::string out_file) {
  const Landscape land = Landscape::generate(n, k, seed);
  if (out_file.empty()) {
    out_file = "landscape-n" + std::to_string(n) + "-k" + std::to_string(k) + "-s" +
               std::to_string(seed) + ".json";
  }
  write_file(out_file, land.save());
  std::cout << "wrote " << out_file << "\n";
  return 0;
}

int cmd_landscape_info(const std::string& file) {
  const Landscape land = Landscape::load(read_file(file));
  const LandscapeStats stats = land.enumerate_optima();
  std::cout << "n: " << land.n() << "\n"
            << "k: " << land.k() << "\n"
            << "seed: " << land.seed() << "\n"
            << "global optimum payoff: " << land.payoff_points(stats.global_optimum.first)
            << " points (configuration " << stats.global_optimum.first.to_string() << ")\n"
            << "local optima: " << stats.local_optima.size() << "\n";
  return 0;
}

int cmd_run(const std::string& config_file, const std::string& output_dir, int parallelism) {
  ExperimentConfig cfg = load_experiment_config(config_file);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (parallelism > 0) cfg.parallelism = parallelism;
  const ExperimentSummary summary = run_experiment(cfg, std::cout);
  std::cout << summary.total << " run(s): " << summary.completed << " completed, "
            << summary.aborted << " aborted, " << summary.skipped << " skipped\n";
  std::cout << "store: " << cfg.output_dir << "\n";
  return summary.aborted > 0 ? 1 : 0;
}

int cmd_annotate(const std::string& store_dir, const std::string& mode_name,
                 const std::string& provider_file, bool redo) {
  const fs::path dir = store_dir;
  if (!fs::exists(dir / kRunsFile)) {
    throw ConfigError("no run store at " + dir.string() + " (missing " + kRunsFile + ")");
  }
  const ClassifierMode mode = classifier_mode_from_string(mode_name);
  std::unique_ptr<Client> client;
  if (mode == ClassifierMode::llm) {
    if (provider_file.empty()) {
      throw ConfigError("--mode llm needs --provider with a provider config file");
    }
    const ProviderConfig pc = provider_config_from_json(read_file(provider_file));
    if (pc.kind == "scripted") throw ConfigError("scripted providers are test-only");
    client = std::make_unique<Client>(make_provider(pc), pc);
  }

  const StoreContents contents = read_store(dir);
  const auto have = read_annotation_hashes(dir);
  const std::string lex = lexicon_hash();
  const std::string rub = rubric_hash();

  RunStoreWriter writer(dir, kAnnotationsFile);
  long written = 0;
  long skipped = 0;
  for (const auto& sr : contents.runs) {
    const auto symbols = symbol_names(sr.run.landscape.n);
    for (const auto& tr : sr.run.trials) {
      const auto it = have.find({sr.run.run_id, tr.trial});
      if (!redo && it != have.end() && it->second.first == lex && it->second.second == rub) {
        ++skipped;
        continue;
      }
      const ThoughtAnnotation a =
          annotate_trial(sr.run.run_id, tr.trial, tr.thought_text, symbols, mode, client.get());
      writer.append(annotation_record(a, lex, rub, tr.thought_text.empty()));
      ++written;
    }
  }
  std::cout << "annotated " << written << " trial(s), " << skipped << " already current\n";
  return 0;
}

int cmd_analyze(const std::string& store_dir, std::string out_dir, bool allow_partial, bool force,
                const std::string& baseline_file) {
  const fs::path dir = store_dir;
  if (!fs::exists(dir / kRunsFile)) {
    throw ConfigError("no run store at " + dir.string() + " (missing " + kRunsFile + ")");
  }
  verify_store(dir);
  const StoreContents contents = read_store(dir);
  if (contents.config_hashes.size() > 1 && !force) {
    throw StateError("store mixes " + std::to_string(contents.config_hashes.size()) +
                     " configurations; pass --force to analyze anyway");
  }

  std::vector<RunRecord> complete;
  long left_out = 0;
  for (const auto& sr : contents.runs) {
    if (sr.has_end && sr.run.status == RunStatus::complete) {
      complete.push_back(sr.run);
    } else {
      ++left_out;
    }
  }
  if (left_out > 0 && !allow_partial) {
    throw StateError(std::to_string(left_out) +
                     " run(s) aborted or unfinished; pass --allow-partial to analyze the "
                     "complete ones");
  }
  if (complete.empty()) throw StateError("no complete runs to analyze");
  if (left_out > 0) {
    std::cout << "analyzing " << complete.size() << " complete run(s), leaving out " << left_out
              << "\n";
  }

  if (out_dir.empty()) out_dir = (dir / "analysis").string();
  fs::create_directories(out_dir);
  const fs::path out = out_dir;
  const Provenance prov{contents.config_hashes.empty() ? "" : contents.config_hashes.front(),
                        kToolVersion};

  const AnnotationIndex annotations = read_annotations(dir);
  const std::vector<ObservationRow> rows = build_rows(complete, annotations);
  write_rows_csv(out / "rows.csv", rows, prov);

  std::vector<Series> series = aggregates(complete, rows);
  if (!baseline_file.empty()) {
    std::vector<Series> human = human_baseline_series(baseline_file);
    series.insert(series.end(), std::make_move_iterator(human.begin()),
                  std::make_move_iterator(human.end()));
  }
  write_series_csv(out / "series_active_fraction.csv", series, "active_fraction", prov);
  write_series_csv(out / "series_distance_mean.csv", series, "distance_mean", prov);
  write_series_csv(out / "series_forward_ratio_mean.csv", series, "forward_ratio_mean", prov);

  const std::vector<OverallStat> overall = overall_distance(complete, rows);
  write_overall_csv(out / "overall_distance.csv", overall, prov);
  for (const auto& s : overall) {
    std::cout << "search distance [" << s.label << "]: mean " << s.mean;
    if (s.sd) std::cout << ", sd " << *s.sd;
    std::cout << ", n " << s.n << "\n";
  }

  const HeckmanResult heck = heckman(rows);
  const std::string table = heckman_table_text(heck, prov);
  write_file(out / "heckman.txt", table);
  write_file(out / "heckman.json", heckman_json_text(heck, prov));
  std::cout << "\n" << table;
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_plot(const std::string& series_dir, std::string out_dir) {
  const fs::path dir = series_dir;
  const fs::path active_file = dir / "series_active_fraction.csv";
  const fs::path distance_file = dir / "series_distance_mean.csv";
  const fs::path forward_file = dir / "series_forward_ratio_mean.csv";
  for (const auto& f : {active_file, distance_file, forward_file}) {
    if (!fs::exists(f)) throw ConfigError("missing series file " + f.string());
  }
  if (out_dir.empty()) out_dir = series_dir;
  const fs::path out = out_dir;

  const auto by_k = [](const Series& s) { return s.group.rfind("k=", 0) == 0; };
  const auto human = [](const Series& s) { return s.group.rfind("human/", 0) == 0; };
  const auto by_label = [&](const Series& s) { return !by_k(s) && !human(s); };
  auto pick = [](const std::vector<Series>& in, auto&&... preds) {
    std::vector<Series> outv;
    for (const auto& s : in) {
      if ((preds(s) || ...)) outv.push_back(s);
    }
    return outv;
  };

  const std::vector<Series> active = read_series_csv(active_file);
  const std::vector<Series> distance = read_series_csv(distance_file);
  const std::vector<Series> forward = read_series_csv(forward_file);

  PlotSpec spec;
  spec.title = "Actively searching agents by trial";
  spec.y_label = "active fraction";
  spec.y_min = 0.0;
  spec.y_max = 1.0;
  write_file(out / "active_fraction.svg", render_line_chart(pick(active, by_k, human), spec));

  spec = PlotSpec{};
  spec.title = "Search distance by landscape complexity";
  spec.y_label = "mean search distance";
  spec.y_min = 0.0;
  spec.envelopes = true;
  write_file(out / "distance_by_k.svg", render_line_chart(pick(distance, by_k, human), spec));

  spec = PlotSpec{};
  spec.title = "Forward-looking ratio by trial";
  spec.y_label = "mean forward-to-backward ratio";
  spec.y_min = 0.0;
  write_file(out / "forward_ratio.svg", render_line_chart(pick(forward, by_k), spec));

  spec = PlotSpec{};
  spec.title = "Search distance by population";
  spec.y_label = "mean search distance";
  spec.y_min = 0.0;
  spec.envelopes = true;
  write_file(out / "distance_by_population.svg",
             render_line_chart(pick(distance, by_label, human), spec));

  std::cout << "wrote 4 figure(s) to " << out.string() << "\n";
  return 0;
}

}  // namespace

int cli_main(std::vector<std::string> args) {
  CLI::App app{"NK-landscape search experiments with language-model agents"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  // landscape gen|info
  auto* landscape = app.add_subcommand("landscape", "generate or inspect NK landscapes");
  landscape->require_subcommand(1);
  auto* gen = landscape->add_subcommand("gen", "generate a landscape file");
  int gen_n = 10;
  int gen_k = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--n", gen_n, "number of binary decisions")->required();
  gen->add_option("--k", gen_k, "epistatic neighbors per decision")->required();
  gen->add_option("--seed", gen_seed, "generation seed")->required();
  gen->add_option("--out", gen_out, "output file (default landscape-n<n>-k<k>-s<seed>.json)");
  auto* info = landscape->add_subcommand("info", "print landscape properties");
  std::string info_file;
  info->add_option("file", info_file, "landscape file")->required()->check(CLI::ExistingFile);

  // run
  auto* run = app.add_subcommand("run", "execute an experiment config");
  std::string run_config;
  std::string run_out;
  int run_parallelism = 0;
  run->add_option("--config", run_config, "experiment config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--output-dir", run_out, "override the config's output directory");
  run->add_option("--parallelism", run_parallelism, "override the config's parallelism")
      ->check(CLI::PositiveNumber);

  // annotate
  auto* annotate = app.add_subcommand("annotate", "label stored thought text");
  std::string ann_store;
  std::string ann_mode = "heuristic";
  std::string ann_provider;
  bool ann_redo = false;
  annotate->add_option("--store", ann_store, "run store directory")->required();
  annotate->add_option("--mode", ann_mode, "classifier: heuristic or llm")
      ->check(CLI::IsMember({"heuristic", "llm"}));
  annotate->add_option("--provider", ann_provider, "provider config JSON for --mode llm")
      ->check(CLI::ExistingFile);
  annotate->add_flag("--redo", ann_redo, "re-annotate even when fixture hashes are unchanged");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "build tables and series from a run store");
  std::string ana_store;
  std::string ana_out;
  std::string ana_baseline;
  bool ana_allow_partial = false;
  bool ana_force = false;
  analyze->add_option("--store", ana_store, "run store directory")->required();
  analyze->add_option("--out", ana_out, "output directory (default <store>/analysis)");
  analyze->add_option("--human-baseline", ana_baseline, "human subject CSV to overlay")
      ->check(CLI::ExistingFile);
  analyze->add_flag("--allow-partial", ana_allow_partial,
                    "analyze complete runs even when some aborted");
  analyze->add_flag("--force", ana_force, "proceed on a store with mixed config hashes");

  // plot
  auto* plot = app.add_subcommand("plot", "render series files to SVG charts");
  std::string plot_dir;
  std::string plot_out;
  plot->add_option("--series-dir", plot_dir, "directory holding the series CSVs")->required();
  plot->add_option("--out", plot_out, "output directory (default the series dir)");

  std::vector<const char*> argv;
  argv.push_back("searchlab");
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_landscape_gen(gen_n, gen_k, gen_seed, gen_out);
    if (info->parsed()) return cmd_landscape_info(info_file);
    if (run->parsed()) return cmd_run(run_config, run_out, run_parallelism);
    if (annotate->parsed()) return cmd_annotate(ann_store, ann_mode, ann_provider, ann_redo);
    if (analyze->parsed()) {
      return cmd_analyze(ana_store, ana_out, ana_allow_partial, ana_force, ana_baseline);
    }
    if (plot->parsed()) return cmd_plot(plot_dir, plot_out);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}

}  // namespace searchlab
