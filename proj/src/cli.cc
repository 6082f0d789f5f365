/* Copyright 2026 The ambiprune Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "ambiprune/cli.h"

#include <pthread.h>
#include <signal.h>

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "ambiprune/ambiguity.h"
#include "ambiprune/error.h"
#include "ambiprune/eval.h"
#include "ambiprune/plot.h"
#include "ambiprune/service.h"
#include "json_fields.h"

namespace ambiprune::cli {

namespace {

void check(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

void validate_common(const RunConfig& config) {
  check(config.iou > 0.0 && config.iou <= 1.0, "--iou must lie in (0, 1]");
  check(config.conf >= 0.0 && config.conf <= 1.0, "--conf must lie in [0, 1]");
  check(config.bins >= 1, "--bins must be at least 1");
  check(config.over_prune_factor > 0.0, "--over-prune-factor must be positive");
  if (config.threshold) {
    check(*config.threshold >= 0.0 && *config.threshold <= 1.0,
          "--threshold must lie in [0, 1]");
  }
  builtin_subset(config.subset);
}

std::string format_summary(const AmbiguitySummary& s) {
  return fmt::format(
      "mean ambiguity {:.4f}; min {:.4f} q25 {:.4f} median {:.4f} q75 {:.4f} "
      "max {:.4f}",
      s.mean, s.quantiles[0], s.quantiles[1], s.quantiles[2], s.quantiles[3],
      s.quantiles[4]);
}

// Runs body, translating library errors into exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
}

std::filesystem::path default_report_path(const std::filesystem::path& output) {
  std::filesystem::path report = output;
  report.replace_extension();
  report += ".report.json";
  return report;
}

}  // namespace

int cmd_score(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_common(config);
    check(config.output.has_value(), "score needs --output");
    Dataset dataset = load_dataset(config.input, config.format);
    if (config.scores) {
      dataset = apply_score_records(dataset, load_score_file(*config.scores));
    }
    Dataset scored = score_dataset(
        dataset, ScoringOptions{.overwrite = config.overwrite, .jobs = config.jobs});
    save_dataset(scored, *config.output);
    AmbiguitySummary summary = summarize_ambiguity(scored);
    fmt::print(out, "scored {}: {} images, {} instances\n", scored.name,
               summary.images, summary.instances);
    fmt::print(out, "{}\n", format_summary(summary));
    return 0;
  });
}

int cmd_report(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_common(config);
    check(config.output.has_value(), "report needs --output (a directory)");
    Dataset dataset = load_dataset(config.input, config.format);
    AmbiguityHistogram hist = histogram(dataset, config.bins);

    std::error_code ec;
    std::filesystem::create_directories(*config.output, ec);
    if (ec) throw IoError("cannot create " + config.output->string());
    internal::write_text_file(*config.output / "histogram.json",
                              histogram_to_json(hist).dump(2) + "\n");
    internal::write_text_file(*config.output / "tag_proportions.csv",
                              histogram_csv(hist));
    internal::write_text_file(*config.output / "tag_proportions.svg",
                              histogram_svg(hist));

    fmt::print(out, "histogram: {} bins, {} scored instances\n", hist.bins(),
               dataset.instance_count());
    for (TagFamily f : kAllTagFamilies) {
      for (TagLevel l : kAllTagLevels) {
        if (auto peak = hist.peak(f, l)) {
          fmt::print(out, "peak {} {}: bin {} [{}, {}{}\n", to_string(f),
                     to_string(l), *peak, hist.bin_edges[*peak],
                     hist.bin_edges[*peak + 1],
                     *peak + 1 == hist.bins() ? "]" : ")");
        }
      }
    }
    auto ranked = rank_by_ambiguity(dataset);
    std::size_t shown = std::min(config.top, ranked.size());
    fmt::print(out, "top {} most ambiguous:\n", shown);
    for (std::size_t i = 0; i < shown; ++i) {
      const Instance& inst = resolve(dataset, ranked[i].ref);
      fmt::print(out, "{:>4}. {} image={} ambiguity={:.4f} occlusion={} "
                      "truncation={}\n",
                 i + 1, inst.id, dataset.images[ranked[i].ref.image].image_id,
                 ranked[i].ambiguity, to_string(inst.occlusion),
                 to_string(inst.truncation));
    }
    return 0;
  });
}

int cmd_prune(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_common(config);
    check(config.threshold.has_value(), "prune needs --threshold");
    check(config.output.has_value(), "prune needs --output");
    Dataset dataset = load_dataset(config.input, config.format);
    PruneOutcome pruned =
        prune(dataset, *config.threshold, config.mode,
              PruneOptions{.over_prune_factor = config.over_prune_factor,
                           .jobs = config.jobs});
    save_dataset(pruned.dataset, *config.output);
    std::filesystem::path report_path =
        config.report.value_or(default_report_path(*config.output));
    internal::write_text_file(
        report_path, prune_report_to_json(pruned.report).dump(2) + "\n");

    const PruneReport& r = pruned.report;
    fmt::print(out, "{} ({}): removed {} of {} instances ({:.4f}), kept {}\n",
               pruning_label(*config.threshold), to_string(config.mode),
               r.removed, r.removed + r.kept, r.removal_rate, r.kept);
    for (const TagRemoval* entry : r.over_pruned()) {
      fmt::print(out,
                 "warning: over-pruned {} {}: removal rate {:.4f} vs overall "
                 "{:.4f}\n",
                 to_string(entry->family), to_string(entry->level),
                 entry->rate, r.removal_rate);
    }
    return 0;
  });
}

int cmd_eval(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_common(config);
    check(config.detections.has_value(), "eval needs --detections");
    Dataset dataset = load_dataset(config.input, config.format);
    std::vector<Detection> detections = load_detections(*config.detections);
    EvalOptions options;
    options.iou_threshold = config.iou;
    options.confidence_threshold = config.conf;
    options.identity = config.identity;
    options.jobs = config.jobs;
    EvalResult result =
        evaluate(dataset, detections, builtin_subset(config.subset), options);
    if (config.output) {
      internal::write_text_file(*config.output, serialize_eval_result(result));
    }
    const auto& c = result.prf.counts;
    fmt::print(out, "LAMR={}{} P={:.4f} R={:.4f} F1={:.4f} (subset {}, TP={} "
                    "FP={} FN={})\n",
               result.lamr.at_floor ? 0.0 : result.lamr.value,
               result.lamr.at_floor ? " (floor)" : "", result.prf.precision,
               result.prf.recall, result.prf.f1, result.subset, c.tp, c.fp,
               c.fn);
    return 0;
  });
}

int cmd_serve(const RunConfig& config, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    validate_common(config);
    check(config.port >= 0 && config.port <= 65535, "--port must lie in [0, 65535]");
    Dataset dataset = load_dataset(config.input, config.format);
    std::optional<std::vector<Detection>> detections;
    if (config.detections) detections = load_detections(*config.detections);
    auto session =
        std::make_shared<const SessionState>(std::move(dataset), std::move(detections));
    ServiceOptions options;
    options.identity = config.identity;
    options.image_root = config.input.parent_path();
    options.jobs = config.jobs;
    ApiService service(session, options);
    HttpServer server(service, HttpServer::Options{config.cors_origin,
                                                   config.static_dir});

    // Signals are consumed by a watcher thread; the server threads inherit
    // the blocked mask.
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    int port = server.bind(config.host, config.port);
    fmt::print(out, "listening on http://{}:{}\n", config.host, port);
    out.flush();

    std::thread watcher([&server, signals] {
      int received = 0;
      sigwait(&signals, &received);
      server.stop();
    });
    server.listen();
    pthread_kill(watcher.native_handle(), SIGTERM);
    watcher.join();
    pthread_sigmask(SIG_UNBLOCK, &signals, nullptr);
    return 0;
  });
}

namespace {

void configure_logging(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("ambiprune", sink);
  logger->set_pattern("%l: %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("AMBIPRUNE_LOG")) {
    level = spdlog::level::from_str(env);
  }
  logger->set_level(level);
  spdlog::set_default_logger(logger);
}

void add_input(CLI::App* cmd, RunConfig& config, std::string& format) {
  cmd->add_option("--input", config.input, "Dataset file (or ECP directory)")
      ->required();
  cmd->add_option("--format", format, "Input format")
      ->check(CLI::IsMember({"native", "ecp"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  configure_logging(err);

  RunConfig config;
  std::string format = "native";
  std::string mode = "ignore";
  CLI::App app{"Annotation ambiguity scoring, pruning and detection evaluation",
               "ambiprune"};
  app.require_subcommand(1);

  CLI::App* score = app.add_subcommand("score", "Quantify ambiguity per instance");
  add_input(score, config, format);
  score->add_option("--output", config.output, "Scored dataset file");
  score->add_option("--scores", config.scores, "Score import file (JSON lines)");
  score->add_flag("--overwrite", config.overwrite,
                  "Recompute scores of instances that carry answers");
  score->add_option("--jobs", config.jobs, "Worker threads (0 = all cores)");

  CLI::App* report = app.add_subcommand("report", "Ambiguity histogram and tag distribution");
  add_input(report, config, format);
  report->add_option("--output", config.output, "Output directory");
  report->add_option("--bins", config.bins, "Histogram bins");
  report->add_option("--top", config.top, "Most ambiguous instances to list");

  CLI::App* prune_cmd = app.add_subcommand("prune", "Remove instances at or above a threshold");
  add_input(prune_cmd, config, format);
  prune_cmd->add_option("--output", config.output, "Pruned dataset file");
  prune_cmd->add_option("--threshold", config.threshold, "Ambiguity threshold");
  prune_cmd->add_option("--mode", mode, "delete or ignore")
      ->check(CLI::IsMember({"delete", "ignore"}));
  prune_cmd->add_option("--report", config.report,
                        "Report file (default: <output>.report.json)");
  prune_cmd->add_option("--over-prune-factor", config.over_prune_factor,
                        "Flag tag levels removed this many times faster than overall");
  prune_cmd->add_option("--jobs", config.jobs, "Worker threads (0 = all cores)");

  CLI::App* eval = app.add_subcommand("eval", "Evaluate detections against ground truth");
  add_input(eval, config, format);
  eval->add_option("--detections", config.detections, "Detections (JSON lines)");
  eval->add_option("--output", config.output, "Evaluation result file");
  eval->add_option("--subset", config.subset, "reasonable, small, occluded or all");
  eval->add_option("--identity", config.identity, "Evaluated class");
  eval->add_option("--iou", config.iou, "IoU threshold");
  eval->add_option("--conf", config.conf, "Confidence threshold for P/R/F1");
  eval->add_option("--jobs", config.jobs, "Worker threads (0 = all cores)");

  CLI::App* serve = app.add_subcommand("serve", "Serve the read-only HTTP API");
  add_input(serve, config, format);
  serve->add_option("--detections", config.detections, "Detections (JSON lines)");
  serve->add_option("--identity", config.identity, "Evaluated class");
  serve->add_option("--host", config.host, "Bind address");
  serve->add_option("--port", config.port, "Port (0 = ephemeral)");
  serve->add_option("--cors-origin", config.cors_origin, "Allowed CORS origin");
  serve->add_option("--static", config.static_dir, "Directory served at /");
  serve->add_option("--jobs", config.jobs, "Worker threads (0 = all cores)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  config.format = *dataset_format_from_string(format);
  config.mode = *prune_mode_from_string(mode);

  if (score->parsed()) return cmd_score(config, out, err);
  if (report->parsed()) return cmd_report(config, out, err);
  if (prune_cmd->parsed()) return cmd_prune(config, out, err);
  if (eval->parsed()) return cmd_eval(config, out, err);
  return cmd_serve(config, out, err);
}

}  // namespace ambiprune::cli
