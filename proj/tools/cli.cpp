#include "cli.h"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rpid/errors.h"
#include "rpid/estimation.h"
#include "rpid/evalkit.h"
#include "rpid/io.h"
#include "rpid/synth.h"

namespace rpid::cli {

namespace {

// Invalid flag values found after CLI11 parsing; mapped to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GenerateOptions {
  std::string family = "gamma";
  double shape = 1.0;
  double rate = 1.0;
  int n_events = 20;
  int n_entries = 1000;
  double injection_rate = 0.1;
  double positive_fraction = 0.5;
  std::optional<double> mark_mu;
  std::optional<double> mark_sigma;
  std::optional<double> intrusion_mark_mu;
  std::optional<double> intrusion_mark_sigma;
  std::uint64_t seed = 0;
  std::string out_path;
};

struct FitOptions {
  std::string in_path;
  std::string family = "gamma";
  bool use_marks = false;
  std::string out_path = "-";
};

struct ScorerOptions {
  std::string params_path;
  bool em = false;
  std::optional<double> p_epsilon;
  std::string family = "gamma";
  bool use_marks = false;
  bool intervals_only = false;
  bool marks_only = false;
  int n_iter_max = 10;
  double k_max_fraction = 0.5;
};

struct ScoreOptions {
  std::string in_path;
  std::string out_path = "-";
  ScorerOptions scorer;
};

struct EvaluateOptions {
  std::string in_path;
  std::string out_path = "-";
  std::string roc_out;
  std::optional<double> tune_split;
  std::vector<double> candidates;
  ScorerOptions scorer;
};

void add_scorer_flags(CLI::App* cmd, ScorerOptions& o) {
  cmd->add_option("--params", o.params_path, "Parameter file from `fit`");
  cmd->add_flag("--em", o.em, "Fit parameters per entry by EM");
  cmd->add_option("--p-epsilon", o.p_epsilon, "Prior probability that an event is an intrusion, in (0, 1)");
  cmd->add_option("--family", o.family, "Interval family for EM: gamma or exponential");
  cmd->add_flag("--use-marks", o.use_marks, "Score with marks and intervals combined");
  cmd->add_flag("--intervals-only", o.intervals_only, "Score with intervals alone (default)");
  cmd->add_flag("--marks-only", o.marks_only, "Score with marks alone (exponential intervals)");
  cmd->add_option("--n-iter-max", o.n_iter_max, "EM iteration cap");
  cmd->add_option("--k-max-fraction", o.k_max_fraction, "EM stops once |I_MAP| exceeds this fraction of N");
}

ScorerConfig make_scorer(const ScorerOptions& o, bool need_p_epsilon) {
  if (o.em == !o.params_path.empty()) throw UsageError("exactly one of --params or --em is required");
  if (static_cast<int>(o.use_marks) + static_cast<int>(o.intervals_only) + static_cast<int>(o.marks_only) > 1) {
    throw UsageError("--use-marks, --intervals-only and --marks-only are mutually exclusive");
  }
  ScorerConfig s;
  if (need_p_epsilon && !o.p_epsilon) throw UsageError("--p-epsilon is required");
  if (o.p_epsilon) {
    if (!(*o.p_epsilon > 0.0 && *o.p_epsilon < 1.0)) throw UsageError("--p-epsilon must lie in the open interval (0, 1)");
    s.p_epsilon = *o.p_epsilon;
  }
  try {
    s.family = parse_interval_family(o.family);
    s.em.n_iter_max = o.n_iter_max;
    s.em.k_max_fraction = o.k_max_fraction;
    s.em.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  s.mode = o.use_marks ? ScoringMode::Combined : o.marks_only ? ScoringMode::MarksOnly : ScoringMode::IntervalsOnly;
  s.use_em = o.em;
  if (!o.em) s.known = io::read_params_file(o.params_path);
  return s;
}

// Opens path for writing, or returns nullptr for "-" (use stdout).
std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  if (path == "-" || path.empty()) return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw Error("cannot open '" + path + "' for writing");
  return f;
}

void finish_output(std::ofstream* f, const std::string& path) {
  if (!f) return;
  f->flush();
  if (!*f) throw Error("failed writing '" + path + "'");
}

std::vector<EventSequence> sequences_of(const std::vector<io::DatasetEntry>& entries) {
  std::vector<EventSequence> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.sequence);
  return out;
}

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
  GenSpec spec;
  try {
    const IntervalFamily family = parse_interval_family(o.family);
    spec.interval_model = family == IntervalFamily::Exponential ? IntervalModel::exponential(o.rate)
                                                                : IntervalModel::gamma(o.shape, o.rate);
    spec.n_events = o.n_events;
    spec.injection_rate = o.injection_rate;
    spec.positive_fraction = o.positive_fraction;
    spec.seed = o.seed;
    const int n_mark_flags = static_cast<int>(o.mark_mu.has_value()) + static_cast<int>(o.mark_sigma.has_value()) +
                             static_cast<int>(o.intrusion_mark_mu.has_value()) +
                             static_cast<int>(o.intrusion_mark_sigma.has_value());
    if (n_mark_flags != 0 && n_mark_flags != 4) {
      throw UsageError("mark generation needs all of --mark-mu, --mark-sigma, --intrusion-mark-mu, --intrusion-mark-sigma");
    }
    if (n_mark_flags == 4) {
      spec.marks = MarkPair{MarkModel::log_normal(*o.mark_mu, *o.mark_sigma),
                            MarkModel::log_normal(*o.intrusion_mark_mu, *o.intrusion_mark_sigma)};
    }
    spec.validate();
    if (o.n_entries < 2) throw UsageError("--n-entries must be >= 2");
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }

  const std::vector<EventSequence> data = gen_dataset(spec, o.n_entries);
  std::vector<io::DatasetEntry> entries;
  entries.reserve(data.size());
  std::size_t positives = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data[i].intrusion_indices().empty()) ++positives;
    entries.push_back({"e" + std::to_string(i), data[i]});
  }

  auto file = open_output(o.out_path);
  io::write_dataset(file ? *file : out, entries);
  finish_output(file.get(), o.out_path);
  std::ostream& summary = file ? out : std::cerr;
  summary << "generated " << entries.size() << " entries: " << positives << " positive, "
          << entries.size() - positives << " negative\n";
  return kExitOk;
}

int cmd_fit(const FitOptions& o, std::ostream& out) {
  IntervalFamily family;
  try {
    family = parse_interval_family(o.family);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
  const auto entries = io::read_dataset_file(o.in_path);
  const auto seqs = sequences_of(entries);
  const FittedParameters params = fit_from_history(family, seqs, o.use_marks);
  auto file = open_output(o.out_path);
  io::write_params(file ? *file : out, params);
  finish_output(file.get(), o.out_path);
  return kExitOk;
}

int cmd_score(const ScoreOptions& o, std::ostream& out) {
  const ScorerConfig scorer = make_scorer(o.scorer, true);
  const auto entries = io::read_dataset_file(o.in_path);
  const auto seqs = sequences_of(entries);
  std::vector<EntryScore> scores;
  try {
    scores = score_all(seqs, scorer);
  } catch (const Error& e) {
    // Replace the positional index with the entry id.
    std::string msg = e.what();
    if (msg.rfind("entry ", 0) == 0) {
      const std::size_t colon = msg.find(':');
      const std::size_t idx = std::stoul(msg.substr(6, colon - 6));
      msg = "entry " + entries[idx].entry_id + msg.substr(colon);
    }
    throw Error(msg);
  }
  auto file = open_output(o.out_path);
  std::ostream& dst = file ? *file : out;
  for (std::size_t i = 0; i < entries.size(); ++i) io::write_score(dst, entries[i].entry_id, scores[i]);
  finish_output(file.get(), o.out_path);
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& o, std::ostream& out) {
  if (o.tune_split && !(*o.tune_split > 0.0 && *o.tune_split < 1.0)) {
    throw UsageError("--tune-split must lie in (0, 1)");
  }
  for (double c : o.candidates) {
    if (!(c > 0.0 && c < 1.0)) throw UsageError("--candidates must lie in (0, 1)");
  }
  ScorerConfig scorer = make_scorer(o.scorer, !o.tune_split);
  const auto entries = io::read_dataset_file(o.in_path);
  const auto seqs = sequences_of(entries);

  std::vector<std::pair<std::string, std::string>> extra;
  std::span<const EventSequence> test(seqs);
  if (o.tune_split) {
    const auto n_train = static_cast<std::size_t>(std::floor(*o.tune_split * static_cast<double>(seqs.size())));
    if (n_train == 0 || n_train >= seqs.size()) throw UsageError("--tune-split leaves an empty train or test set");
    const std::span<const EventSequence> train(seqs.data(), n_train);
    test = std::span<const EventSequence>(seqs.data() + n_train, seqs.size() - n_train);
    const std::vector<double> grid = o.candidates.empty() ? default_p_epsilon_grid() : o.candidates;
    const IntervalFamily family = scorer.mode == ScoringMode::MarksOnly ? IntervalFamily::Exponential : scorer.family;
    scorer.p_epsilon = tune_p_epsilon(train, grid, family, scorer.mode != ScoringMode::IntervalsOnly, scorer.em);
    extra.emplace_back("train_entries", std::to_string(n_train));
  }
  extra.emplace_back("p_epsilon", io::format_number(scorer.p_epsilon));
  extra.emplace_back("mode", io::quote(std::string(to_string(scorer.mode))));
  extra.emplace_back("em", scorer.use_em ? "true" : "false");

  const EvalReport report = evaluate_dataset(test, scorer);

  auto file = open_output(o.out_path);
  io::write_report(file ? *file : out, report, extra);
  finish_output(file.get(), o.out_path);
  if (!o.roc_out.empty()) {
    auto roc = open_output(o.roc_out);
    io::write_roc_csv(roc ? *roc : out, report);
    finish_output(roc.get(), o.roc_out);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Intrusion detection in renewal-process event sequences"};
  app.require_subcommand(1);

  GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Generate a labeled synthetic dataset");
  generate->add_option("--family", gen.family, "Interval family: gamma or exponential");
  generate->add_option("--shape", gen.shape, "Gamma shape (> 0.5)");
  generate->add_option("--rate", gen.rate, "Interval rate");
  generate->add_option("--n-events", gen.n_events, "Events per entry");
  generate->add_option("--n-entries", gen.n_entries, "Number of entries");
  generate->add_option("--injection-rate", gen.injection_rate, "Per-event intrusion probability of the generator");
  generate->add_option("--positive-fraction", gen.positive_fraction, "Fraction of entries with an intrusion");
  generate->add_option("--mark-mu", gen.mark_mu, "Process mark log-normal mu");
  generate->add_option("--mark-sigma", gen.mark_sigma, "Process mark log-normal sigma");
  generate->add_option("--intrusion-mark-mu", gen.intrusion_mark_mu, "Intrusion mark log-normal mu");
  generate->add_option("--intrusion-mark-sigma", gen.intrusion_mark_sigma, "Intrusion mark log-normal sigma");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out_path, "Output dataset file")->required();

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit process parameters from intrusion-free history");
  fit_cmd->add_option("--in", fit.in_path, "Input dataset file")->required();
  fit_cmd->add_option("--family", fit.family, "Interval family: gamma or exponential");
  fit_cmd->add_flag("--use-marks", fit.use_marks, "Also fit the log-normal mark model");
  fit_cmd->add_option("--out", fit.out_path, "Output parameter file (default stdout)");

  ScoreOptions score;
  auto* score_cmd = app.add_subcommand("score", "Score every entry of a dataset");
  score_cmd->add_option("--in", score.in_path, "Input dataset file")->required();
  score_cmd->add_option("--out", score.out_path, "Output score file (default stdout)");
  add_scorer_flags(score_cmd, score.scorer);

  EvaluateOptions eval;
  auto* eval_cmd = app.add_subcommand("evaluate", "Score and evaluate a labeled dataset");
  eval_cmd->add_option("--in", eval.in_path, "Input labeled dataset file")->required();
  eval_cmd->add_option("--out", eval.out_path, "Output report file (default stdout)");
  eval_cmd->add_option("--roc-out", eval.roc_out, "Output ROC CSV file");
  eval_cmd->add_option("--tune-split", eval.tune_split, "Fraction of leading entries used to tune p_epsilon");
  eval_cmd->add_option("--candidates", eval.candidates, "p_epsilon candidates for tuning");
  add_scorer_flags(eval_cmd, eval.scorer);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen, out);
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (score_cmd->parsed()) return cmd_score(score, out);
    if (eval_cmd->parsed()) return cmd_evaluate(eval, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDataError;
  }
  return kExitUsage;
}

}  // namespace rpid::cli
