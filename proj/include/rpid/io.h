#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpid/estimation.h"
#include "rpid/evalkit.h"
#include "rpid/model.h"

// Newline-delimited JSON records for datasets and scores, a JSON object for
// fitted parameters, CSV for ROC tables. Numbers are written with 17
// significant digits.
namespace rpid::io {

struct DatasetEntry {
  std::string entry_id;
  EventSequence sequence;
};

// One record per line:
//   {"entry_id": "e0", "t_start": 0, "t_end": 4,
//    "events": [{"t": 1, "mark": 0.8, "label": 0}, ...]}
// "mark" and "label" are optional; label 1 marks an intrusion event.
// Blank lines are skipped. Throws ParseError naming the line, entry_id and field.
std::vector<DatasetEntry> read_dataset(std::istream& in);
std::vector<DatasetEntry> read_dataset_file(const std::string& path);

void write_dataset(std::ostream& out, const std::vector<DatasetEntry>& entries);

// {"entry_id", "intrusion_probability", "log_marginal", "map_indices",
//  "event_marginals"}; map_indices are 0-based event positions.
void write_score(std::ostream& out, const std::string& entry_id, const EntryScore& score);

struct ScoreRecord {
  std::string entry_id;
  double intrusion_probability = 0.0;
  double log_marginal = 0.0;
  std::vector<std::size_t> map_indices;
  std::vector<double> event_marginals;
};
std::vector<ScoreRecord> read_scores(std::istream& in);

// {"family": "gamma", "shape": k, "rate": r[, "mark_mu": m, "mark_sigma": s]}
void write_params(std::ostream& out, const FittedParameters& params);
FittedParameters read_params(std::istream& in);
FittedParameters read_params_file(const std::string& path);

// Header "level,threshold,fpr,tpr"; level is "entry" or "event".
void write_roc_csv(std::ostream& out, const EvalReport& report);

// Report as one JSON object (ROC curves omitted; see write_roc_csv). Each
// extra field is a key and an already JSON-encoded value, written first.
void write_report(std::ostream& out, const EvalReport& report,
                  const std::vector<std::pair<std::string, std::string>>& extra_fields = {});

// JSON string literal for s.
std::string quote(const std::string& s);

// %.17g, with non-finite values spelled null (JSON) so files stay parseable.
std::string format_number(double v);

}  // namespace rpid::io
