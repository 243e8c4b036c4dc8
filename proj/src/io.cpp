#include "rpid/io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "rpid/errors.h"

namespace rpid::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(std::size_t line, const std::string& entry_id, const std::string& field, const std::string& msg) {
  std::ostringstream os;
  os << "line " << line;
  if (!entry_id.empty()) os << ", entry " << entry_id;
  os << ", field " << field << ": " << msg;
  throw ParseError(os.str());
}

double number_field(const json& obj, const char* key, std::size_t line, const std::string& id, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(line, id, path, "missing");
  if (!it->is_number()) fail(line, id, path, "expected a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) fail(line, id, path, "must be finite");
  return v;
}

template <class Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      fail(line, "", "<record>", std::string("malformed JSON: ") + e.what());
    }
    if (!record.is_object()) fail(line, "", "<record>", "expected an object");
    fn(record, line);
  }
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_number(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quote(const std::string& s) { return json(s).dump(); }

std::vector<DatasetEntry> read_dataset(std::istream& in) {
  std::vector<DatasetEntry> entries;
  for_each_line(in, [&](const json& rec, std::size_t line) {
    std::string id;
    auto id_it = rec.find("entry_id");
    if (id_it == rec.end() || !id_it->is_string()) fail(line, "", "entry_id", "missing or not a string");
    id = id_it->get<std::string>();

    const double t_start = number_field(rec, "t_start", line, id, "t_start");
    const double t_end = number_field(rec, "t_end", line, id, "t_end");
    if (!(t_end > t_start)) fail(line, id, "t_end", "must exceed t_start");

    auto ev_it = rec.find("events");
    if (ev_it == rec.end() || !ev_it->is_array()) fail(line, id, "events", "missing or not an array");

    std::vector<Event> events;
    double prev = t_start;
    std::optional<bool> marked;
    for (std::size_t i = 0; i < ev_it->size(); ++i) {
      const json& ev = (*ev_it)[i];
      const std::string path = "events[" + std::to_string(i) + "]";
      if (!ev.is_object()) fail(line, id, path, "expected an object");
      Event e;
      e.t = number_field(ev, "t", line, id, path + ".t");
      if (e.t < prev) fail(line, id, path + ".t", "times must be non-decreasing and >= t_start");
      if (e.t > t_end) fail(line, id, path + ".t", "event lies after t_end");
      prev = e.t;

      const bool has_mark = ev.contains("mark") && !ev["mark"].is_null();
      if (!marked) marked = has_mark;
      if (*marked != has_mark) fail(line, id, path + ".mark", "marks must be present on all events or none");
      if (has_mark) {
        e.mark = number_field(ev, "mark", line, id, path + ".mark");
        if (!(*e.mark > 0.0)) fail(line, id, path + ".mark", "must be positive");
      }

      if (ev.contains("label") && !ev["label"].is_null()) {
        const json& l = ev["label"];
        if (!l.is_number_integer() || (l.get<int>() != 0 && l.get<int>() != 1)) {
          fail(line, id, path + ".label", "must be 0 or 1");
        }
        e.label = l.get<int>() == 1 ? EventLabel::Intrusion : EventLabel::Process;
      }
      events.push_back(e);
    }
    entries.push_back({id, EventSequence(t_start, t_end, std::move(events))});
  });
  return entries;
}

std::vector<DatasetEntry> read_dataset_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_dataset(in);
}

void write_dataset(std::ostream& out, const std::vector<DatasetEntry>& entries) {
  for (const DatasetEntry& entry : entries) {
    const EventSequence& seq = entry.sequence;
    out << "{\"entry_id\":" << quote(entry.entry_id) << ",\"t_start\":" << format_number(seq.t_start())
        << ",\"t_end\":" << format_number(seq.t_end()) << ",\"events\":[";
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const Event& e = seq[i];
      if (i) out << ',';
      out << "{\"t\":" << format_number(e.t);
      if (e.mark) out << ",\"mark\":" << format_number(*e.mark);
      if (e.label) out << ",\"label\":" << (*e.label == EventLabel::Intrusion ? 1 : 0);
      out << '}';
    }
    out << "]}\n";
  }
}

void write_score(std::ostream& out, const std::string& entry_id, const EntryScore& score) {
  out << "{\"entry_id\":" << quote(entry_id)
      << ",\"intrusion_probability\":" << format_number(score.intrusion_probability)
      << ",\"log_marginal\":" << format_number(score.log_marginal) << ",\"map_indices\":[";
  for (std::size_t i = 0; i < score.map_indices.size(); ++i) {
    if (i) out << ',';
    out << score.map_indices[i];
  }
  out << "],\"event_marginals\":[";
  for (std::size_t i = 0; i < score.event_marginals.size(); ++i) {
    if (i) out << ',';
    out << format_number(score.event_marginals[i]);
  }
  out << "]}\n";
}

std::vector<ScoreRecord> read_scores(std::istream& in) {
  std::vector<ScoreRecord> out;
  for_each_line(in, [&](const json& rec, std::size_t line) {
    ScoreRecord r;
    try {
      r.entry_id = rec.at("entry_id").get<std::string>();
      r.intrusion_probability = rec.at("intrusion_probability").get<double>();
      r.log_marginal = rec.at("log_marginal").is_null() ? -INFINITY : rec.at("log_marginal").get<double>();
      r.map_indices = rec.at("map_indices").get<std::vector<std::size_t>>();
      r.event_marginals = rec.at("event_marginals").get<std::vector<double>>();
    } catch (const json::exception& e) {
      fail(line, r.entry_id, "<score>", e.what());
    }
    out.push_back(std::move(r));
  });
  return out;
}

void write_params(std::ostream& out, const FittedParameters& params) {
  const IntervalModel& m = params.interval_model;
  out << "{\"family\":" << quote(std::string(to_string(m.family()))) << ",\"shape\":" << format_number(m.shape())
      << ",\"rate\":" << format_number(m.rate());
  if (params.mark_model) {
    out << ",\"mark_mu\":" << format_number(params.mark_model->mu())
        << ",\"mark_sigma\":" << format_number(params.mark_model->sigma());
  }
  out << "}\n";
}

FittedParameters read_params(std::istream& in) {
  json obj;
  try {
    obj = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("parameter file: malformed JSON: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError("parameter file: expected an object");
  auto number = [&](const char* key) {
    if (!obj.contains(key) || !obj[key].is_number()) {
      throw ParseError(std::string("parameter file: field ") + key + " missing or not a number");
    }
    return obj[key].get<double>();
  };
  if (!obj.contains("family") || !obj["family"].is_string()) {
    throw ParseError("parameter file: field family missing or not a string");
  }
  const IntervalFamily family = parse_interval_family(obj["family"].get<std::string>());
  const double rate = number("rate");
  FittedParameters p{family == IntervalFamily::Exponential ? IntervalModel::exponential(rate)
                                                            : IntervalModel::gamma(number("shape"), rate),
                     std::nullopt};
  if (obj.contains("mark_mu") || obj.contains("mark_sigma")) {
    p.mark_model = MarkModel::log_normal(number("mark_mu"), number("mark_sigma"));
  }
  return p;
}

FittedParameters read_params_file(const std::string& path) {
  std::ifstream in = open_input(path);
  return read_params(in);
}

void write_roc_csv(std::ostream& out, const EvalReport& report) {
  out << "level,threshold,fpr,tpr\n";
  auto emit = [&](const char* level, const std::vector<RocPoint>& roc) {
    for (const RocPoint& p : roc) {
      out << level << ',' << (std::isinf(p.threshold) ? std::string("inf") : format_number(p.threshold)) << ','
          << format_number(p.fpr) << ',' << format_number(p.tpr) << '\n';
    }
  };
  emit("entry", report.roc_entry);
  emit("event", report.roc_event);
}

void write_report(std::ostream& out, const EvalReport& report,
                  const std::vector<std::pair<std::string, std::string>>& extra_fields) {
  out << '{';
  for (const auto& [key, value] : extra_fields) out << quote(key) << ':' << value << ',';
  out << "\"n_entries\":" << report.n_entries << ",\"entry_auc\":" << format_number(report.entry_auc)
      << ",\"event_auc\":" << format_number(report.event_auc)
      << ",\"mean_jaccard\":" << format_number(report.mean_jaccard)
      << ",\"mean_jaccard_positive\":" << format_number(report.mean_jaccard_positive)
      << ",\"mean_posterior_positive\":" << format_number(report.mean_posterior_positive)
      << ",\"mean_posterior_negative\":" << format_number(report.mean_posterior_negative) << "}\n";
}

}  // namespace rpid::io
