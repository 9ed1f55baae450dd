// SPDX-License-Identifier: Apache-2.0
#include "musa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

namespace musa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string string_field(const Json& j, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    auto it = j.find(n);
    if (it == j.end() || it->is_null()) continue;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
  }
  return {};
}

std::string media_type_for(const std::string& location) {
  const auto dot = location.find_last_of('.');
  std::string ext = dot == std::string::npos ? "" : location.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == "png") return "image/png";
  if (ext == "gif") return "image/gif";
  if (ext == "webp") return "image/webp";
  return "image/jpeg";
}

EvalRecord from_native(const Json& j, std::size_t line) {
  EvalRecord r;
  r.id = string_field(j, {"id"});
  r.prompt = string_field(j, {"prompt", "question"});
  if (auto it = j.find("inputs"); it != j.end()) {
    try {
      r.inputs = it->get<std::vector<ContentItem>>();
    } catch (const Json::exception& e) {
      throw FormatError(std::string("invalid inputs: ") + e.what(), line);
    }
  }
  if (auto text = string_field(j, {"text"}); !text.empty()) r.inputs.push_back(ContentItem::make_text(text));
  if (auto image = string_field(j, {"image"}); !image.empty())
    r.inputs.push_back(ContentItem::make_image(image, media_type_for(image)));
  if (auto it = j.find("context"); it != j.end() && it->is_array()) {
    for (const auto& c : *it) {
      if (c.is_string()) r.context.push_back(c.get<std::string>());
    }
  }
  auto gold = j.find("gold");
  if (gold == j.end()) throw FormatError("record has no gold field", line);
  if (gold->is_string()) {
    r.gold = gold->get<std::string>();
  } else if (gold->is_object()) {
    r.gold = CategoryLabel{string_field(*gold, {"level1"}), string_field(*gold, {"level2"})};
  } else {
    throw FormatError("gold must be a string or {level1, level2}", line);
  }
  return r;
}

EvalRecord from_hotpot(const Json& j, std::size_t line) {
  EvalRecord r;
  r.id = string_field(j, {"_id", "id"});
  r.prompt = string_field(j, {"question"});
  r.gold = string_field(j, {"answer"});
  if (auto it = j.find("context"); it != j.end() && it->is_array()) {
    for (const auto& para : *it) {
      if (!para.is_array() || para.size() != 2 || !para[0].is_string() || !para[1].is_array())
        throw FormatError("context entries must be [title, [sentences]]", line);
      std::string passage = para[0].get<std::string>() + ":";
      for (const auto& s : para[1]) passage += " " + trim(s.get<std::string>());
      r.context.push_back(passage);
    }
  }
  return r;
}

EvalRecord from_wikiweb2m(const Json& j, std::size_t) {
  EvalRecord r;
  r.id = string_field(j, {"page_id", "id"});
  const std::string section_title = string_field(j, {"section_title"});
  const std::string text = string_field(j, {"section_text", "page_text", "text"});
  std::string body = section_title.empty() ? text : section_title + "\n" + text;
  if (!trim(body).empty()) r.inputs.push_back(ContentItem::make_text(body));
  if (auto image = string_field(j, {"image_url", "image"}); !image.empty())
    r.inputs.push_back(ContentItem::make_image(image, media_type_for(image)));
  r.gold = string_field(j, {"page_title", "title"});
  return r;
}

EvalRecord from_mnds(const Json& j, std::size_t) {
  EvalRecord r;
  r.id = string_field(j, {"id", "data_id"});
  const std::string title = string_field(j, {"title"});
  const std::string content = string_field(j, {"content", "text"});
  std::string body = title.empty() ? content : title + "\n" + content;
  if (!trim(body).empty()) r.inputs.push_back(ContentItem::make_text(body));
  r.gold = CategoryLabel{string_field(j, {"category_level_1"}), string_field(j, {"category_level_2"})};
  return r;
}

bool gold_empty(const GoldLabel& g) {
  if (const auto* s = std::get_if<std::string>(&g)) return trim(*s).empty();
  const auto& c = std::get<CategoryLabel>(g);
  return c.level1.empty() || c.level2.empty();
}

EvalRecord convert(const Json& j, DatasetFormat format, std::size_t line) {
  if (!j.is_object()) throw FormatError("record is not a JSON object", line);
  EvalRecord r;
  switch (format) {
    case DatasetFormat::Native: r = from_native(j, line); break;
    case DatasetFormat::HotpotQA: r = from_hotpot(j, line); break;
    case DatasetFormat::WikiWeb2M: r = from_wikiweb2m(j, line); break;
    case DatasetFormat::MNDS: r = from_mnds(j, line); break;
  }
  if (r.id.empty()) throw FormatError("record has no id", line);
  if (gold_empty(r.gold)) throw FormatError("record '" + r.id + "' has an empty gold label", line);
  for (const auto& in : r.inputs) {
    if (!in.valid()) throw FormatError("record '" + r.id + "' has a malformed input", line);
  }
  return r;
}

std::string fmt(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> metric_names(TaskKind kind) {
  switch (kind) {
    case TaskKind::QA:
    case TaskKind::VQA: return {"EM", "F1", "P", "R"};
    case TaskKind::Title: return {"EM", "BLEU4", "RL-F1", "RL-P", "RL-R"};
    case TaskKind::Categorize: return {"L1-Acc", "L2-Acc"};
  }
  return {};
}

// The last result produced by an action that fits the task kind.
const ActionResult* pick_result(const TaskResponse& response, TaskKind kind) {
  for (auto it = response.results.rbegin(); it != response.results.rend(); ++it) {
    const int id = it->action_id;
    if (kind == TaskKind::Categorize && id == action_id(ActionKind::Categorization)) return &*it;
    if (kind == TaskKind::Title && id == action_id(ActionKind::TitleGeneration)) return &*it;
    if ((kind == TaskKind::QA || kind == TaskKind::VQA) &&
        (id == action_id(ActionKind::QA) || id == action_id(ActionKind::VQA)))
      return &*it;
  }
  return nullptr;
}

}  // namespace

// ---------------------------------------------------------------------------

std::string_view task_kind_name(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::QA: return "qa";
    case TaskKind::VQA: return "vqa";
    case TaskKind::Title: return "title";
    case TaskKind::Categorize: return "categorize";
  }
  return "?";
}

std::optional<TaskKind> task_kind_from_name(std::string_view name) noexcept {
  for (auto k : {TaskKind::QA, TaskKind::VQA, TaskKind::Title, TaskKind::Categorize}) {
    if (task_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view dataset_format_name(DatasetFormat format) noexcept {
  switch (format) {
    case DatasetFormat::Native: return "native";
    case DatasetFormat::HotpotQA: return "hotpotqa";
    case DatasetFormat::WikiWeb2M: return "wikiweb2m";
    case DatasetFormat::MNDS: return "mnds";
  }
  return "?";
}

std::optional<DatasetFormat> dataset_format_from_name(std::string_view name) noexcept {
  for (auto f : {DatasetFormat::Native, DatasetFormat::HotpotQA, DatasetFormat::WikiWeb2M, DatasetFormat::MNDS}) {
    if (dataset_format_name(f) == name) return f;
  }
  return std::nullopt;
}

std::vector<EvalRecord> parse_dataset(std::string_view text, DatasetFormat format) {
  std::vector<EvalRecord> out;
  const std::string body = trim(text);
  if (format == DatasetFormat::HotpotQA && !body.empty() && body.front() == '[') {
    Json tree;
    try {
      tree = Json::parse(body);
    } catch (const Json::parse_error& e) {
      // Line of the fault, counted in the original text.
      const std::size_t start = text.find_first_not_of(" \t\r\n");
      const std::size_t at = std::min(text.size(), start + (e.byte > 0 ? e.byte - 1 : 0));
      const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(at), '\n'));
      throw FormatError(std::string("malformed JSON: ") + e.what(), line);
    }
    std::size_t index = 0;
    for (const auto& item : tree) out.push_back(convert(item, format, ++index));
    return out;
  }

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError(std::string("malformed JSON: ") + e.what(), number);
    }
    out.push_back(convert(j, format, number));
  }
  return out;
}

std::vector<EvalRecord> load_dataset(const std::string& path, DatasetFormat format) {
  const std::string text = read_text_file(path);
  try {
    return parse_dataset(text, format);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + std::string(e.what()).substr(0, std::string(e.what()).rfind(" (line")), e.line());
  }
}

std::vector<EvalRecord> filter_records(const std::vector<EvalRecord>& records, const std::vector<std::string>& ids) {
  std::vector<EvalRecord> out;
  for (const auto& r : records) {
    if (std::find(ids.begin(), ids.end(), r.id) != ids.end()) out.push_back(r);
  }
  return out;
}

std::vector<std::string> load_id_list(const std::string& path) {
  std::istringstream in{read_text_file(path)};
  std::string line;
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t.front() != '#') ids.push_back(t);
  }
  return ids;
}

Task make_task(const EvalRecord& record, TaskKind kind) {
  Task task;
  task.id = record.id;
  switch (kind) {
    case TaskKind::QA:
      task.goal = "Answer the question about the provided content. Question: " + record.prompt;
      break;
    case TaskKind::VQA:
      task.goal = "Answer the question using the text shown in the provided content. Question: " + record.prompt;
      break;
    case TaskKind::Title: task.goal = "Create a short headline for the provided content."; break;
    case TaskKind::Categorize:
      task.goal = "Classify the provided content into a first-level category and one of its sub-categories.";
      break;
  }
  task.inputs = record.inputs;
  for (const auto& passage : record.context) task.inputs.push_back(ContentItem::make_text("Supporting passage: " + passage));
  return task;
}

RecordScore score_record(const EvalRecord& record, TaskKind kind, const TaskResponse& response) {
  RecordScore s;
  s.id = record.id;
  s.gold = record.gold;
  const ActionResult* result = pick_result(response, kind);
  if (!result) {
    s.failed = true;
    s.error = "no result from an action matching task kind " + std::string(task_kind_name(kind));
    for (const auto& m : metric_names(kind)) s.scores.emplace_back(m, 0.0);
    return s;
  }
  s.prediction = result->answer;
  if (kind == TaskKind::Categorize) {
    const auto& gold = std::get<CategoryLabel>(record.gold);
    const auto* payload = std::get_if<CategoryPayload>(&result->structured);
    CategoryLabel pred{payload ? payload->level1 : "", payload && payload->level2 ? *payload->level2 : ""};
    s.predicted_category = pred;
    s.scores = {{"L1-Acc", pred.level1 == gold.level1 ? 1.0 : 0.0}, {"L2-Acc", pred.level2 == gold.level2 ? 1.0 : 0.0}};
    return s;
  }
  const std::string& gold = std::get<std::string>(record.gold);
  if (kind == TaskKind::Title) {
    const PRF rl = rouge_l(s.prediction, gold);
    s.scores = {{"EM", exact_match(s.prediction, gold)},
                {"BLEU4", bleu4(s.prediction, gold)},
                {"RL-F1", rl.f1},
                {"RL-P", rl.precision},
                {"RL-R", rl.recall}};
  } else {
    const PRF f = token_f1(s.prediction, gold);
    s.scores = {{"EM", exact_match(s.prediction, gold)}, {"F1", f.f1}, {"P", f.precision}, {"R", f.recall}};
  }
  return s;
}

double MetricReport::aggregate(std::string_view name) const {
  for (const auto& [k, v] : aggregates) {
    if (k == name) return v;
  }
  throw PreconditionError("no aggregate named " + std::string(name));
}

MetricReport run_eval(const std::vector<EvalRecord>& records, TaskKind kind, const Solver& solver,
                      const EvalOptions& options) {
  if (records.empty()) throw PreconditionError("dataset is empty");
  if (options.workers < 1) throw ConfigError("workers must be >= 1");
  if (kind == TaskKind::Categorize) {
    for (const auto& r : records) {
      if (!std::holds_alternative<CategoryLabel>(r.gold))
        throw PreconditionError("record '" + r.id + "' has no {level1, level2} gold label");
    }
  } else {
    for (const auto& r : records) {
      if (!std::holds_alternative<std::string>(r.gold))
        throw PreconditionError("record '" + r.id + "' has no text gold label");
    }
  }

  std::vector<RecordScore> scores(records.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> solves{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      const Task task = make_task(records[i], kind);
      try {
        ++solves;
        scores[i] = score_record(records[i], kind, solver(task));
      } catch (const std::exception& e) {
        RecordScore s;
        s.id = records[i].id;
        s.gold = records[i].gold;
        s.failed = true;
        s.error = e.what();
        for (const auto& m : metric_names(kind)) s.scores.emplace_back(m, 0.0);
        scores[i] = std::move(s);
      }
    }
  };
  const std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(options.workers), records.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::stable_sort(scores.begin(), scores.end(), [](const RecordScore& a, const RecordScore& b) { return a.id < b.id; });

  MetricReport report;
  report.kind = kind;
  report.n = scores.size();
  report.solves = solves.load();
  report.failed = static_cast<std::size_t>(std::count_if(scores.begin(), scores.end(), [](const auto& s) { return s.failed; }));
  report.records = scores;

  const double n = static_cast<double>(report.n);
  if (kind == TaskKind::Categorize) {
    std::vector<CategoryLabel> preds, golds;
    std::vector<std::string> p1, g1, p2, g2;
    for (const auto& s : scores) {
      const auto gold = std::get<CategoryLabel>(s.gold);
      const CategoryLabel pred = s.predicted_category.value_or(CategoryLabel{});
      preds.push_back(pred);
      golds.push_back(gold);
      p1.push_back(pred.level1);
      g1.push_back(gold.level1);
      p2.push_back(pred.level2);
      g2.push_back(gold.level2);
    }
    const HierarchicalScores h = hierarchical_scores(preds, golds);
    report.aggregates = {{"L1-Acc", 100.0 * h.level1.accuracy}, {"L1-F1", 100.0 * h.level1.f1},
                         {"L1-P", 100.0 * h.level1.precision},  {"L1-R", 100.0 * h.level1.recall},
                         {"L2-Acc", 100.0 * h.level2.accuracy}, {"L2-F1", 100.0 * h.level2.f1},
                         {"L2-P", 100.0 * h.level2.precision},  {"L2-R", 100.0 * h.level2.recall}};
    report.discrepant_level1 = most_discrepant(p1, g1);
    report.discrepant_level2 = most_discrepant(p2, g2);
  } else {
    for (const auto& name : metric_names(kind)) {
      double sum = 0.0;
      for (const auto& s : scores) {
        for (const auto& [k, v] : s.scores) {
          if (k == name) sum += v;
        }
      }
      report.aggregates.emplace_back(name, 100.0 * sum / n);
    }
  }
  return report;
}

Json report_json(const MetricReport& report) {
  Json j;
  j["kind"] = std::string(task_kind_name(report.kind));
  j["n"] = report.n;
  j["failed"] = report.failed;
  j["solves"] = report.solves;
  j["scale"] = "pass@1, percent";
  Json agg = Json::object();
  for (const auto& [k, v] : report.aggregates) agg[k] = v;
  j["aggregates"] = agg;
  Json records = Json::array();
  for (const auto& s : report.records) {
    Json r{{"id", s.id}, {"prediction", s.prediction}, {"failed", s.failed}};
    if (const auto* g = std::get_if<std::string>(&s.gold)) {
      r["gold"] = *g;
    } else {
      const auto& c = std::get<CategoryLabel>(s.gold);
      r["gold"] = Json{{"level1", c.level1}, {"level2", c.level2}};
    }
    if (s.predicted_category)
      r["predicted"] = Json{{"level1", s.predicted_category->level1}, {"level2", s.predicted_category->level2}};
    Json sc = Json::object();
    for (const auto& [k, v] : s.scores) sc[k] = v;
    r["scores"] = sc;
    if (s.failed) r["error"] = s.error;
    records.push_back(r);
  }
  j["records"] = records;
  if (report.kind == TaskKind::Categorize) {
    auto list = [](const std::vector<Discrepancy>& ds) {
      Json a = Json::array();
      for (const auto& d : ds) a.push_back(Json{{"label", d.label}, {"errors", d.errors}, {"support", d.support}});
      return a;
    };
    j["discrepant"] = Json{{"level1", list(report.discrepant_level1)}, {"level2", list(report.discrepant_level2)}};
  }
  return j;
}

std::string format_table(const MetricReport& report) {
  std::ostringstream out;
  auto row = [&](const std::vector<std::string>& cells) {
    out << "|";
    for (const auto& c : cells) {
      out << " " << c;
      for (std::size_t i = c.size(); i < 8; ++i) out << ' ';
      out << " |";
    }
    out << "\n";
  };
  auto rule = [&](std::size_t cols) {
    out << "|";
    for (std::size_t i = 0; i < cols; ++i) out << "----------|";
    out << "\n";
  };
  out << "task: " << task_kind_name(report.kind) << "  n: " << report.n << "  failed: " << report.failed
      << "  (Pass@1, scores x100)\n";
  if (report.kind == TaskKind::Categorize) {
    row({"Level", "Acc", "F1", "P", "R"});
    rule(5);
    for (const char* level : {"L1", "L2"}) {
      const std::string l(level);
      row({l, fmt(report.aggregate(l + "-Acc"), 1), fmt(report.aggregate(l + "-F1"), 1), fmt(report.aggregate(l + "-P"), 1),
           fmt(report.aggregate(l + "-R"), 1)});
    }
    auto disc = [&](const char* title, const std::vector<Discrepancy>& ds) {
      if (ds.empty()) return;
      out << title << ":";
      for (const auto& d : ds) out << " " << d.label << " (" << d.errors << "/" << d.support << ")";
      out << "\n";
    };
    disc("most discrepant level-1", report.discrepant_level1);
    disc("most discrepant level-2", report.discrepant_level2);
    return out.str();
  }
  std::vector<std::string> header, values;
  for (const auto& [k, v] : report.aggregates) {
    header.push_back(k == "BLEU4" ? "B4" : k);
    values.push_back(fmt(v, 1));
  }
  row(header);
  rule(header.size());
  row(values);
  return out.str();
}

}  // namespace musa

namespace musa {

Solver engine_solver(const Engine& engine, const EnvironmentContext& env) {
  return [&engine, env](const Task& task) { return engine.solve(task, env); };
}

}  // namespace musa
