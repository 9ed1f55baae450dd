// SPDX-License-Identifier: Apache-2.0
//
// Dataset loading and Pass@1 evaluation runs.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "musa/core.hpp"
#include "musa/engine.hpp"
#include "musa/metrics.hpp"
#include "musa/serialize.hpp"

namespace musa {

enum class TaskKind { QA, VQA, Title, Categorize };

std::string_view task_kind_name(TaskKind kind) noexcept;
std::optional<TaskKind> task_kind_from_name(std::string_view name) noexcept;
inline constexpr std::string_view kTaskKindNames = "qa, vqa, title, categorize";

/// Accepted on-disk layouts.
///   native     one JSON object per line: id, prompt, inputs, gold, context
///   hotpotqa   JSON array or lines of {_id, question, answer, context: [[title, [sentences]]]}
///   wikiweb2m  lines of {page_id, page_title, section_title, section_text, page_url, image_url}
///   mnds       lines of {id, title, content, category_level_1, category_level_2}
enum class DatasetFormat { Native, HotpotQA, WikiWeb2M, MNDS };

std::string_view dataset_format_name(DatasetFormat format) noexcept;
std::optional<DatasetFormat> dataset_format_from_name(std::string_view name) noexcept;

using GoldLabel = std::variant<std::string, CategoryLabel>;

struct EvalRecord {
  std::string id;
  std::string prompt;  // the question for QA/VQA; empty otherwise
  std::vector<ContentItem> inputs;
  GoldLabel gold;
  std::vector<std::string> context;  // supporting passages
};

/// Parses dataset text. Faults raise FormatError with a 1-based line number.
std::vector<EvalRecord> parse_dataset(std::string_view text, DatasetFormat format);
std::vector<EvalRecord> load_dataset(const std::string& path, DatasetFormat format);

/// Keeps only the listed ids, in dataset order.
std::vector<EvalRecord> filter_records(const std::vector<EvalRecord>& records, const std::vector<std::string>& ids);
/// One id per line; blank lines and '#' comments ignored.
std::vector<std::string> load_id_list(const std::string& path);

/// The task handed to the engine for one record.
Task make_task(const EvalRecord& record, TaskKind kind);

struct RecordScore {
  std::string id;
  std::string prediction;
  std::optional<CategoryLabel> predicted_category;
  GoldLabel gold;
  std::vector<std::pair<std::string, double>> scores;  // metric name -> [0,1]
  bool failed = false;
  std::string error;
};

struct MetricReport {
  TaskKind kind = TaskKind::QA;
  std::size_t n = 0;
  std::size_t failed = 0;
  std::size_t solves = 0;  // engine runs performed; Pass@1 means solves == n
  std::vector<std::pair<std::string, double>> aggregates;  // scaled to 0-100
  std::vector<RecordScore> records;                        // sorted by id
  std::vector<Discrepancy> discrepant_level1;
  std::vector<Discrepancy> discrepant_level2;

  double aggregate(std::string_view name) const;
};

/// Runs one solve per record and returns the task response. Must be safe to
/// call concurrently for distinct tasks.
using Solver = std::function<TaskResponse(const Task&)>;

struct EvalOptions {
  int workers = 4;
};

MetricReport run_eval(const std::vector<EvalRecord>& records, TaskKind kind, const Solver& solver,
                      const EvalOptions& options = {});

/// Scores computed from a finished response; exposed for tests.
RecordScore score_record(const EvalRecord& record, TaskKind kind, const TaskResponse& response);

Json report_json(const MetricReport& report);
/// Human-readable table with the columns of the task kind.
std::string format_table(const MetricReport& report);

}  // namespace musa

namespace musa {

/// Solver that runs `engine` with fresh providers from its config per task.
Solver engine_solver(const Engine& engine, const EnvironmentContext& env);

}  // namespace musa
