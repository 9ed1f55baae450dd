// SPDX-License-Identifier: Apache-2.0
//
// Bundled fixture checks. The fixture root holds manifest.json:
//
//   {"version": 1,
//    "datasets":  [{"name", "kind", "format", "dataset", "config", "golden", "golden_sha256"}],
//    "runs":      [{"name", "config", "task", "golden", "golden_sha256"}],
//    "scenarios": [{"name", "config", "task", "reference"}],
//    "taxonomies": [path], "tool_stores": [path], "tasks": [path]}
//
// Paths are relative to the root.
#pragma once

#include <string>
#include <vector>

#include "musa/core.hpp"
#include "musa/eval.hpp"

namespace musa {

struct FixtureProblem {
  std::string fixture;
  std::string problem;
};

struct FixtureReport {
  std::vector<std::string> checked;
  std::vector<FixtureProblem> problems;

  bool ok() const noexcept { return problems.empty(); }
};

/// Task file: either a bare Task or {"task": Task, "environment": EnvironmentContext}.
struct TaskFile {
  Task task;
  EnvironmentContext environment;
};

TaskFile load_task_file(const std::string& path);

/// Canonical eval report text for one manifest dataset entry, regenerated
/// from its config with a logical clock.
std::string regenerate_golden(const std::string& root, const Json& dataset_entry);

/// Canonical run report of one manifest run entry (logical clock).
std::string regenerate_run(const std::string& root, const Json& run_entry);

/// Event labels of a scenario run, one per line.
std::string regenerate_scenario(const std::string& root, const Json& scenario_entry);

/// Parses every fixture and regenerates every golden and reference. With
/// `update`, regenerated files and their hashes are written back instead.
FixtureReport fixture_integrity_check(const std::string& root, bool update = false);

}  // namespace musa
