// SPDX-License-Identifier: Apache-2.0
#include "musa/fixtures.hpp"

#include <filesystem>

#include "musa/actor.hpp"
#include "musa/digest.hpp"
#include "musa/engine.hpp"

namespace musa {
namespace {

std::string join(const std::string& root, const std::string& rel) {
  return (std::filesystem::path(root) / rel).lexically_normal().string();
}

std::string required(const Json& entry, const char* key) {
  auto it = entry.find(key);
  if (it == entry.end() || !it->is_string()) throw MalformedInputError(std::string("manifest entry lacks ") + key, 0);
  return it->get<std::string>();
}

}  // namespace

TaskFile load_task_file(const std::string& path) {
  const Json tree = [&] {
    try {
      return parse_canonical(read_text_file(path));
    } catch (const MalformedInputError& e) {
      throw MalformedInputError(path + ": " + e.what(), e.position());
    }
  }();
  TaskFile file;
  try {
    if (tree.contains("task")) {
      file.task = tree.at("task").get<Task>();
      file.environment = tree.contains("environment") ? tree.at("environment").get<EnvironmentContext>()
                                                      : default_environment();
    } else {
      file.task = tree.get<Task>();
      file.environment = default_environment();
    }
  } catch (const Json::exception& e) {
    throw MalformedInputError(path + ": " + e.what(), 0);
  }
  return file;
}

std::string regenerate_golden(const std::string& root, const Json& entry) {
  const auto kind = task_kind_from_name(required(entry, "kind"));
  if (!kind) throw MalformedInputError("unknown kind in manifest", 0);
  const auto format = dataset_format_from_name(required(entry, "format"));
  if (!format) throw MalformedInputError("unknown format in manifest", 0);
  const auto records = load_dataset(join(root, required(entry, "dataset")), *format);
  const Engine engine(load_engine_config(join(root, required(entry, "config"))),
                      EngineOptions{true, {}});
  const auto report = run_eval(records, *kind, engine_solver(engine, default_environment()), EvalOptions{1});
  return canonical_dump(report_json(report));
}

std::string regenerate_run(const std::string& root, const Json& entry) {
  const Engine engine(load_engine_config(join(root, required(entry, "config"))),
                      EngineOptions{true, {}});
  const TaskFile file = load_task_file(join(root, required(entry, "task")));
  try {
    return canonical_dump(run_report(engine.solve(file.task, file.environment)));
  } catch (const SolveError& e) {
    return canonical_dump(run_report(e.partial(), std::string(e.what())));
  }
}

std::string regenerate_scenario(const std::string& root, const Json& entry) {
  const Engine engine(load_engine_config(join(root, required(entry, "config"))),
                      EngineOptions{true, {}});
  const TaskFile file = load_task_file(join(root, required(entry, "task")));
  TaskResponse response;
  try {
    response = engine.solve(file.task, file.environment);
  } catch (const SolveError& e) {
    response = e.partial();
  }
  std::string out;
  for (const auto& label : response.transcript.labels()) out += label + "\n";
  return out;
}

FixtureReport fixture_integrity_check(const std::string& root, bool update) {
  FixtureReport report;
  const std::string manifest_path = join(root, "manifest.json");
  Json manifest;
  try {
    manifest = parse_canonical(read_text_file(manifest_path));
  } catch (const Error& e) {
    report.problems.push_back({"manifest.json", e.what()});
    return report;
  }

  auto check = [&](const std::string& name, auto&& body) {
    report.checked.push_back(name);
    try {
      body();
    } catch (const std::exception& e) {
      report.problems.push_back({name, e.what()});
    }
  };

  for (const auto& path : manifest.value("taxonomies", Json::array())) {
    check(path.get<std::string>(), [&] { CategoryTaxonomy::load(join(root, path.get<std::string>())); });
  }
  for (const auto& path : manifest.value("tool_stores", Json::array())) {
    check(path.get<std::string>(), [&] { ToolStore::load(join(root, path.get<std::string>())); });
  }
  for (const auto& path : manifest.value("tasks", Json::array())) {
    check(path.get<std::string>(), [&] {
      const auto file = load_task_file(join(root, path.get<std::string>()));
      if (const auto v = validate_task(file.task); !v.ok()) throw Error(v.problems.front());
    });
  }
  auto golden_check = [&](Json& entry, auto&& regenerate) {
    const std::string golden = entry.value("golden", std::string("?"));
    check(golden, [&] {
      const std::string regenerated = regenerate(entry);
      if (update) {
        write_text_file(join(root, golden), regenerated);
        entry["golden_sha256"] = sha256_hex(regenerated);
        return;
      }
      const std::string committed = read_text_file(join(root, golden));
      if (sha256_hex(committed) != entry.value("golden_sha256", std::string{}))
        throw Error("committed golden does not match its recorded sha256");
      if (regenerated != committed) throw Error("regenerated report differs from the committed golden");
    });
  };
  if (manifest.contains("datasets"))
    for (auto& entry : manifest["datasets"]) golden_check(entry, [&](const Json& e) { return regenerate_golden(root, e); });
  if (manifest.contains("runs")) {
    for (auto& entry : manifest["runs"]) golden_check(entry, [&](const Json& e) { return regenerate_run(root, e); });
  }
  if (manifest.contains("scenarios")) {
    for (const auto& entry : manifest["scenarios"]) {
      const std::string reference = entry.value("reference", std::string("?"));
      check(reference, [&] {
        const std::string regenerated = regenerate_scenario(root, entry);
        if (update) {
          write_text_file(join(root, reference), regenerated);
          return;
        }
        if (read_text_file(join(root, reference)) != regenerated)
          throw Error("scenario transcript differs from the committed reference");
      });
    }
  }
  if (update) write_text_file(manifest_path, canonical_dump(manifest));
  return report;
}

}  // namespace musa
