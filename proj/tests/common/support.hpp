// SPDX-License-Identifier: Apache-2.0
// Helpers shared by the unit tests.
#pragma once

#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "musa/core.hpp"
#include "musa/engine.hpp"
#include "musa/provider.hpp"

namespace musa::testing {

inline std::string fixtures_dir() { return MUSA_FIXTURES_DIR; }
inline std::string fixture(const std::string& rel) { return fixtures_dir() + "/" + rel; }

inline std::vector<MockEntry> entries(const std::vector<std::string>& responses) {
  std::vector<MockEntry> out;
  for (const auto& r : responses) out.push_back(MockEntry{std::nullopt, r});
  return out;
}

inline ProviderConfig mock_config(const std::string& model, const std::vector<std::string>& script = {},
                                  bool images = false) {
  ProviderConfig c;
  c.backend = Backend::Mock;
  c.model_name = model;
  c.supports_images = images;
  c.mock.script = entries(script);
  return c;
}

/// A mock provider and a channel over it, recording into `transcript`.
struct ScriptedUnit {
  std::shared_ptr<MockProvider> provider;
  UnitChannel channel;

  ScriptedUnit(UnitRole role, const std::vector<std::string>& script, Transcript* transcript = nullptr,
               bool images = false, const std::string& system_role = "You are a test unit.")
      : provider(std::make_shared<MockProvider>(mock_config(std::string(role_name(role)) + "-model", script, images))),
        channel(*provider, role, transcript) {
    if (!system_role.empty()) channel.install_system_role(system_role);
  }

  std::vector<RecordedCall> calls() const { return provider->script().recorded_calls(); }
};

inline PromptArtifact text_prompt(const std::string& text, const std::string& role = "You are a test unit.") {
  PromptArtifact p;
  p.system_role = role;
  p.segments.push_back(ContentItem::make_text(text));
  return p;
}

inline std::string plan_text(const std::vector<std::pair<int, std::string>>& actions,
                             const std::string& rationale = "because") {
  std::string body = "```plan\n{\"actions\": [";
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) body += ", ";
    body += "{\"id\": " + std::to_string(actions[i].first) + ", \"instructions\": \"" + actions[i].second + "\"}";
  }
  body += "], \"rationale\": \"" + rationale + "\"}\n```";
  return body;
}

/// All seven roles bound to distinct mock models with the given scripts.
inline EngineConfig engine_config(const std::map<UnitRole, std::vector<std::string>>& scripts, int trials = 2,
                                  ReasoningStrategy strategy = ReasoningStrategy::none()) {
  EngineConfig config;
  config.trials = trials;
  config.plan_strategy = strategy;
  config.act_strategy = strategy;
  for (auto role : kAllRoles) {
    auto it = scripts.find(role);
    config.role_bindings[role] =
        mock_config(std::string(role_name(role)) + "-model", it == scripts.end() ? std::vector<std::string>{} : it->second,
                    role == UnitRole::Actor);
  }
  return config;
}

inline std::vector<std::string> opt_cycle(const std::string& step) {
  return {"forward output", "loss evaluation", "gradient feedback", step};
}

inline std::vector<std::string> concat(std::vector<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

/// Temporary directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::random_device rd;
    path = std::filesystem::temp_directory_path() / ("musa-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace musa::testing
