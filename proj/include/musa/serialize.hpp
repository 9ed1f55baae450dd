// SPDX-License-Identifier: Apache-2.0
//
// Canonical text serialization of the core types.
//
// The canonical form is a JSON object tree with lexicographically sorted keys,
// two-space indentation and a trailing newline. Two serializations of equal
// values are byte-identical.
#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "musa/core.hpp"
#include "musa/error.hpp"
#include "musa/transcript.hpp"

namespace musa {

using Json = nlohmann::json;

void to_json(Json& j, const ImageRef& v);
void from_json(const Json& j, ImageRef& v);
void to_json(Json& j, const ContentItem& v);
void from_json(const Json& j, ContentItem& v);
void to_json(Json& j, const ActionSpec& v);
void from_json(const Json& j, ActionSpec& v);
void to_json(Json& j, const Plan& v);
void from_json(const Json& j, Plan& v);
void to_json(Json& j, const Task& v);
void from_json(const Json& j, Task& v);
void to_json(Json& j, const EnvironmentContext& v);
void from_json(const Json& j, EnvironmentContext& v);
void to_json(Json& j, const FewShotExample& v);
void from_json(const Json& j, FewShotExample& v);
void to_json(Json& j, const ReasoningStrategy& v);
void from_json(const Json& j, ReasoningStrategy& v);
void to_json(Json& j, const PromptArtifact& v);
void from_json(const Json& j, PromptArtifact& v);
void to_json(Json& j, const SamplingConfig& v);
void from_json(const Json& j, SamplingConfig& v);
void to_json(Json& j, const MockEntry& v);
void from_json(const Json& j, MockEntry& v);
void to_json(Json& j, const EmbeddingOverride& v);
void from_json(const Json& j, EmbeddingOverride& v);
void to_json(Json& j, const MockSettings& v);
void from_json(const Json& j, MockSettings& v);
void to_json(Json& j, const ProviderConfig& v);
void from_json(const Json& j, ProviderConfig& v);
void to_json(Json& j, const EngineConfig& v);
void from_json(const Json& j, EngineConfig& v);
void to_json(Json& j, const TranscriptEvent& v);
void from_json(const Json& j, TranscriptEvent& v);
void to_json(Json& j, const Transcript& v);

/// Canonical text of an already-built JSON tree.
std::string canonical_dump(const Json& tree);

/// Parses text into a JSON tree; throws MalformedInputError with the byte
/// position of the first fault.
Json parse_canonical(std::string_view text);

template <typename T>
std::string serialize(const T& value) {
  return canonical_dump(Json(value));
}

template <typename T>
T deserialize(std::string_view text) {
  Json tree = parse_canonical(text);
  try {
    return tree.get<T>();
  } catch (const Json::exception& e) {
    throw MalformedInputError(std::string("invalid value: ") + e.what(), 0);
  }
}

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Reads and deserializes a file; errors name the path.
template <typename T>
T load_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return deserialize<T>(text);
  } catch (const MalformedInputError& e) {
    throw MalformedInputError(path + ": " + e.what(), e.position());
  }
}

EngineConfig load_engine_config(const std::string& path);

}  // namespace musa
