// SPDX-License-Identifier: Apache-2.0
//
// The actor executes the four content-analysis actions.
//
// Each action prompt ends with an answer directive and the actor extracts
// the answer from a marker line:
//   QA, VQA          ANSWER: <text>
//   TitleGeneration  TITLE: <text>
//   Categorization   CATEGORY: <name>
// Actions 1-3 fall back to the whole completion when the line is missing.
// Categorization only accepts names from the taxonomy.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "musa/core.hpp"
#include "musa/error.hpp"
#include "musa/provider.hpp"

namespace musa {

// ---------------------------------------------------------------------------
// Static knowledge

struct ToolEntry {
  std::string title;
  std::vector<std::string> facts;

  friend bool operator==(const ToolEntry&, const ToolEntry&) = default;
};

/// Read-only factual store. File format:
///   {"version": 1, "entries": [{"id": "...", "title": "...", "facts": ["..."]}]}
class ToolStore {
 public:
  ToolStore() = default;
  explicit ToolStore(std::map<std::string, ToolEntry> entries, std::string source = {});

  static ToolStore load(const std::string& path);
  static ToolStore parse(std::string_view text, const std::string& source = {});

  const std::map<std::string, ToolEntry>& entries() const noexcept { return entries_; }
  const std::string& source() const noexcept { return source_; }
  bool empty() const noexcept { return entries_.empty(); }

  /// Hash of the canonical content; unchanged by lookups.
  std::string fingerprint() const;

 private:
  std::map<std::string, ToolEntry> entries_;
  std::string source_;
};

/// Facts of every entry whose title or any fact contains the query,
/// case-insensitively. Entries are visited in id order.
std::vector<std::string> lookup(const ToolStore& tools, std::string_view query);

// ---------------------------------------------------------------------------
// Category taxonomy

/// Two-level taxonomy. File format:
///   {"version": 1, "level1": ["sport", ...], "level2": {"sport": ["tennis", ...]}}
struct CategoryTaxonomy {
  std::vector<std::string> level1;
  std::map<std::string, std::vector<std::string>> level2;

  static CategoryTaxonomy load(const std::string& path);
  static CategoryTaxonomy parse(std::string_view text, const std::string& source = {});

  bool has_children() const noexcept;
  const std::vector<std::string>& children(const std::string& parent) const;
  /// The level-1 parent of a level-2 name.
  std::optional<std::string> parent_of(std::string_view child) const;

  friend bool operator==(const CategoryTaxonomy&, const CategoryTaxonomy&) = default;
};

/// Unique names per level, every level-2 key is a level-1 name, every child
/// has exactly one parent.
ValidationReport validate_taxonomy(const CategoryTaxonomy& taxonomy);

// ---------------------------------------------------------------------------
// Results

struct TitlePayload {
  std::string title;
  friend bool operator==(const TitlePayload&, const TitlePayload&) = default;
};

struct CategoryPayload {
  std::string level1;
  std::optional<std::string> level2;
  friend bool operator==(const CategoryPayload&, const CategoryPayload&) = default;
};

using StructuredPayload = std::variant<std::monostate, TitlePayload, CategoryPayload>;

struct ActionResult {
  int action_id = 0;
  std::string answer;
  StructuredPayload structured;
  int provider_calls = 0;

  friend bool operator==(const ActionResult&, const ActionResult&) = default;
};

struct ActorResources {
  const ToolStore* tools = nullptr;
  const CategoryTaxonomy* taxonomy = nullptr;
};

/// Extra material placed before the answer directive.
struct ActContext {
  std::vector<std::string> knowledge;   // facts from the tool store
  std::optional<std::string> revision;  // optimizer feedback for a second attempt
};

class WrongActionError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

PromptArtifact build_qa_prompt(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra = {});
PromptArtifact build_vqa_prompt(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra = {});
PromptArtifact build_title_prompt(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra = {});
/// Classification prompt over an explicit list of candidate names.
PromptArtifact build_category_prompt(const ActionSpec& spec, const PromptArtifact& reasoned,
                                     const std::vector<std::string>& candidates, const ActContext& extra = {});

/// Query from a "KNOWLEDGE: <query>" line in the instructions, if any.
std::optional<std::string> knowledge_query(std::string_view instructions);

/// Answer text after `marker` ("ANSWER:" etc.), or nullopt when absent.
std::optional<std::string> extract_marked(std::string_view completion, std::string_view marker);

/// Matches a model label against candidate names; returns the canonical
/// spelling or nullopt.
std::optional<std::string> match_category(std::string_view label, const std::vector<std::string>& candidates);

/// Executes one action. `operation` names the transcript event ("act",
/// "revise"); categorization over a two-level taxonomy appends ".level1" and
/// ".level2" to it.
ActionResult act(const ActionSpec& spec, const PromptArtifact& reasoned, const ActorResources& resources,
                 const UnitChannel& actor, std::string_view operation = "act",
                 std::optional<std::string> revision = std::nullopt);

/// Two calls: level 1 over all level-1 names, level 2 over the children of
/// the predicted level-1 name.
CategoryPayload categorize_two_level(const ActionSpec& spec, const CategoryTaxonomy& taxonomy,
                                     const PromptArtifact& reasoned, const UnitChannel& actor,
                                     std::string_view operation = "act", const ActContext& extra = {});

}  // namespace musa
