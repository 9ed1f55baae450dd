// SPDX-License-Identifier: Apache-2.0
#include "musa/actor.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "musa/digest.hpp"
#include "musa/serialize.hpp"

namespace musa {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == lower(prefix);
}

Json parse_or_throw(std::string_view text, const std::string& source) {
  try {
    return parse_canonical(text);
  } catch (const MalformedInputError& e) {
    throw MalformedInputError(source.empty() ? e.what() : source + ": " + e.what(), e.position());
  }
}

void require_kind(const ActionSpec& spec, ActionKind kind) {
  if (spec.kind != kind)
    throw WrongActionError("builder for " + std::string(action_name(kind)) + " given " +
                           std::string(action_name(spec.kind)));
}

bool already_present(const std::vector<ContentItem>& segments, const ContentItem& item) {
  return std::find(segments.begin(), segments.end(), item) != segments.end();
}

// reasoned context + action header + missing inputs + extras + directive (last).
PromptArtifact assemble(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra,
                        std::string directive) {
  PromptArtifact p = reasoned;
  p.segments.push_back(ContentItem::make_text("Action " + std::to_string(spec.id()) + " (" +
                                              std::string(action_name(spec.kind)) + "): " +
                                              std::string(action_description(spec.kind)) +
                                              "\nInstructions: " + spec.instructions));
  for (const auto& input : spec.inputs) {
    if (!already_present(p.segments, input)) p.segments.push_back(input);
  }
  if (!extra.knowledge.empty()) {
    std::string k = "Knowledge:";
    for (const auto& fact : extra.knowledge) k += "\n- " + fact;
    p.segments.push_back(ContentItem::make_text(std::move(k)));
  }
  if (extra.revision) {
    p.segments.push_back(ContentItem::make_text(
        "Revision feedback on your previous response:\n" + *extra.revision +
        "\nRetry the action taking this feedback into account."));
  }
  p.segments.push_back(ContentItem::make_text(std::move(directive)));
  return p;
}

std::string candidate_list(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += "\n- " + n;
  return out;
}

ActContext context_for(const ActionSpec& spec, const ActorResources& resources, std::optional<std::string> revision) {
  ActContext extra;
  extra.revision = std::move(revision);
  if (resources.tools) {
    if (auto q = knowledge_query(spec.instructions)) extra.knowledge = lookup(*resources.tools, *q);
  }
  return extra;
}

std::string classify(const ActionSpec& spec, const PromptArtifact& reasoned, const std::vector<std::string>& candidates,
                     const ActContext& extra, const UnitChannel& actor, std::string_view operation,
                     const std::string& failure_prefix) {
  const PromptArtifact prompt = build_category_prompt(spec, reasoned, candidates, extra);
  const std::string raw = actor.complete(operation, actor.request_for(prompt, ImagePolicy::Require)).text;
  const auto label = extract_marked(raw, "CATEGORY:");
  if (!label) throw ActionParseError("no CATEGORY line in categorization output");
  auto hit = match_category(*label, candidates);
  if (!hit) throw ActionParseError(failure_prefix.empty() ? "unknown category '" + *label + "'"
                                                          : "'" + *label + "' is " + failure_prefix);
  return *hit;
}

}  // namespace

// ---------------------------------------------------------------------------

ToolStore::ToolStore(std::map<std::string, ToolEntry> entries, std::string source)
    : entries_(std::move(entries)), source_(std::move(source)) {}

ToolStore ToolStore::load(const std::string& path) { return parse(read_text_file(path), path); }

ToolStore ToolStore::parse(std::string_view text, const std::string& source) {
  const Json tree = parse_or_throw(text, source);
  const std::string where = source.empty() ? "tool store" : source;
  if (!tree.is_object() || !tree.contains("entries") || !tree["entries"].is_array())
    throw MalformedInputError(where + ": expected an object with an entries array", 0);
  std::map<std::string, ToolEntry> entries;
  for (const auto& e : tree["entries"]) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string())
      throw MalformedInputError(where + ": entry without string id", 0);
    ToolEntry entry;
    entry.title = e.value("title", std::string{});
    if (auto it = e.find("facts"); it != e.end()) {
      if (!it->is_array()) throw MalformedInputError(where + ": facts must be an array", 0);
      for (const auto& f : *it) entry.facts.push_back(f.get<std::string>());
    }
    const std::string id = e["id"].get<std::string>();
    if (!entries.emplace(id, std::move(entry)).second)
      throw MalformedInputError(where + ": duplicate entry id '" + id + "'", 0);
  }
  return ToolStore(std::move(entries), source);
}

std::string ToolStore::fingerprint() const {
  Json tree = Json::object();
  for (const auto& [id, e] : entries_) tree[id] = Json{{"title", e.title}, {"facts", e.facts}};
  return sha256_hex(canonical_dump(tree));
}

std::vector<std::string> lookup(const ToolStore& tools, std::string_view query) {
  std::vector<std::string> out;
  const std::string q = lower(trim(query));
  if (q.empty()) return out;
  for (const auto& [id, entry] : tools.entries()) {
    bool hit = lower(entry.title).find(q) != std::string::npos;
    for (const auto& f : entry.facts) hit = hit || lower(f).find(q) != std::string::npos;
    if (hit) out.insert(out.end(), entry.facts.begin(), entry.facts.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

CategoryTaxonomy CategoryTaxonomy::load(const std::string& path) { return parse(read_text_file(path), path); }

CategoryTaxonomy CategoryTaxonomy::parse(std::string_view text, const std::string& source) {
  const Json tree = parse_or_throw(text, source);
  const std::string where = source.empty() ? "taxonomy" : source;
  CategoryTaxonomy t;
  try {
    t.level1 = tree.at("level1").get<std::vector<std::string>>();
    if (tree.contains("level2"))
      t.level2 = tree.at("level2").get<std::map<std::string, std::vector<std::string>>>();
  } catch (const Json::exception& e) {
    throw MalformedInputError(where + ": " + e.what(), 0);
  }
  const auto report = validate_taxonomy(t);
  if (!report.ok()) throw MalformedInputError(where + ": " + report.problems.front(), 0);
  return t;
}

bool CategoryTaxonomy::has_children() const noexcept {
  return std::any_of(level2.begin(), level2.end(), [](const auto& kv) { return !kv.second.empty(); });
}

const std::vector<std::string>& CategoryTaxonomy::children(const std::string& parent) const {
  static const std::vector<std::string> kNone;
  auto it = level2.find(parent);
  return it == level2.end() ? kNone : it->second;
}

std::optional<std::string> CategoryTaxonomy::parent_of(std::string_view child) const {
  for (const auto& [parent, kids] : level2) {
    if (std::find(kids.begin(), kids.end(), child) != kids.end()) return parent;
  }
  return std::nullopt;
}

ValidationReport validate_taxonomy(const CategoryTaxonomy& taxonomy) {
  ValidationReport r;
  if (taxonomy.level1.empty()) r.problems.push_back("level1 is empty");
  std::set<std::string> l1;
  for (const auto& n : taxonomy.level1) {
    if (trim(n).empty()) r.problems.push_back("empty level1 name");
    if (!l1.insert(lower(n)).second) r.problems.push_back("duplicate level1 name '" + n + "'");
  }
  std::set<std::string> l2;
  for (const auto& [parent, kids] : taxonomy.level2) {
    if (std::find(taxonomy.level1.begin(), taxonomy.level1.end(), parent) == taxonomy.level1.end())
      r.problems.push_back("level2 parent '" + parent + "' is not a level1 name");
    for (const auto& k : kids) {
      if (trim(k).empty()) r.problems.push_back("empty level2 name under '" + parent + "'");
      if (!l2.insert(lower(k)).second) r.problems.push_back("level2 name '" + k + "' has more than one parent");
    }
  }
  return r;
}

// ---------------------------------------------------------------------------

PromptArtifact build_qa_prompt(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra) {
  require_kind(spec, ActionKind::QA);
  return assemble(spec, reasoned, extra, "Answer the question concisely. Finish with one line:\nANSWER: <answer>");
}

PromptArtifact build_vqa_prompt(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra) {
  require_kind(spec, ActionKind::VQA);
  return assemble(spec, reasoned, extra,
                  "Answer the question using the text shown in the content. Finish with one line:\nANSWER: <answer>");
}

PromptArtifact build_title_prompt(const ActionSpec& spec, const PromptArtifact& reasoned, const ActContext& extra) {
  require_kind(spec, ActionKind::TitleGeneration);
  return assemble(spec, reasoned, extra, "Write a short headline for the content. Finish with one line:\nTITLE: <title>");
}

PromptArtifact build_category_prompt(const ActionSpec& spec, const PromptArtifact& reasoned,
                                     const std::vector<std::string>& candidates, const ActContext& extra) {
  require_kind(spec, ActionKind::Categorization);
  if (candidates.empty()) throw PreconditionError("no candidate categories");
  return assemble(spec, reasoned, extra,
                  "Choose exactly one category from this list:" + candidate_list(candidates) +
                      "\nFinish with one line:\nCATEGORY: <category>");
}

std::optional<std::string> knowledge_query(std::string_view instructions) {
  std::istringstream in{std::string(instructions)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (starts_with_ci(t, "KNOWLEDGE:")) {
      std::string q = trim(std::string_view(t).substr(10));
      if (!q.empty()) return q;
    }
  }
  return std::nullopt;
}

std::optional<std::string> extract_marked(std::string_view completion, std::string_view marker) {
  std::istringstream in{std::string(completion)};
  std::string line;
  std::optional<std::string> found;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    // Tolerate markdown emphasis around the marker.
    while (!t.empty() && (t.front() == '*' || t.front() == '#')) t.erase(t.begin());
    t = trim(t);
    if (!starts_with_ci(t, marker)) continue;
    std::string rest = trim(std::string_view(t).substr(marker.size()));
    while (!rest.empty() && rest.front() == '*') rest.erase(rest.begin());
    rest = trim(rest);
    if (!rest.empty()) found = rest;  // the last marked line wins
  }
  return found;
}

std::optional<std::string> match_category(std::string_view label, const std::vector<std::string>& candidates) {
  std::string l = lower(trim(label));
  while (!l.empty() && (l.back() == '.' || l.back() == '"' || l.back() == '\'')) l.pop_back();
  while (!l.empty() && (l.front() == '"' || l.front() == '\'')) l.erase(l.begin());
  l = trim(l);
  for (const auto& c : candidates) {
    if (lower(c) == l) return c;
  }
  return std::nullopt;
}

CategoryPayload categorize_two_level(const ActionSpec& spec, const CategoryTaxonomy& taxonomy,
                                     const PromptArtifact& reasoned, const UnitChannel& actor,
                                     std::string_view operation, const ActContext& extra) {
  const auto report = validate_taxonomy(taxonomy);
  if (!report.ok()) throw PreconditionError("invalid taxonomy: " + report.problems.front());
  const std::string op(operation);
  CategoryPayload out;
  out.level1 = classify(spec, reasoned, taxonomy.level1, extra, actor, op + ".level1", "");
  const auto& kids = taxonomy.children(out.level1);
  if (kids.empty()) throw ActionParseError("category '" + out.level1 + "' has no sub-categories");
  out.level2 = classify(spec, reasoned, kids, extra, actor, op + ".level2", "not a child of " + out.level1);
  return out;
}

ActionResult act(const ActionSpec& spec, const PromptArtifact& reasoned, const ActorResources& resources,
                 const UnitChannel& actor, std::string_view operation, std::optional<std::string> revision) {
  if (trim(spec.instructions).empty()) throw PreconditionError("action instructions are empty");
  const ActContext extra = context_for(spec, resources, std::move(revision));
  ActionResult result;
  result.action_id = spec.id();

  if (spec.kind == ActionKind::Categorization) {
    if (!resources.taxonomy) throw PreconditionError("categorization requires a taxonomy");
    const CategoryTaxonomy& tax = *resources.taxonomy;
    CategoryPayload payload;
    if (tax.has_children()) {
      payload = categorize_two_level(spec, tax, reasoned, actor, operation, extra);
      result.provider_calls = 2;
    } else {
      payload.level1 = classify(spec, reasoned, tax.level1, extra, actor, operation, "");
      result.provider_calls = 1;
    }
    result.answer = payload.level2 ? payload.level1 + "/" + *payload.level2 : payload.level1;
    result.structured = payload;
    return result;
  }

  PromptArtifact prompt;
  std::string_view marker = "ANSWER:";
  switch (spec.kind) {
    case ActionKind::QA: prompt = build_qa_prompt(spec, reasoned, extra); break;
    case ActionKind::VQA: prompt = build_vqa_prompt(spec, reasoned, extra); break;
    case ActionKind::TitleGeneration:
      prompt = build_title_prompt(spec, reasoned, extra);
      marker = "TITLE:";
      break;
    case ActionKind::Categorization: break;
  }
  const std::string raw = actor.complete(operation, actor.request_for(prompt, ImagePolicy::Require)).text;
  result.provider_calls = 1;
  auto answer = extract_marked(raw, marker);
  result.answer = answer ? *answer : trim(raw);
  if (result.answer.empty()) throw ActionParseError("empty answer from actor");
  if (spec.kind == ActionKind::TitleGeneration) result.structured = TitlePayload{result.answer};
  return result;
}

}  // namespace musa
