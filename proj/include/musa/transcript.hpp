// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "musa/core.hpp"

namespace musa {

enum class EventKind { Call, Decision };

enum class CallStatus { Ok, Failed };

/// One entry of a run transcript. Call events record a provider exchange,
/// decision events record a branch the engine took.
struct TranscriptEvent {
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Call;
  std::optional<UnitRole> unit;
  std::string operation;
  int attempt = 1;
  CallStatus status = CallStatus::Ok;
  std::string request_digest;
  std::string response_digest;
  std::string detail;  // decision text or error message
  std::int64_t timestamp_us = 0;

  /// "Unit:operation" for calls, "decision:operation" otherwise.
  std::string label() const;

  friend bool operator==(const TranscriptEvent&, const TranscriptEvent&) = default;
};

/// Append-only record of one task run. Not internally synchronized; the
/// engine owns one per run.
class Transcript {
 public:
  using Clock = std::function<std::int64_t()>;

  Transcript();
  explicit Transcript(Clock clock);

  /// A clock that returns the sequence number of the next event.
  static Clock logical_clock();

  const TranscriptEvent& record_call(UnitRole unit, std::string operation, int attempt, CallStatus status,
                                     std::string request_digest, std::string response_digest,
                                     std::string detail = {});
  const TranscriptEvent& record_decision(std::string operation, std::string detail);

  const std::vector<TranscriptEvent>& events() const noexcept { return events_; }
  std::size_t size() const noexcept { return events_.size(); }

  /// Labels of successful call events, in order.
  std::vector<std::string> call_labels() const;
  /// Labels of every event, in order.
  std::vector<std::string> labels() const;
  std::size_t count_calls(UnitRole unit) const;

  friend bool operator==(const Transcript& a, const Transcript& b) { return a.events_ == b.events_; }

 private:
  TranscriptEvent& append(TranscriptEvent event);

  Clock clock_;
  std::vector<TranscriptEvent> events_;
};

}  // namespace musa
