// SPDX-License-Identifier: Apache-2.0
#include "musa/transcript.hpp"

#include <memory>

namespace musa {

std::string TranscriptEvent::label() const {
  if (kind == EventKind::Decision) return "decision:" + operation;
  return std::string(unit ? role_name(*unit) : "?") + ":" + operation;
}

Transcript::Transcript() {
  const auto start = std::chrono::steady_clock::now();
  clock_ = [start] {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - start).count();
  };
}

Transcript::Transcript(Clock clock) : clock_(std::move(clock)) {}

Transcript::Clock Transcript::logical_clock() {
  auto tick = std::make_shared<std::int64_t>(0);
  return [tick] { return (*tick)++; };
}

TranscriptEvent& Transcript::append(TranscriptEvent event) {
  event.seq = events_.size();
  event.timestamp_us = clock_();
  events_.push_back(std::move(event));
  return events_.back();
}

const TranscriptEvent& Transcript::record_call(UnitRole unit, std::string operation, int attempt, CallStatus status,
                                               std::string request_digest, std::string response_digest,
                                               std::string detail) {
  TranscriptEvent e;
  e.kind = EventKind::Call;
  e.unit = unit;
  e.operation = std::move(operation);
  e.attempt = attempt;
  e.status = status;
  e.request_digest = std::move(request_digest);
  e.response_digest = std::move(response_digest);
  e.detail = std::move(detail);
  return append(std::move(e));
}

const TranscriptEvent& Transcript::record_decision(std::string operation, std::string detail) {
  TranscriptEvent e;
  e.kind = EventKind::Decision;
  e.operation = std::move(operation);
  e.detail = std::move(detail);
  return append(std::move(e));
}

std::vector<std::string> Transcript::call_labels() const {
  std::vector<std::string> out;
  for (const auto& e : events_) {
    if (e.kind == EventKind::Call && e.status == CallStatus::Ok) out.push_back(e.label());
  }
  return out;
}

std::vector<std::string> Transcript::labels() const {
  std::vector<std::string> out;
  out.reserve(events_.size());
  for (const auto& e : events_) out.push_back(e.label());
  return out;
}

std::size_t Transcript::count_calls(UnitRole unit) const {
  std::size_t n = 0;
  for (const auto& e : events_) {
    if (e.kind == EventKind::Call && e.status == CallStatus::Ok && e.unit == unit) ++n;
  }
  return n;
}

}  // namespace musa
