#include "dfsim/trace.hpp"

#include <algorithm>

namespace dfsim {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string event_name(const Event& ev) {
  return std::visit(Overloaded{
                        [](const InjectionEvent&) { return "inject"; },
                        [](const TransmissionEvent&) { return "transmit"; },
                        [](const StallEvent&) { return "stall"; },
                        [](const GroupCreatedEvent&) { return "group"; },
                        [](const AnnihilationEvent&) { return "annihilate"; },
                        [](const FailureEvent&) { return "fail"; },
                        [](const FailNotifiedEvent&) { return "notify"; },
                        [](const RerouteEvent&) { return "reroute"; },
                        [](const RecoveryEvent&) { return "recover"; },
                        [](const AbsorptionEvent&) { return "absorb"; },
                    },
                    ev);
}

std::int64_t ExecutionTrace::max_total() const {
  std::int64_t best = 0;
  for (const auto& r : rounds) best = std::max(best, r.total);
  return best;
}

void Fnv64::add_bytes(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state_ ^= p[i];
    state_ *= 0x100000001b3ULL;
  }
}

void Fnv64::add(std::int64_t value) {
  // Little-endian byte order regardless of host.
  unsigned char bytes[8];
  auto u = static_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(u >> (8 * i));
  add_bytes(bytes, sizeof bytes);
}

void hash_event(Fnv64& h, Round round, const Event& ev) {
  h.add(round);
  h.add(static_cast<std::int64_t>(ev.index()));
  auto add_path = [&h](const Path& p) {
    h.add(static_cast<std::int64_t>(p.size()));
    for (EdgeId e : p) h.add(e);
  };
  std::visit(Overloaded{
                 [&](const InjectionEvent& e) {
                   h.add(e.packet);
                   add_path(e.path);
                   h.add(e.priority);
                 },
                 [&](const TransmissionEvent& e) {
                   h.add(e.packet);
                   h.add(e.edge);
                 },
                 [&](const StallEvent& e) {
                   h.add(e.packet);
                   h.add(e.edge);
                 },
                 [&](const GroupCreatedEvent& e) {
                   h.add(e.group);
                   h.add(e.stalled_edge);
                   h.add(e.packet);
                   add_path(e.members);
                 },
                 [&](const AnnihilationEvent& e) {
                   h.add(e.group);
                   h.add(e.forced ? 1 : 0);
                 },
                 [&](const FailureEvent& e) {
                   h.add(e.edge);
                   h.add(e.promoted ? 1 : 0);
                 },
                 [&](const FailNotifiedEvent& e) {
                   h.add(e.edge);
                   h.add(e.failed_at);
                 },
                 [&](const RerouteEvent& e) {
                   h.add(e.packet);
                   h.add(e.failed_edge);
                   h.add(e.failed_at);
                   add_path(e.old_suffix);
                   add_path(e.new_suffix);
                 },
                 [&](const RecoveryEvent& e) {
                   h.add(e.edge);
                   h.add(e.failed_at);
                 },
                 [&](const AbsorptionEvent& e) { h.add(e.packet); },
             },
             ev);
}

}  // namespace dfsim
